#pragma once

#include <cstdint>
#include <string>

#include "lsolve/grid.hpp"

namespace lsolve {

enum class GeometryKind { Square, LShape, Cylinders, SquarePoisson };

std::string to_string(GeometryKind k);
/// Accepts square, lshape, cylinders, square_poisson (alias poisson).
GeometryKind parse_geometry_kind(const std::string& s);

struct GeometrySpec {
  GeometryKind kind = GeometryKind::Square;
  int n = 17;
  std::uint64_t seed = 0;
  /// L-shape: cells with i < notch * n and j >= notch * n are removed.
  double notch_fraction = 0.5;
  /// Cylinders: three disks of radius disk_radius * n.
  double disk_radius = 0.125;
  /// Square-Poisson: point sources of +-source_strength / h^2.
  double source_strength = 50.0;
};

/// Builds the problem; outer sides take independent uniform [-1, 1] values
/// (corner precedence top, bottom, left, right). Throws InvalidInput for
/// overlapping disks or fewer than 25% interior cells.
Problem generate(const GeometrySpec& spec);

}  // namespace lsolve
