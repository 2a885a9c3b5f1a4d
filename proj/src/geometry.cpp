#include "lsolve/geometry.hpp"

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "lsolve/errors.hpp"

namespace lsolve {

std::string to_string(GeometryKind k) {
  switch (k) {
    case GeometryKind::Square:
      return "square";
    case GeometryKind::LShape:
      return "lshape";
    case GeometryKind::Cylinders:
      return "cylinders";
    case GeometryKind::SquarePoisson:
      return "square_poisson";
  }
  return "?";
}

GeometryKind parse_geometry_kind(const std::string& s) {
  if (s == "square") return GeometryKind::Square;
  if (s == "lshape") return GeometryKind::LShape;
  if (s == "cylinders") return GeometryKind::Cylinders;
  if (s == "square_poisson" || s == "poisson") return GeometryKind::SquarePoisson;
  throw InvalidInput("unknown geometry kind '" + s + "'");
}

namespace {

struct Disk {
  double ci, cj, r;
};

}  // namespace

Problem generate(const GeometrySpec& spec) {
  const int n = spec.n;
  if (n < 5) throw InvalidInput("geometry needs n >= 5");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);

  std::array<double, 4> sides{};
  for (double& v : sides) v = value(rng);
  Field b = Field::square(n);
  for (int i = 1; i < n - 1; ++i) {
    b(i, 0) = sides[2];
    b(i, n - 1) = sides[3];
  }
  for (int j = 0; j < n; ++j) {
    b(n - 1, j) = sides[1];
    b(0, j) = sides[0];
  }

  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n) * n, 0);
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j) bits[static_cast<std::size_t>(i) * n + j] = 1;
  auto set_boundary = [&](int i, int j, double v) {
    bits[static_cast<std::size_t>(i) * n + j] = 0;
    b(i, j) = v;
  };

  Field f = Field::square(n);
  const double h = 1.0 / (n - 1);

  switch (spec.kind) {
    case GeometryKind::Square:
      break;
    case GeometryKind::LShape: {
      const double cut = spec.notch_fraction * n;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i < cut && j >= cut) set_boundary(i, j, 0.0);
      break;
    }
    case GeometryKind::Cylinders: {
      const double r = spec.disk_radius * n;
      const double span = n - 1;
      const std::array<Disk, 3> disks{{{0.25 * span, 0.25 * span, r}, {0.25 * span, 0.75 * span, r},
                                       {0.625 * span, 0.5 * span, r}}};
      for (std::size_t a = 0; a < disks.size(); ++a)
        for (std::size_t c = a + 1; c < disks.size(); ++c)
          if (std::hypot(disks[a].ci - disks[c].ci, disks[a].cj - disks[c].cj) <= disks[a].r + disks[c].r)
            throw InvalidInput("cylinder disks overlap at n = " + std::to_string(n));
      for (const Disk& d : disks) {
        const double v = value(rng);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            if (std::hypot(i - d.ci, j - d.cj) <= d.r) set_boundary(i, j, v);
      }
      break;
    }
    case GeometryKind::SquarePoisson: {
      const double q = spec.source_strength / (h * h);
      const int a = static_cast<int>(std::lround((n - 1) / 3.0));
      const int c = static_cast<int>(std::lround(2.0 * (n - 1) / 3.0));
      f(a, a) += q;
      f(c, c) -= q;
      break;
    }
  }

  long interior = 0;
  for (auto bit : bits) interior += bit;
  if (4 * interior < static_cast<long>(n) * n)
    throw InvalidInput(to_string(spec.kind) + " geometry at n = " + std::to_string(n) +
                       " has fewer than 25% interior cells");
  return Problem(GeometryMask(n, std::move(bits)), std::move(b), std::move(f), h);
}

}  // namespace lsolve
