#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "lsolve/correction_model.hpp"
#include "lsolve/geometry.hpp"
#include "lsolve/iterators.hpp"
#include "lsolve/spectral.hpp"

namespace lsolve {

/// Conv models train at 17 and are benchmarked at 65 against Jacobi; U-Nets
/// train at 65 and are benchmarked at 257 against multigrid of equal depth.
int train_grid_size(const ArchSpec& arch);
int bench_grid_size(const ArchSpec& arch);
std::unique_ptr<AffineIterator> baseline_for(const ArchSpec& arch);

/// Verdict for the Jacobi-wrapped model on its square training geometry.
ValidityVerdict certify_model(const CorrectionModel& m, std::uint64_t seed = 0);

struct BenchOptions {
  std::vector<GeometryKind> suite{GeometryKind::Square, GeometryKind::LShape, GeometryKind::Cylinders,
                                  GeometryKind::SquarePoisson};
  double threshold = 0.01;  // fraction of the initial error
  long max_steps = 200000;
  std::uint64_t seed = 0;
  int n = 0;  // 0 = bench_grid_size(arch)
};

struct BenchRow {
  std::string model;
  std::string baseline;
  std::string setting;
  int n = 0;
  long layers_model = 0;
  long layers_base = 0;
  long long ops_model = 0;
  long long ops_base = 0;
  double layers_ratio = 0.0;  // NaN unless both converged
  double ops_ratio = 0.0;
  bool converged = false;
  // diagnostics, not part of the CSV
  long steps_model = 0;
  long steps_base = 0;
  double model_residual = 0.0;
  double model_boundary_violation = 0.0;
  double initial_residual = 0.0;
};

/// Solves every setting from the same white-noise start with the baseline and
/// the wrapped model until the error is below threshold * initial error.
/// Throws InvalidInput when the model is not certified on its training geometry.
std::vector<BenchRow> run_benchmark(const CorrectionModel& m, const BenchOptions& opts);

std::vector<GeometryKind> parse_suite(const std::string& s);

/// CSV columns: model, baseline, setting, n, layers_model, layers_base,
/// ops_model, ops_base, layers_ratio, ops_ratio, converged.
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

}  // namespace lsolve
