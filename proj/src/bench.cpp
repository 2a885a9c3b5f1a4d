#include "lsolve/bench.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "lsolve/errors.hpp"
#include "lsolve/grid_io.hpp"
#include "lsolve/phi_iterator.hpp"
#include "lsolve/training.hpp"

namespace lsolve {

int train_grid_size(const ArchSpec& arch) { return arch.kind == ArchKind::ConvStack ? 17 : 65; }

int bench_grid_size(const ArchSpec& arch) { return arch.kind == ArchKind::ConvStack ? 65 : 257; }

std::unique_ptr<AffineIterator> baseline_for(const ArchSpec& arch) {
  if (arch.kind == ArchKind::ConvStack) return std::make_unique<JacobiIterator>();
  return std::make_unique<MultigridIterator>(MultigridConfig{arch.depth, 2, 2});
}

ValidityVerdict certify_model(const CorrectionModel& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Problem p = sample_square_problem(train_grid_size(m.arch()), rng);
  return certify(make_phi(m), p);
}

std::vector<GeometryKind> parse_suite(const std::string& s) {
  if (s == "all")
    return {GeometryKind::Square, GeometryKind::LShape, GeometryKind::Cylinders, GeometryKind::SquarePoisson};
  return {parse_geometry_kind(s)};
}

std::vector<BenchRow> run_benchmark(const CorrectionModel& m, const BenchOptions& opts) {
  const ValidityVerdict verdict = certify_model(m, opts.seed);
  if (!verdict.valid)
    throw InvalidInput("model " + m.arch().name() + " is not certified on its training geometry (rho = " +
                       format_double(verdict.rho_estimate) + ")");

  const int n = opts.n > 0 ? opts.n : bench_grid_size(m.arch());
  m.check_grid(n);
  const auto baseline = baseline_for(m.arch());
  const PhiIterator phi = make_phi(m);
  SolveOptions so;
  so.threshold = opts.threshold;
  so.max_steps = opts.max_steps;
  so.rule = StopRule::RelativeToInitialError;

  std::vector<BenchRow> rows;
  for (std::size_t s = 0; s < opts.suite.size(); ++s) {
    GeometrySpec gs;
    gs.kind = opts.suite[s];
    gs.n = n;
    gs.seed = opts.seed + 101 * (s + 1);
    const Problem p = generate(gs);
    const Field u_star = ground_truth(p);

    std::mt19937_64 rng(gs.seed ^ 0x5bd1e995ULL);
    std::normal_distribution<double> normal;
    Field u0 = Field::square(n);
    for (double& v : u0.values()) v = normal(rng);
    u0 = reset(u0, p);

    const auto [u_base, rep_base] = solve_to_tol(*baseline, p, u0, so, &u_star);
    const auto [u_model, rep_model] = solve_to_tol(phi, p, u0, so, &u_star);

    BenchRow row;
    row.model = m.arch().name();
    row.baseline = baseline->name();
    row.setting = to_string(gs.kind);
    row.n = n;
    row.layers_model = rep_model.conv_layers;
    row.layers_base = rep_base.conv_layers;
    row.ops_model = rep_model.mul_adds;
    row.ops_base = rep_base.mul_adds;
    row.steps_model = rep_model.iterations;
    row.steps_base = rep_base.iterations;
    row.converged = rep_model.converged && rep_base.converged;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.layers_ratio = row.converged ? static_cast<double>(row.layers_model) / row.layers_base : nan;
    row.ops_ratio = row.converged ? static_cast<double>(row.ops_model) / row.ops_base : nan;
    const ResidualNorms rn = residual_norms(p, u_model);
    row.model_residual = rn.interior;
    row.model_boundary_violation = rn.boundary;
    row.initial_residual = residual_norms(p, u0).interior;
    rows.push_back(row);
  }
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "model,baseline,setting,n,layers_model,layers_base,ops_model,ops_base,layers_ratio,ops_ratio,converged\n";
  char buf[32];
  for (const auto& r : rows) {
    os << r.model << ',' << r.baseline << ',' << r.setting << ',' << r.n << ',' << r.layers_model << ','
       << r.layers_base << ',' << r.ops_model << ',' << r.ops_base << ',';
    if (r.converged) {
      std::snprintf(buf, sizeof buf, "%.6f", r.layers_ratio);
      os << buf << ',';
      std::snprintf(buf, sizeof buf, "%.6f", r.ops_ratio);
      os << buf;
    } else {
      os << ',';
    }
    os << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

}  // namespace lsolve
