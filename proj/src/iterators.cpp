#include "lsolve/iterators.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "lsolve/conv.hpp"
#include "lsolve/errors.hpp"

namespace lsolve {

namespace {

// One sweep on raw storage. Interior cells get the Jacobi update, every other
// cell takes bvals (or 0 when bvals is null).
void sweep(const double* u, double* out, const std::uint8_t* mask, const double* rhs, const double* bvals, int n,
           double h) {
  const double q = 0.25 * h * h;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n + j;
      if (mask[k]) {
        out[k] = 0.25 * (u[k - n] + u[k + n] + u[k - 1] + u[k + 1]) - q * rhs[k];
      } else {
        out[k] = bvals ? bvals[k] : 0.0;
      }
    }
  }
}

struct Level {
  int n = 0;
  double h = 0.0;
  std::vector<std::uint8_t> mask;
  long interior = 0;
};

std::vector<Level> build_levels(const Problem& p, int depth) {
  std::vector<Level> levels(depth + 1);
  levels[0].n = p.n();
  levels[0].h = p.h();
  levels[0].mask.assign(p.mask().bits().begin(), p.mask().bits().end());
  for (int l = 1; l <= depth; ++l) {
    const Level& fine = levels[l - 1];
    Level& c = levels[l];
    c.n = coarse_size(fine.n);
    c.h = 2.0 * fine.h;
    c.mask.assign(static_cast<std::size_t>(c.n) * c.n, 0);
    for (int i = 0; i < c.n; ++i)
      for (int j = 0; j < c.n; ++j)
        c.mask[static_cast<std::size_t>(i) * c.n + j] = fine.mask[static_cast<std::size_t>(2 * i) * fine.n + 2 * j];
  }
  for (auto& l : levels)
    for (auto bit : l.mask) l.interior += bit;
  return levels;
}

constexpr double kRestrict[9] = {1.0 / 16, 1.0 / 8, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 8, 1.0 / 16};
constexpr double kProlong[9] = {0.25, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 0.25};

void smooth(std::vector<double>& u, std::vector<double>& tmp, const Level& lv, const double* rhs, const double* bvals,
            int sweeps) {
  for (int s = 0; s < sweeps; ++s) {
    sweep(u.data(), tmp.data(), lv.mask.data(), rhs, bvals, lv.n, lv.h);
    u.swap(tmp);
  }
}

// Solves lap(u) = rhs approximately on level l, in place. bvals is only
// non-null on the finest level.
void vcycle(const std::vector<Level>& levels, int l, std::vector<double>& u, const double* rhs, const double* bvals,
            const MultigridConfig& cfg) {
  const Level& lv = levels[l];
  std::vector<double> tmp(u.size());
  const int last = static_cast<int>(levels.size()) - 1;
  if (l == last) {
    smooth(u, tmp, lv, rhs, bvals, cfg.pre_smooth + cfg.post_smooth);
    return;
  }
  smooth(u, tmp, lv, rhs, bvals, cfg.pre_smooth);

  const int n = lv.n;
  const double inv_h2 = 1.0 / (lv.h * lv.h);
  Tensor r(1, n);
  for (int i = 1; i < n - 1; ++i) {
    for (int j = 1; j < n - 1; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n + j;
      if (!lv.mask[k]) continue;
      const double lap = (u[k - n] + u[k + n] + u[k - 1] + u[k + 1] - 4.0 * u[k]) * inv_h2;
      r.data[k] = rhs[k] - lap;
    }
  }
  const Level& cl = levels[l + 1];
  Tensor rc(1, cl.n);
  conv_gather(r, kRestrict, 2, false, rc);
  for (std::size_t k = 0; k < rc.data.size(); ++k)
    if (!cl.mask[k]) rc.data[k] = 0.0;

  std::vector<double> e(rc.data.size(), 0.0);
  vcycle(levels, l + 1, e, rc.data.data(), nullptr, cfg);

  Tensor ec(1, cl.n);
  ec.data = std::move(e);
  Tensor ef(1, n);
  conv_scatter(ec, kProlong, 2, false, ef);
  for (std::size_t k = 0; k < u.size(); ++k)
    if (lv.mask[k]) u[k] += ef.data[k];

  smooth(u, tmp, lv, rhs, bvals, cfg.post_smooth);
}

void check_square(const Field& u, const Problem& p) {
  if (u.rows() != p.n() || u.cols() != p.n()) throw InvalidInput("iterate/problem dimension mismatch");
}

}  // namespace

Field jacobi_step(const Field& u, const Problem& p) {
  check_square(u, p);
  Field out(p.n(), p.n());
  sweep(u.data(), out.data(), p.mask().bits().data(), p.f().data(), p.b().data(), p.n(), p.h());
  return out;
}

Field jacobi_linear_transpose(const Field& y, const GeometryMask& mask) {
  const int n = mask.n();
  if (y.rows() != n || y.cols() != n) throw InvalidInput("dimension mismatch");
  const Field gy = mask.masked(y);
  Field out(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = 0.25 * gy(i, j);
      if (v == 0.0) continue;
      // interior cells never sit on the frame, so all four neighbours exist
      out(i - 1, j) += v;
      out(i + 1, j) += v;
      out(i, j - 1) += v;
      out(i, j + 1) += v;
    }
  }
  return out;
}

StepCost JacobiIterator::cost(const Problem& p) const {
  return {1, 4LL * p.mask().interior_count()};
}

int MultigridConfig::max_depth(int n) {
  int d = 0;
  int m = n - 1;
  while (m % 2 == 0 && m / 2 >= 2) {
    m /= 2;
    ++d;
  }
  return d;
}

void MultigridConfig::validate(int n) const {
  if (depth < 1) throw InvalidInput("multigrid depth must be >= 1");
  if (pre_smooth < 0 || post_smooth < 0) throw InvalidInput("smoothing counts must be non-negative");
  if (depth > max_depth(n))
    throw InvalidInput("multigrid depth " + std::to_string(depth) + " incompatible with n = " + std::to_string(n) +
                       " (need n - 1 divisible by 2^depth and a coarsest grid >= 3x3)");
}

Field multigrid_vcycle(const Field& u, const Problem& p, const MultigridConfig& cfg) {
  check_square(u, p);
  cfg.validate(p.n());
  const auto levels = build_levels(p, cfg.depth);
  std::vector<double> work(u.data(), u.data() + u.size());
  vcycle(levels, 0, work, p.f().data(), p.b().data(), cfg);
  // the last operation on level 0 was a sweep (or an add when post_smooth = 0)
  Field out(p.n(), p.n(), std::move(work));
  return reset(out, p);
}

StepCost multigrid_cost(const Problem& p, const MultigridConfig& cfg) {
  cfg.validate(p.n());
  const auto levels = build_levels(p, cfg.depth);
  StepCost c;
  const int sweeps = cfg.pre_smooth + cfg.post_smooth;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    c.conv_layers += sweeps;
    c.mul_adds += 4LL * sweeps * levels[l].interior;
    if (l + 1 < levels.size()) {
      const long long coarse_cells = static_cast<long long>(levels[l + 1].n) * levels[l + 1].n;
      c.conv_layers += 3;  // residual, restriction, prolongation
      c.mul_adds += 5LL * levels[l].interior + 2 * 9 * coarse_cells;
    }
  }
  return c;
}

std::pair<Field, CostReport> solve_to_tol(const AffineIterator& it, const Problem& p, const Field& u0,
                                          const SolveOptions& opts, const Field* u_star) {
  if (!(opts.threshold > 0.0)) throw InvalidInput("threshold must be positive");
  if (opts.max_steps < 0) throw InvalidInput("max_steps must be non-negative");
  check_square(u0, p);
  if (u_star) check_square(*u_star, p);

  const StepCost per_step = it.cost(p);
  double scale = 1.0;
  if (!u_star) {
    scale = residual_norms(p, u0).interior;
  } else if (opts.rule == StopRule::RelativeToInitialError) {
    scale = (u0 - *u_star).norm2();
  }
  auto measure = [&](const Field& u) -> double {
    if (!u_star) return scale == 0.0 ? 0.0 : residual_norms(p, u).interior / scale;
    if (opts.rule == StopRule::RelativeToSolution) return relative_error(u, *u_star);
    return scale == 0.0 ? 0.0 : (u - *u_star).norm2() / scale;
  };

  CostReport report;
  Field u = u0;
  double err = measure(u);
  while (!(err <= opts.threshold)) {
    if (report.iterations >= opts.max_steps || !std::isfinite(err)) break;
    u = it.step(u, p);
    ++report.iterations;
    report.conv_layers += per_step.conv_layers;
    report.mul_adds += per_step.mul_adds;
    err = measure(u);
  }
  report.final_relative_error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
  report.converged = err <= opts.threshold;
  return {std::move(u), report};
}

}  // namespace lsolve
