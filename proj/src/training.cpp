#include "lsolve/training.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "lsolve/errors.hpp"
#include "lsolve/grid_io.hpp"
#include "lsolve/iterators.hpp"
#include "lsolve/phi_iterator.hpp"

namespace lsolve {

TrainConfig TrainConfig::defaults_for(ArchSpec arch) {
  TrainConfig cfg;
  cfg.arch = arch;
  if (arch.kind == ArchKind::LinearUNet) {
    cfg.n = 65;
    cfg.steps = 50000;
  }
  return cfg;
}

void TrainConfig::validate() const {
  if (k_max < 1) throw InvalidInput("k_max must be >= 1");
  if (batch < 1) throw InvalidInput("batch must be >= 1");
  if (!(lr > 0.0)) throw InvalidInput("learning rate must be positive");
  if (steps < 0) throw InvalidInput("steps must be non-negative");
  if (n < 5) throw InvalidInput("training grid needs n >= 5");
  if (rho_every < 0) throw InvalidInput("rho_every must be non-negative");
  CorrectionModel(arch).check_grid(n);
}

Problem square_problem(int n, const std::array<double, 4>& sides) {
  if (n < 5) throw InvalidInput("square problem needs n >= 5");
  Field b = Field::square(n);
  for (int i = 1; i < n - 1; ++i) {
    b(i, 0) = sides[2];
    b(i, n - 1) = sides[3];
  }
  for (int j = 0; j < n; ++j) {
    b(n - 1, j) = sides[1];
    b(0, j) = sides[0];
  }
  return Problem(GeometryMask::square(n), std::move(b), Field::square(n));
}

Problem sample_square_problem(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> side(-1.0, 1.0);
  std::array<double, 4> s{};
  for (double& v : s) v = side(rng);
  return square_problem(n, s);
}

Field SquareSolutionCache::solve(int n, const std::array<double, 4>& sides) {
  auto it = basis_.find(n);
  if (it == basis_.end()) {
    std::array<Field, 4> basis;
    for (int s = 0; s < 4; ++s) {
      std::array<double, 4> unit{};
      unit[s] = 1.0;
      basis[s] = ground_truth(square_problem(n, unit));
    }
    it = basis_.emplace(n, std::move(basis)).first;
  }
  Field u = Field::square(n);
  for (int s = 0; s < 4; ++s) u.add_scaled(sides[s], it->second[s]);
  return u;
}

namespace {

struct Unrolled {
  Field final_state;
  std::vector<HTape> tapes;
};

Unrolled unroll(const CorrectionModel& m, const TrainSample& s, bool keep_tapes) {
  const Problem& p = s.problem;
  Unrolled r;
  if (keep_tapes) r.tapes.resize(static_cast<std::size_t>(s.k));
  Field u = s.u0;
  for (int t = 0; t < s.k; ++t) {
    Field v = jacobi_step(u, p);
    const Field w = v - u;
    const Field z = keep_tapes ? apply_H(m, w, p.mask(), r.tapes[static_cast<std::size_t>(t)]) : apply_H(m, w, p.mask());
    for (std::size_t q = 0; q < v.size(); ++q)
      if (p.mask().bit(q)) v.data()[q] += z.data()[q];
    u = std::move(v);
    if (!u.all_finite()) throw TrainingError(t + 1, "non-finite iterate in unrolled solve");
  }
  r.final_state = std::move(u);
  return r;
}

void check_batch(std::span<const TrainSample> batch) {
  if (batch.empty()) throw InvalidInput("batch must be non-empty");
  for (const auto& s : batch)
    if (s.k < 1) throw InvalidInput("unroll count must be >= 1");
}

double squared_error(const Field& u, const Field& u_star) {
  const Field d = u - u_star;
  const double nrm = d.norm2();
  return nrm * nrm;
}

}  // namespace

double loss(const CorrectionModel& m, std::span<const TrainSample> batch) {
  check_batch(batch);
  double total = 0.0;
  for (const auto& s : batch) total += squared_error(unroll(m, s, false).final_state, s.u_star);
  return total / static_cast<double>(batch.size());
}

LossAndGrad loss_and_grad(const CorrectionModel& m, std::span<const TrainSample> batch) {
  check_batch(batch);
  LossAndGrad out;
  out.grad.assign(m.params().size(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& s : batch) {
    const Unrolled r = unroll(m, s, true);
    const GeometryMask& mask = s.problem.mask();
    Field g = r.final_state - s.u_star;
    out.loss += inv_b * g.norm2() * g.norm2();
    g *= 2.0 * inv_b;
    // u_{t+1} = v + G H(v - u),  v = T u + c
    for (int t = s.k - 1; t >= 0; --t) {
      const Field gz = mask.masked(g);
      const Field gw = apply_H_backward(m, r.tapes[static_cast<std::size_t>(t)], gz, out.grad);
      Field gv = g + gw;
      g = jacobi_linear_transpose(gv, mask);
      g -= gw;
    }
  }
  return out;
}

std::vector<double> grad(const CorrectionModel& m, std::span<const TrainSample> batch) {
  return loss_and_grad(m, batch).grad;
}

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::update(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw InvalidInput("optimizer size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

TrainResult train(const TrainConfig& cfg, const TrainProgress& progress) {
  return train(cfg, init_model(cfg.arch, cfg.seed), progress);
}

TrainResult train(const TrainConfig& cfg, CorrectionModel start, const TrainProgress& progress) {
  cfg.validate();
  if (!(start.arch() == cfg.arch)) throw InvalidInput("starting model does not match the configured architecture");
  TrainResult result;
  result.model = std::move(start);
  if (cfg.steps == 0) return result;

  // sampling uses its own stream so that initialization and data are independent
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> side(-1.0, 1.0);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> unroll(1, cfg.k_max);
  SquareSolutionCache cache;
  Adam adam(result.model.params().size(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
  const Problem geometry = square_problem(cfg.n, {0.0, 0.0, 0.0, 0.0});
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<TrainSample> batch(static_cast<std::size_t>(cfg.batch));
  for (long step = 1; step <= cfg.steps; ++step) {
    for (auto& s : batch) {
      std::array<double, 4> sides{};
      for (double& v : sides) v = side(rng);
      s.problem = square_problem(cfg.n, sides);
      s.u_star = cache.solve(cfg.n, sides);
      Field u0 = Field::square(cfg.n);
      for (double& v : u0.values()) v = normal(rng);
      s.u0 = reset(u0, s.problem);
      s.k = unroll(rng);
    }

    LossAndGrad lg;
    try {
      lg = loss_and_grad(result.model, batch);
    } catch (const TrainingError& e) {
      result.aborted = true;
      result.abort_reason = "step " + std::to_string(step) + ": " + e.what();
      return result;
    }
    if (!std::isfinite(lg.loss) || lg.loss > 1e6) {
      result.aborted = true;
      result.abort_reason = "step " + std::to_string(step) + ": loss diverged (" + format_double(lg.loss) + ")";
      return result;
    }
    adam.update(result.model.params(), lg.grad);

    TrainLogRow row;
    row.step = step;
    row.loss = lg.loss;
    if (cfg.rho_every > 0 && (step % cfg.rho_every == 0 || step == cfg.steps)) {
      const PhiIterator phi = make_phi(result.model);
      const SpectralMode mode = cfg.n <= kDenseLimit ? SpectralMode::Dense : SpectralMode::Power;
      row.rho = spectral_radius(LinearPart::of(phi, geometry), mode, cfg.power);
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) progress(row);
    result.log.push_back(row);
  }
  return result;
}

void write_train_log(std::ostream& os, const std::vector<TrainLogRow>& log) {
  os << "step,loss,rho_estimate,wall_seconds\n";
  for (const auto& r : log) {
    os << r.step << ',' << format_double(r.loss) << ',';
    if (r.rho) os << format_double(*r.rho);
    os << ',' << r.wall_seconds << '\n';
  }
}

}  // namespace lsolve
