#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lsolve/correction_model.hpp"
#include "lsolve/grid.hpp"
#include "lsolve/spectral.hpp"

namespace lsolve {

struct TrainConfig {
  ArchSpec arch;
  int n = 17;
  int k_max = 20;
  int batch = 8;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long steps = 20000;
  std::uint64_t seed = 0;
  /// Spectral radius of the wrapped iterator is logged every rho_every steps (0 = never).
  long rho_every = 500;
  PowerOptions power;

  /// n = 17 and 20000 steps for ConvStack, n = 65 and 50000 steps for LinearUNet.
  static TrainConfig defaults_for(ArchSpec arch);
  void validate() const;
};

/// Square domain with one value per side; corners follow the top, bottom,
/// left, right precedence. f = 0.
Problem square_problem(int n, const std::array<double, 4>& top_bottom_left_right);

/// Side values drawn uniformly from [-1, 1].
Problem sample_square_problem(int n, std::mt19937_64& rng);

/// Ground truth of square_problem via superposition of the four unit-side
/// solutions, which are computed once per n.
class SquareSolutionCache {
 public:
  Field solve(int n, const std::array<double, 4>& sides);

 private:
  std::map<int, std::array<Field, 4>> basis_;
};

struct TrainSample {
  Problem problem;
  Field u_star;
  Field u0;
  int k = 1;
};

/// mean over samples of || Phi^k(u0) - u* ||_2^2 with Phi wrapping Jacobi.
/// Throws TrainingError (with the unroll step) on non-finite iterates.
double loss(const CorrectionModel& m, std::span<const TrainSample> batch);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Loss and its exact gradient by reverse traversal of the unrolled steps.
LossAndGrad loss_and_grad(const CorrectionModel& m, std::span<const TrainSample> batch);
std::vector<double> grad(const CorrectionModel& m, std::span<const TrainSample> batch);

/// Adaptive-moment update of a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t size, double lr, double beta1, double beta2, double eps);
  void update(std::span<double> params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

struct TrainLogRow {
  long step = 0;
  double loss = 0.0;
  std::optional<double> rho;
  double wall_seconds = 0.0;
};

struct TrainResult {
  CorrectionModel model;
  std::vector<TrainLogRow> log;
  bool aborted = false;
  std::string abort_reason;
};

using TrainProgress = std::function<void(const TrainLogRow&)>;

/// Runs cfg.steps optimizer steps, each on a fresh batch of square problems
/// with white-noise starts (reset to the boundary values) and k uniform on
/// [1, k_max]. Aborts, keeping the last finite model, when the loss exceeds
/// 1e6 or turns non-finite. Deterministic for a given config.
TrainResult train(const TrainConfig& cfg, const TrainProgress& progress = {});
TrainResult train(const TrainConfig& cfg, CorrectionModel start, const TrainProgress& progress = {});

/// CSV columns: step, loss, rho_estimate (blank when not measured), wall_seconds.
void write_train_log(std::ostream& os, const std::vector<TrainLogRow>& log);

}  // namespace lsolve
