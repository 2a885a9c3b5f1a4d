#pragma once

#include <memory>
#include <string>
#include <utility>

#include "lsolve/grid.hpp"

namespace lsolve {

/// Work done by one application of an iterator.
struct StepCost {
  long conv_layers = 0;
  long long mul_adds = 0;
};

/// u -> T u + c with (I - G) u' = (I - G) b after every step.
class AffineIterator {
 public:
  virtual ~AffineIterator() = default;
  virtual Field step(const Field& u, const Problem& p) const = 0;
  virtual StepCost cost(const Problem& p) const = 0;
  virtual std::string name() const = 0;
};

/// One Jacobi sweep: 1/4 of the neighbour sum minus h^2 f / 4, then reset.
Field jacobi_step(const Field& u, const Problem& p);

/// Transpose of the Jacobi linear part T = G * J, i.e. J (G y). Boundary
/// cells of the result are generally nonzero.
Field jacobi_linear_transpose(const Field& y, const GeometryMask& mask);

class JacobiIterator final : public AffineIterator {
 public:
  Field step(const Field& u, const Problem& p) const override { return jacobi_step(u, p); }
  /// 1 layer, 4 mul-adds per interior cell.
  StepCost cost(const Problem& p) const override;
  std::string name() const override { return "jacobi"; }
};

struct MultigridConfig {
  int depth = 2;
  int pre_smooth = 2;
  int post_smooth = 2;

  /// Throws InvalidInput unless n - 1 is divisible by 2^depth with a coarsest grid >= 3x3.
  void validate(int n) const;
  /// Deepest admissible depth for n (0 when n - 1 is odd).
  static int max_depth(int n);
};

/// One correction-scheme V-cycle: pre-smoothing, full-weighting restriction of
/// the residual, recursive coarse solve with zero Dirichlet data, bilinear
/// prolongation added on interior cells, post-smoothing. The coarsest level
/// only smooths. Coarse masks are the injection of the fine mask.
Field multigrid_vcycle(const Field& u, const Problem& p, const MultigridConfig& cfg);

/// Per-cycle cost: every Jacobi sweep is 1 layer / 4 mul-adds per interior
/// cell of its level; the residual is 1 layer / 5 per interior cell;
/// restriction and prolongation are each 1 layer / 9 per coarse cell.
StepCost multigrid_cost(const Problem& p, const MultigridConfig& cfg);

class MultigridIterator final : public AffineIterator {
 public:
  explicit MultigridIterator(MultigridConfig cfg = {}) : cfg_(cfg) {}
  Field step(const Field& u, const Problem& p) const override { return multigrid_vcycle(u, p, cfg_); }
  StepCost cost(const Problem& p) const override { return multigrid_cost(p, cfg_); }
  std::string name() const override { return "mg" + std::to_string(cfg_.depth); }
  const MultigridConfig& config() const { return cfg_; }

 private:
  MultigridConfig cfg_;
};

enum class StopRule {
  /// ||u - u*|| / ||u*|| <= threshold
  RelativeToSolution,
  /// ||u - u*|| <= threshold * ||u0 - u*||
  RelativeToInitialError,
};

struct SolveOptions {
  double threshold = 1e-2;
  long max_steps = 100000;
  StopRule rule = StopRule::RelativeToSolution;
};

/// Iterates until the stopping rule holds. Without u_star the rule is
/// interior residual <= threshold * initial interior residual. Running out of
/// steps or producing non-finite values yields converged = false.
/// final_relative_error holds the quantity compared against the threshold.
std::pair<Field, CostReport> solve_to_tol(const AffineIterator& it, const Problem& p, const Field& u0,
                                          const SolveOptions& opts, const Field* u_star = nullptr);

/// Exact discrete solution. Dense direct solve for n <= 32, sparse Cholesky
/// otherwise. Throws NonConvergence when the result fails the 1e-8 residual check.
Field ground_truth(const Problem& p);
Field ground_truth_dense(const Problem& p);
Field ground_truth_sparse(const Problem& p);
/// Multigrid at maximal depth iterated until successive iterates differ by
/// <= 1e-12. Plain Jacobi smoothing damps near-checkerboard modes slowly, so
/// on large grids this may stall above the residual check and throw.
Field ground_truth_multigrid(const Problem& p);

}  // namespace lsolve
