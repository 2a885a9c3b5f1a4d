#pragma once

#include <memory>
#include <string>

#include "lsolve/correction_model.hpp"
#include "lsolve/iterators.hpp"

namespace lsolve {

/// Base iterator plus a masked learned correction of its update:
///   w = base(u) - u,   u' = base(u) + G H(w).
/// Any fixed point of the base is a fixed point of this iterator.
class PhiIterator final : public AffineIterator {
 public:
  PhiIterator(std::shared_ptr<const AffineIterator> base, CorrectionModel model);

  Field step(const Field& u, const Problem& p) const override;
  /// Base cost plus the structural cost of H (independent of weight values).
  StepCost cost(const Problem& p) const override;
  std::string name() const override { return model_.arch().name(); }

  const AffineIterator& base() const { return *base_; }
  const CorrectionModel& model() const { return model_; }

 private:
  std::shared_ptr<const AffineIterator> base_;
  CorrectionModel model_;
};

Field phi_step(const PhiIterator& it, const Field& u, const Problem& p);
StepCost cost_of(const PhiIterator& it, const Problem& p);

/// Jacobi-wrapped iterator, the configuration used throughout training and benchmarking.
PhiIterator make_phi(CorrectionModel model);

}  // namespace lsolve
