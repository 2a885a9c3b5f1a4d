#include "lsolve/phi_iterator.hpp"

#include "lsolve/errors.hpp"

namespace lsolve {

PhiIterator::PhiIterator(std::shared_ptr<const AffineIterator> base, CorrectionModel model)
    : base_(std::move(base)), model_(std::move(model)) {
  if (!base_) throw InvalidInput("wrapped iterator needs a base");
}

Field PhiIterator::step(const Field& u, const Problem& p) const {
  model_.check_grid(p.n());
  Field next = base_->step(u, p);
  const Field correction = apply_H(model_, next - u, p.mask());
  const double* c = correction.data();
  double* out = next.data();
  for (std::size_t k = 0; k < next.size(); ++k)
    if (p.mask().bit(k)) out[k] += c[k];
  return next;
}

StepCost PhiIterator::cost(const Problem& p) const {
  const StepCost b = base_->cost(p);
  const StepCost h = model_cost(model_, p.n());
  return {b.conv_layers + h.conv_layers, b.mul_adds + h.mul_adds};
}

Field phi_step(const PhiIterator& it, const Field& u, const Problem& p) { return it.step(u, p); }

StepCost cost_of(const PhiIterator& it, const Problem& p) { return it.cost(p); }

PhiIterator make_phi(CorrectionModel model) {
  return PhiIterator(std::make_shared<JacobiIterator>(), std::move(model));
}

}  // namespace lsolve
