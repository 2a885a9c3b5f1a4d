#include "lsolve/spectral.hpp"

#include <limits>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

#include "lsolve/errors.hpp"

namespace lsolve {

LinearPart LinearPart::of(const AffineIterator& it, const Problem& p) {
  Problem hom = p.homogeneous();
  const AffineIterator* ptr = &it;
  return LinearPart(p.mask(), [ptr, hom = std::move(hom)](const Field& u) { return ptr->step(u, hom); });
}

Eigen::MatrixXd materialize_dense(const LinearPart& lp) {
  const int n = lp.n();
  if (n > kDenseLimit)
    throw InvalidInput("dense materialization limited to n <= " + std::to_string(kDenseLimit) +
                       "; use the power method for n = " + std::to_string(n));
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * n;
  Eigen::MatrixXd t(dim, dim);
  Field e = Field::square(n);
  for (Eigen::Index j = 0; j < dim; ++j) {
    e.data()[j] = 1.0;
    const Field col = lp.apply(e);
    e.data()[j] = 0.0;
    t.col(j) = Eigen::Map<const Eigen::VectorXd>(col.data(), dim);
  }
  return t;
}

Eigen::MatrixXd interior_restricted(const Eigen::MatrixXd& t, const GeometryMask& mask) {
  Eigen::MatrixXd r = t;
  for (Eigen::Index j = 0; j < r.cols(); ++j)
    if (!mask.bit(static_cast<std::size_t>(j))) r.col(j).setZero();
  return r;
}

std::string to_string(SpectralMode m) { return m == SpectralMode::Dense ? "dense" : "power"; }

SpectralMode parse_mode(const std::string& s) {
  if (s == "dense") return SpectralMode::Dense;
  if (s == "power") return SpectralMode::Power;
  throw InvalidInput("unknown spectral mode '" + s + "'");
}

double spectral_radius_dense(const Eigen::MatrixXd& t) {
  if (t.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(t, false);
  if (es.info() != Eigen::Success) throw NonConvergence("eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

// Eigenvalues of T are those of its interior block plus zeros (boundary rows
// vanish), so the eigensolve runs on the smaller block.
Eigen::MatrixXd interior_block(const Eigen::MatrixXd& t, const GeometryMask& mask) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < t.rows(); ++k)
    if (mask.bit(static_cast<std::size_t>(k))) idx.push_back(k);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd b(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) b(r, c) = t(idx[r], idx[c]);
  return b;
}

bool boundary_rows_vanish(const Eigen::MatrixXd& t, const GeometryMask& mask) {
  for (Eigen::Index k = 0; k < t.rows(); ++k)
    if (!mask.bit(static_cast<std::size_t>(k)) && t.row(k).cwiseAbs().maxCoeff() != 0.0) return false;
  return true;
}

}  // namespace

double spectral_radius_power(const LinearPart& lp, const PowerOptions& opts) {
  if (opts.iterations < 1 || opts.window < 1 || opts.window > opts.iterations || opts.restarts < 1)
    throw InvalidInput("invalid power-method options");
  const int n = lp.n();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  double best = 0.0;
  for (int r = 0; r < opts.restarts; ++r) {
    Field v = Field::square(n);
    for (double& x : v.values()) x = normal(rng);
    v *= 1.0 / v.norm2();
    double log_growth = 0.0;
    bool vanished = false;
    for (int t = 1; t <= opts.iterations; ++t) {
      v = lp.apply(v);
      const double nv = v.norm2();
      if (nv == 0.0) {
        vanished = true;
        break;
      }
      if (!std::isfinite(nv)) throw NonConvergence("power iteration produced non-finite values");
      v *= 1.0 / nv;
      if (t > opts.iterations - opts.window) log_growth += std::log(nv);
    }
    const double rho = vanished ? 0.0 : std::exp(log_growth / opts.window);
    best = std::max(best, rho);
  }
  return best;
}

double spectral_radius(const LinearPart& lp, SpectralMode mode, const PowerOptions& opts) {
  if (mode == SpectralMode::Power) return spectral_radius_power(lp, opts);
  const Eigen::MatrixXd t = materialize_dense(lp);
  if (boundary_rows_vanish(t, lp.mask())) return spectral_radius_dense(interior_block(t, lp.mask()));
  return spectral_radius_dense(t);
}

double spectral_norm_dense(const Eigen::MatrixXd& t) {
  if (t.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(t);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double spectral_norm(const LinearPart& lp) {
  return spectral_norm_dense(interior_restricted(materialize_dense(lp), lp.mask()));
}

double symmetry_defect(const Eigen::MatrixXd& t, const GeometryMask& mask) {
  const Eigen::MatrixXd r = interior_restricted(t, mask);
  return (r - r.transpose()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd wrapped_linear_part(const Eigen::MatrixXd& t, const GeometryMask& mask, const Eigen::MatrixXd& h) {
  Eigen::VectorXd g(t.rows());
  for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = mask.bit(static_cast<std::size_t>(k)) ? 1.0 : 0.0;
  const Eigen::MatrixXd gh = g.asDiagonal() * h;
  return t + gh * t - gh;
}

OracleCorrection::OracleCorrection(const AffineIterator& base, const Problem& p) : base_(&base), mask_(p.mask()) {
  t_ = materialize_dense(LinearPart::of(base, p));
  const Eigen::MatrixXd i_minus_t = Eigen::MatrixXd::Identity(t_.rows(), t_.cols()) - t_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(i_minus_t.transpose());
  if (!lu.isInvertible()) throw NonConvergence("I - T is singular; the base iterator is not valid");
  // R (I - T) = T  <=>  (I - T)^T R^T = T^T
  r_ = lu.solve(t_.transpose()).transpose();
}

Field OracleCorrection::step(const Field& u, const Problem& p) const {
  if (!(p.mask() == mask_)) throw InvalidInput("oracle built for a different geometry");
  Field next = base_->step(u, p);
  const Field w = next - u;
  const Eigen::Index dim = static_cast<Eigen::Index>(w.size());
  const Eigen::VectorXd rw = r_ * Eigen::Map<const Eigen::VectorXd>(w.data(), dim);
  for (Eigen::Index k = 0; k < dim; ++k)
    if (mask_.bit(static_cast<std::size_t>(k))) next.data()[k] += rw[k];
  return next;
}

OracleCorrection oracle_correction(const Problem& p) {
  if (p.n() > 17) throw InvalidInput("oracle correction limited to n <= 17");
  static const JacobiIterator jacobi;
  return OracleCorrection(jacobi, p);
}

ConvexityReport convexity_probe(const Eigen::MatrixXd& t, const GeometryMask& mask, const Eigen::MatrixXd& h1,
                                const Eigen::MatrixXd& h2, double lambda) {
  if (mask.n() > 17) throw InvalidInput("convexity probe limited to n <= 17");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must lie in [0, 1]");
  if (h1.rows() != t.rows() || h2.rows() != t.rows() || h1.cols() != t.cols() || h2.cols() != t.cols())
    throw InvalidInput("operator dimension mismatch");
  auto sigma = [&](const Eigen::MatrixXd& h) {
    return spectral_norm_dense(interior_restricted(wrapped_linear_part(t, mask, h), mask));
  };
  ConvexityReport r;
  r.sigma_1 = sigma(h1);
  r.sigma_0 = sigma(h2);
  r.sigma_lambda = sigma(lambda * h1 + (1.0 - lambda) * h2);
  r.bound = lambda * r.sigma_1 + (1.0 - lambda) * r.sigma_0;
  r.holds = r.sigma_lambda <= r.bound + 1e-9;
  return r;
}

ValidityVerdict certify(const AffineIterator& it, const Problem& p, SpectralMode mode, const PowerOptions& opts) {
  ValidityVerdict v;
  v.method = mode;
  v.rho_estimate = spectral_radius(LinearPart::of(it, p), mode, opts);
  const Field u_star = ground_truth(p);
  const Field next = it.step(u_star, p);
  v.fixed_point_residual = (next - u_star).max_abs();
  if (!std::isfinite(v.fixed_point_residual)) v.fixed_point_residual = std::numeric_limits<double>::infinity();
  v.valid = v.rho_estimate <= kValidRadius && v.fixed_point_residual <= kFixedPointTol;
  return v;
}

ValidityVerdict certify(const AffineIterator& it, const Problem& p) {
  return certify(it, p, p.n() <= kDenseLimit ? SpectralMode::Dense : SpectralMode::Power);
}

}  // namespace lsolve
