#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "lsolve/grid.hpp"
#include "lsolve/iterators.hpp"

namespace lsolve {

/// u -> T u for an affine iterator u -> T u + c on a fixed geometry.
class LinearPart {
 public:
  using Apply = std::function<Field(const Field&)>;

  LinearPart(GeometryMask mask, Apply apply) : mask_(std::move(mask)), apply_(std::move(apply)) {}

  /// Runs `it` on the homogeneous version of p (f = 0, b = 0), where c = 0.
  /// `it` must outlive the returned object.
  static LinearPart of(const AffineIterator& it, const Problem& p);

  Field apply(const Field& u) const { return apply_(u); }
  int n() const { return mask_.n(); }
  const GeometryMask& mask() const { return mask_; }

 private:
  GeometryMask mask_;
  Apply apply_;
};

constexpr int kDenseLimit = 33;

/// Column j is lp.apply(e_j). Refuses n > 33.
Eigen::MatrixXd materialize_dense(const LinearPart& lp);

/// T with boundary columns zeroed (T G). Iterates always carry exact boundary
/// values after one step, so errors live in the interior subspace and this is
/// the operator that governs them; it shares T's nonzero eigenvalues.
Eigen::MatrixXd interior_restricted(const Eigen::MatrixXd& t, const GeometryMask& mask);

enum class SpectralMode { Dense, Power };
std::string to_string(SpectralMode m);
SpectralMode parse_mode(const std::string& s);

struct PowerOptions {
  int iterations = 2000;
  int window = 50;
  int restarts = 5;
  std::uint64_t seed = 12345;
};

/// Dense: max |eigenvalue| of the materialized matrix. Power: growth factor
/// (||T^m v|| / ||T^(m-s) v||)^(1/s), maximum over restarts, renormalizing
/// every step.
double spectral_radius(const LinearPart& lp, SpectralMode mode, const PowerOptions& opts = {});
double spectral_radius_dense(const Eigen::MatrixXd& t);
double spectral_radius_power(const LinearPart& lp, const PowerOptions& opts = {});

/// Largest singular value of the interior-restricted operator (dense only).
double spectral_norm(const LinearPart& lp);
double spectral_norm_dense(const Eigen::MatrixXd& t);

/// max |T - T^T| of the interior-restricted operator.
double symmetry_defect(const Eigen::MatrixXd& t, const GeometryMask& mask);

/// Dense linear part of the wrapped iterator: T + G H T - G H.
Eigen::MatrixXd wrapped_linear_part(const Eigen::MatrixXd& t, const GeometryMask& mask, const Eigen::MatrixXd& h);

/// Exact correction R = T (I - T)^-1 for a base iterator on p's geometry.
/// The iterator u' = base(u) + G R (base(u) - u) reaches the solution in one step.
class OracleCorrection {
 public:
  OracleCorrection(const AffineIterator& base, const Problem& p);

  Field step(const Field& u, const Problem& p) const;
  const Eigen::MatrixXd& t() const { return t_; }
  const Eigen::MatrixXd& r() const { return r_; }

 private:
  const AffineIterator* base_;
  GeometryMask mask_;
  Eigen::MatrixXd t_;
  Eigen::MatrixXd r_;
};

/// Jacobi-based oracle; n <= 17.
OracleCorrection oracle_correction(const Problem& p);

struct ConvexityReport {
  double sigma_lambda = 0.0;
  double sigma_0 = 0.0;  // H = H2
  double sigma_1 = 0.0;  // H = H1
  double bound = 0.0;    // lambda sigma_1 + (1 - lambda) sigma_0
  bool holds = false;    // sigma_lambda <= bound + 1e-9
};

/// Spectral norm of T + G H T - G H at H = lambda H1 + (1 - lambda) H2
/// against the chord between the endpoints.
ConvexityReport convexity_probe(const Eigen::MatrixXd& t, const GeometryMask& mask, const Eigen::MatrixXd& h1,
                                const Eigen::MatrixXd& h2, double lambda);

struct ValidityVerdict {
  double rho_estimate = 0.0;
  SpectralMode method = SpectralMode::Dense;
  double fixed_point_residual = 0.0;
  bool valid = false;
};

constexpr double kValidRadius = 1.0 - 1e-6;
constexpr double kFixedPointTol = 1e-8;

/// Spectral radius of the iterator's linear part on p's geometry (dense up to
/// n = 33, power method beyond) and max |step(u*) - u*| at the ground truth.
/// Only the residual depends on f and b.
ValidityVerdict certify(const AffineIterator& it, const Problem& p);
ValidityVerdict certify(const AffineIterator& it, const Problem& p, SpectralMode mode, const PowerOptions& opts = {});

}  // namespace lsolve
