#include "lsolve/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsolve/errors.hpp"

namespace lsolve {

Field::Field(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) throw InvalidInput("field dimensions must be positive");
  data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Field::Field(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (rows <= 0 || cols <= 0) throw InvalidInput("field dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(rows) * cols)
    throw InvalidInput("field value count does not match dimensions");
}

bool Field::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& other) {
  if (!same_shape(other)) throw InvalidInput("field shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  if (!same_shape(other)) throw InvalidInput("field shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Field& Field::add_scaled(double s, const Field& other) {
  if (!same_shape(other)) throw InvalidInput("field shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * other.data_[k];
  return *this;
}

double Field::norm2() const {
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return std::sqrt(acc);
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

GeometryMask::GeometryMask(int n, std::vector<std::uint8_t> bits) : n_(n), bits_(std::move(bits)) {
  if (n < 3) throw InvalidInput("mask needs n >= 3");
  if (bits_.size() != static_cast<std::size_t>(n) * n) throw InvalidInput("mask size does not match n");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      auto& bit = bits_[static_cast<std::size_t>(i) * n + j];
      if (bit > 1) throw InvariantViolation("mask entries must be 0 or 1");
      const bool frame = i == 0 || j == 0 || i == n - 1 || j == n - 1;
      if (frame && bit)
        throw InvariantViolation("interior cell on outer frame at (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
      interior_count_ += bit;
    }
  }
  if (interior_count_ == 0) throw InvariantViolation("mask has no interior cell");
}

GeometryMask GeometryMask::square(int n) {
  if (n < 3) throw InvalidInput("mask needs n >= 3");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n) * n, 0);
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j) bits[static_cast<std::size_t>(i) * n + j] = 1;
  return GeometryMask(n, std::move(bits));
}

void GeometryMask::apply(Field& u) const {
  if (u.rows() != n_ || u.cols() != n_) throw InvalidInput("mask/field dimension mismatch");
  double* d = u.data();
  for (std::size_t k = 0; k < bits_.size(); ++k)
    if (!bits_[k]) d[k] = 0.0;
}

Problem::Problem(GeometryMask mask, Field b, Field f, double h)
    : mask_(std::move(mask)), b_(std::move(b)), f_(std::move(f)), h_(h) {
  const int n = mask_.n();
  if (n == 0) throw InvalidInput("problem needs a mask");
  if (b_.rows() != n || b_.cols() != n || f_.rows() != n || f_.cols() != n)
    throw InvalidInput("problem fields must be n x n");
  if (!b_.all_finite() || !f_.all_finite()) throw InvariantViolation("problem data must be finite");
  if (h_ <= 0.0) h_ = 1.0 / (n - 1);
  if (!std::isfinite(h_)) throw InvalidInput("mesh width must be finite");
  double* bd = b_.data();
  for (std::size_t k = 0; k < b_.size(); ++k)
    if (mask_.bit(k)) bd[k] = 0.0;
}

Problem Problem::homogeneous() const {
  return Problem(mask_, Field::square(n()), Field::square(n()), h_);
}

Field laplacian_apply(const Field& u, double h) {
  const int rows = u.rows(), cols = u.cols();
  if (rows < 3 || cols < 3) throw InvalidInput("laplacian needs a grid of at least 3x3");
  Field out(rows, cols, 0.0);
  const double s = 1.0 / (h * h);
  for (int i = 1; i < rows - 1; ++i) {
    const double* up = u.data() + static_cast<std::size_t>(i - 1) * cols;
    const double* mid = up + cols;
    const double* dn = mid + cols;
    double* o = out.data() + static_cast<std::size_t>(i) * cols;
    for (int j = 1; j < cols - 1; ++j)
      o[j] = (up[j] + dn[j] + mid[j - 1] + mid[j + 1] - 4.0 * mid[j]) * s;
  }
  return out;
}

Field reset(const Field& u, const Problem& p) {
  if (u.rows() != p.n() || u.cols() != p.n()) throw InvalidInput("reset: dimension mismatch");
  Field out = u;
  double* o = out.data();
  const double* b = p.b().data();
  for (std::size_t k = 0; k < out.size(); ++k)
    if (!p.mask().bit(k)) o[k] = b[k];
  return out;
}

ResidualNorms residual_norms(const Problem& p, const Field& u) {
  if (u.rows() != p.n() || u.cols() != p.n()) throw InvalidInput("residual_norms: dimension mismatch");
  const Field lap = laplacian_apply(u, p.h());
  ResidualNorms r;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (p.mask().bit(k))
      r.interior = std::max(r.interior, std::abs(lap.data()[k] - p.f().data()[k]));
    else
      r.boundary = std::max(r.boundary, std::abs(u.data()[k] - p.b().data()[k]));
  }
  return r;
}

double relative_error(const Field& u, const Field& u_star) {
  if (!u.same_shape(u_star)) throw InvalidInput("relative_error: dimension mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u.data()[k] - u_star.data()[k];
    num += d * d;
    den += u_star.data()[k] * u_star.data()[k];
  }
  num = std::sqrt(num);
  return den == 0.0 ? num : num / std::sqrt(den);
}

}  // namespace lsolve
