#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lsolve {

/// Real-valued grid function stored row-major.
class Field {
 public:
  Field() = default;
  Field(int rows, int cols, double fill = 0.0);
  Field(int rows, int cols, std::vector<double> values);

  static Field square(int n, double fill = 0.0) { return Field(n, n, fill); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Field& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
  bool all_finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

  /// this += s * other
  Field& add_scaled(double s, const Field& other);

  double norm2() const;
  double max_abs() const;

  bool operator==(const Field& other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Interior/boundary indicator: 1 = interior (solved for), 0 = Dirichlet cell.
/// The outermost frame is always 0 and at least one interior cell exists.
class GeometryMask {
 public:
  GeometryMask() = default;
  GeometryMask(int n, std::vector<std::uint8_t> bits);

  /// Square domain: frame is boundary, everything else interior.
  static GeometryMask square(int n);

  int n() const { return n_; }
  bool interior(int i, int j) const { return bits_[static_cast<std::size_t>(i) * n_ + j] != 0; }
  std::uint8_t bit(std::size_t idx) const { return bits_[idx]; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  int interior_count() const { return interior_count_; }

  /// Multiplies by diag(e): boundary cells become 0.
  void apply(Field& u) const;
  Field masked(Field u) const {
    apply(u);
    return u;
  }

  bool operator==(const GeometryMask& other) const { return n_ == other.n_ && bits_ == other.bits_; }

 private:
  int n_ = 0;
  int interior_count_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// One discretized Dirichlet problem  lap(u) = f  on interior cells, u = b elsewhere.
class Problem {
 public:
  Problem() = default;
  /// b is zeroed on interior cells. A non-positive h selects 1/(n-1).
  Problem(GeometryMask mask, Field b, Field f, double h = 0.0);

  int n() const { return mask_.n(); }
  double h() const { return h_; }
  const GeometryMask& mask() const { return mask_; }
  const Field& b() const { return b_; }
  const Field& f() const { return f_; }

  /// Same geometry with f = 0, b = 0. Its iterators are purely linear.
  Problem homogeneous() const;
  Problem with_data(Field b, Field f) const { return Problem(mask_, std::move(b), std::move(f), h_); }

  bool operator==(const Problem& other) const = default;

 private:
  GeometryMask mask_;
  Field b_;
  Field f_;
  double h_ = 0.0;
};

struct CostReport {
  long iterations = 0;
  long conv_layers = 0;
  long long mul_adds = 0;
  double final_relative_error = 0.0;
  bool converged = false;
};

/// 5-point Laplacian (u[i-1,j] + u[i+1,j] + u[i,j-1] + u[i,j+1] - 4u[i,j]) / h^2;
/// frame cells are 0.
Field laplacian_apply(const Field& u, double h);

/// Interior cells keep u, all other cells take b.
Field reset(const Field& u, const Problem& p);

struct ResidualNorms {
  double interior = 0.0;  // max |lap(u) - f| over interior cells
  double boundary = 0.0;  // max |u - b| over boundary cells
};

ResidualNorms residual_norms(const Problem& p, const Field& u);

/// ||u - u*||_2 / ||u*||_2, or the absolute error when u* = 0.
double relative_error(const Field& u, const Field& u_star);

}  // namespace lsolve
