#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lsolve/grid.hpp"

namespace lsolve {

/// Multi-channel square activation, layout [channel][row][col].
struct Tensor {
  int channels = 0;
  int n = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int channels_, int n_) : channels(channels_), n(n_), data(static_cast<std::size_t>(channels_) * n_ * n_, 0.0) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(n) * n; }
  double* plane(int c) { return data.data() + c * plane_size(); }
  const double* plane(int c) const { return data.data() + c * plane_size(); }

  static Tensor from_field(const Field& u);
  Field to_field() const;
};

/// Grid size after a stride-2 layer: n = 2m - 1 maps to m.
inline int coarse_size(int n) { return (n + 1) / 2; }
inline int fine_size(int m) { return 2 * m - 1; }

// 3x3 kernels are stored [out][in][3][3]; zero padding everywhere.
//
// gather:  y[o](i,j)      += sum_c sum_ab W(o,c)[a][b] * x[c](s*i+a-1, s*j+b-1)
// scatter: y[o](s*i+a-1, s*j+b-1) += W(o,c)[a][b] * x[c](i,j)
//
// With swap_channels the weights are read as W[c][o], which turns the adjoint of
// a gather layer into a scatter with the same weights and vice versa.

void conv_gather(const Tensor& x, std::span<const double> w, int stride, bool swap_channels, Tensor& y);
void conv_scatter(const Tensor& x, std::span<const double> w, int stride, bool swap_channels, Tensor& y);

/// g[p][q][a][b] += sum_ij coarse[p](i,j) * fine[q](s*i+a-1, s*j+b-1)
void conv_correlate(const Tensor& coarse, const Tensor& fine, int stride, std::span<double> g);

}  // namespace lsolve
