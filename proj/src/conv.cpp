#include "lsolve/conv.hpp"

#include <algorithm>

#include "lsolve/errors.hpp"

namespace lsolve {

Tensor Tensor::from_field(const Field& u) {
  if (u.rows() != u.cols()) throw InvalidInput("tensor fields must be square");
  Tensor t(1, u.rows());
  std::copy(u.data(), u.data() + u.size(), t.data.begin());
  return t;
}

Field Tensor::to_field() const {
  if (channels != 1) throw InvalidInput("only single-channel tensors convert to fields");
  return Field(n, n, data);
}

namespace {

// Output indices i in [lo, hi] whose source s*i + a - 1 lies inside [0, n).
struct Range {
  int lo;
  int hi;
};

Range valid_range(int a, int stride, int n_src, int n_out) {
  // s*i + a - 1 >= 0  and  s*i + a - 1 <= n_src - 1
  int lo = 0;
  while (lo < n_out && stride * lo + a - 1 < 0) ++lo;
  int hi = n_out - 1;
  while (hi >= 0 && stride * hi + a - 1 > n_src - 1) --hi;
  return {lo, hi};
}

inline const double* kernel(std::span<const double> w, int o, int c, int out_ch, int in_ch, bool swap) {
  const std::size_t idx = swap ? static_cast<std::size_t>(c) * out_ch + o : static_cast<std::size_t>(o) * in_ch + c;
  return w.data() + 9 * idx;
}

}  // namespace

void conv_gather(const Tensor& x, std::span<const double> w, int stride, bool swap_channels, Tensor& y) {
  const int in_ch = x.channels, out_ch = y.channels;
  if (w.size() != static_cast<std::size_t>(9) * in_ch * out_ch) throw InvalidInput("conv weight size mismatch");
  const int expected = stride == 1 ? x.n : coarse_size(x.n);
  if (y.n != expected) throw InvalidInput("conv output size mismatch");
  const int n = x.n, m = y.n;
  for (int o = 0; o < out_ch; ++o) {
    double* yp = y.plane(o);
    for (int c = 0; c < in_ch; ++c) {
      const double* xp = x.plane(c);
      const double* k = kernel(w, o, c, out_ch, in_ch, swap_channels);
      for (int a = 0; a < 3; ++a) {
        const Range ri = valid_range(a, stride, n, m);
        for (int b = 0; b < 3; ++b) {
          const double wk = k[3 * a + b];
          if (wk == 0.0) continue;
          const Range rj = valid_range(b, stride, n, m);
          for (int i = ri.lo; i <= ri.hi; ++i) {
            double* yr = yp + static_cast<std::size_t>(i) * m;
            const double* xr = xp + static_cast<std::size_t>(stride * i + a - 1) * n + (b - 1);
            if (stride == 1) {
              for (int j = rj.lo; j <= rj.hi; ++j) yr[j] += wk * xr[j];
            } else {
              for (int j = rj.lo; j <= rj.hi; ++j) yr[j] += wk * xr[2 * j];
            }
          }
        }
      }
    }
  }
}

void conv_scatter(const Tensor& x, std::span<const double> w, int stride, bool swap_channels, Tensor& y) {
  const int in_ch = x.channels, out_ch = y.channels;
  if (w.size() != static_cast<std::size_t>(9) * in_ch * out_ch) throw InvalidInput("conv weight size mismatch");
  const int expected = stride == 1 ? x.n : fine_size(x.n);
  if (y.n != expected) throw InvalidInput("transposed conv output size mismatch");
  const int m = x.n, n = y.n;
  for (int o = 0; o < out_ch; ++o) {
    double* yp = y.plane(o);
    for (int c = 0; c < in_ch; ++c) {
      const double* xp = x.plane(c);
      const double* k = kernel(w, o, c, out_ch, in_ch, swap_channels);
      for (int a = 0; a < 3; ++a) {
        const Range ri = valid_range(a, stride, n, m);
        for (int b = 0; b < 3; ++b) {
          const double wk = k[3 * a + b];
          if (wk == 0.0) continue;
          const Range rj = valid_range(b, stride, n, m);
          for (int i = ri.lo; i <= ri.hi; ++i) {
            const double* xr = xp + static_cast<std::size_t>(i) * m;
            double* yr = yp + static_cast<std::size_t>(stride * i + a - 1) * n + (b - 1);
            if (stride == 1) {
              for (int j = rj.lo; j <= rj.hi; ++j) yr[j] += wk * xr[j];
            } else {
              for (int j = rj.lo; j <= rj.hi; ++j) yr[2 * j] += wk * xr[j];
            }
          }
        }
      }
    }
  }
}

void conv_correlate(const Tensor& coarse, const Tensor& fine, int stride, std::span<double> g) {
  const int P = coarse.channels, Q = fine.channels;
  if (g.size() != static_cast<std::size_t>(9) * P * Q) throw InvalidInput("gradient buffer size mismatch");
  const int m = coarse.n, n = fine.n;
  for (int p = 0; p < P; ++p) {
    const double* cp = coarse.plane(p);
    for (int q = 0; q < Q; ++q) {
      const double* fp = fine.plane(q);
      double* gk = g.data() + 9 * (static_cast<std::size_t>(p) * Q + q);
      for (int a = 0; a < 3; ++a) {
        const Range ri = valid_range(a, stride, n, m);
        for (int b = 0; b < 3; ++b) {
          const Range rj = valid_range(b, stride, n, m);
          double acc = 0.0;
          for (int i = ri.lo; i <= ri.hi; ++i) {
            const double* cr = cp + static_cast<std::size_t>(i) * m;
            const double* fr = fp + static_cast<std::size_t>(stride * i + a - 1) * n + (b - 1);
            if (stride == 1) {
              for (int j = rj.lo; j <= rj.hi; ++j) acc += cr[j] * fr[j];
            } else {
              for (int j = rj.lo; j <= rj.hi; ++j) acc += cr[j] * fr[2 * j];
            }
          }
          gk[3 * a + b] += acc;
        }
      }
    }
  }
}

}  // namespace lsolve
