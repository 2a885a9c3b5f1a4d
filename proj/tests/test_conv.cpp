#include <doctest.h>

#include <random>

#include "lsolve/conv.hpp"

using namespace lsolve;

namespace {

Tensor random_tensor(int c, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Tensor t(c, n);
  for (double& v : t.data) v = d(rng);
  return t;
}

std::vector<double> random_weights(std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<double> w(k);
  for (double& v : w) v = d(rng);
  return w;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

}  // namespace

TEST_CASE("grid size helpers") {
  CHECK(coarse_size(17) == 9);
  CHECK(fine_size(9) == 17);
}

TEST_CASE("identity kernel") {
  std::mt19937_64 rng(1);
  const Tensor x = random_tensor(1, 6, rng);
  std::vector<double> w(9, 0.0);
  w[4] = 1.0;
  Tensor y(1, 6);
  conv_gather(x, w, 1, false, y);
  CHECK(y.data == x.data);
}

TEST_CASE("scatter with swapped channels is the adjoint of gather") {
  std::mt19937_64 rng(2);
  for (int stride : {1, 2}) {
    const int n = 9, m = stride == 1 ? n : coarse_size(n);
    const int ci = 2, co = 3;
    const auto w = random_weights(9 * ci * co, rng);
    const Tensor x = random_tensor(ci, n, rng);
    const Tensor y = random_tensor(co, m, rng);
    Tensor ax(co, m), aty(ci, n);
    conv_gather(x, w, stride, false, ax);
    conv_scatter(y, w, stride, true, aty);
    CHECK(dot(ax, y) == doctest::Approx(dot(x, aty)).epsilon(1e-12));
  }
}

TEST_CASE("correlate is the weight gradient of gather") {
  std::mt19937_64 rng(3);
  for (int stride : {1, 2}) {
    const int n = 7, m = stride == 1 ? n : coarse_size(n);
    const auto w = random_weights(9 * 2, rng);
    const Tensor x = random_tensor(2, n, rng);
    const Tensor gy = random_tensor(1, m, rng);
    std::vector<double> g(w.size(), 0.0);
    conv_correlate(gy, x, stride, g);
    // <gather_w(x), gy> is linear in w
    for (std::size_t k = 0; k < w.size(); ++k) {
      std::vector<double> e(w.size(), 0.0);
      e[k] = 1.0;
      Tensor y(1, m);
      conv_gather(x, e, stride, false, y);
      CHECK(g[k] == doctest::Approx(dot(y, gy)).epsilon(1e-12));
    }
  }
}
