#pragma once

#include <random>

#include "lsolve/grid.hpp"
#include "lsolve/training.hpp"

namespace testutil {

inline lsolve::Field noise(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  lsolve::Field u = lsolve::Field::square(n);
  for (double& v : u.values()) v = d(rng);
  return u;
}

inline lsolve::Problem random_square(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return lsolve::sample_square_problem(n, rng);
}

/// Square with a random rectangular notch and a random disk cut out; boundary
/// cells get random values and f is random.
inline lsolve::Problem random_geometry(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pos(1, n - 2);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n) * n, 0);
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j) bits[static_cast<std::size_t>(i) * n + j] = 1;
  const int i0 = pos(rng), j0 = pos(rng);
  const int i1 = std::min(n - 2, i0 + n / 4), j1 = std::min(n - 2, j0 + n / 4);
  for (int i = i0; i <= i1; ++i)
    for (int j = j0; j <= j1; ++j) bits[static_cast<std::size_t>(i) * n + j] = 0;
  const double ci = pos(rng), cj = pos(rng), r = 1.0 + (n / 8) * std::uniform_real_distribution<double>(0, 1)(rng);
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j)
      if ((i - ci) * (i - ci) + (j - cj) * (j - cj) <= r * r) bits[static_cast<std::size_t>(i) * n + j] = 0;
  bits[static_cast<std::size_t>(n / 2) * n + 1] = 1;  // never empty
  lsolve::Field b = lsolve::Field::square(n), f = lsolve::Field::square(n);
  for (double& v : b.values()) v = val(rng);
  for (double& v : f.values()) v = val(rng);
  return lsolve::Problem(lsolve::GeometryMask(n, std::move(bits)), std::move(b), std::move(f));
}

}  // namespace testutil
