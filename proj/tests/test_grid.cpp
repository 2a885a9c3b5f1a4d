#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lsolve/errors.hpp"
#include "lsolve/grid.hpp"
#include "lsolve/iterators.hpp"

using namespace lsolve;

TEST_CASE("field arithmetic") {
  Field a(2, 3, 1.0), b(2, 3, 2.0);
  CHECK((a + b)(1, 2) == 3.0);
  CHECK((b - a)(0, 0) == 1.0);
  CHECK((2.0 * b)(0, 1) == 4.0);
  a.add_scaled(0.5, b);
  CHECK(a(1, 1) == 2.0);
  CHECK(Field(1, 2, std::vector<double>{3.0, 4.0}).norm2() == doctest::Approx(5.0));
  CHECK_THROWS_AS(a += Field(3, 2), InvalidInput);
  CHECK_THROWS_AS(Field(2, 2, std::vector<double>{1.0}), InvalidInput);
  Field c(1, 1, NAN);
  CHECK_FALSE(c.all_finite());
}

TEST_CASE("mask invariants") {
  CHECK(GeometryMask::square(5).interior_count() == 9);
  std::vector<std::uint8_t> bits(25, 0);
  CHECK_THROWS_AS(GeometryMask(5, bits), InvariantViolation);  // no interior
  bits[12] = 1;
  CHECK_NOTHROW(GeometryMask(5, bits));
  bits[0] = 1;
  CHECK_THROWS_AS(GeometryMask(5, bits), InvariantViolation);  // frame cell
  bits[0] = 2;
  CHECK_THROWS_AS(GeometryMask(5, bits), InvariantViolation);
  CHECK_THROWS(GeometryMask(2, std::vector<std::uint8_t>(4, 0)));
  CHECK_THROWS(GeometryMask(5, std::vector<std::uint8_t>(24, 0)));
}

TEST_CASE("problem zeroes b on interior cells") {
  const Problem p(GeometryMask::square(5), Field::square(5, 3.0), Field::square(5));
  CHECK(p.b()(2, 2) == 0.0);
  CHECK(p.b()(0, 2) == 3.0);
  CHECK(p.h() == doctest::Approx(0.25));
  CHECK_THROWS(Problem(GeometryMask::square(5), Field::square(4), Field::square(5)));
  Field bad = Field::square(5);
  bad(2, 2) = INFINITY;
  CHECK_THROWS(Problem(GeometryMask::square(5), Field::square(5), bad));
}

TEST_CASE("laplacian is exact on quadratics") {
  const int n = 9;
  const double h = 1.0 / (n - 1);
  Field u = Field::square(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) u(i, j) = (i * h) * (i * h) + 3 * (j * h) * (j * h) + i * j * h * h;
  const Field l = laplacian_apply(u, h);
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j) CHECK(l(i, j) == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(l(0, 3) == 0.0);
  CHECK_THROWS_AS(laplacian_apply(Field::square(2), 1.0), InvalidInput);
}

TEST_CASE("reset and residual norms") {
  const Problem p = testutil::random_square(9, 3);
  Field u = Field::square(9, 5.0);
  const Field r = reset(u, p);
  CHECK(r(4, 4) == 5.0);
  CHECK(r(0, 4) == p.b()(0, 4));
  CHECK(residual_norms(p, r).boundary == 0.0);
  CHECK(residual_norms(p, u).boundary > 0.0);
  // a field satisfying the discrete system has zero residual
  const Field s = ground_truth(p);
  CHECK(residual_norms(p, s).interior <= 1e-8);
  CHECK(residual_norms(p, s).boundary == 0.0);
}

TEST_CASE("residual matches a dense evaluation on random geometries") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6 + trial % 10;
    const Problem p = testutil::random_geometry(n, rng);
    const Field u = testutil::noise(n, rng);
    double want_in = 0.0, want_bd = 0.0;
    const double h2 = p.h() * p.h();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (p.mask().interior(i, j)) {
          const double lap = (u(i - 1, j) + u(i + 1, j) + u(i, j - 1) + u(i, j + 1) - 4 * u(i, j)) / h2;
          want_in = std::max(want_in, std::abs(lap - p.f()(i, j)));
        } else {
          want_bd = std::max(want_bd, std::abs(u(i, j) - p.b()(i, j)));
        }
      }
    const ResidualNorms r = residual_norms(p, u);
    CHECK(r.interior == doctest::Approx(want_in).epsilon(1e-12));
    CHECK(r.boundary == doctest::Approx(want_bd).epsilon(1e-12));
  }
}

TEST_CASE("relative error") {
  Field a(1, 2, std::vector<double>{3.0, 4.0});
  CHECK(relative_error(a, a) == 0.0);
  CHECK(relative_error(a, Field(1, 2)) == doctest::Approx(5.0));
  CHECK(relative_error(Field(1, 2), a) == doctest::Approx(1.0));
}
