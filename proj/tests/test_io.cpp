#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "lsolve/errors.hpp"
#include "lsolve/geometry.hpp"
#include "lsolve/grid_io.hpp"

using namespace lsolve;

TEST_CASE("field round trip is bit exact") {
  std::mt19937_64 rng(5);
  const Field u = testutil::noise(7, rng, 1e3);
  std::stringstream ss;
  write_field(ss, u);
  CHECK(read_field(ss) == u);
}

TEST_CASE("problem round trip is bit exact") {
  for (auto kind : {GeometryKind::Square, GeometryKind::LShape, GeometryKind::Cylinders, GeometryKind::SquarePoisson}) {
    GeometrySpec spec;
    spec.kind = kind;
    spec.n = 17;
    spec.seed = 9;
    const Problem p = generate(spec);
    std::stringstream ss;
    write_problem(ss, p);
    CHECK(read_problem(ss) == p);
  }
}

TEST_CASE("malformed problem files") {
  SUBCASE("truncated") {
    std::stringstream ss("5\n0 0 0 0 0\n");
    CHECK_THROWS_AS(read_problem(ss), ParseError);
  }
  SUBCASE("bad number reports its line") {
    std::stringstream ss("3 3\n1 2 3\n4 x 6\n7 8 9\n");
    try {
      read_field(ss);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("short row") {
    std::stringstream ss("2 2\n1 2\n3\n");
    CHECK_THROWS_AS(read_field(ss), ParseError);
  }
  SUBCASE("mask frame violation") {
    const Problem p = testutil::random_square(5, 1);
    std::stringstream out;
    write_problem(out, p);
    std::string text = out.str();
    text.replace(text.find("0 0 0 0 0"), 1, "1");
    std::stringstream in(text);
    CHECK_THROWS_AS(read_problem(in), InvariantViolation);
  }
  SUBCASE("missing file") { CHECK_THROWS(load_problem("/nonexistent/problem.txt")); }
}
