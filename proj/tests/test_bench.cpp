#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lsolve/bench.hpp"
#include "lsolve/errors.hpp"
#include "lsolve/geometry.hpp"
#include "lsolve/phi_iterator.hpp"
#include "lsolve/training.hpp"

using namespace lsolve;

namespace {

Problem gen(GeometryKind k, int n, std::uint64_t seed) {
  GeometrySpec s;
  s.kind = k;
  s.n = n;
  s.seed = seed;
  return generate(s);
}

}  // namespace

TEST_CASE("generated geometries") {
  for (int n : {17, 65}) {
    const Problem l = gen(GeometryKind::LShape, n, 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i < n / 2.0 && j >= n / 2.0) {
          CHECK_FALSE(l.mask().interior(i, j));
          CHECK(l.b()(i, j) == 0.0);
        }
    for (auto k : {GeometryKind::Square, GeometryKind::LShape, GeometryKind::Cylinders, GeometryKind::SquarePoisson})
      CHECK(4 * gen(k, n, 2).mask().interior_count() >= n * n);
  }
  CHECK(gen(GeometryKind::SquarePoisson, 17, 3).f().max_abs() == doctest::Approx(50.0 * 16 * 16));
  CHECK(gen(GeometryKind::Square, 17, 3).f().max_abs() == 0.0);
  CHECK(gen(GeometryKind::Cylinders, 33, 4) == gen(GeometryKind::Cylinders, 33, 4));
  CHECK_THROWS_AS(gen(GeometryKind::Square, 3, 1), InvalidInput);
  GeometrySpec big;
  big.kind = GeometryKind::Cylinders;
  big.n = 33;
  big.disk_radius = 0.3;
  CHECK_THROWS_AS(generate(big), InvalidInput);
  CHECK(parse_geometry_kind("poisson") == GeometryKind::SquarePoisson);
  CHECK_THROWS_AS(parse_geometry_kind("circle"), InvalidInput);
}

TEST_CASE("zero sides give a zero solution") {
  const Problem p = square_problem(17, {0.0, 0.0, 0.0, 0.0});
  CHECK(ground_truth(p).max_abs() == 0.0);
}

TEST_CASE("cylinder disks hold their constants in the solution") {
  const Problem p = gen(GeometryKind::Cylinders, 65, 5);
  const Field s = ground_truth(p);
  CHECK(residual_norms(p, s).interior <= 1e-8);
  const int c = static_cast<int>(0.25 * 64);
  CHECK_FALSE(p.mask().interior(c, c));
  CHECK(s(c, c) == p.b()(c, c));
  CHECK(s(c, c) == s(c + 1, c + 1));
  CHECK(s(c, c) != 0.0);
}

TEST_CASE("zero model benchmark row") {
  const CorrectionModel zero = init_model(ArchSpec::parse("conv3"), 0, Init::Zeros);
  BenchOptions opts;
  opts.suite = {GeometryKind::Square};
  opts.n = 17;
  const auto rows = run_benchmark(zero, opts);
  REQUIRE(rows.size() == 1);
  const BenchRow& r = rows[0];
  CHECK(r.converged);
  CHECK(r.steps_model == r.steps_base);
  CHECK(r.layers_ratio == doctest::Approx(4.0));
  CHECK(r.ops_ratio > 1.0);
  CHECK(r.baseline == "jacobi");
}

TEST_CASE("benchmark rows are reproducible and honest") {
  const CorrectionModel m = jacobi_cross_model();
  BenchOptions opts;
  opts.n = 33;
  opts.seed = 3;
  const auto a = run_benchmark(m, opts);
  const auto b = run_benchmark(m, opts);
  REQUIRE(a.size() == 4);
  std::stringstream sa, sb;
  write_bench_csv(sa, a);
  write_bench_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("model,baseline,setting,n,layers_model,layers_base,ops_model,ops_base,layers_ratio,ops_ratio,converged\n", 0) == 0);
  for (const auto& r : a) {
    CHECK(r.converged);
    CHECK(r.layers_ratio > 0.0);
    CHECK(r.model_boundary_violation == 0.0);
    CHECK(r.model_residual <= 10 * 0.01 * r.initial_residual);
    // two sweeps per step: same layer count as plain Jacobi up to rounding of the step count
    CHECK(std::abs(r.layers_model - r.layers_base) <= 1);
  }
}

TEST_CASE("uncertified models are refused") {
  CorrectionModel m = init_model(ArchSpec::parse("conv3"), 8);
  for (double& w : m.params()) w *= 100.0;
  CHECK_THROWS_AS(run_benchmark(m, BenchOptions{}), InvalidInput);
}

TEST_CASE("non-convergent rows omit the ratio") {
  BenchRow r;
  r.model = "conv3";
  r.baseline = "jacobi";
  r.setting = "square";
  r.n = 65;
  r.converged = false;
  std::stringstream ss;
  write_bench_csv(ss, {r});
  CHECK(ss.str().find("conv3,jacobi,square,65,0,0,0,0,,,0") != std::string::npos);
}

TEST_CASE("suite and baselines") {
  CHECK(parse_suite("all").size() == 4);
  CHECK(parse_suite("poisson") == std::vector<GeometryKind>{GeometryKind::SquarePoisson});
  CHECK(baseline_for(ArchSpec::parse("unet3"))->name() == "mg3");
  CHECK(bench_grid_size(ArchSpec::parse("unet2")) == 257);
  CHECK(train_grid_size(ArchSpec::parse("conv3")) == 17);
}
