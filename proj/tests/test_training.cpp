#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "helpers.hpp"
#include "lsolve/errors.hpp"
#include "lsolve/phi_iterator.hpp"
#include "lsolve/training.hpp"

using namespace lsolve;

namespace {

std::vector<TrainSample> make_batch(int n, int count, int k_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> k(1, k_max);
  std::vector<TrainSample> batch;
  for (int i = 0; i < count; ++i) {
    TrainSample s;
    s.problem = sample_square_problem(n, rng);
    s.u_star = ground_truth(s.problem);
    s.u0 = reset(testutil::noise(n, rng), s.problem);
    s.k = k(rng);
    batch.push_back(std::move(s));
  }
  return batch;
}

}  // namespace

TEST_CASE("superposed square solutions match direct solves") {
  SquareSolutionCache cache;
  for (int n : {9, 17, 65}) {
    const std::array<double, 4> sides{0.3, -0.7, 0.9, -0.1};
    const Field direct = ground_truth(square_problem(n, sides));
    CHECK((cache.solve(n, sides) - direct).max_abs() <= 1e-9);
  }
}

TEST_CASE("square problem corners follow side precedence") {
  const Problem p = square_problem(5, {1.0, 2.0, 3.0, 4.0});
  CHECK(p.b()(0, 0) == 1.0);
  CHECK(p.b()(0, 4) == 1.0);
  CHECK(p.b()(4, 0) == 2.0);
  CHECK(p.b()(2, 0) == 3.0);
  CHECK(p.b()(2, 4) == 4.0);
}

TEST_CASE("loss of the zero model equals plain jacobi error") {
  const auto batch = make_batch(9, 3, 5, 1);
  const CorrectionModel zero(ArchSpec::parse("conv3"));
  double want = 0.0;
  for (const auto& s : batch) {
    Field u = s.u0;
    for (int t = 0; t < s.k; ++t) u = jacobi_step(u, s.problem);
    const double e = (u - s.u_star).norm2();
    want += e * e / batch.size();
  }
  CHECK(loss(zero, batch) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("reverse-mode gradient matches central differences") {
  for (const char* name : {"conv3", "unet2"}) {
    const int n = 17;
    const auto batch = make_batch(n, 2, 6, 3);
    const CorrectionModel m = init_model(ArchSpec::parse(name), 4);
    const LossAndGrad lg = loss_and_grad(m, batch);
    CHECK(lg.loss == doctest::Approx(loss(m, batch)).epsilon(1e-12));
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, m.params().size() - 1);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t k = pick(rng);
      CorrectionModel plus = m, minus = m;
      plus.params()[k] += 1e-5;
      minus.params()[k] -= 1e-5;
      const double fd = (loss(plus, batch) - loss(minus, batch)) / 2e-5;
      CHECK(lg.grad[k] == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("batch validation") {
  const CorrectionModel m(ArchSpec::parse("conv1"));
  CHECK_THROWS_AS(loss(m, std::vector<TrainSample>{}), InvalidInput);
  auto batch = make_batch(9, 1, 1, 2);
  batch[0].k = 0;
  CHECK_THROWS_AS(loss(m, batch), InvalidInput);
}

TEST_CASE("adam minimizes a quadratic") {
  std::vector<double> x{3.0, -2.0};
  Adam adam(2, 0.05, 0.9, 0.999, 1e-8);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> g{2 * (x[0] - 1.0), 2 * (x[1] + 0.5)};
    adam.update(x, g);
  }
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(x[1] == doctest::Approx(-0.5).epsilon(1e-3));
}

TEST_CASE("training is deterministic and lowers the loss") {
  TrainConfig cfg = TrainConfig::defaults_for(ArchSpec::parse("conv3"));
  cfg.n = 9;
  cfg.steps = 300;
  cfg.k_max = 8;
  cfg.rho_every = 100;
  cfg.seed = 17;
  const TrainResult a = train(cfg);
  const TrainResult b = train(cfg);
  CHECK_FALSE(a.aborted);
  CHECK(a.model == b.model);
  std::stringstream sa, sb;
  write_model(sa, a.model);
  write_model(sb, b.model);
  CHECK(sa.str() == sb.str());
  CHECK(a.log.size() == 300);
  CHECK(a.log[99].rho.has_value());
  CHECK_FALSE(a.log[98].rho.has_value());
  CHECK(a.log.back().rho.has_value());
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 50; ++i) {
    early += a.log[i].loss;
    late += a.log[250 + i].loss;
  }
  CHECK(late < early);
  std::stringstream csv;
  write_train_log(csv, a.log);
  CHECK(csv.str().rfind("step,loss,rho_estimate,wall_seconds\n", 0) == 0);
}

TEST_CASE("training aborts on divergence") {
  TrainConfig cfg = TrainConfig::defaults_for(ArchSpec::parse("conv3"));
  cfg.n = 9;
  cfg.steps = 5;
  cfg.rho_every = 0;
  CorrectionModel start = init_model(cfg.arch, 1);
  for (double& w : start.params()) w *= 1000.0;
  const TrainResult r = train(cfg, start);
  CHECK(r.aborted);
  CHECK(r.abort_reason.find("step 1") == 0);
  CHECK(r.model == start);
}

TEST_CASE("config validation") {
  TrainConfig cfg = TrainConfig::defaults_for(ArchSpec::parse("unet2"));
  CHECK(cfg.n == 65);
  CHECK(cfg.steps == 50000);
  cfg.n = 16;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = TrainConfig{};
  cfg.batch = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = TrainConfig{};
  cfg.lr = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("sampled problems obey the maximum principle") {
  const Field c = ground_truth(square_problem(17, {0.4, 0.4, 0.4, 0.4}));
  CHECK((c - Field::square(17, 0.4)).max_abs() <= 1e-12);
  std::mt19937_64 a(3), b(3);
  CHECK(sample_square_problem(17, a) == sample_square_problem(17, b));
  for (int trial = 0; trial < 5; ++trial) {
    const Problem p = sample_square_problem(17, a);
    const Field s = ground_truth(p);
    double lo = 1e9, hi = -1e9;
    for (int j = 0; j < 17; ++j) {
      lo = std::min({lo, p.b()(0, j), p.b()(16, j), p.b()(j, 0), p.b()(j, 16)});
      hi = std::max({hi, p.b()(0, j), p.b()(16, j), p.b()(j, 0), p.b()(j, 16)});
    }
    for (int i = 1; i < 16; ++i)
      for (int j = 1; j < 16; ++j) {
        CHECK(s(i, j) >= lo - 1e-12);
        CHECK(s(i, j) <= hi + 1e-12);
      }
  }
}

TEST_CASE("starting at the solution costs nothing") {
  auto batch = make_batch(9, 3, 5, 8);
  for (auto& s : batch) s.u0 = s.u_star;
  const LossAndGrad lg = loss_and_grad(CorrectionModel(ArchSpec::parse("conv2")), batch);
  CHECK(lg.loss <= 1e-24);
  for (double g : lg.grad) CHECK(std::abs(g) <= 1e-12);
}

TEST_CASE("single step loss by hand") {
  auto batch = make_batch(9, 1, 1, 9);
  const CorrectionModel m = init_model(ArchSpec::parse("conv2"), 9);
  const TrainSample& s = batch[0];
  const Field v = jacobi_step(s.u0, s.problem);
  const Field u1 = v + s.problem.mask().masked(apply_H(m, v - s.u0, s.problem.mask()));
  const double e = (u1 - s.u_star).norm2();
  CHECK(loss(m, batch) == doctest::Approx(e * e).epsilon(1e-12));
}

TEST_CASE("batch gradient is the mean of sample gradients") {
  const auto batch = make_batch(9, 4, 6, 10);
  const CorrectionModel m = init_model(ArchSpec::parse("unet2"), 10);
  const auto whole = grad(m, batch);
  std::vector<double> mean(whole.size(), 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto g = grad(m, std::span<const TrainSample>(&batch[i], 1));
    for (std::size_t k = 0; k < g.size(); ++k) mean[k] += g[k] / batch.size();
  }
  for (std::size_t k = 0; k < whole.size(); ++k) CHECK(whole[k] == doctest::Approx(mean[k]).epsilon(1e-10));
}

TEST_CASE("zero steps return the initial model") {
  TrainConfig cfg = TrainConfig::defaults_for(ArchSpec::parse("conv3"));
  cfg.steps = 0;
  cfg.seed = 4;
  const TrainResult r = train(cfg);
  CHECK(r.model == init_model(cfg.arch, 4));
  CHECK(r.log.empty());
}
