#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "lsolve/bench.hpp"
#include "lsolve/correction_model.hpp"
#include "lsolve/errors.hpp"
#include "lsolve/geometry.hpp"
#include "lsolve/grid_io.hpp"
#include "lsolve/iterators.hpp"
#include "lsolve/phi_iterator.hpp"
#include "lsolve/spectral.hpp"
#include "lsolve/training.hpp"

using namespace lsolve;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

struct Args {
  std::string kind = "square";
  int n = 17;
  std::uint64_t seed = 0;
  std::string out;
  std::string problem;
  std::string solver;
  std::string model;
  double tol = 1e-2;
  long max_steps = 100000;
  std::string mode;
  std::string arch = "conv3";
  long steps = -1;
  int batch = 8;
  double lr = 1e-3;
  std::string suite = "all";
  std::string report;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write " + path);
  return os;
}

/// jacobi, mg<d>, or a learned architecture name whose weights come from --model.
std::unique_ptr<AffineIterator> make_solver(const std::string& solver, const std::string& model_path) {
  if (solver.empty() && model_path.empty()) return std::make_unique<JacobiIterator>();
  if (solver == "jacobi") return std::make_unique<JacobiIterator>();
  if (solver.size() >= 3 && solver.rfind("mg", 0) == 0) {
    const int depth = std::stoi(solver.substr(2));
    if (depth < 1) throw InvalidInput("multigrid depth must be >= 1");
    return std::make_unique<MultigridIterator>(MultigridConfig{depth, 2, 2});
  }
  if (model_path.empty()) throw InvalidInput("solver '" + solver + "' needs --model");
  CorrectionModel m = load_model(model_path);
  if (!solver.empty() && !(ArchSpec::parse(solver) == m.arch()))
    throw InvalidInput("model file holds " + m.arch().name() + ", not " + solver);
  return std::make_unique<PhiIterator>(make_phi(std::move(m)));
}

int cmd_gen(const Args& a) {
  GeometrySpec spec;
  spec.kind = parse_geometry_kind(a.kind);
  spec.n = a.n;
  spec.seed = a.seed;
  const Problem p = generate(spec);
  if (a.out.empty()) {
    write_problem(std::cout, p);
  } else {
    save_problem(a.out, p);
  }
  return kExitOk;
}

int cmd_solve(const Args& a) {
  if (a.problem.empty()) throw InvalidInput("solve needs --problem");
  const Problem p = load_problem(a.problem);
  const auto it = make_solver(a.solver, a.model);
  if (auto* phi = dynamic_cast<const PhiIterator*>(it.get())) phi->model().check_grid(p.n());
  if (auto* mg = dynamic_cast<const MultigridIterator*>(it.get())) mg->config().validate(p.n());
  const Field u_star = ground_truth(p);
  SolveOptions so;
  so.threshold = a.tol;
  so.max_steps = a.max_steps;
  const auto [u, rep] = solve_to_tol(*it, p, reset(Field::square(p.n()), p), so, &u_star);
  std::cout << "solver,iterations,conv_layers,mul_adds,final_relative_error,converged\n"
            << it->name() << ',' << rep.iterations << ',' << rep.conv_layers << ',' << rep.mul_adds << ','
            << format_double(rep.final_relative_error) << ',' << (rep.converged ? 1 : 0) << '\n';
  if (!a.out.empty()) save_field(a.out, u);
  return rep.converged ? kExitOk : kExitNonConvergence;
}

int cmd_spectral(const Args& a) {
  GeometrySpec spec;
  spec.kind = parse_geometry_kind(a.kind);
  spec.n = a.n;
  spec.seed = a.seed;
  const Problem p = generate(spec);
  const auto it = make_solver(a.solver, a.model);
  if (auto* phi = dynamic_cast<const PhiIterator*>(it.get())) phi->model().check_grid(p.n());
  if (auto* mg = dynamic_cast<const MultigridIterator*>(it.get())) mg->config().validate(p.n());
  const SpectralMode mode =
      a.mode.empty() ? (p.n() <= kDenseLimit ? SpectralMode::Dense : SpectralMode::Power) : parse_mode(a.mode);
  const ValidityVerdict v = certify(*it, p, mode);
  std::cout << "iterator,geometry,n,mode,rho,norm,fixed_point_residual,valid\n"
            << it->name() << ',' << to_string(spec.kind) << ',' << p.n() << ',' << to_string(mode) << ','
            << format_double(v.rho_estimate) << ',';
  if (mode == SpectralMode::Dense) std::cout << format_double(spectral_norm(LinearPart::of(*it, p)));
  std::cout << ',' << format_double(v.fixed_point_residual) << ',' << (v.valid ? 1 : 0) << '\n';
  return kExitOk;
}

int cmd_train(const Args& a, bool n_given) {
  if (a.out.empty()) throw InvalidInput("train needs --out");
  // "zeros" is a one-layer model with all-zero kernels, i.e. plain Jacobi
  const bool zeros = a.arch == "zeros";
  const ArchSpec arch = zeros ? ArchSpec::parse("conv1") : ArchSpec::parse(a.arch);
  TrainConfig cfg = TrainConfig::defaults_for(arch);
  if (n_given) cfg.n = a.n;
  if (a.steps >= 0) cfg.steps = a.steps;
  cfg.batch = a.batch;
  cfg.lr = a.lr;
  cfg.seed = a.seed;
  const CorrectionModel start = init_model(arch, a.seed, zeros ? Init::Zeros : Init::Gaussian);
  const long every = std::max(1L, cfg.steps / 20);
  const TrainResult r = train(cfg, start, [&](const TrainLogRow& row) {
    if (row.step % every == 0 || row.rho)
      std::fprintf(stderr, "step %ld loss %.6g%s\n", row.step, row.loss,
                   row.rho ? (" rho " + format_double(*row.rho)).c_str() : "");
  });
  save_model(a.out, r.model);
  if (!a.report.empty()) {
    auto os = open_out(a.report);
    write_train_log(os, r.log);
  }
  if (r.aborted) {
    std::fprintf(stderr, "training aborted: %s\n", r.abort_reason.c_str());
    return kExitNonConvergence;
  }
  return kExitOk;
}

int cmd_bench(const Args& a) {
  if (a.model.empty()) throw InvalidInput("bench needs --model");
  const CorrectionModel m = load_model(a.model);
  BenchOptions opts;
  opts.suite = parse_suite(a.suite);
  opts.threshold = a.tol;
  opts.max_steps = a.max_steps;
  opts.seed = a.seed;
  const auto rows = run_benchmark(m, opts);
  write_bench_csv(std::cout, rows);
  if (!a.report.empty()) {
    auto os = open_out(a.report);
    write_bench_csv(os, rows);
  }
  for (const auto& r : rows)
    if (!r.converged) return kExitNonConvergence;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned corrections for iterative Poisson solvers"};
  app.require_subcommand(1);
  Args a;

  auto* gen = app.add_subcommand("gen", "generate a problem file");
  gen->add_option("--kind", a.kind, "square|lshape|cylinders|square_poisson");
  gen->add_option("--n", a.n, "grid size");
  gen->add_option("--seed", a.seed);
  gen->add_option("--out", a.out, "output path (default stdout)");

  auto* solve = app.add_subcommand("solve", "solve a problem file and report its cost");
  solve->add_option("--problem", a.problem)->required();
  solve->add_option("--solver", a.solver, "jacobi|mg2|mg3|conv1..4|unet2|unet3");
  solve->add_option("--model", a.model, "model file for learned solvers");
  solve->add_option("--tol", a.tol, "relative error threshold");
  solve->add_option("--max-steps", a.max_steps);
  solve->add_option("--out", a.out, "write the final field");
  solve->add_option("--seed", a.seed);

  auto* spectral = app.add_subcommand("spectral", "spectral radius and validity of an iterator");
  spectral->add_option("--solver", a.solver);
  spectral->add_option("--model", a.model);
  spectral->add_option("--kind", a.kind);
  spectral->add_option("--n", a.n);
  spectral->add_option("--mode", a.mode, "dense|power");
  spectral->add_option("--seed", a.seed);

  auto* train = app.add_subcommand("train", "train a correction model");
  auto* train_n = train->add_option("--n", a.n, "training grid size");
  train->add_option("--arch", a.arch, "conv1..4|unet2|unet3|zeros");
  train->add_option("--steps", a.steps);
  train->add_option("--batch", a.batch);
  train->add_option("--lr", a.lr);
  train->add_option("--seed", a.seed);
  train->add_option("--out", a.out, "model file")->required();
  train->add_option("--report", a.report, "training log CSV");

  auto* bench = app.add_subcommand("bench", "cost ratios against the baseline on the geometry suite");
  bench->add_option("--model", a.model)->required();
  bench->add_option("--suite", a.suite, "all|square|lshape|cylinders|poisson");
  bench->add_option("--tol", a.tol, "fraction of the initial error");
  bench->add_option("--max-steps", a.max_steps);
  bench->add_option("--seed", a.seed);
  bench->add_option("--report", a.report, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  if (bench->parsed() && a.max_steps == 100000) a.max_steps = BenchOptions{}.max_steps;

  try {
    if (gen->parsed()) return cmd_gen(a);
    if (solve->parsed()) return cmd_solve(a);
    if (spectral->parsed()) return cmd_spectral(a);
    if (train->parsed()) return cmd_train(a, train_n->count() > 0);
    if (bench->parsed()) return cmd_bench(a);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
