// Command-line front-end for the random-parameter LQ toolkit.
//
// Subcommands: solve-are, eval-cost, grad-exact, grad-estimate, train,
// bounds, bench, gen-problem.  Exit codes: 0 success, 2 configuration
// error, 3 numerical failure.  Thread count comes from --threads or the
// RPLQ_THREADS environment variable.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include "rplq/rplq.hpp"

namespace {

using namespace rplq;

Matrix load_policy(const std::string& spec, const Dims& dims) {
  if (spec.empty() || spec == "zero") return Matrix::Zero(dims.m, dims.n);
  std::ifstream in(spec);
  if (!in) throw ConfigError("cannot open policy file: " + spec);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in policy file " + spec + ": " + e.what());
  }
  Matrix L = io_detail::matrix_from_json(j.is_object() ? j.at("L") : j,
                                         "policy");
  if (L.rows() != dims.m || L.cols() != dims.n)
    throw ConfigError("policy shape does not match problem dims");
  return L;
}

void emit(const json& j, const std::string& out_path) {
  std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text_atomic(out_path, text);
}

StepRule make_rule(const std::string& name, double eta, double dim_a,
                   double dim_b) {
  if (name == "constant") return StepRule::constant(eta);
  if (name == "diminishing") return StepRule::diminishing(dim_a, dim_b);
  if (name == "armijo") return StepRule::armijo(eta);
  throw ConfigError("unknown step rule: " + name);
}

json run_config_json(const std::string& problem, const std::string& mode,
                     const StepRule& rule, int iters, int N, int l, double r,
                     int seeds, std::uint64_t seed, const std::string& out) {
  return {{"problem", problem},
          {"mode", mode},
          {"step_rule", rule.name()},
          {"eta", rule.eta},
          {"dim_a", rule.dim_a},
          {"dim_b", rule.dim_b},
          {"iters", iters},
          {"N", N},
          {"l", l},
          {"r", r},
          {"seeds", seeds},
          {"master_seed", seed},
          {"output_dir", out}};
}

int run(int argc, char** argv) {
  CLI::App app{"Policy gradient toolkit for LQ control with random parameters"};
  app.require_subcommand(1);

  int threads = 0;  // 0 = RPLQ_THREADS or hardware default
  app.add_option("--threads", threads, "worker threads (0 = auto)");

  std::string problem_path, policy_spec, out_path;
  std::uint64_t seed = 0;
  int nodes_per_dim = 4;

  auto add_common = [&](CLI::App* sub, bool with_policy = true) {
    sub->add_option("--problem", problem_path, "problem JSON file")
        ->required();
    if (with_policy)
      sub->add_option("--policy", policy_spec,
                      "policy JSON file ('zero' = zero gain)");
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--nodes-per-dim", nodes_per_dim,
                    "quadrature nodes per noise dimension");
  };

  // solve-are
  double tol = 1e-12;
  int max_iter = 100000;
  auto* are_cmd = app.add_subcommand("solve-are", "solve the stochastic ARE");
  add_common(are_cmd, false);
  are_cmd->add_option("--tol", tol, "fixed-point tolerance");
  are_cmd->add_option("--max-iter", max_iter, "iteration cap");

  // eval-cost
  auto* cost_cmd = app.add_subcommand("eval-cost", "exact cost of a policy");
  add_common(cost_cmd);

  // grad-exact
  auto* gexact_cmd =
      app.add_subcommand("grad-exact", "exact gradient of a policy");
  add_common(gexact_cmd);

  // grad-estimate
  int N = 500, l = 30;
  double r = 0.1;
  auto* gest_cmd = app.add_subcommand("grad-estimate",
                                      "zeroth-order gradient estimate");
  add_common(gest_cmd);
  gest_cmd->add_option("--N", N, "rollouts per estimate");
  gest_cmd->add_option("--l", l, "rollout horizon");
  gest_cmd->add_option("--r", r, "exploration radius");

  // train
  std::string mode = "exact", rule_name = "constant";
  double eta = 1e-2, dim_a = 500.0, dim_b = 5.0;
  int iters = 100, seeds = 1;
  auto* train_cmd = app.add_subcommand("train", "gradient descent");
  add_common(train_cmd);
  train_cmd->add_option("--mode", mode, "exact | model-free")
      ->check(CLI::IsMember({"exact", "model-free"}));
  train_cmd->add_option("--step-rule", rule_name,
                        "constant | diminishing | armijo");
  train_cmd->add_option("--eta", eta, "step size (constant / armijo initial)");
  train_cmd->add_option("--dim-a", dim_a, "diminishing rule offset");
  train_cmd->add_option("--dim-b", dim_b, "diminishing rule slope");
  train_cmd->add_option("--iters", iters, "iterations");
  train_cmd->add_option("--N", N, "rollouts per estimate (model-free)");
  train_cmd->add_option("--l", l, "rollout horizon (model-free)");
  train_cmd->add_option("--r", r, "exploration radius (model-free)");
  train_cmd->add_option("--seeds", seeds, "replications (model-free)");

  // bounds
  BoundsInputs binputs;
  int bern_trials = 2000;
  auto* bounds_cmd =
      app.add_subcommand("bounds", "theory diagnostics for a policy");
  add_common(bounds_cmd);
  bounds_cmd->add_option("--t-or-l", binputs.t_or_l, "horizon parameter");
  bounds_cmd->add_option("--eps", binputs.eps, "accuracy parameter");
  bounds_cmd->add_option("--delta", binputs.delta, "confidence parameter");
  bounds_cmd->add_option("--r", binputs.r, "exploration radius");
  bounds_cmd->add_option("--bernstein-trials", bern_trials,
                         "Monte Carlo trials for the tail verification");

  // bench
  std::vector<int> grid = {100, 1000, 10000};
  int reps = 100;
  auto* bench_cmd = app.add_subcommand(
      "bench", "estimator accuracy and wall time across sample sizes");
  add_common(bench_cmd);
  bench_cmd->add_option("--grid", grid, "sample sizes N");
  bench_cmd->add_option("--reps", reps, "repetitions per N");
  bench_cmd->add_option("--N", N, "(unused in bench)")->group("");
  bench_cmd->add_option("--l", l, "rollout horizon");
  bench_cmd->add_option("--r", r, "exploration radius");

  // gen-problem
  int gen_n = 20, gen_m = 10;
  bool gen_benchmark = false;
  auto* gen_cmd = app.add_subcommand("gen-problem", "generate a problem file");
  gen_cmd->add_option("--n", gen_n, "state dimension");
  gen_cmd->add_option("--m", gen_m, "control dimension");
  gen_cmd->add_option("--seed", seed, "generator seed");
  gen_cmd->add_flag("--benchmark", gen_benchmark,
                    "emit the built-in 3x2 benchmark instead");
  gen_cmd->add_option("--out", out_path, "output file (default: stdout)");
  gen_cmd->add_option("--nodes-per-dim", nodes_per_dim,
                      "quadrature nodes per noise dimension");

  CLI11_PARSE(app, argc, argv);

  if (gen_cmd->parsed()) {
    Problem p = gen_benchmark ? benchmark_3x2(nodes_per_dim)
                              : gen_highdim(gen_n, gen_m, seed, nodes_per_dim);
    emit(problem_to_json(p), out_path);
    return 0;
  }

  Problem p = load_problem(problem_path, nodes_per_dim);
  const ScenarioSet& set = p.model.atoms();

  if (are_cmd->parsed()) {
    AreSolution sol = solve_are(set, p.init, tol, max_iter);
    emit(are_solution_to_json(sol), out_path);
    return 0;
  }

  Matrix L = load_policy(policy_spec, p.model.dims());

  if (cost_cmd->parsed()) {
    ValueCert cert = make_cert(set, p.init, L);
    emit({{"cost", io_detail::fmt17(cert.cost)},
          {"rho", io_detail::fmt17(cert.rho)}},
         out_path);
    return 0;
  }

  if (gexact_cmd->parsed()) {
    ValueCert cert = make_cert(set, p.init, L);
    emit({{"grad", io_detail::matrix_to_json(cert.grad)},
          {"grad_norm", io_detail::fmt17(cert.grad.norm())},
          {"cost", io_detail::fmt17(cert.cost)}},
         out_path);
    return 0;
  }

  if (gest_cmd->parsed()) {
    GradEstimate est =
        estimate_gradient(p.model, p.init, L, N, l, r, seed, threads);
    json j = {{"grad_estimate", io_detail::matrix_to_json(est.G)},
              {"N", N},
              {"l", l},
              {"r", r},
              {"seed", seed}};
    // When the model is available the exact gradient provides context.
    Matrix g = grad_exact(set, p.init, L);
    j["exact_grad_norm"] = io_detail::fmt17(g.norm());
    j["rel_error"] = io_detail::fmt17((est.G - g).norm() / g.norm());
    emit(j, out_path);
    return 0;
  }

  if (train_cmd->parsed()) {
    StepRule rule = make_rule(rule_name, eta, dim_a, dim_b);
    std::filesystem::path out_dir =
        out_path.empty() ? std::filesystem::path("train-out")
                         : std::filesystem::path(out_path);
    std::filesystem::create_directories(out_dir);
    AreSolution sol = solve_are(set, p.init);
    write_text_atomic(out_dir / "config.json",
                      run_config_json(problem_path, mode, rule, iters, N, l,
                                      r, seeds, seed, out_dir.string())
                              .dump(2) +
                          "\n");
    Matrix L0 = L;
    if (mode == "exact") {
      DescentTrace tr = descend_exact(set, p.init, L0, rule, iters, &sol);
      write_text_atomic(out_dir / "trace.csv", trace_to_csv(tr, true));
    } else {
      std::vector<DescentTrace> traces;
      for (int s = 0; s < seeds; ++s) {
        std::uint64_t run_seed =
            RngStream(seed, "seed-rep", static_cast<std::uint64_t>(s))
                .derive();
        DescentTrace tr = descend_model_free(p.model, p.init, L0, rule, iters,
                                             N, l, r, run_seed, &sol, threads);
        write_text_atomic(out_dir / ("trace_seed" + std::to_string(s) + ".csv"),
                          trace_to_csv(tr, false));
        traces.push_back(std::move(tr));
      }
      write_text_atomic(out_dir / "aggregate.csv", aggregate_to_csv(traces));
    }
    std::cout << "wrote artifacts to " << out_dir.string() << "\n";
    return 0;
  }

  if (bounds_cmd->parsed()) {
    ModelSummary sm = summarize(set, p.init);
    AreSolution sol = solve_are(set, p.init);
    ValueCert cert = make_cert(set, p.init, L);
    BoundsReport rep = compute_bounds(set, sm, cert, sol, binputs);
    json j = bounds_report_to_json(rep);
    j["admissible_fraction_at_h_delta"] = io_detail::fmt17(
        verify_admissibility_radius(set, p.init, L, 200, 1.0, seed, threads));
    auto table =
        verify_bernstein(1.0, binputs.r, {100, 1000}, {0.5, 1.0, 2.0},
                         bern_trials, set.dims.m, set.dims.n, seed, threads);
    if (out_path.empty()) {
      emit(j, "");
      std::cout << bernstein_table_to_csv(table);
    } else {
      emit(j, out_path);
      write_text_atomic(std::filesystem::path(out_path).replace_extension(
                            ".verification.csv"),
                        bernstein_table_to_csv(table));
    }
    return 0;
  }

  if (bench_cmd->parsed()) {
    Matrix g = grad_exact(set, p.init, L);
    double gnorm = g.norm();
    std::string csv = "N,mean_rel_error,wall_seconds_per_estimate\n";
    for (int Ni : grid) {
      double acc = 0.0;
      auto t0 = std::chrono::steady_clock::now();
      for (int rep = 0; rep < reps; ++rep) {
        GradEstimate est = estimate_gradient(
            p.model, p.init, L, Ni, l, r,
            RngStream(seed, "bench", static_cast<std::uint64_t>(Ni),
                      static_cast<std::uint64_t>(rep))
                .derive(),
            threads);
        acc += (est.G - g).norm() / gnorm;
      }
      double secs = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count() /
                    reps;
      csv += std::to_string(Ni) + "," + io_detail::fmt17(acc / reps) + "," +
             io_detail::fmt17(secs) + "\n";
    }
    if (out_path.empty())
      std::cout << csv;
    else
      write_text_atomic(out_path, csv);
    return 0;
  }

  throw ConfigError("no subcommand executed");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rplq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rplq::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
