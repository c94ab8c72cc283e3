// Command-line front end: solve single instances, run benchmark suites,
// sweep the compressed-sensing phase grid, export MILP cross-check files,
// and run the synthetic hashing demo.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "dcra/io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace dcra;

struct SolverFlags {
  SolverConfig cfg;
  double rho0 = -1.0;
  double delta = -1.0;
  double l_init = -1.0;

  void attach(CLI::App* app) {
    app->add_option("--m", cfg.m, "factor rows (>= 2)");
    app->add_option("--rho0", rho0, "initial penalty (default: 0.05 * mean column norm)");
    app->add_option("--sigma", cfg.sigma, "penalty growth factor (> 1)");
    app->add_option("--rho-max", cfg.rho_max, "penalty cap");
    app->add_option("--delta", delta, "Moreau smoothing (default: 0.1*(median|b|+1))");
    app->add_option("--eps-outer", cfg.eps_outer, "outer feasibility-gap tolerance");
    app->add_option("--eps-inner", cfg.eps_inner, "inner step-norm tolerance");
    app->add_option("--k-max", cfg.k_max, "outer iteration cap");
    app->add_option("--l-max", cfg.l_max, "inner iteration cap");
    app->add_option("--l-init", l_init, "initial curvature estimate (default: auto)");
    app->add_option("--seed", cfg.seed, "RNG seed");
  }

  SolverConfig resolve() const {
    SolverConfig out = cfg;
    if (rho0 > 0) out.rho0 = rho0;
    if (delta > 0) out.delta = delta;
    if (l_init > 0) out.L_init = l_init;
    return out;
  }
};

struct GenFlags {
  std::string instance_path;
  std::string gen;  // "random" | "bcs"
  int n = 50;
  int r = 100;
  double alpha = 0.5;
  double sparsity_rho = 0.1;
  double mu = 0.0;
  double lambda = 0.1;

  void attach(CLI::App* app) {
    app->add_option("--instance", instance_path, "instance JSON path");
    app->add_option("--gen", gen, "generator when no instance file: random | bcs");
    app->add_option("--n", n, "binary dimension (random) / signal dimension N (bcs)");
    app->add_option("--r", r, "residual rows (random)");
    app->add_option("--alpha", alpha, "bcs compression ratio M/N");
    app->add_option("--sparsity-rho", sparsity_rho, "bcs sparsity rate");
    app->add_option("--mu", mu, "bcs bias parameter");
    app->add_option("--lambda", lambda, "bcs l1 regularization weight");
  }

  // one --seed drives both the generator and the solver
  ProblemInstance load(std::uint64_t seed) const {
    const bool from_file = !instance_path.empty();
    const bool from_gen = !gen.empty();
    if (from_file == from_gen)
      throw std::invalid_argument("pass exactly one of --instance or --gen");
    if (from_file) return load_instance(instance_path);
    if (gen == "random") return gen_random_l1(n, r, seed);
    if (gen == "bcs") {
      BcsSpec spec;
      spec.N = n;
      spec.alpha = alpha;
      spec.sparsity_rho = sparsity_rho;
      spec.mu = mu;
      spec.lambda = lambda;
      spec.seed = seed;
      return zero_one_transform(gen_bcs(spec).model);
    }
    throw std::invalid_argument("unknown generator: " + gen);
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  check(os.good(), "cannot open " + path);
  os << text;
  check(os.good(), "write failed for " + path);
}

int run_solve(const GenFlags& gen, const SolverFlags& flags, const std::string& out,
              const std::string& trace_path, bool timings) {
  SolverConfig cfg = flags.resolve();
  const ProblemInstance inst = gen.load(cfg.seed);
  const SolveResult res = solve(inst, cfg);
  const Certificate cert = certify(inst, res.V, res.trace, cfg.eps_outer);

  RunResult result{inst, cfg, res.trace.delta_used, res.trace.termination, cert, &res.trace};
  const std::string json = run_result_to_json(result, timings);
  if (out.empty())
    std::cout << json;
  else
    write_text(out, json);

  if (!trace_path.empty()) {
    std::ofstream os(trace_path, std::ios::binary);
    check(os.good(), "cannot open " + trace_path);
    write_trace_csv(res.trace, os, timings);
  }

  switch (res.trace.termination) {
    case Termination::GapReached: return 0;
    case Termination::KMaxExceeded: return 2;
    case Termination::InnerStall: return 3;
  }
  return 2;
}

int run_bench_cmd(const std::string& suite_path, const std::string& out_dir, int jobs, bool timings) {
  const SuiteSpec spec = load_suite(suite_path);
  const BenchReport report = run_bench(spec, jobs);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream os(out_dir + "/rows.csv", std::ios::binary);
    check(os.good(), "cannot open " + out_dir + "/rows.csv");
    write_bench_csv(report, os, timings);
  }
  write_text(out_dir + "/aggregate.json", bench_aggregate_to_json(report, timings));
  std::cerr << "bench: " << report.rows.size() << " rows -> " << out_dir << "\n";
  return 0;
}

int run_sweep(const std::vector<double>& alphas, const std::vector<double>& rhos,
              const std::vector<double>& mus, int N, double lambda, int seeds,
              const std::vector<std::string>& methods, const SolverFlags& flags, int subgrad_iters,
              const std::string& out, int jobs, bool timings) {
  SuiteSpec spec;
  spec.kind = "bcs";
  BcsGrid grid;
  grid.alphas = alphas;
  grid.rhos = rhos;
  grid.mus = mus;
  grid.N = N;
  grid.lambda = lambda;
  spec.bcs = grid;
  for (int s = 0; s < seeds; ++s) spec.seeds.push_back(static_cast<std::uint64_t>(s));
  spec.methods = methods;
  spec.solver = flags.resolve();
  spec.subgrad_iters = subgrad_iters;

  const BenchReport report = run_bench(spec, jobs);
  if (out.empty()) {
    write_sweep_csv(report, std::cout, timings);
  } else {
    std::ofstream os(out, std::ios::binary);
    check(os.good(), "cannot open " + out);
    write_sweep_csv(report, os, timings);
  }
  return 0;
}

int run_hashing(int d, int n, int bits, int rounds, double mu, double delta_reg, double noise_density,
                double noise_scale, std::uint64_t seed, bool from_planted, const std::string& out) {
  PlantedSpec spec;
  spec.d = d;
  spec.n = n;
  spec.r_bits = bits;
  spec.K = rounds;
  spec.mu = mu;
  spec.delta_reg = delta_reg;
  spec.noise_density = noise_density;
  spec.noise_scale = noise_scale;
  spec.seed = seed;
  const PlantedHashing planted = gen_planted_hashing(spec);
  const HashingResult res = from_planted
                                ? alternate_from(planted.prob, planted.W_true, planted.X_true, seed)
                                : alternate(planted.prob, seed);
  std::cerr << "hashing: planted objective " << planted.planted_objective << ", final "
            << res.trace.back().objective << "\n";
  if (out.empty()) {
    write_hashing_trace_csv(res.trace, std::cout);
  } else {
    std::ofstream os(out, std::ios::binary);
    check(os.good(), "cannot open " + out);
    write_hashing_trace_csv(res.trace, os);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binary optimization via DC-penalized low-rank relaxation"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  bool timings = true;
  app.add_flag("!--no-timings", timings, "zero all seconds fields for byte-stable output");
  int jobs = 1;
  app.add_option("--jobs", jobs, "worker threads for bench/sweep");

  auto* solve_cmd = app.add_subcommand("solve", "solve one instance, print result JSON");
  GenFlags solve_gen;
  SolverFlags solve_flags;
  std::string solve_out, solve_trace;
  solve_gen.attach(solve_cmd);
  solve_flags.attach(solve_cmd);
  solve_cmd->add_option("--out", solve_out, "result JSON path (default stdout)");
  solve_cmd->add_option("--trace", solve_trace, "outer-trace CSV path");

  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark suite from JSON");
  std::string suite_path, bench_out = "bench_out";
  bench_cmd->add_option("--suite", suite_path, "suite JSON path")->required();
  bench_cmd->add_option("--out", bench_out, "output directory");

  auto* sweep_cmd = app.add_subcommand("sweep-bcs", "compressed-sensing phase grid, long CSV");
  std::vector<double> alphas{0.3, 0.6}, srhos{0.1, 0.5}, mus{0.0};
  int sweep_N = 100, sweep_seeds = 5, subgrad_iters = 500;
  double sweep_lambda = 0.1;
  std::vector<std::string> sweep_methods{"dcra", "subgrad"};
  std::string sweep_out;
  SolverFlags sweep_flags;
  sweep_cmd->add_option("--alphas", alphas, "compression ratios")->delimiter(',');
  sweep_cmd->add_option("--rhos", srhos, "sparsity rates")->delimiter(',');
  sweep_cmd->add_option("--mus", mus, "bias parameters")->delimiter(',');
  sweep_cmd->add_option("--n", sweep_N, "signal dimension N");
  sweep_cmd->add_option("--lambda", sweep_lambda, "l1 regularization weight");
  sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per grid point (0..seeds-1)");
  sweep_cmd->add_option("--methods", sweep_methods, "methods to run")->delimiter(',');
  sweep_cmd->add_option("--subgrad-iters", subgrad_iters, "baseline iteration budget");
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default stdout)");
  sweep_flags.attach(sweep_cmd);

  auto* milp_cmd = app.add_subcommand("export-milp", "write the instance as an LP-format MILP");
  GenFlags milp_gen;
  std::string milp_out;
  std::uint64_t milp_seed = 0;
  milp_gen.attach(milp_cmd);
  milp_cmd->add_option("--seed", milp_seed, "generator seed");
  milp_cmd->add_option("--out", milp_out, "LP file path")->required();

  auto* hash_cmd = app.add_subcommand("hashing", "alternating minimization demo on planted data");
  int hd = 8, hn = 30, hbits = 6, hk = 5;
  double hmu = 0.1, hdreg = 1.0, hnd = 0.05, hns = 1.0;
  std::uint64_t hseed = 0;
  bool from_planted = false;
  std::string hash_out;
  hash_cmd->add_option("--d", hd, "data dimension");
  hash_cmd->add_option("--points", hn, "number of data points");
  hash_cmd->add_option("--bits", hbits, "code length");
  hash_cmd->add_option("--rounds", hk, "alternations K");
  hash_cmd->add_option("--mu", hmu, "Huber parameter for the W-step");
  hash_cmd->add_option("--delta-reg", hdreg, "ridge weight");
  hash_cmd->add_option("--noise-density", hnd, "planted sparse-noise density");
  hash_cmd->add_option("--noise-scale", hns, "planted noise scale");
  hash_cmd->add_option("--seed", hseed, "seed");
  hash_cmd->add_flag("--from-planted", from_planted, "start at the planted factor pair");
  hash_cmd->add_option("--out", hash_out, "trace CSV path (default stdout)");

  auto* gen_cmd = app.add_subcommand("gen", "generate an instance JSON");
  GenFlags gen_gen;
  std::string gen_out;
  std::uint64_t gen_seed_value = 0;
  gen_gen.attach(gen_cmd);
  gen_cmd->add_option("--seed", gen_seed_value, "generator seed");
  gen_cmd->add_option("--out", gen_out, "instance JSON path")->required();

  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  omp_set_num_threads(std::max(jobs, 1));
#endif

  try {
    if (solve_cmd->parsed()) return run_solve(solve_gen, solve_flags, solve_out, solve_trace, timings);
    if (bench_cmd->parsed()) return run_bench_cmd(suite_path, bench_out, jobs, timings);
    if (sweep_cmd->parsed())
      return run_sweep(alphas, srhos, mus, sweep_N, sweep_lambda, sweep_seeds, sweep_methods,
                       sweep_flags, subgrad_iters, sweep_out, jobs, timings);
    if (milp_cmd->parsed()) {
      milp_export_file(milp_gen.load(milp_seed), milp_out);
      return 0;
    }
    if (hash_cmd->parsed())
      return run_hashing(hd, hn, hbits, hk, hmu, hdreg, hnd, hns, hseed, from_planted, hash_out);
    if (gen_cmd->parsed()) {
      save_instance(gen_gen.load(gen_seed_value), gen_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
