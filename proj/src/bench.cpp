#include "dcra/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dcra/rng.hpp"
#include "dcra/rounding.hpp"

namespace dcra {

namespace {

struct InstanceTask {
  std::string label;
  ProblemInstance inst;
  std::vector<int> x0;  // BCS ground truth ({0,1}), empty otherwise
  int N01 = 0;          // BCS signal dimension
  std::optional<GridPoint> grid;
};

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::vector<InstanceTask> expand(const SuiteSpec& spec) {
  std::vector<InstanceTask> tasks;
  if (spec.kind == "random_l1") {
    for (const auto& size : spec.sizes)
      for (std::uint64_t seed : spec.seeds) {
        InstanceTask t;
        t.inst = gen_random_l1(size.cols, size.rows, seed);
        t.label = t.inst.label;
        tasks.push_back(std::move(t));
      }
  } else {
    const BcsGrid& grid = *spec.bcs;
    for (double alpha : grid.alphas)
      for (double srho : grid.rhos)
        for (double mu : grid.mus)
          for (std::uint64_t seed : spec.seeds) {
            BcsSpec bs;
            bs.N = grid.N;
            bs.alpha = alpha;
            bs.sparsity_rho = srho;
            bs.mu = mu;
            bs.lambda = grid.lambda;
            bs.seed = seed;
            BcsInstance gen = gen_bcs(bs);
            InstanceTask t;
            t.inst = zero_one_transform(gen.model);
            t.x0 = std::move(gen.x0);
            t.N01 = grid.N;
            t.grid = GridPoint{alpha, srho, mu, seed};
            std::ostringstream label;
            label << "bcs_N" << grid.N << "_a" << fmt_g(alpha) << "_r" << fmt_g(srho) << "_m" << fmt_g(mu)
                  << "_s" << seed;
            t.label = label.str();
            t.inst.label = t.label;
            tasks.push_back(std::move(t));
          }
  }
  return tasks;
}

void fill_recovery_metrics(BenchRow& row, const InstanceTask& task, const std::vector<int>& z) {
  if (task.x0.empty()) return;
  int ham = 0;
  for (std::size_t j = 0; j < task.x0.size(); ++j) {
    const int xj = (z[j] + 1) / 2;
    if (xj != task.x0[j]) ++ham;
  }
  row.hamming = ham;
  row.mse = static_cast<double>(ham) / static_cast<double>(task.N01);
}

std::vector<BenchRow> run_task(const SuiteSpec& spec, const InstanceTask& task, int index) {
  std::vector<BenchRow> rows;
  for (const auto& method : spec.methods) {
    BenchRow row;
    row.instance_index = index;
    row.instance = task.label;
    row.method = method;
    row.grid = task.grid;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (method == "dcra") {
        SolverConfig cfg = spec.solver;
        std::uint64_t sm = cfg.seed;
        cfg.seed = splitmix64(sm) ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1));
        SolveResult res = solve(task.inst, cfg);
        Certificate cert = certify(task.inst, res.V, res.trace, cfg.eps_outer);
        row.objective = cert.true_obj;
        row.status = to_string(res.trace.termination);
        row.ok = true;
        fill_recovery_metrics(row, task, cert.z);
      } else if (method == "subgrad") {
        OracleResult res = projected_subgradient_baseline(task.inst, spec.subgrad_iters,
                                                          static_cast<std::uint64_t>(index));
        row.objective = res.obj;
        row.status = "ok";
        row.ok = true;
        fill_recovery_metrics(row, task, res.z);
      } else if (method == "oracle") {
        OracleResult res = brute_force_oracle(task.inst, spec.oracle_cap);
        row.objective = res.obj;
        row.status = "ok";
        row.ok = true;
        fill_recovery_metrics(row, task, res.z);
      } else {
        row.status = "unknown method";
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.status = std::string("error: ") + e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void SuiteSpec::validate() const {
  check(kind == "random_l1" || kind == "bcs", "suite: kind must be random_l1 or bcs");
  if (kind == "random_l1") check(!sizes.empty(), "suite: sizes[] required for random_l1");
  if (kind == "bcs") {
    check(bcs.has_value(), "suite: bcs_grid required for bcs suites");
    check(!bcs->alphas.empty() && !bcs->rhos.empty() && !bcs->mus.empty(), "suite: bcs grid axes must be nonempty");
  }
  check(!seeds.empty(), "suite: seeds[] must be nonempty");
  check(!methods.empty(), "suite: methods[] must be nonempty");
  for (const auto& m : methods)
    check(m == "dcra" || m == "subgrad" || m == "oracle", "suite: unknown method " + m);
  solver.validate();
}

BenchReport run_bench(const SuiteSpec& spec, int jobs) {
  spec.validate();
  check(jobs >= 1, "run_bench: jobs must be >= 1");
  const std::vector<InstanceTask> tasks = expand(spec);
  std::vector<std::vector<BenchRow>> results(tasks.size());

#ifdef _OPENMP
  const int prev = omp_get_max_threads();
  omp_set_num_threads(jobs);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(tasks.size()); ++i)
    results[static_cast<std::size_t>(i)] = run_task(spec, tasks[static_cast<std::size_t>(i)], static_cast<int>(i));
  omp_set_num_threads(prev);
#else
  for (std::size_t i = 0; i < tasks.size(); ++i)
    results[i] = run_task(spec, tasks[i], static_cast<int>(i));
#endif

  BenchReport report;
  for (auto& chunk : results)
    for (auto& row : chunk) report.rows.push_back(std::move(row));
  aggregate_rows(report);
  return report;
}

void aggregate_rows(BenchReport& report) {
  report.per_method.clear();
  report.dcra_vs.clear();

  std::map<std::string, std::map<int, double>> by_method;  // method -> index -> objective
  for (const auto& row : report.rows) {
    if (!row.ok) continue;
    auto& agg = report.per_method[row.method];
    agg.count += 1;
    agg.mean_objective += row.objective;
    agg.mean_seconds += row.seconds;
    by_method[row.method][row.instance_index] = row.objective;
  }
  for (auto& [name, agg] : report.per_method) {
    agg.mean_objective /= agg.count;
    agg.mean_seconds /= agg.count;
  }

  const auto dcra_it = by_method.find("dcra");
  if (dcra_it == by_method.end()) return;
  for (const auto& [other, objs] : by_method) {
    if (other == "dcra") continue;
    Comparison cmp;
    double rel = 0.0;
    int wins = 0;
    for (const auto& [idx, obj_d] : dcra_it->second) {
      const auto it = objs.find(idx);
      if (it == objs.end()) continue;
      cmp.count += 1;
      if (obj_d < it->second) ++wins;
      if (it->second != 0.0) rel += (obj_d - it->second) / it->second;
    }
    if (cmp.count == 0) continue;
    cmp.win_rate = static_cast<double>(wins) / cmp.count;
    cmp.mean_rel_diff = rel / cmp.count;
    report.dcra_vs[other] = cmp;
  }
}

}  // namespace dcra
