#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcra/instances.hpp"
#include "dcra/solver.hpp"

// Batch harness: runs each configured method on each instance of a suite and
// aggregates win rates, mean relative differences, mean objectives, and mean
// times. Instances run in an OpenMP parallel map; every task derives its own
// seed from the master seed and the instance index, and aggregation folds in
// index order, so results do not depend on the job count.

namespace dcra {

struct SuiteSize {
  int rows = 0;
  int cols = 0;
};

struct BcsGrid {
  std::vector<double> alphas;
  std::vector<double> rhos;  // sparsity rates
  std::vector<double> mus;
  int N = 100;
  double lambda = 0.1;
};

struct SuiteSpec {
  std::string kind = "random_l1";  // "random_l1" | "bcs"
  std::vector<SuiteSize> sizes;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods;  // "dcra", "subgrad", "oracle"
  std::optional<BcsGrid> bcs;
  SolverConfig solver;
  int subgrad_iters = 500;
  int oracle_cap = 22;

  void validate() const;
};

struct GridPoint {
  double alpha = 0.0;
  double sparsity_rho = 0.0;
  double mu = 0.0;
  std::uint64_t seed = 0;
};

struct BenchRow {
  int instance_index = 0;
  std::string instance;
  std::string method;
  bool ok = false;
  std::string status;  // termination name or error text
  double objective = 0.0;
  double seconds = 0.0;
  std::optional<double> mse;        // BCS only
  std::optional<int> hamming;       // BCS only
  std::optional<GridPoint> grid;    // BCS only
};

struct MethodAggregate {
  int count = 0;
  double mean_objective = 0.0;
  double mean_seconds = 0.0;
};

struct Comparison {
  int count = 0;          // instances where both methods succeeded
  double win_rate = 0.0;  // fraction where dcra's objective is strictly lower
  double mean_rel_diff = 0.0;  // mean of (obj_dcra - obj_other)/obj_other
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::map<std::string, MethodAggregate> per_method;
  std::map<std::string, Comparison> dcra_vs;  // keyed by the other method
};

BenchReport run_bench(const SuiteSpec& spec, int jobs);

// Recompute the aggregate blocks from rows (the invariant the tests pin).
void aggregate_rows(BenchReport& report);

}  // namespace dcra
