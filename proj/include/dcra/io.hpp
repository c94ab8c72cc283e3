#pragma once

#include <iosfwd>
#include <string>

#include "dcra/bench.hpp"
#include "dcra/hashing.hpp"
#include "dcra/rounding.hpp"

// File formats. Everything written here is deterministic for fixed inputs;
// when with_timings is false the seconds fields are written as zero so
// repeated runs compare byte-for-byte.

namespace dcra {

inline constexpr int kInstanceSchemaVersion = 1;
inline constexpr int kResultSchemaVersion = 1;
inline constexpr int kSuiteSchemaVersion = 1;

// {version, n, r, A (row-major), b, loss_blocks[], label}
std::string instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const std::string& text);
ProblemInstance load_instance(const std::string& path);
void save_instance(const ProblemInstance& inst, const std::string& path);

struct RunResult {
  ProblemInstance instance_echo;  // label/dims only used for output
  SolverConfig config;
  double delta_used = 0.0;
  Termination termination = Termination::KMaxExceeded;
  Certificate certificate;
  const OuterTrace* trace = nullptr;
};

std::string run_result_to_json(const RunResult& result, bool with_timings);

// CSV, one row per outer iteration; schema named in the header comment line.
void write_trace_csv(const OuterTrace& trace, std::ostream& os, bool with_timings);

void write_bench_csv(const BenchReport& report, std::ostream& os, bool with_timings);
std::string bench_aggregate_to_json(const BenchReport& report, bool with_timings);

// long-format sweep rows: alpha, rho, mu, seed, method, objective, mse,
// hamming, seconds
void write_sweep_csv(const BenchReport& report, std::ostream& os, bool with_timings);

void write_hashing_trace_csv(const std::vector<HashingTraceRow>& trace, std::ostream& os);

SuiteSpec suite_from_json(const std::string& text);
SuiteSpec load_suite(const std::string& path);

}  // namespace dcra
