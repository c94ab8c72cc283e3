#include "dcra/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace dcra {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_safe(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int require_major(const Json& j, const char* key, int supported) {
  check(j.contains(key), std::string("missing ") + key + " field");
  const int version = j.at(key).get<int>();
  check(version == supported,
        std::string("unsupported ") + key + " " + std::to_string(version) + " (reader supports " +
            std::to_string(supported) + ")");
  return version;
}

Json loss_to_json(const SeparableLoss& loss) {
  Json blocks = Json::array();
  for (const auto& b : loss.blocks) {
    Json jb;
    switch (b.kind) {
      case LossKind::L1:
        jb["kind"] = "l1";
        jb["rows"] = b.row_count;
        jb["weight"] = b.weight;
        break;
      case LossKind::Linear:
        jb["kind"] = "linear";
        jb["coeffs"] = b.coeffs;
        break;
      case LossKind::Huber:
        jb["kind"] = "huber";
        jb["rows"] = b.row_count;
        jb["mu"] = b.huber_mu;
        break;
    }
    blocks.push_back(std::move(jb));
  }
  return blocks;
}

SeparableLoss loss_from_json(const Json& blocks) {
  std::vector<LossBlock> out;
  for (const auto& jb : blocks) {
    const std::string kind = jb.at("kind").get<std::string>();
    if (kind == "l1")
      out.push_back(LossBlock::l1(jb.at("rows").get<int>(), jb.value("weight", 1.0)));
    else if (kind == "linear")
      out.push_back(LossBlock::linear(jb.at("coeffs").get<Vector>()));
    else if (kind == "huber")
      out.push_back(LossBlock::huber(jb.at("rows").get<int>(), jb.at("mu").get<double>()));
    else
      check(false, "unknown loss block kind: " + kind);
  }
  return SeparableLoss(std::move(out));
}

}  // namespace

std::string instance_to_json(const ProblemInstance& inst) {
  Json j;
  j["version"] = kInstanceSchemaVersion;
  j["n"] = inst.n;
  j["r"] = inst.r;
  j["A"] = inst.A.data;  // row-major
  j["b"] = inst.b;
  j["loss_blocks"] = loss_to_json(inst.loss);
  j["label"] = inst.label;
  return j.dump(2) + "\n";
}

ProblemInstance instance_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("instance JSON parse error: ") + e.what());
  }
  require_major(j, "version", kInstanceSchemaVersion);
  const int n = j.at("n").get<int>();
  const int r = j.at("r").get<int>();
  Matrix A(r, n);
  const auto flat = j.at("A").get<Vector>();
  check(flat.size() == A.data.size(), "instance JSON: A has wrong length");
  A.data = flat;
  Vector b = j.at("b").get<Vector>();
  SeparableLoss loss = loss_from_json(j.at("loss_blocks"));
  return make_instance(std::move(A), std::move(b), std::move(loss), j.value("label", std::string{}));
}

ProblemInstance load_instance(const std::string& path) { return instance_from_json(read_file(path)); }

void save_instance(const ProblemInstance& inst, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  check(os.good(), "cannot open " + path);
  os << instance_to_json(inst);
  check(os.good(), "write failed for " + path);
}

std::string run_result_to_json(const RunResult& result, bool with_timings) {
  const OuterTrace& trace = *result.trace;
  Json j;
  j["schema_version"] = kResultSchemaVersion;
  j["instance"] = result.instance_echo.label;
  j["n"] = result.instance_echo.n;
  j["r"] = result.instance_echo.r;

  Json cfg;
  cfg["m"] = result.config.m;
  if (result.config.rho0)
    cfg["rho0"] = *result.config.rho0;
  else
    cfg["rho0"] = trace.rows.empty() ? Json("auto") : Json(trace.rows.front().rho);
  cfg["sigma"] = result.config.sigma;
  cfg["rho_max"] = result.config.rho_max;
  cfg["delta"] = result.delta_used;
  cfg["eps_outer"] = result.config.eps_outer;
  cfg["eps_inner"] = result.config.eps_inner;
  cfg["k_max"] = result.config.k_max;
  cfg["l_max"] = result.config.l_max;
  if (result.config.L_init)
    cfg["L_init"] = *result.config.L_init;
  else
    cfg["L_init"] = "auto";
  cfg["seed"] = result.config.seed;
  j["config"] = std::move(cfg);

  j["termination"] = to_string(result.termination);

  const Certificate& cert = result.certificate;
  Json jc;
  jc["z"] = cert.z;
  jc["x_bar"] = cert.x_bar;
  jc["feas_gap"] = cert.feas_gap;
  jc["env_obj_rounded"] = cert.env_obj_rounded;
  jc["true_obj"] = cert.true_obj;
  jc["gap_bound"] = cert.gap_bound;
  jc["gap_bound_telescoped"] = cert.gap_bound_telescoped;
  Json ji;
  ji["k_star"] = cert.bound_inputs.k_star;
  ji["k_bar"] = cert.bound_inputs.k_bar;
  ji["rho_k_bar"] = cert.bound_inputs.rho_k_bar;
  ji["rho_k_star"] = cert.bound_inputs.rho_k_star;
  ji["r_star"] = cert.bound_inputs.r_star;
  ji["L_fhat"] = cert.bound_inputs.L_fhat;
  ji["eps"] = cert.bound_inputs.eps;
  ji["ftilde_k_star"] = cert.bound_inputs.ftilde_k_star;
  jc["bound_inputs"] = std::move(ji);
  j["certificate"] = std::move(jc);

  Json jt;
  jt["outer_iters"] = trace.rows.size();
  jt["inner_iters_total"] = trace.rows.empty() ? 0L : trace.rows.back().l_total;
  jt["final_gap"] = trace.rows.empty() ? 0.0 : trace.rows.back().gap;
  jt["final_phi"] = trace.rows.empty() ? 0.0 : trace.rows.back().phi;
  jt["rho_final"] = trace.rho_final;
  jt["delta_used"] = trace.delta_used;
  j["trace"] = std::move(jt);

  Json jtime;
  jtime["total_seconds"] = with_timings ? trace.total_seconds : 0.0;
  j["timings"] = std::move(jtime);
  return j.dump(2) + "\n";
}

void write_trace_csv(const OuterTrace& trace, std::ostream& os, bool with_timings) {
  os << "# dcra-trace v1\n";
  os << "k,l_total,rho,gap,phi,surrogate,seconds\n";
  for (const auto& row : trace.rows)
    os << row.k << ',' << row.l_total << ',' << fmt17(row.rho) << ',' << fmt17(row.gap) << ','
       << fmt17(row.phi) << ',' << fmt17(row.surrogate) << ',' << fmt17(with_timings ? row.seconds : 0.0)
       << '\n';
}

void write_bench_csv(const BenchReport& report, std::ostream& os, bool with_timings) {
  os << "# dcra-bench v1\n";
  os << "index,instance,method,ok,status,objective,seconds,mse,hamming\n";
  for (const auto& row : report.rows) {
    os << row.instance_index << ',' << csv_safe(row.instance) << ',' << row.method << ','
       << (row.ok ? 1 : 0) << ',' << csv_safe(row.status) << ',' << fmt17(row.objective) << ','
       << fmt17(with_timings ? row.seconds : 0.0) << ',';
    if (row.mse) os << fmt17(*row.mse);
    os << ',';
    if (row.hamming) os << *row.hamming;
    os << '\n';
  }
}

std::string bench_aggregate_to_json(const BenchReport& report, bool with_timings) {
  Json j;
  j["schema_version"] = kResultSchemaVersion;
  Json per = Json::object();
  for (const auto& [name, agg] : report.per_method) {
    Json ja;
    ja["count"] = agg.count;
    ja["mean_objective"] = agg.mean_objective;
    ja["mean_seconds"] = with_timings ? agg.mean_seconds : 0.0;
    per[name] = std::move(ja);
  }
  j["per_method"] = std::move(per);
  Json vs = Json::object();
  for (const auto& [name, cmp] : report.dcra_vs) {
    Json jc;
    jc["count"] = cmp.count;
    jc["win_rate"] = cmp.win_rate;
    jc["mean_rel_diff"] = cmp.mean_rel_diff;
    vs[name] = std::move(jc);
  }
  j["dcra_vs"] = std::move(vs);
  return j.dump(2) + "\n";
}

void write_sweep_csv(const BenchReport& report, std::ostream& os, bool with_timings) {
  os << "# dcra-sweep v1\n";
  os << "alpha,rho,mu,seed,method,objective,mse,hamming,seconds\n";
  for (const auto& row : report.rows) {
    check(row.grid.has_value(), "write_sweep_csv: rows lack grid coordinates (not a bcs suite?)");
    const GridPoint& g = *row.grid;
    os << fmt17(g.alpha) << ',' << fmt17(g.sparsity_rho) << ',' << fmt17(g.mu) << ',' << g.seed << ','
       << row.method << ',' << fmt17(row.objective) << ',';
    if (row.mse) os << fmt17(*row.mse);
    os << ',';
    if (row.hamming) os << *row.hamming;
    os << ',' << fmt17(with_timings ? row.seconds : 0.0) << '\n';
  }
}

void write_hashing_trace_csv(const std::vector<HashingTraceRow>& trace, std::ostream& os) {
  os << "# dcra-hashing-trace v1\n";
  os << "round,phase,objective\n";
  for (const auto& row : trace) os << row.round << ',' << row.phase << ',' << fmt17(row.objective) << '\n';
}

SuiteSpec suite_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("suite JSON parse error: ") + e.what());
  }
  require_major(j, "schema_version", kSuiteSchemaVersion);
  SuiteSpec spec;
  spec.kind = j.value("kind", std::string("random_l1"));
  if (j.contains("sizes"))
    for (const auto& js : j.at("sizes"))
      spec.sizes.push_back({js.at("rows").get<int>(), js.at("cols").get<int>()});
  if (j.contains("seeds")) spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("methods")) spec.methods = j.at("methods").get<std::vector<std::string>>();
  if (j.contains("bcs_grid")) {
    const auto& jg = j.at("bcs_grid");
    BcsGrid grid;
    grid.alphas = jg.at("alphas").get<std::vector<double>>();
    grid.rhos = jg.at("rhos").get<std::vector<double>>();
    grid.mus = jg.at("mus").get<std::vector<double>>();
    grid.N = jg.at("N").get<int>();
    grid.lambda = jg.value("lambda", 0.1);
    spec.bcs = std::move(grid);
  }
  if (j.contains("solver")) {
    const auto& js = j.at("solver");
    SolverConfig& cfg = spec.solver;
    cfg.m = js.value("m", cfg.m);
    if (js.contains("rho0")) cfg.rho0 = js.at("rho0").get<double>();
    cfg.sigma = js.value("sigma", cfg.sigma);
    cfg.rho_max = js.value("rho_max", cfg.rho_max);
    if (js.contains("delta")) cfg.delta = js.at("delta").get<double>();
    cfg.eps_outer = js.value("eps_outer", cfg.eps_outer);
    cfg.eps_inner = js.value("eps_inner", cfg.eps_inner);
    cfg.k_max = js.value("k_max", cfg.k_max);
    cfg.l_max = js.value("l_max", cfg.l_max);
    if (js.contains("L_init")) cfg.L_init = js.at("L_init").get<double>();
    cfg.seed = js.value("seed", cfg.seed);
  }
  spec.subgrad_iters = j.value("subgrad_iters", spec.subgrad_iters);
  spec.oracle_cap = j.value("oracle_cap", spec.oracle_cap);
  spec.validate();
  return spec;
}

SuiteSpec load_suite(const std::string& path) { return suite_from_json(read_file(path)); }

}  // namespace dcra
