// Command-line front end. Talks to the library only through cgail.h.
#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cgail/cgail.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Failure : std::runtime_error {
  Failure(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
  int exit_code;
};

[[noreturn]] void ConfigFail(const std::string& what) { throw Failure(kExitConfig, what); }

int ExitCodeFor(cgail_status s) {
  switch (s) {
    case CGAIL_OK:
      return kExitOk;
    case CGAIL_ERR_INVALID_ARGUMENT:
    case CGAIL_ERR_CONFIG:
    case CGAIL_ERR_IO:
      return kExitConfig;
    case CGAIL_ERR_SINGULAR:
    case CGAIL_ERR_STEP_SIZE:
    case CGAIL_ERR_NON_FINITE:
    case CGAIL_ERR_DIVERGENCE:
    case CGAIL_ERR_DEGENERATE:
    case CGAIL_ERR_INFEASIBLE:
      return kExitNumerical;
    case CGAIL_ERR_INTERNAL:
      break;
  }
  return kExitInternal;
}

void Check(cgail_status s, const std::string& context = "") {
  if (s == CGAIL_OK) return;
  std::string msg = std::string(cgail_status_name(s)) + ": " + cgail_last_error();
  if (!context.empty()) msg = context + ": " + msg;
  throw Failure(ExitCodeFor(s), msg);
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using MdpPtr = std::unique_ptr<cgail_mdp, Deleter<cgail_mdp, cgail_mdp_free>>;
using PolicyPtr = std::unique_ptr<cgail_policy, Deleter<cgail_policy, cgail_policy_free>>;
using TrajPtr =
    std::unique_ptr<cgail_trajectory, Deleter<cgail_trajectory, cgail_trajectory_free>>;
using AuditPtr = std::unique_ptr<cgail_audit, Deleter<cgail_audit, cgail_audit_free>>;
using FlowPtr =
    std::unique_ptr<cgail_flow_trace, Deleter<cgail_flow_trace, cgail_flow_trace_free>>;
using TracePtr = std::unique_ptr<cgail_training_trace,
                                 Deleter<cgail_training_trace, cgail_training_trace_free>>;
using AggPtr = std::unique_ptr<cgail_aggregate, Deleter<cgail_aggregate, cgail_aggregate_free>>;

std::string Num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---- config helpers --------------------------------------------------------

struct Config {
  json doc;
  fs::path base;  // directory of the config file

  fs::path Resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
  }
};

Config LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) ConfigFail("cannot open config '" + path + "'");
  Config c;
  try {
    c.doc = json::parse(in);
  } catch (const json::parse_error& e) {
    ConfigFail("config '" + path + "': " + e.what());
  }
  if (!c.doc.is_object()) ConfigFail("config '" + path + "': top level must be an object");
  c.base = fs::path(path).parent_path();
  return c;
}

double GetNumber(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) ConfigFail(std::string(key) + ": expected a number");
  return obj[key].get<double>();
}

long long GetInt(const json& obj, const char* key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) ConfigFail(std::string(key) + ": expected an integer");
  return obj[key].get<long long>();
}

bool GetBool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) ConfigFail(std::string(key) + ": expected true or false");
  return obj[key].get<bool>();
}

std::string GetString(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) ConfigFail(std::string(key) + ": expected a string");
  return obj[key].get<std::string>();
}

void RejectUnknownKeys(const json& obj, const std::vector<std::string>& known,
                       const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      ConfigFail(where + ": unknown key '" + it.key() + "'");
    }
  }
}

fs::path PrepareOutputDir(const Config& cfg, const std::string& override_dir) {
  fs::path dir = override_dir.empty() ? cfg.Resolve(GetString(cfg.doc, "output_dir", "out"))
                                      : fs::path(override_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    ConfigFail("output_dir: cannot create '" + dir.string() + "'");
  }
  const fs::path probe = dir / ".cgail_write_probe";
  {
    std::ofstream out(probe);
    if (!out) ConfigFail("output_dir: '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
  return dir;
}

cgail_scalar_params ParseScalarParams(const json& obj, const std::string& where) {
  if (!obj.is_object()) ConfigFail(where + ": expected an object");
  RejectUnknownKeys(obj, {"c", "lambda", "expert_prob", "E", "k", "alpha"}, where);
  cgail_scalar_params p;
  p.c = GetNumber(obj, "c", 1.0);
  p.lambda = GetNumber(obj, "lambda", 1.0);
  p.expert_prob = GetNumber(obj, "expert_prob", GetNumber(obj, "E", 0.5));
  p.k = GetNumber(obj, "k", 0.0);
  p.alpha = GetNumber(obj, "alpha", 0.0);
  return p;
}

std::vector<double> ValueList(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) ConfigFail(where + ": expected a number or non-empty list");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) ConfigFail(where + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// "params": object or list of objects; or "grid": {name: [values]} expanded
// in c, lambda, expert_prob, k, alpha order.
std::vector<cgail_scalar_params> ParseParamSet(const json& doc) {
  std::vector<cgail_scalar_params> out;
  if (doc.contains("params") && doc.contains("grid")) {
    ConfigFail("params and grid are mutually exclusive");
  }
  if (doc.contains("params")) {
    const json& p = doc["params"];
    if (p.is_array()) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        out.push_back(ParseScalarParams(p[i], "params[" + std::to_string(i) + "]"));
      }
    } else {
      out.push_back(ParseScalarParams(p, "params"));
    }
  } else if (doc.contains("grid")) {
    const json& g = doc["grid"];
    if (!g.is_object()) ConfigFail("grid: expected an object");
    RejectUnknownKeys(g, {"c", "lambda", "expert_prob", "k", "alpha"}, "grid");
    auto axis = [&](const char* name, double fallback) {
      return g.contains(name) ? ValueList(g[name], std::string("grid.") + name)
                              : std::vector<double>{fallback};
    };
    for (double c : axis("c", 1.0))
      for (double lam : axis("lambda", 1.0))
        for (double e : axis("expert_prob", 0.5))
          for (double k : axis("k", 0.0))
            for (double a : axis("alpha", 0.0)) out.push_back({c, lam, e, k, a});
  } else {
    ConfigFail("expected 'params' or 'grid'");
  }
  if (out.empty()) ConfigFail("params: no parameter tuples");
  return out;
}

cgail_range ParseRange(const json& doc, const char* key, cgail_range fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc[key];
  const std::string where = key;
  if (v.is_number()) return {v.get<double>(), v.get<double>(), 1};
  if (!v.is_object()) ConfigFail(where + ": expected a number or {lo, hi, n}");
  RejectUnknownKeys(v, {"lo", "hi", "n"}, where);
  cgail_range r;
  r.lo = GetNumber(v, "lo", fallback.lo);
  r.hi = GetNumber(v, "hi", fallback.hi);
  r.n = static_cast<int>(GetInt(v, "n", fallback.n));
  return r;
}

// mdp: "name" | {"builtin": name} | {"path": file}
struct LoadedMdp {
  MdpPtr mdp;
  PolicyPtr fixture_expert;
};

LoadedMdp LoadMdp(const Config& cfg) {
  if (!cfg.doc.contains("mdp")) ConfigFail("mdp: missing");
  const json& m = cfg.doc["mdp"];
  LoadedMdp out;
  cgail_mdp* mdp = nullptr;
  cgail_policy* expert = nullptr;
  if (m.is_string() || (m.is_object() && m.contains("builtin"))) {
    const std::string name = m.is_string() ? m.get<std::string>() : GetString(m, "builtin", "");
    Check(cgail_mdp_builtin(name.c_str(), &mdp, &expert), "mdp");
  } else if (m.is_object() && m.contains("path")) {
    const std::string path = cfg.Resolve(GetString(m, "path", "")).string();
    Check(cgail_mdp_load(path.c_str(), &mdp), "mdp");
  } else {
    ConfigFail("mdp: expected a fixture name, {\"builtin\": name} or {\"path\": file}");
  }
  out.mdp.reset(mdp);
  out.fixture_expert.reset(expert);
  return out;
}

std::vector<double> FlattenRows(const json& rows, const std::string& where) {
  if (!rows.is_array()) ConfigFail(where + ": expected a nested array");
  std::vector<double> flat;
  for (const auto& row : rows) {
    for (double v : ValueList(row, where)) flat.push_back(v);
  }
  return flat;
}

// expert: omitted (fixture expert) | {"temperature": t} | {"probs": [[..]]} |
// {"path": file}
PolicyPtr LoadExpert(const Config& cfg, LoadedMdp& loaded) {
  const int ns = cgail_mdp_n_states(loaded.mdp.get());
  const int na = cgail_mdp_n_actions(loaded.mdp.get());
  cgail_policy* p = nullptr;
  if (!cfg.doc.contains("expert")) {
    if (!loaded.fixture_expert) ConfigFail("expert: required for this MDP");
    return std::move(loaded.fixture_expert);
  }
  const json& e = cfg.doc["expert"];
  if (!e.is_object()) ConfigFail("expert: expected an object");
  if (e.contains("temperature")) {
    Check(cgail_policy_soft_optimal(loaded.mdp.get(), GetNumber(e, "temperature", 0.1), &p),
          "expert");
  } else if (e.contains("probs")) {
    const std::vector<double> flat = FlattenRows(e["probs"], "expert.probs");
    if (flat.size() != static_cast<std::size_t>(ns * na)) {
      ConfigFail("expert.probs: expected " + std::to_string(ns) + "x" + std::to_string(na));
    }
    Check(cgail_policy_create(ns, na, flat.data(), &p), "expert");
  } else if (e.contains("path")) {
    std::ifstream in(cfg.Resolve(GetString(e, "path", "")));
    if (!in) ConfigFail("expert.path: cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    Check(cgail_policy_from_json(ss.str().c_str(), &p), "expert");
  } else {
    ConfigFail("expert: expected temperature, probs or path");
  }
  return PolicyPtr(p);
}

std::string IndexedName(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04zu%s", stem, i, ext);
  return buf;
}

template <typename Fn>
void RunParallel(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

// ---- subcommands ----------------------------------------------------------

int CmdSimulate(const std::string& config_path, const std::string& out_override) {
  const Config cfg = LoadConfig(config_path);
  RejectUnknownKeys(cfg.doc,
                    {"params", "grid", "controlled", "init", "dt", "steps", "horizon",
                     "integrator", "record_every", "tolerance", "output_dir"},
                    "simulate");
  const auto tuples = ParseParamSet(cfg.doc);
  const bool controlled = GetBool(cfg.doc, "controlled", true);
  const double dt = GetNumber(cfg.doc, "dt", 1e-3);
  if (!(dt > 0.0)) ConfigFail("dt: must be positive");
  long steps = 0;
  if (cfg.doc.contains("steps")) {
    steps = static_cast<long>(GetInt(cfg.doc, "steps", 0));
  } else {
    steps = std::lround(GetNumber(cfg.doc, "horizon", 10.0) / dt);
  }
  const std::string integ = GetString(cfg.doc, "integrator", "rk4");
  if (integ != "rk4" && integ != "euler") ConfigFail("integrator: expected rk4 or euler");
  const int record_every = static_cast<int>(GetInt(cfg.doc, "record_every", 1));
  const double tolerance = GetNumber(cfg.doc, "tolerance", 1e-6);

  // init: {"x", "y"} absolute, or {"dx", "dy_rel"} offsets from (1/2, E).
  json init = cfg.doc.value("init", json{{"dx", 0.02}, {"dy_rel", 0.02}});
  if (!init.is_object()) ConfigFail("init: expected an object");
  RejectUnknownKeys(init, {"x", "y", "dx", "dy_rel"}, "init");
  const bool absolute = init.contains("x") || init.contains("y");

  const fs::path dir = PrepareOutputDir(cfg, out_override);
  std::vector<TrajPtr> trajs;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const cgail_scalar_params& p = tuples[i];
    const double x0 = absolute ? GetNumber(init, "x", 0.5) : 0.5 + GetNumber(init, "dx", 0.0);
    const double y0 = absolute ? GetNumber(init, "y", p.expert_prob)
                               : p.expert_prob * (1.0 + GetNumber(init, "dy_rel", 0.0));
    cgail_trajectory* t = nullptr;
    Check(cgail_scalar_integrate(&p, x0, y0, controlled, dt, steps,
                                 integ == "rk4" ? CGAIL_RK4 : CGAIL_EULER, record_every, &t),
          "params[" + std::to_string(i) + "]");
    trajs.emplace_back(t);
    Check(cgail_trajectory_write_csv(t, (dir / IndexedName("trajectory", i, ".csv")).c_str()));
  }
  std::vector<const cgail_trajectory*> raw;
  for (const auto& t : trajs) raw.push_back(t.get());
  Check(cgail_write_sweep_summary(raw.data(), raw.size(), tolerance,
                                  (dir / "sweep_summary.csv").c_str()));
  std::size_t converged = 0;
  for (const auto& t : trajs) converged += cgail_trajectory_terminal_distance(t.get()) < tolerance;
  std::cout << "simulate: " << trajs.size() << " trajectories, " << converged
            << " within " << Num(tolerance) << " of (1/2, E); outputs in " << dir.string()
            << "\n";
  return kExitOk;
}

int CmdEquilibria(const std::string& config_path, const std::string& out_override) {
  const Config cfg = LoadConfig(config_path);
  RejectUnknownKeys(cfg.doc, {"params", "grid", "controlled", "seeds", "output_dir"},
                    "equilibria");
  const auto tuples = ParseParamSet(cfg.doc);
  const bool controlled = GetBool(cfg.doc, "controlled", false);
  const int seeds = static_cast<int>(GetInt(cfg.doc, "seeds", 40));
  const fs::path dir = PrepareOutputDir(cfg, out_override);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    std::size_t count = 0;
    Check(cgail_find_equilibria(&tuples[i], controlled, seeds, nullptr, nullptr, nullptr, 0,
                                &count));
    std::vector<double> xs(count), ys(count), res(count);
    Check(cgail_find_equilibria(&tuples[i], controlled, seeds, xs.data(), ys.data(),
                                res.data(), count, &count));
    Check(cgail_write_equilibria_csv(xs.data(), ys.data(), res.data(), count,
                                     (dir / IndexedName("equilibria", i, ".csv")).c_str()));
    std::cout << "params[" << i << "]: " << count << " root(s)";
    for (std::size_t r = 0; r < count; ++r) {
      std::cout << (r ? ", " : " ") << "(" << Num(xs[r]) << ", " << Num(ys[r]) << ")";
    }
    std::cout << "\n";
  }
  return kExitOk;
}

int CmdAudit(const std::string& config_path, const std::string& out_override, int threads) {
  const Config cfg = LoadConfig(config_path);
  RejectUnknownKeys(cfg.doc,
                    {"c", "lambda", "expert_prob", "k", "alpha", "dt", "horizon",
                     "tolerance", "perturb_x", "perturb_y_rel", "threads", "output_dir"},
                    "audit");
  cgail_audit_spec spec;
  cgail_audit_spec_default(&spec);
  spec.c = ParseRange(cfg.doc, "c", spec.c);
  spec.lambda = ParseRange(cfg.doc, "lambda", spec.lambda);
  spec.expert_prob = ParseRange(cfg.doc, "expert_prob", spec.expert_prob);
  spec.k = ParseRange(cfg.doc, "k", spec.k);
  spec.alpha = ParseRange(cfg.doc, "alpha", spec.alpha);
  spec.dt = GetNumber(cfg.doc, "dt", spec.dt);
  spec.horizon = GetNumber(cfg.doc, "horizon", spec.horizon);
  spec.tolerance = GetNumber(cfg.doc, "tolerance", spec.tolerance);
  spec.perturb_x = GetNumber(cfg.doc, "perturb_x", spec.perturb_x);
  spec.perturb_y_rel = GetNumber(cfg.doc, "perturb_y_rel", spec.perturb_y_rel);
  spec.threads = threads > 0 ? threads : static_cast<int>(GetInt(cfg.doc, "threads", 1));
  const fs::path dir = PrepareOutputDir(cfg, out_override);

  cgail_audit* raw = nullptr;
  Check(cgail_audit_run(&spec, &raw), "audit");
  AuditPtr audit(raw);
  Check(cgail_audit_write_csv(audit.get(), (dir / "audit.csv").c_str()));
  const std::size_t counterexamples = cgail_audit_counterexamples(audit.get());
  std::cout << "audit: " << cgail_audit_length(audit.get()) << " tuples, "
            << cgail_audit_assumption_rows(audit.get()) << " satisfy the assumption, "
            << cgail_audit_marginal_rows(audit.get()) << " marginal, " << counterexamples
            << " counterexample(s)\n";
  return counterexamples == 0 ? kExitOk : kExitNumerical;
}

int CmdFlow(const std::string& config_path, const std::string& out_override) {
  const Config cfg = LoadConfig(config_path);
  RejectUnknownKeys(cfg.doc,
                    {"mdp", "expert", "lambda", "dt", "steps", "init_policy", "init_disc",
                     "output_dir"},
                    "flow");
  LoadedMdp loaded = LoadMdp(cfg);
  PolicyPtr expert = LoadExpert(cfg, loaded);
  const int ns = cgail_mdp_n_states(loaded.mdp.get());
  const int na = cgail_mdp_n_actions(loaded.mdp.get());

  cgail_policy* init = nullptr;
  const json init_spec = cfg.doc.value("init_policy", json("uniform"));
  if (init_spec.is_string() && init_spec.get<std::string>() == "uniform") {
    Check(cgail_policy_uniform(ns, na, &init));
  } else if (init_spec.is_string() && init_spec.get<std::string>() == "expert") {
    std::vector<double> probs(static_cast<std::size_t>(ns * na));
    Check(cgail_policy_probs(expert.get(), probs.data(), probs.size()));
    Check(cgail_policy_create(ns, na, probs.data(), &init));
  } else if (init_spec.is_array()) {
    const std::vector<double> flat = FlattenRows(init_spec, "init_policy");
    if (flat.size() != static_cast<std::size_t>(ns * na)) ConfigFail("init_policy: wrong shape");
    Check(cgail_policy_create(ns, na, flat.data(), &init), "init_policy");
  } else {
    ConfigFail("init_policy: expected \"uniform\", \"expert\" or a table");
  }
  PolicyPtr init_policy(init);
  const std::vector<double> disc(static_cast<std::size_t>(ns * na),
                                 GetNumber(cfg.doc, "init_disc", 0.5));
  const fs::path dir = PrepareOutputDir(cfg, out_override);

  cgail_flow_trace* raw = nullptr;
  Check(cgail_flow_integrate(loaded.mdp.get(), expert.get(), init_policy.get(), disc.data(),
                             GetNumber(cfg.doc, "lambda", 1.0), GetNumber(cfg.doc, "dt", 1e-2),
                             static_cast<int>(GetInt(cfg.doc, "steps", 1000)), &raw),
        "flow");
  FlowPtr trace(raw);
  Check(cgail_flow_trace_write_csv(trace.get(), (dir / "flow.csv").c_str()));
  cgail_flow_record last{};
  Check(cgail_flow_trace_record(trace.get(), cgail_flow_trace_length(trace.get()) - 1, &last));
  std::cout << "flow: " << cgail_flow_trace_length(trace.get()) << " records, final t="
            << Num(last.t) << ", policy distance to expert "
            << Num(last.policy_distance_to_expert) << "\n";
  return kExitOk;
}

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

const std::vector<std::string> kSweepable = {"k",         "lambda",    "alpha",
                                             "lr_disc",   "lr_policy", "n_traj_per_iter",
                                             "horizon",   "iterations", "seed"};

SweepAxis ParseSweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) ConfigFail("--sweep: expected name=v1,v2,...");
  SweepAxis axis;
  axis.name = text.substr(0, eq);
  if (std::find(kSweepable.begin(), kSweepable.end(), axis.name) == kSweepable.end()) {
    ConfigFail("--sweep: unknown parameter '" + axis.name + "'");
  }
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      ConfigFail("--sweep " + axis.name + ": bad value '" + item + "'");
    }
    axis.values.push_back(v);
  }
  if (axis.values.empty()) ConfigFail("--sweep " + axis.name + ": no values");
  return axis;
}

int AsCount(double v, const std::string& name) {
  if (v != std::floor(v) || v < 0 || v > 1e9) ConfigFail(name + ": expected a count");
  return static_cast<int>(v);
}

void SetField(cgail_train_config& c, const std::string& name, double v) {
  if (name == "k") c.k = v;
  else if (name == "lambda") c.lambda = v;
  else if (name == "alpha") c.alpha = v;
  else if (name == "lr_disc") c.lr_disc = v;
  else if (name == "lr_policy") c.lr_policy = v;
  else if (name == "n_traj_per_iter") c.n_traj_per_iter = AsCount(v, name);
  else if (name == "horizon") c.horizon = AsCount(v, name);
  else if (name == "iterations") c.iterations = AsCount(v, name);
  else if (name == "seed") c.seed = static_cast<uint64_t>(AsCount(v, name));
  else ConfigFail("unknown parameter '" + name + "'");
}

cgail_train_config ParseTrainConfig(const json& t) {
  if (!t.is_object()) ConfigFail("train: expected an object");
  RejectUnknownKeys(t,
                    {"k", "lambda", "alpha", "lr_disc", "lr_policy", "n_traj_per_iter",
                     "horizon", "iterations", "seed", "oracle_policy_controller",
                     "n_expert_traj", "eval_traj", "eval_horizon", "ground_cost",
                     "init_policy"},
                    "train");
  cgail_train_config c;
  cgail_train_config_default(&c);
  for (const auto& name : kSweepable) {
    if (t.contains(name)) SetField(c, name, GetNumber(t, name.c_str(), 0.0));
  }
  c.oracle_policy_controller = GetBool(t, "oracle_policy_controller", false);
  c.n_expert_traj = static_cast<int>(GetInt(t, "n_expert_traj", c.n_expert_traj));
  c.eval_traj = static_cast<int>(GetInt(t, "eval_traj", c.eval_traj));
  c.eval_horizon = static_cast<int>(GetInt(t, "eval_horizon", c.eval_horizon));
  const std::string cost = GetString(t, "ground_cost", "hop");
  if (cost == "hop") c.ground_cost = CGAIL_COST_HOP;
  else if (cost == "discrete") c.ground_cost = CGAIL_COST_DISCRETE;
  else ConfigFail("train.ground_cost: expected hop or discrete");
  const std::string init = GetString(t, "init_policy", "uniform");
  if (init == "uniform") c.init_policy = CGAIL_INIT_UNIFORM;
  else if (init == "expert") c.init_policy = CGAIL_INIT_EXPERT;
  else ConfigFail("train.init_policy: expected uniform or expert");
  return c;
}

int CmdTrain(const std::string& config_path, const std::string& out_override,
             const std::vector<std::string>& sweeps, int threads) {
  const Config cfg = LoadConfig(config_path);
  RejectUnknownKeys(cfg.doc,
                    {"mdp", "expert", "train", "seeds", "sweep", "window", "threads",
                     "output_dir"},
                    "train config");
  LoadedMdp loaded = LoadMdp(cfg);
  PolicyPtr expert = LoadExpert(cfg, loaded);
  const cgail_train_config base = ParseTrainConfig(cfg.doc.value("train", json::object()));
  const int window = static_cast<int>(GetInt(cfg.doc, "window", 50));
  if (threads <= 0) threads = static_cast<int>(GetInt(cfg.doc, "threads", 1));

  // Axes from the config file first, then command-line axes override them.
  std::vector<SweepAxis> axes;
  auto add_axis = [&](SweepAxis a) {
    auto it = std::find_if(axes.begin(), axes.end(),
                           [&](const SweepAxis& b) { return b.name == a.name; });
    if (it != axes.end()) *it = std::move(a);
    else axes.push_back(std::move(a));
  };
  if (cfg.doc.contains("sweep")) {
    const json& s = cfg.doc["sweep"];
    if (!s.is_object()) ConfigFail("sweep: expected an object of value lists");
    for (auto it = s.begin(); it != s.end(); ++it) {
      std::string spec = it.key() + "=";
      const auto values = ValueList(it.value(), "sweep." + it.key());
      for (std::size_t i = 0; i < values.size(); ++i) spec += (i ? "," : "") + Num(values[i]);
      add_axis(ParseSweep(spec));
    }
  }
  for (const auto& s : sweeps) add_axis(ParseSweep(s));
  bool seed_axis = false;
  for (const auto& a : axes) seed_axis |= a.name == "seed";
  if (!seed_axis) {
    SweepAxis seeds{"seed", {}};
    if (cfg.doc.contains("seeds")) {
      seeds.values = ValueList(cfg.doc["seeds"], "seeds");
    } else {
      seeds.values = {static_cast<double>(base.seed)};
    }
    axes.push_back(seeds);
  }

  struct Run {
    cgail_train_config config;
    std::string group;
    std::string stem;
  };
  std::vector<Run> runs{{base, "", ""}};
  for (const auto& axis : axes) {
    std::vector<Run> next;
    for (const auto& r : runs) {
      for (double v : axis.values) {
        Run n = r;
        SetField(n.config, axis.name, v);
        const std::string label = axis.name + "=" + Num(v);
        if (axis.name != "seed") n.group += (n.group.empty() ? "" : ",") + label;
        n.stem += (n.stem.empty() ? "" : "_") + label;
        next.push_back(n);
      }
    }
    runs = std::move(next);
  }
  for (auto& r : runs) {
    if (r.group.empty()) r.group = "k=" + Num(r.config.k);
  }

  const fs::path dir = PrepareOutputDir(cfg, out_override);
  std::vector<cgail_run_summary> summaries(runs.size());
  RunParallel(runs.size(), threads, [&](std::size_t i) {
    const Run& r = runs[i];
    cgail_training_trace* raw = nullptr;
    Check(cgail_train(loaded.mdp.get(), expert.get(), &r.config, &raw), "run " + r.stem);
    TracePtr trace(raw);
    Check(cgail_training_trace_write_csv(trace.get(),
                                         (dir / ("trace_" + r.stem + ".csv")).c_str()));
    Check(cgail_training_trace_write_summary(
        trace.get(), r.group.c_str(), window,
        (dir / ("summary_" + r.stem + ".json")).c_str()));
    Check(cgail_training_trace_summary(trace.get(), window, &summaries[i]));
    summaries[i].group = r.group.c_str();
  });

  cgail_aggregate* raw = nullptr;
  Check(cgail_aggregate_create(&raw));
  AggPtr agg(raw);
  for (const auto& s : summaries) Check(cgail_aggregate_add(agg.get(), &s));
  Check(cgail_aggregate_write_csv(agg.get(), (dir / "aggregate.csv").c_str()));
  Check(cgail_aggregate_write_json(agg.get(), (dir / "aggregate.json").c_str()));
  std::cout << "train: " << runs.size() << " run(s)\n";
  for (std::size_t i = 0; i < cgail_aggregate_length(agg.get()); ++i) {
    cgail_aggregate_row row;
    Check(cgail_aggregate_row_at(agg.get(), i, &row));
    std::cout << "  " << row.group << ": runs=" << row.runs
              << " convergence_step=" << Num(row.convergence_step.mean)
              << " oscillation_range=" << Num(row.oscillation_range.mean)
              << " final_return=" << Num(row.final_normalized_return.mean)
              << " final_wasserstein=" << Num(row.final_wasserstein.mean) << "\n";
  }
  return kExitOk;
}

int CmdAggregate(const std::vector<std::string>& inputs, const std::string& input_dir,
                 const std::string& out_dir) {
  std::vector<std::string> files = inputs;
  if (!input_dir.empty()) {
    std::error_code ec;
    if (!fs::is_directory(input_dir, ec)) ConfigFail("--dir: not a directory");
    std::vector<std::string> found;
    for (const auto& entry : fs::directory_iterator(input_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("summary_", 0) == 0 && entry.path().extension() == ".json") {
        found.push_back(entry.path().string());
      }
    }
    std::sort(found.begin(), found.end());
    files.insert(files.end(), found.begin(), found.end());
  }
  if (files.empty()) ConfigFail("aggregate: no summary files given");
  cgail_aggregate* raw = nullptr;
  Check(cgail_aggregate_create(&raw));
  AggPtr agg(raw);
  for (const auto& f : files) Check(cgail_aggregate_add_file(agg.get(), f.c_str()), f);
  fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) ConfigFail("--out: cannot create '" + dir.string() + "'");
  Check(cgail_aggregate_write_csv(agg.get(), (dir / "aggregate.csv").c_str()));
  Check(cgail_aggregate_write_json(agg.get(), (dir / "aggregate.json").c_str()));
  std::cout << "aggregate: " << files.size() << " summaries, "
            << cgail_aggregate_length(agg.get()) << " group(s)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for adversarial imitation training dynamics", "cgail"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cgail_version()));

  std::string config, out;
  int threads = 0;
  std::vector<std::string> sweeps, inputs;
  std::string input_dir;

  auto* simulate = app.add_subcommand("simulate", "Integrate the one-step system");
  auto* equilibria = app.add_subcommand("equilibria", "Locate one-step equilibria");
  auto* audit = app.add_subcommand("audit", "Stability audit over a parameter grid");
  auto* flow = app.add_subcommand("flow", "Tabular gradient flow of vanilla GAIL");
  auto* train = app.add_subcommand("train", "Controlled GAIL training runs");
  auto* aggregate = app.add_subcommand("aggregate", "Combine run summaries");
  for (auto* sub : {simulate, equilibria, audit, flow, train}) {
    sub->add_option("-c,--config", config, "JSON config file")->required();
    sub->add_option("-o,--out", out, "Output directory (overrides output_dir)");
  }
  audit->add_option("-j,--threads", threads, "Worker threads");
  train->add_option("-j,--threads", threads, "Concurrent runs");
  train->add_option("--sweep", sweeps, "Sweep axis, e.g. k=0,0.1,1,10")->take_all();
  aggregate->add_option("inputs", inputs, "Summary JSON files");
  aggregate->add_option("--dir", input_dir, "Directory of summary_*.json files");
  aggregate->add_option("-o,--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return CmdSimulate(config, out);
    if (equilibria->parsed()) return CmdEquilibria(config, out);
    if (audit->parsed()) return CmdAudit(config, out, threads);
    if (flow->parsed()) return CmdFlow(config, out);
    if (train->parsed()) return CmdTrain(config, out, sweeps, threads);
    if (aggregate->parsed()) return CmdAggregate(inputs, input_dir, out);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what() << "\n";
    return f.exit_code;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitConfig;
}
