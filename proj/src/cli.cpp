#include "msb/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "msb/ergodics.hpp"
#include "msb/gwlimit.hpp"
#include "msb/laplace.hpp"
#include "msb/simulate.hpp"

namespace msb {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kKinds{"validate",    "solve-v",  "moments",     "simulate",
                                   "gw-converge", "tau-dist", "wasserstein", "stationary"};

const std::set<std::string> kKeys{"mechanism", "kind",     "lambda",  "lambdas", "t",
                                  "t_grid",    "horizon",  "step",    "x",       "y",
                                  "r",         "k_list",   "replicas", "dt",     "seed",
                                  "metric",    "jump_criterion", "bootstrap", "burn_in"};

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ValidationError("config." + key + ": expected a number");
  return v.get<double>();
}

Vec2 as_pair(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ValidationError("config." + key + ": expected [a, b]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

MixedState as_state(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number_integer()) {
    throw ValidationError("config." + key + ": expected [y1, integer y2]");
  }
  const MixedState s{v[0].get<double>(), v[1].get<std::int64_t>()};
  if (!s.valid()) throw ValidationError("config." + key + ": state must be nonnegative");
  return s;
}

std::size_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ValidationError("config." + key + ": expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ValidationError("config." + key + ": expected a string");
  return v.get<std::string>();
}

json pair_json(Vec2 v) { return json::array({v.x1, v.x2}); }
json state_json(MixedState s) { return json::array({s.y1, s.y2}); }

GroundMetric metric_of(const std::string& m) {
  if (m == "euclidean") return GroundMetric::kEuclidean;
  if (m == "manhattan") return GroundMetric::kManhattan;
  throw ValidationError("config.metric: expected \"euclidean\" or \"manhattan\"");
}

JumpCriterion criterion_of(const std::string& c) {
  if (c == "product") return JumpCriterion::kProduct;
  if (c == "either") return JumpCriterion::kEither;
  throw ValidationError("config.jump_criterion: expected \"product\" or \"either\"");
}

void check(const ExperimentConfig& c) {
  if (!kKinds.count(c.kind)) throw ValidationError("config.kind: unknown kind \"" + c.kind + "\"");
  if (c.mechanism.empty()) throw ValidationError("config.mechanism: missing");
  if (!(c.dt > 0.0)) throw ValidationError("config.dt: must be > 0");
  if (!(c.step > 0.0)) throw ValidationError("config.step: must be > 0");
  if (c.replicas < 1) throw ValidationError("config.replicas: must be >= 1");
  if (!(c.t >= 0.0) || !(c.horizon >= 0.0)) throw ValidationError("config: times must be >= 0");
  for (double s : c.t_grid) {
    if (!(s >= 0.0)) throw ValidationError("config.t_grid: times must be >= 0");
  }
  if (!std::is_sorted(c.k_list.begin(), c.k_list.end()) || c.k_list.empty() || c.k_list.front() == 0) {
    throw ValidationError("config.k_list: expected increasing integers >= 1");
  }
  metric_of(c.metric);
  criterion_of(c.jump_criterion);
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) throw ValidationError("config: expected a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!kKeys.count(key)) throw ValidationError("config: unknown key \"" + key + "\"");
  }
  ExperimentConfig c;
  if (!doc.contains("mechanism")) throw ValidationError("config: missing key \"mechanism\"");
  if (!doc.contains("kind")) throw ValidationError("config: missing key \"kind\"");
  c.mechanism = as_string(doc["mechanism"], "mechanism");
  if (fs::path(c.mechanism).is_relative()) c.mechanism = (fs::path(base_dir) / c.mechanism).lexically_normal().string();
  c.kind = as_string(doc["kind"], "kind");
  if (doc.contains("lambda")) c.lambda = as_pair(doc["lambda"], "lambda");
  if (doc.contains("lambdas")) {
    if (!doc["lambdas"].is_array()) throw ValidationError("config.lambdas: expected a list of pairs");
    for (const auto& v : doc["lambdas"]) c.lambdas.push_back(as_pair(v, "lambdas"));
  }
  if (doc.contains("t")) c.t = as_number(doc["t"], "t");
  if (doc.contains("t_grid")) {
    if (!doc["t_grid"].is_array()) throw ValidationError("config.t_grid: expected a list");
    for (const auto& v : doc["t_grid"]) c.t_grid.push_back(as_number(v, "t_grid"));
  }
  if (doc.contains("horizon")) c.horizon = as_number(doc["horizon"], "horizon");
  if (doc.contains("step")) c.step = as_number(doc["step"], "step");
  if (doc.contains("x")) c.x = as_state(doc["x"], "x");
  if (doc.contains("y")) c.y = as_state(doc["y"], "y");
  if (doc.contains("r")) c.r = as_pair(doc["r"], "r");
  if (doc.contains("k_list")) {
    if (!doc["k_list"].is_array()) throw ValidationError("config.k_list: expected a list");
    c.k_list.clear();
    for (const auto& v : doc["k_list"]) c.k_list.push_back(as_count(v, "k_list"));
  }
  if (doc.contains("replicas")) c.replicas = as_count(doc["replicas"], "replicas");
  if (doc.contains("dt")) c.dt = as_number(doc["dt"], "dt");
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      throw ValidationError("config.seed: expected an unsigned 64-bit integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("metric")) c.metric = as_string(doc["metric"], "metric");
  if (doc.contains("jump_criterion")) c.jump_criterion = as_string(doc["jump_criterion"], "jump_criterion");
  if (doc.contains("bootstrap")) c.bootstrap = as_count(doc["bootstrap"], "bootstrap");
  if (doc.contains("burn_in")) c.burn_in = as_number(doc["burn_in"], "burn_in");
  check(c);
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
  return parse_config(doc, fs::path(path).parent_path().string());
}

json to_json(const ExperimentConfig& c) {
  json lambdas = json::array();
  for (Vec2 v : c.lambdas) lambdas.push_back(pair_json(v));
  return {{"mechanism", c.mechanism}, {"kind", c.kind},         {"lambda", pair_json(c.lambda)},
          {"lambdas", lambdas},       {"t", c.t},               {"t_grid", c.t_grid},
          {"horizon", c.horizon},     {"step", c.step},         {"x", state_json(c.x)},
          {"y", state_json(c.y)},     {"r", pair_json(c.r)},    {"k_list", c.k_list},
          {"replicas", c.replicas},   {"dt", c.dt},             {"seed", c.seed},
          {"metric", c.metric},       {"jump_criterion", c.jump_criterion},
          {"bootstrap", c.bootstrap}, {"burn_in", c.burn_in}};
}

std::string config_digest(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  try {
    j["mechanism"] = digest(to_json(load_mechanism(cfg.mechanism)));
  } catch (const std::exception&) {
  }
  return digest(j);
}

namespace {

std::string csv_line(std::initializer_list<double> values) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << v;
    first = false;
  }
  os << '\n';
  return os.str();
}

struct Outputs {
  std::string result_name = "result.csv";
  std::string result;
  json extra = json::object();
};

Outputs run_kind(const ExperimentConfig& c, const MechanismFile& file, unsigned threads) {
  const BranchingMechanism& mech = file.branching;
  const ImmigrationMechanism* imm = file.immigration ? &*file.immigration : nullptr;
  EnsembleOptions opt;
  opt.dt = c.dt;
  opt.replicas = c.replicas;
  opt.seed = c.seed;
  opt.threads = threads;
  Outputs out;

  if (c.kind == "solve-v") {
    out.result = solve_v(mech, c.lambda, c.horizon, c.step).to_csv();
  } else if (c.kind == "moments") {
    const std::vector<double> grid = c.t_grid.empty() ? std::vector<double>{c.t} : c.t_grid;
    out.result = "t,pi1,pi2,mean1,mean2\n";
    for (double s : grid) {
      const Vec2 pi = moment_flow(mech, c.lambda, s, c.step).closed_form;
      const Vec2 m = imm ? mean_state_imm(mech, *imm, c.x, s) : mean_state(mech, c.x, s);
      out.result += csv_line({s, pi.x1, pi.x2, m.x1, m.x2});
    }
  } else if (c.kind == "simulate") {
    const EnsembleSample sample = ensemble(mech, imm, c.x, c.t, opt);
    out.result = sample.to_csv();
    out.extra["ensemble"] = json::parse(sample.sidecar_json());
  } else if (c.kind == "gw-converge") {
    GWRunOptions g;
    g.replicas = c.replicas;
    g.seed = c.seed;
    g.threads = threads;
    out.result = to_csv(convergence_report(mech, c.x, c.lambda, c.t, c.k_list, g));
  } else if (c.kind == "tau-dist") {
    const std::vector<double> grid = c.t_grid.empty() ? std::vector<double>{c.t} : c.t_grid;
    const double horizon = *std::max_element(grid.begin(), grid.end());
    const ScalarFlowGrid analytic = survival_tau(mech, c.y, c.r, horizon, c.step);
    const auto times = first_jump_times(mech, c.y, c.r, horizon, opt, criterion_of(c.jump_criterion));
    out.result = "t,analytic,empirical,stderr\n";
    for (double s : grid) {
      const Estimate e = empirical_survival(times, s);
      out.result += csv_line({s, analytic.at(s), e.mean, e.std_error});
    }
  } else if (c.kind == "wasserstein") {
    const GroundMetric metric = metric_of(c.metric);
    if (c.replicas > kMaxAssignmentSize) {
      throw ValidationError("config.replicas: at most " + std::to_string(kMaxAssignmentSize) +
                            " points for the assignment solver");
    }
    const CoupledSample s = coupled_sample(mech, c.x, c.y, c.t, opt);
    const BootstrapW1 w = bootstrap_w1(to_points(s.first), to_points(s.second), c.bootstrap,
                                       c.seed ^ 0x9e3779b97f4a7c15ULL, metric);
    const W1Bounds b = w1_bounds(mech, c.x, c.y, c.t);
    ErgodicReport rep{b.lower, b.upper, w.value, w.std_error, 0.0, 0.0};
    std::optional<ErgodicRate> rate;
    try {
      rate = ergodic_rate(mech);
      rep.rate = rate->rate;
      rep.vartheta = rate->vartheta;
    } catch (const PreconditionError&) {
    } catch (const UnsupportedError&) {
    }
    json j = json::parse(rep.to_json());
    if (!rate) {
      j["rate"] = nullptr;
      j["vartheta"] = nullptr;
    }
    out.result_name = "result.json";
    out.result = j.dump(2) + "\n";
  } else if (c.kind == "stationary") {
    if (!imm) throw ValidationError("stationary: the mechanism file has no \"immigration\" block");
    const EnsembleSample sample = stationary_sample(mech, *imm, c.burn_in, opt);
    const std::vector<Vec2> args = c.lambdas.empty() ? std::vector<Vec2>{c.lambda} : c.lambdas;
    out.result = "lambda1,lambda2,analytic,empirical,stderr\n";
    for (Vec2 l : args) {
      const double a = stationary_laplace(mech, *imm, l, c.step).value;
      const Estimate e = empirical_laplace(sample, l);
      out.result += csv_line({l.x1, l.x2, a, e.mean, e.std_error});
    }
    out.extra["ensemble"] = json::parse(sample.sidecar_json());
  }
  return out;
}

}  // namespace

ExitCode run(const ExperimentConfig& cfg, const std::string& out_dir, unsigned threads,
             std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  json meta = {{"kind", cfg.kind}, {"config_digest", config_digest(cfg)}, {"seed", cfg.seed},
               {"version", kVersion}, {"threads", resolve_threads(threads)}};
  meta["versions"] = {{"msb", kVersion},
                      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                      {"compiler", __VERSION__}};
  json violations = json::array();
  ExitCode code = ExitCode::kOk;
  auto finish = [&](ExitCode c) {
    meta["violations"] = violations;
    meta["exit_code"] = static_cast<int>(c);
    meta["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_atomic((fs::path(out_dir) / "meta.json").string(), meta.dump(2) + "\n");
    return c;
  };
  try {
    const MechanismFile file = load_mechanism(cfg.mechanism);
    meta["mechanism_digest"] = digest(to_json(file));
    for (const auto& v : validate_branching(file.branching)) {
      violations.push_back({{"field", v.field}, {"message", v.message}});
    }
    if (file.immigration) {
      for (const auto& v : validate_immigration(*file.immigration)) {
        violations.push_back({{"field", v.field}, {"message", v.message}});
      }
    }
    if (!violations.empty()) {
      for (const auto& v : violations) {
        log << "violation: " << v["field"].get<std::string>() << ": "
            << v["message"].get<std::string>() << '\n';
      }
      code = ExitCode::kValidation;
    }
    if (cfg.kind == "validate") {
      std::string csv = "field,message\n";
      for (const auto& v : violations) {
        csv += v["field"].get<std::string>() + ",\"" + v["message"].get<std::string>() + "\"\n";
      }
      write_atomic((fs::path(out_dir) / "result.csv").string(), csv);
      return finish(code);
    }
    if (code != ExitCode::kOk) return finish(code);
    Outputs out = run_kind(cfg, file, threads);
    for (auto& [k, v] : out.extra.items()) meta[k] = v;
    write_atomic((fs::path(out_dir) / out.result_name).string(), out.result);
    return finish(ExitCode::kOk);
  } catch (const NumericError& e) {
    log << "numeric error: " << e.what() << '\n';
    meta["error"] = e.what();
    return finish(ExitCode::kNumeric);
  } catch (const UnsupportedError& e) {
    log << "unsupported: " << e.what() << '\n';
    meta["error"] = e.what();
    return finish(ExitCode::kValidation);
  } catch (const std::logic_error& e) {
    // ValidationError, DomainError, PreconditionError
    log << "error: " << e.what() << '\n';
    meta["error"] = e.what();
    return finish(ExitCode::kValidation);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    meta["error"] = e.what();
    return finish(ExitCode::kNumeric);
  }
}

namespace {

Vec2 parse_pair_flag(const std::string& s, const char* name) {
  double a = 0.0, b = 0.0;
  char comma = 0;
  std::istringstream is(s);
  if (!(is >> a >> comma >> b) || comma != ',') {
    throw ValidationError(std::string("--") + name + ": expected a,b");
  }
  return {a, b};
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Mixed-state branching process experiments"};
  std::string config_path, out_dir = "./out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<std::string> kind, lambda, x, y, r;
  std::optional<double> t, dt;
  std::optional<std::size_t> replicas;
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--threads", threads, "worker threads, 0 = MSB_THREADS or all cores");
  app.add_option("--kind", kind, "override the experiment kind");
  app.add_option("--lambda", lambda, "override lambda as a,b");
  app.add_option("--x", x, "override x as y1,y2");
  app.add_option("--y", y, "override y as y1,y2");
  app.add_option("--r", r, "override r as r1,r2");
  app.add_option("--t", t, "override t");
  app.add_option("--dt", dt, "override dt");
  app.add_option("--replicas", replicas, "override replicas");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::kValidation);
  }

  ExperimentConfig cfg;
  try {
    cfg = parse_config(config_path);
    auto as_state = [](Vec2 v, const char* name) {
      if (v.x2 != std::floor(v.x2)) throw ValidationError(std::string("--") + name + ": y2 must be an integer");
      const MixedState s{v.x1, static_cast<std::int64_t>(v.x2)};
      if (!s.valid()) throw ValidationError(std::string("--") + name + ": state must be nonnegative");
      return s;
    };
    if (seed) cfg.seed = *seed;
    if (kind) cfg.kind = *kind;
    if (lambda) cfg.lambda = parse_pair_flag(*lambda, "lambda");
    if (x) cfg.x = as_state(parse_pair_flag(*x, "x"), "x");
    if (y) cfg.y = as_state(parse_pair_flag(*y, "y"), "y");
    if (r) cfg.r = parse_pair_flag(*r, "r");
    if (t) {
      cfg.t = *t;
      cfg.horizon = *t;
    }
    if (dt) cfg.dt = *dt;
    if (replicas) cfg.replicas = *replicas;
    check(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kValidation);
  }
  return static_cast<int>(run(cfg, out_dir, threads, std::cerr));
}

}  // namespace msb
