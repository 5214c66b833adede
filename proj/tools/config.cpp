#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "lastiter/problem_io.hpp"

namespace lastiter::cli {

using nlohmann::json;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string msg = "invalid config:";
  for (const auto& i : issues) msg += "\n  - " + i;
  return msg;
}

class Issues {
 public:
  template <class F>
  void guard(const std::string& field, F&& f) {
    try {
      f();
    } catch (const json::exception& e) {
      add(field, e.what());
    } catch (const std::exception& e) {
      add(field, e.what());
    }
  }

  void add(const std::string& field, const std::string& what) { list_.push_back(field + ": " + what); }
  bool empty() const noexcept { return list_.empty(); }

  void raise_if_any() const {
    if (!list_.empty()) throw ConfigError(list_);
  }

 private:
  std::vector<std::string> list_;
};

void reject_unknown(Issues& issues, const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) return;
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      issues.add(where.empty() ? key : where + "." + key, "unknown key");
  }
}

std::int64_t integer_at_least(const json& j, const char* key, std::int64_t min) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw PreconditionError("must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < min) throw PreconditionError("must be >= " + std::to_string(min));
  return x;
}

std::uint64_t unsigned_value(const json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw PreconditionError("must be a non-negative integer");
  return v.get<std::uint64_t>();
}

MinibatchSmoothness smoothness_variant(const json& j) {
  const std::string s = j.value("minibatch_smoothness", std::string("as_printed"));
  if (s == "as_printed") return MinibatchSmoothness::as_printed;
  if (s == "swapped") return MinibatchSmoothness::swapped;
  throw PreconditionError("must be 'as_printed' or 'swapped'");
}

std::string to_string(MinibatchSmoothness m) {
  return m == MinibatchSmoothness::as_printed ? "as_printed" : "swapped";
}

// "zeros" or an explicit vector.
std::optional<Vector> parse_x0(const json& j) {
  if (!j.contains("x0")) return std::nullopt;
  const json& v = j.at("x0");
  if (v.is_string()) {
    if (v.get<std::string>() != "zeros") throw PreconditionError("must be \"zeros\" or an array");
    return std::nullopt;
  }
  Vector x = vector_from_json(v);
  if (x.size() == 0) throw PreconditionError("must be non-empty");
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (!std::isfinite(x[k])) throw PreconditionError("must be finite");
  return x;
}

json x0_json(const std::optional<Vector>& x0) {
  return x0 ? vector_to_json(*x0) : json("zeros");
}

std::string hash_of(const json& resolved) { return hex64(json_fingerprint(resolved)); }

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : PreconditionError(join_issues(issues)), issues_(std::move(issues)) {}

unsigned resolve_workers(std::optional<unsigned> flag, const char* env_value) {
  if (flag) {
    if (*flag == 0) throw PreconditionError("--workers must be >= 1");
    return *flag;
  }
  if (env_value && *env_value) {
    char* end = nullptr;
    const long v = std::strtol(env_value, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096)
      throw PreconditionError(std::string("LASTITER_WORKERS must be a positive integer (got '") +
                              env_value + "')");
    return static_cast<unsigned>(v);
  }
  return 1;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw PreconditionError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

RunExperiment load_run_config(const json& doc) {
  Issues issues;
  if (!doc.is_object()) throw ConfigError({"config: must be a JSON object"});
  reject_unknown(issues, doc, "", {"problem", "run", "description"});

  RunExperiment ex;
  std::optional<Vector> x0;
  bool have_problem = false;
  bool have_schedule = false;
  issues.guard("problem", [&] {
    ex.problem_spec = problem_spec_from_json(doc.at("problem"));
    have_problem = true;
  });

  const json run = doc.value("run", json::object());
  if (!doc.contains("run")) issues.add("run", "missing");
  reject_unknown(issues, run, "run",
                 {"T", "schedule", "b", "x0", "n_seeds", "base_seed", "minibatch_smoothness"});
  issues.guard("run.T", [&] {
    ex.run.horizon = integer_at_least(run, "T", 1);
    if (ex.run.horizon < 3)
      throw PreconditionError("T >= 3 required for the bound comparison (got " +
                              std::to_string(ex.run.horizon) + ")");
  });
  issues.guard("run.schedule", [&] {
    ex.run.schedule = schedule_from_json(run.at("schedule"));
    have_schedule = true;
  });
  issues.guard("run.b", [&] {
    ex.run.batch_size =
        run.contains("b") ? static_cast<std::size_t>(integer_at_least(run, "b", 1)) : 1;
  });
  issues.guard("run.n_seeds", [&] {
    ex.n_seeds = run.contains("n_seeds")
                     ? static_cast<std::uint64_t>(integer_at_least(run, "n_seeds", 2))
                     : 1000;
  });
  issues.guard("run.base_seed", [&] { ex.base_seed = unsigned_value(run, "base_seed", 0); });
  issues.guard("run.x0", [&] { x0 = parse_x0(run); });
  issues.guard("run.minibatch_smoothness", [&] { ex.minibatch_smoothness = smoothness_variant(run); });
  issues.raise_if_any();

  // Preconditions that need the problem itself.
  issues.guard("problem", [&] { ex.problem = materialize(ex.problem_spec); });
  if (!have_problem || !have_schedule || !ex.problem) issues.raise_if_any();
  const auto& prob = ex.problem->problem;
  const auto& cert = ex.problem->certificate;
  issues.guard("run.b", [&] {
    if (ex.run.batch_size == 1) {
      ex.L = prob.max_smoothness();
      ex.sigma_sq = cert.sigma_star_sq;
    } else {
      const auto ec = effective_constants(prob, ex.run.batch_size, cert, ex.minibatch_smoothness);
      ex.L = ec.L_b;
      ex.sigma_sq = ec.sigma_b_sq;
    }
  });
  issues.guard("run.x0", [&] {
    if (x0 && x0->size() != prob.dimension())
      throw PreconditionError("dimension " + std::to_string(x0->size()) +
                              " does not match the problem dimension " +
                              std::to_string(prob.dimension()));
    ex.run.x0 = x0 ? *x0 : Vector::Zero(prob.dimension());
    ex.D_sq = (ex.run.x0 - cert.x_star).squaredNorm();
  });
  if (ex.L > 0.0) {
    issues.guard("run.schedule", [&] {
      ex.gamma = resolve_schedule(ex.run.schedule, ex.L, ex.run.horizon, ex.sigma_sq);
    });
  }
  issues.raise_if_any();
  ex.run.smoothness = ex.L;

  ex.resolved = {{"problem", to_json(ex.problem_spec)},
                 {"run",
                  {{"T", ex.run.horizon},
                   {"schedule", to_json(ex.run.schedule)},
                   {"b", ex.run.batch_size},
                   {"x0", x0_json(x0)},
                   {"n_seeds", ex.n_seeds},
                   {"base_seed", ex.base_seed},
                   {"minibatch_smoothness", to_string(ex.minibatch_smoothness)}}}};
  ex.config_hash = hash_of(ex.resolved);
  return ex;
}

SweepExperiment load_sweep_config(const json& doc) {
  Issues issues;
  if (!doc.is_object()) throw ConfigError({"config: must be a JSON object"});
  reject_unknown(issues, doc, "", {"problems", "sweep", "description"});

  SweepExperiment ex;
  SweepSpec& spec = ex.spec;
  std::optional<Vector> x0;
  issues.guard("problems", [&] {
    const json& ps = doc.at("problems");
    if (!ps.is_array() || ps.empty()) throw PreconditionError("must be a non-empty array");
    std::set<std::string> ids;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      issues.guard("problems[" + std::to_string(k) + "]", [&] {
        ProblemSpec p = problem_spec_from_json(ps[k]);
        if (p.id.empty()) p.id = "problem" + std::to_string(k);
        if (!ids.insert(p.id).second) throw PreconditionError("duplicate id '" + p.id + "'");
        spec.problems.push_back(std::move(p));
      });
    }
  });

  const json sw = doc.value("sweep", json::object());
  if (!doc.contains("sweep")) issues.add("sweep", "missing");
  reject_unknown(issues, sw, "sweep",
                 {"T_grid", "schedules", "b_grid", "x0", "n_seeds", "base_seed",
                  "minibatch_smoothness"});
  issues.guard("sweep.T_grid", [&] {
    const json& g = sw.at("T_grid");
    if (!g.is_array() || g.empty()) throw PreconditionError("must be a non-empty array");
    for (const auto& v : g) {
      if (!v.is_number_integer()) throw PreconditionError("entries must be integers");
      const auto T = v.get<std::int64_t>();
      if (T < 3)
        throw PreconditionError("T >= 3 required for the bound comparison (got " +
                                std::to_string(T) + ")");
      spec.T_grid.push_back(T);
    }
  });
  issues.guard("sweep.schedules", [&] {
    const json& g = sw.at("schedules");
    if (!g.is_array() || g.empty()) throw PreconditionError("must be a non-empty array");
    for (const auto& s : g) spec.schedules.push_back(schedule_from_json(s));
  });
  issues.guard("sweep.b_grid", [&] {
    spec.b_grid.clear();
    const json g = sw.value("b_grid", json::array({1}));
    if (!g.is_array() || g.empty()) throw PreconditionError("must be a non-empty array");
    for (const auto& v : g) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
        throw PreconditionError("entries must be integers >= 1");
      spec.b_grid.push_back(v.get<std::size_t>());
    }
  });
  issues.guard("sweep.n_seeds", [&] {
    spec.n_seeds = sw.contains("n_seeds")
                       ? static_cast<std::uint64_t>(integer_at_least(sw, "n_seeds", 2))
                       : 1000;
  });
  issues.guard("sweep.base_seed", [&] { spec.base_seed = unsigned_value(sw, "base_seed", 0); });
  issues.guard("sweep.x0", [&] { x0 = parse_x0(sw); });
  issues.guard("sweep.minibatch_smoothness",
               [&] { spec.minibatch_smoothness = smoothness_variant(sw); });
  issues.raise_if_any();

  if (x0) {
    spec.x0_policy = X0Policy::explicit_vector;
    spec.x0 = *x0;
  }
  json problems = json::array();
  for (const auto& p : spec.problems) problems.push_back(to_json(p));
  json schedules = json::array();
  for (const auto& s : spec.schedules) schedules.push_back(to_json(s));
  ex.resolved = {{"problems", problems},
                 {"sweep",
                  {{"T_grid", spec.T_grid},
                   {"schedules", schedules},
                   {"b_grid", spec.b_grid},
                   {"x0", x0_json(x0)},
                   {"n_seeds", spec.n_seeds},
                   {"base_seed", spec.base_seed},
                   {"minibatch_smoothness", to_string(spec.minibatch_smoothness)}}}};
  ex.config_hash = hash_of(ex.resolved);
  return ex;
}

LemmaExperiment load_lemma_config(const json& doc) {
  LemmaExperiment ex;
  if (doc.is_null()) {
    ex.battery = default_battery();
  } else {
    Issues issues;
    reject_unknown(issues, doc, "",
                   {"problems", "points", "pairs", "point_radii", "seed", "grids", "description"});
    if (doc.is_object() && doc.contains("grids")) {
      reject_unknown(issues, doc.at("grids"), "grids",
                     {"epsilon", "gamma_L", "weight_T", "weight_phi", "exponent_t",
                      "exponent_boundary_t", "exponent_theta", "exp_a", "exp_x_fraction",
                      "gautschi_x", "gautschi_c"});
    }
    issues.guard("lemmas", [&] { ex.battery = battery_from_json(doc); });
    issues.raise_if_any();
  }
  ex.resolved = to_json(ex.battery);
  ex.config_hash = hash_of(ex.resolved);
  return ex;
}

}  // namespace lastiter::cli
