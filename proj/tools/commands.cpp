#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "cli.hpp"
#include "lastiter/bounds.hpp"
#include "lastiter/csv.hpp"
#include "lastiter/problem_io.hpp"
#include "lastiter/version.hpp"

namespace lastiter::cli {

using nlohmann::json;

namespace {

std::string timestamp(bool deterministic) {
  if (deterministic) return "1970-01-01T00:00:00Z";
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json provenance(const char* command, const std::string& config_hash, const json& resolved,
                const Options& options) {
  return {{"tool", "lastiter"},
          {"version", std::string(version())},
          {"command", command},
          {"timestamp", timestamp(options.deterministic_output)},
          {"config_hash", config_hash},
          {"config", resolved}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PreconditionError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw PreconditionError("write failed for '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_file(path, doc.dump(2) + "\n");
}

template <class F>
int guarded(std::ostream& log, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitError;
  }
}

json verdict_json(const BoundVerdict& v) {
  return {{"ci95_upper", v.ci95_upper},
          {"bound_value", v.bound_value},
          {"slack_ratio", v.slack_ratio},
          {"satisfied", v.satisfied}};
}

std::optional<double> corollary_of(const BoundReport& r) {
  if (r.corollary_sqrt_c2) return r.corollary_sqrt_c2;
  if (r.corollary_sqrt) return r.corollary_sqrt;
  return r.corollary_poly;
}

// (quantity, value) pairs shared by the terminal table and bound.csv.
std::vector<std::pair<std::string, std::string>> bound_entries(const BoundReport& r) {
  std::vector<std::pair<std::string, std::string>> e;
  const auto add = [&](std::string name, double v) { e.emplace_back(std::move(name), format_double(v)); };
  add("gamma", r.inputs.gamma);
  add("L", r.inputs.L);
  add("D_sq", r.inputs.D_sq);
  add("sigma_star_sq", r.inputs.sigma_star_sq);
  e.emplace_back("T", std::to_string(r.inputs.T));
  if (r.inputs.C) add("C", *r.inputs.C);
  if (r.inputs.beta) add("beta", *r.inputs.beta);
  add("phi", r.phi);
  add("T^phi", std::pow(static_cast<double>(r.inputs.T), r.phi));
  add("theorem1", r.theorem1);
  add("abc.a", r.abc.a);
  add("abc.b", r.abc.b);
  add("abc.c", r.abc.c);
  add("abc.v", r.abc.v);
  add("abc.epsilon", r.abc.epsilon);
  if (r.corollary_poly) add("corollary_poly", *r.corollary_poly);
  if (r.B) add("B", *r.B);
  if (r.corollary_sqrt) add("corollary_sqrt", *r.corollary_sqrt);
  if (r.corollary_sqrt_c2) add("corollary_sqrt_c2", *r.corollary_sqrt_c2);
  if (r.complexity_epsilon) add("complexity_epsilon", *r.complexity_epsilon);
  if (r.complexity_T) e.emplace_back("complexity_T", std::to_string(*r.complexity_T));
  return e;
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const Options& options, std::ostream& log) {
  return guarded(log, [&] {
    const RunExperiment ex = load_run_config(read_json_file(config_path));
    const auto& prob = ex.problem->problem;
    const auto& cert = ex.problem->certificate;

    std::vector<double> gaps;
    const MonteCarloEstimate est = estimate_gap(prob, cert, ex.run, ex.n_seeds, ex.base_seed,
                                                options.workers,
                                                options.dump_seeds ? &gaps : nullptr);

    BoundInputs in;
    in.gamma = ex.gamma;
    in.L = ex.L;
    in.D_sq = ex.D_sq;
    in.sigma_star_sq = ex.sigma_sq;
    in.T = ex.run.horizon;
    if (const auto* p = std::get_if<PolynomialStep>(&ex.run.schedule)) {
      in.C = p->C;
      in.beta = p->beta;
    }
    const BoundReport bounds = build_bound_report(in);
    const BoundVerdict thm = compare_to_bound(est, bounds.theorem1);
    const std::optional<double> cor = corollary_of(bounds);
    std::optional<BoundVerdict> cor_verdict;
    if (cor) cor_verdict = compare_to_bound(est, *cor);
    const bool satisfied = thm.satisfied && (!cor_verdict || cor_verdict->satisfied);

    json report = provenance("run", ex.config_hash, ex.resolved, options);
    report["problem"] = {{"id", ex.problem_spec.id},
                         {"n", prob.size()},
                         {"d", prob.dimension()},
                         {"L_max", prob.max_smoothness()},
                         {"L_f", prob.mean_smoothness()},
                         {"inf_f", cert.inf_f},
                         {"sigma_star_sq", cert.sigma_star_sq},
                         {"certificate_residual", cert.grad_norm_residual},
                         {"provenance", std::string(to_string(cert.provenance))}};
    report["constants"] = {{"L", ex.L}, {"sigma_sq", ex.sigma_sq}, {"D_sq", ex.D_sq},
                           {"gamma", ex.gamma}};
    report["estimate"] = to_json(est);
    report["bounds"] = to_json(bounds);
    report["verdicts"] = {{"theorem1", verdict_json(thm)},
                          {"corollary", cor_verdict ? verdict_json(*cor_verdict) : json(nullptr)}};
    report["satisfied"] = satisfied;
    write_json(options.out_dir / "run_report.json", report);

    if (options.dump_seeds) {
      std::ostringstream csv_text;
      CsvWriter csv(csv_text, {"seed", "gap", "config_hash"});
      for (std::size_t k = 0; k < gaps.size(); ++k) {
        csv.field(static_cast<std::uint64_t>(ex.base_seed + k))
            .field(gaps[k])
            .field(std::string_view(ex.config_hash));
        csv.end_row();
      }
      write_file(options.out_dir / "run_seeds.csv", csv_text.str());
    }

    log << "run " << ex.config_hash << ": mean_gap=" << format_double(est.mean_gap)
        << " ci95_upper=" << format_double(est.ci95_upper)
        << " theorem1_bound=" << format_double(bounds.theorem1);
    if (cor) log << " corollary_bound=" << format_double(*cor);
    log << (satisfied ? " satisfied\n" : " VIOLATED\n");
    return satisfied ? kExitOk : kExitViolated;
  });
}

int cmd_sweep(const std::filesystem::path& config_path, const Options& options, std::ostream& log) {
  return guarded(log, [&] {
    SweepExperiment ex = load_sweep_config(read_json_file(config_path));
    ex.spec.keep_seed_gaps = options.dump_seeds;
    const std::vector<SweepRow> rows = sweep(ex.spec, options.workers);

    std::ostringstream table;
    write_sweep_csv(table, rows);
    write_file(options.out_dir / "sweep.csv", table.str());
    std::ostringstream plot;
    write_plot_csv(plot, rows, ex.config_hash);
    write_file(options.out_dir / "sweep_plot.csv", plot.str());

    // Log-log slope of mean_gap against T per (problem, schedule, b).
    std::map<std::tuple<std::string, std::string, std::size_t>,
             std::pair<std::vector<double>, std::vector<double>>>
        series;
    for (const auto& r : rows) {
      if (!r.estimate || !(r.estimate->mean_gap > 0.0)) continue;
      auto& s = series[{r.problem_id, r.schedule, r.b}];
      s.first.push_back(static_cast<double>(r.T));
      s.second.push_back(r.estimate->mean_gap);
    }
    json slopes = json::array();
    for (const auto& [key, s] : series) {
      if (s.first.size() < 2) continue;
      slopes.push_back({{"problem_id", std::get<0>(key)},
                        {"schedule", std::get<1>(key)},
                        {"b", std::get<2>(key)},
                        {"slope", fit_loglog_slope(s.first, s.second)}});
    }

    json doc = provenance("sweep", ex.config_hash, ex.resolved, options);
    doc["seeds"] = {{"base_seed", ex.spec.base_seed},
                    {"n_seeds", ex.spec.n_seeds},
                    {"last_seed", ex.spec.base_seed + ex.spec.n_seeds - 1}};
    json row_docs = json::array();
    for (const auto& r : rows) row_docs.push_back(to_json(r));
    doc["rows"] = row_docs;
    doc["loglog_slopes"] = slopes;
    write_json(options.out_dir / "sweep.json", doc);

    if (options.dump_seeds) {
      std::ostringstream text;
      CsvWriter csv(text, {"row", "problem_id", "T", "b", "schedule", "seed", "gap", "config_hash"});
      for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t s = 0; s < rows[k].seed_gaps.size(); ++s) {
          csv.field(static_cast<std::uint64_t>(k))
              .field(std::string_view(rows[k].problem_id))
              .field(static_cast<std::int64_t>(rows[k].T))
              .field(static_cast<std::uint64_t>(rows[k].b))
              .field(std::string_view(rows[k].schedule))
              .field(static_cast<std::uint64_t>(ex.spec.base_seed + s))
              .field(rows[k].seed_gaps[s])
              .field(std::string_view(ex.config_hash));
          csv.end_row();
        }
      }
      write_file(options.out_dir / "sweep_seeds.csv", text.str());
    }

    std::size_t errored = 0;
    std::size_t violated = 0;
    for (const auto& r : rows) {
      if (!r.error.empty()) {
        ++errored;
        log << "row " << r.problem_id << " T=" << r.T << " b=" << r.b << " " << r.schedule
            << ": error: " << r.error << "\n";
      } else if (!r.satisfied) {
        ++violated;
        log << "row " << r.problem_id << " T=" << r.T << " b=" << r.b << " " << r.schedule
            << ": VIOLATED ci95_upper=" << format_double(r.estimate->ci95_upper) << "\n";
      }
    }
    log << "sweep " << ex.config_hash << ": " << rows.size() << " rows, " << violated
        << " violated, " << errored << " errored\n";
    if (errored > 0) return kExitError;
    return violated > 0 ? kExitViolated : kExitOk;
  });
}

int cmd_bound(const BoundArgs& args, const Options& options, bool write_file_too,
              std::ostream& out) {
  return guarded(out, [&] {
    std::vector<std::string> issues;
    if (args.gamma.has_value() == args.C.has_value())
      issues.emplace_back("exactly one of --gamma and --C is required");
    if (args.beta && !args.C) issues.emplace_back("--beta requires --C");
    if (!(args.L > 0.0)) issues.emplace_back("--L must be > 0");
    if (!(args.D_sq >= 0.0)) issues.emplace_back("--D-sq must be >= 0");
    if (!(args.sigma_star_sq >= 0.0)) issues.emplace_back("--sigma-star-sq must be >= 0");
    if (args.T < 3) issues.emplace_back("--T: T >= 3 required (got " + std::to_string(args.T) + ")");
    if (!issues.empty()) throw ConfigError(issues);

    BoundInputs in;
    in.gamma = args.gamma.value_or(0.0);
    in.C = args.C;
    in.beta = args.beta;
    in.L = args.L;
    in.D_sq = args.D_sq;
    in.sigma_star_sq = args.sigma_star_sq;
    in.T = args.T;
    const BoundReport report = build_bound_report(in, args.epsilon);
    const auto entries = bound_entries(report);
    std::size_t width = 0;
    for (const auto& [name, value] : entries) width = std::max(width, name.size());
    for (const auto& [name, value] : entries)
      out << name << std::string(width + 2 - name.size(), ' ') << value << "\n";

    if (write_file_too) {
      const json doc = to_json(report);
      const std::string hash = hex64(json_fingerprint(doc["inputs"]));
      json full = provenance("bound", hash, doc["inputs"], options);
      full["report"] = doc;
      write_json(options.out_dir / "bound.json", full);
      std::ostringstream text;
      CsvWriter csv(text, {"quantity", "value", "config_hash"});
      for (const auto& [name, value] : entries) {
        csv.field(std::string_view(name)).field(std::string_view(value)).field(std::string_view(hash));
        csv.end_row();
      }
      write_file(options.out_dir / "bound.csv", text.str());
    }
    return kExitOk;
  });
}

int cmd_verify_lemmas(const std::optional<std::filesystem::path>& config_path,
                      const std::optional<std::string>& only, const Options& options,
                      std::ostream& log) {
  return guarded(log, [&] {
    std::optional<LemmaId> filter;
    if (only) {
      filter = lemma_from_string(*only);
      if (!filter) {
        std::string names;
        for (LemmaId id : all_lemmas()) names += std::string(names.empty() ? "" : ", ") + std::string(to_string(id));
        throw PreconditionError("unknown lemma '" + *only + "' (known: " + names + ")");
      }
    }
    const LemmaExperiment ex =
        load_lemma_config(config_path ? read_json_file(*config_path) : json(nullptr));
    const LemmaBatteryReport report = run_lemma_battery(ex.battery, filter, options.workers);

    std::ostringstream table;
    write_lemma_csv(table, report, ex.config_hash);
    write_file(options.out_dir / "lemmas.csv", table.str());

    json doc = provenance("verify-lemmas", ex.config_hash, ex.resolved, options);
    doc["seeds"] = {{"point_seed", ex.battery.seed}};
    json rows = json::array();
    for (const auto& r : report.rows) {
      rows.push_back({{"lemma_id", std::string(to_string(r.id))},
                      {"grid_size", r.grid_size},
                      {"worst_slack", format_double(r.worst_slack)},
                      {"worst_point", r.worst_point_string()},
                      {"passed", r.passed},
                      {"flagged", r.flagged},
                      {"note", r.note}});
    }
    doc["rows"] = rows;
    doc["all_passed"] = report.all_passed();
    write_json(options.out_dir / "lemmas.json", doc);

    for (const auto& r : report.rows) {
      const char* tag = r.flagged ? "FLAG" : (r.passed ? "PASS" : "FAIL");
      log << tag << " " << to_string(r.id) << " grid=" << r.grid_size
          << " worst_slack=" << format_double(r.worst_slack);
      if (!r.note.empty()) log << " (" << r.note << ")";
      log << "\n";
    }
    return report.all_passed() ? kExitOk : kExitViolated;
  });
}

}  // namespace lastiter::cli
