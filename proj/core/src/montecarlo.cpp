#include "lastiter/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include "lastiter/csv.hpp"
#include "lastiter/errors.hpp"
#include "lastiter/problem_io.hpp"

namespace lastiter {

using nlohmann::json;

namespace {

struct WorkerResult {
  MomentAccumulator moments;
  std::exception_ptr error;
};

}  // namespace

json run_template_to_json(const RunConfig& config) {
  json j = {{"horizon", config.horizon},
            {"batch_size", config.batch_size},
            {"schedule", to_json(config.schedule)},
            {"x0", config.x0.size() == 0 ? json(nullptr) : vector_to_json(config.x0)}};
  if (config.smoothness) j["smoothness"] = *config.smoothness;
  return j;
}

std::uint64_t config_fingerprint(const FiniteSumProblem& problem, const RunConfig& config_template) {
  return json_fingerprint(json{{"problem", to_json(problem)},
                               {"run", run_template_to_json(config_template)}});
}

void finalize_estimate(MonteCarloEstimate& e) {
  e.n_seeds = e.moments.count();
  e.mean_gap = e.moments.mean();
  e.std_error = e.n_seeds >= 2
                    ? std::sqrt(std::max(0.0, e.moments.variance()) / static_cast<double>(e.n_seeds))
                    : 0.0;
  e.ci95_upper = e.mean_gap + 1.96 * e.std_error;
}

MonteCarloEstimate estimate_gap(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                                const RunConfig& config_template, std::uint64_t n_seeds,
                                std::uint64_t base_seed, unsigned workers,
                                std::vector<double>* per_seed_gaps) {
  if (n_seeds < 2) throw PreconditionError("n_seeds must be >= 2");
  RunConfig tmpl = config_template;
  tmpl.record_stride = std::max<std::int64_t>(1, tmpl.horizon);
  tmpl.keep_snapshots = false;

  MonteCarloEstimate est;
  est.horizon = tmpl.horizon;
  est.base_seed = base_seed;
  est.fingerprint = config_fingerprint(problem, config_template);
  // Validates the template and fixes gamma before any thread starts.
  est.gamma = resolve_schedule(tmpl.schedule, tmpl.smoothness.value_or(problem.max_smoothness()),
                               tmpl.horizon, cert.sigma_star_sq);
  if (per_seed_gaps) per_seed_gaps->assign(n_seeds, 0.0);

  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, n_seeds));
  std::vector<WorkerResult> results(workers);
  const auto work = [&](unsigned w) {
    const std::uint64_t begin = n_seeds * w / workers;
    const std::uint64_t end = n_seeds * (w + 1) / workers;
    try {
      RunConfig cfg = tmpl;
      for (std::uint64_t k = begin; k < end; ++k) {
        cfg.seed = base_seed + k;
        const double gap = run(problem, cert, cfg).final_gap();
        results[w].moments.add(gap);
        if (per_seed_gaps) (*per_seed_gaps)[k] = gap;
      }
    } catch (...) {
      results[w].error = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  for (auto& r : results) {
    if (r.error) std::rethrow_exception(r.error);
    est.moments.merge(r.moments);
  }
  finalize_estimate(est);
  return est;
}

BoundVerdict compare_to_bound(const MonteCarloEstimate& estimate, double bound) {
  if (!std::isfinite(bound)) throw PreconditionError("bound must be finite");
  BoundVerdict v;
  v.ci95_upper = estimate.ci95_upper;
  v.bound_value = bound;
  v.slack_ratio = bound / std::max(estimate.ci95_upper, kTinyCi);
  v.satisfied = estimate.ci95_upper <= bound;
  return v;
}

namespace {

void evaluate_bounds(SweepRow& row, const StepSizeSchedule& schedule) {
  row.theorem1_bound = theorem1_bound(row.gamma, row.L, row.D_sq, row.sigma_sq, row.T);
  if (const auto* p = std::get_if<PolynomialStep>(&schedule)) {
    if (p->beta == 0.5) {
      const SqrtBound s = corollary_sqrt_bound(p->C, row.L, row.D_sq, row.sigma_sq, row.T);
      row.corollary_bound = s.c2_form ? *s.c2_form : s.general;
    } else {
      row.corollary_bound =
          corollary_poly_bound(p->C, p->beta, row.L, row.D_sq, row.sigma_sq, row.T).value;
    }
  }
}

void run_row(SweepRow& row, const GeneratedProblem& gp, const StepSizeSchedule& schedule,
             const SweepSpec& spec, unsigned workers) {
  const auto& problem = gp.problem;
  const auto& cert = gp.certificate;
  if (row.b == 1) {
    row.L = problem.max_smoothness();
    row.sigma_sq = cert.sigma_star_sq;
  } else {
    const EffectiveConstants ec =
        effective_constants(problem, row.b, cert, spec.minibatch_smoothness);
    row.L = ec.L_b;
    row.sigma_sq = ec.sigma_b_sq;
  }

  RunConfig cfg;
  cfg.horizon = row.T;
  cfg.batch_size = row.b;
  cfg.schedule = schedule;
  cfg.smoothness = row.L;
  if (spec.x0_policy == X0Policy::explicit_vector) {
    if (spec.x0.size() != problem.dimension())
      throw PreconditionError("x0 dimension does not match problem '" + row.problem_id + "'");
    cfg.x0 = spec.x0;
  } else {
    cfg.x0 = Vector::Zero(problem.dimension());
  }
  row.D_sq = (cfg.x0 - cert.x_star).squaredNorm();
  row.gamma = resolve_schedule(schedule, row.L, row.T, row.sigma_sq);

  row.estimate = estimate_gap(problem, cert, cfg, spec.n_seeds, spec.base_seed, workers,
                              spec.keep_seed_gaps ? &row.seed_gaps : nullptr);
  evaluate_bounds(row, schedule);
  row.satisfied = compare_to_bound(*row.estimate, *row.theorem1_bound).satisfied &&
                  (!row.corollary_bound ||
                   compare_to_bound(*row.estimate, *row.corollary_bound).satisfied);
}

}  // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec, unsigned workers) {
  if (spec.problems.empty() || spec.T_grid.empty() || spec.schedules.empty() ||
      spec.b_grid.empty())
    throw PreconditionError("sweep grids must be non-empty");
  if (spec.n_seeds < 2) throw PreconditionError("n_seeds must be >= 2");

  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < spec.problems.size(); ++p) {
    const ProblemSpec& ps = spec.problems[p];
    const std::string id = ps.id.empty() ? "problem" + std::to_string(p) : ps.id;
    std::optional<GeneratedProblem> gp;
    std::string problem_error;
    try {
      gp = materialize(ps);
    } catch (const std::exception& e) {
      problem_error = e.what();
    }
    for (std::int64_t T : spec.T_grid) {
      for (const auto& schedule : spec.schedules) {
        for (std::size_t b : spec.b_grid) {
          SweepRow row;
          row.problem_id = id;
          row.T = T;
          row.b = b;
          row.schedule = describe(schedule);
          if (const auto* poly = std::get_if<PolynomialStep>(&schedule)) {
            row.C = poly->C;
            row.beta = poly->beta;
          }
          if (!gp) {
            row.error = problem_error;
          } else {
            try {
              run_row(row, *gp, schedule, spec, workers);
            } catch (const std::exception& e) {
              row.error = e.what();
              row.satisfied = false;
            }
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw PreconditionError("slope fit needs at least two (x, y) pairs");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!(xs[k] > 0.0 && ys[k] > 0.0)) throw PreconditionError("slope fit needs positive data");
    mx += std::log(xs[k]);
    my += std::log(ys[k]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = std::log(xs[k]) - mx;
    sxy += dx * (std::log(ys[k]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw PreconditionError("slope fit needs at least two distinct x values");
  return sxy / sxx;
}

namespace {

void optional_field(CsvWriter& csv, const std::optional<double>& v) {
  if (v) {
    csv.field(*v);
  } else {
    csv.empty();
  }
}

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  CsvWriter csv(out, {"problem_id", "T", "b", "C", "beta", "gamma", "n_seeds", "mean_gap",
                      "std_error", "ci95_upper", "theorem1_bound", "corollary_bound", "satisfied",
                      "schedule", "config_hash", "base_seed", "error"});
  for (const auto& r : rows) {
    csv.field(std::string_view(r.problem_id))
        .field(static_cast<std::int64_t>(r.T))
        .field(static_cast<std::uint64_t>(r.b));
    optional_field(csv, r.C);
    optional_field(csv, r.beta);
    if (r.estimate) {
      const auto& e = *r.estimate;
      csv.field(e.gamma).field(e.n_seeds).field(e.mean_gap).field(e.std_error).field(e.ci95_upper);
    } else {
      csv.empty().empty().empty().empty().empty();
    }
    optional_field(csv, r.theorem1_bound);
    optional_field(csv, r.corollary_bound);
    csv.field(r.satisfied).field(std::string_view(r.schedule));
    if (r.estimate) {
      csv.field(std::string_view(hex64(r.estimate->fingerprint))).field(r.estimate->base_seed);
    } else {
      csv.empty().empty();
    }
    csv.field(std::string_view(r.error));
    csv.end_row();
  }
}

void write_plot_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                    std::string_view config_hash) {
  std::vector<std::string> header{"problem_id", "b",       "schedule",       "T",
                                  "mean_gap",   "theorem1_bound", "log10_T", "log10_mean_gap",
                                  "log10_theorem1_bound"};
  if (!config_hash.empty()) header.emplace_back("config_hash");
  CsvWriter csv(out, std::move(header));
  for (const auto& r : rows) {
    if (!r.estimate || !r.theorem1_bound) continue;
    const double T = static_cast<double>(r.T);
    csv.field(std::string_view(r.problem_id))
        .field(static_cast<std::uint64_t>(r.b))
        .field(std::string_view(r.schedule))
        .field(static_cast<std::int64_t>(r.T))
        .field(r.estimate->mean_gap)
        .field(*r.theorem1_bound)
        .field(std::log10(T))
        .field(std::log10(r.estimate->mean_gap))
        .field(std::log10(*r.theorem1_bound));
    if (!config_hash.empty()) csv.field(config_hash);
    csv.end_row();
  }
}

json to_json(const MonteCarloEstimate& e) {
  return {{"n_seeds", e.n_seeds},
          {"mean_gap", e.mean_gap},
          {"std_error", e.std_error},
          {"ci95_upper", e.ci95_upper},
          {"horizon", e.horizon},
          {"gamma", e.gamma},
          {"base_seed", e.base_seed},
          {"seeds", {{"first", e.base_seed}, {"last", e.base_seed + e.n_seeds - 1}}},
          {"fingerprint", hex64(e.fingerprint)},
          {"moments", e.moments.to_json()}};
}

json to_json(const SweepRow& r) {
  json j = {{"problem_id", r.problem_id}, {"T", r.T},         {"b", r.b},
            {"schedule", r.schedule},     {"gamma", r.gamma}, {"L", r.L},
            {"sigma_sq", r.sigma_sq},     {"D_sq", r.D_sq},   {"satisfied", r.satisfied}};
  j["C"] = r.C ? json(*r.C) : json(nullptr);
  j["beta"] = r.beta ? json(*r.beta) : json(nullptr);
  j["estimate"] = r.estimate ? to_json(*r.estimate) : json(nullptr);
  j["theorem1_bound"] = r.theorem1_bound ? json(*r.theorem1_bound) : json(nullptr);
  j["corollary_bound"] = r.corollary_bound ? json(*r.corollary_bound) : json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

}  // namespace lastiter
