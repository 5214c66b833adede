#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lastiter/bounds.hpp"
#include "lastiter/moments.hpp"
#include "lastiter/problem_spec.hpp"
#include "lastiter/problems.hpp"
#include "lastiter/sgd.hpp"

namespace lastiter {

struct MonteCarloEstimate {
  std::uint64_t n_seeds = 0;
  double mean_gap = 0.0;
  double std_error = 0.0;
  /// mean_gap + 1.96 std_error
  double ci95_upper = 0.0;
  std::int64_t horizon = 0;
  double gamma = 0.0;
  std::uint64_t base_seed = 0;
  /// Hash of the problem document and the run template without its seed.
  std::uint64_t fingerprint = 0;
  MomentAccumulator moments;
};

/// FNV-1a over the canonical JSON of (problem, template minus seed).
std::uint64_t config_fingerprint(const FiniteSumProblem& problem, const RunConfig& config_template);
nlohmann::json run_template_to_json(const RunConfig& config);

/// Runs seeds base_seed .. base_seed + n_seeds - 1 (each with the template and
/// its own seed) and accumulates f(x_T) - inf f. Seeds are split into
/// contiguous ranges across `workers` threads; the exact moment merge makes
/// the result independent of the worker count. A divergent run aborts the
/// estimate with the DivergenceError of the smallest failing seed.
/// `per_seed_gaps`, when given, receives the gaps in seed order.
MonteCarloEstimate estimate_gap(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                                const RunConfig& config_template, std::uint64_t n_seeds,
                                std::uint64_t base_seed, unsigned workers = 1,
                                std::vector<double>* per_seed_gaps = nullptr);

/// Rebuilds the derived statistics from merged moments.
void finalize_estimate(MonteCarloEstimate& estimate);

inline constexpr double kTinyCi = 1e-300;

struct BoundVerdict {
  double ci95_upper = 0.0;
  double bound_value = 0.0;
  /// bound_value / max(ci95_upper, kTinyCi)
  double slack_ratio = 0.0;
  bool satisfied = false;
};

/// Requires a finite bound.
BoundVerdict compare_to_bound(const MonteCarloEstimate& estimate, double bound);

enum class X0Policy { zeros, explicit_vector };

struct SweepSpec {
  std::vector<ProblemSpec> problems;
  std::vector<std::int64_t> T_grid;
  std::vector<StepSizeSchedule> schedules;
  std::vector<std::size_t> b_grid = {1};
  std::uint64_t n_seeds = 1000;
  std::uint64_t base_seed = 0;
  X0Policy x0_policy = X0Policy::zeros;
  /// Used with X0Policy::explicit_vector; must match every problem dimension.
  Vector x0;
  MinibatchSmoothness minibatch_smoothness = MinibatchSmoothness::as_printed;
  /// Keep every per-seed gap in SweepRow::seed_gaps.
  bool keep_seed_gaps = false;
};

struct SweepRow {
  std::string problem_id;
  std::int64_t T = 0;
  std::size_t b = 1;
  std::string schedule;
  std::optional<double> C;
  std::optional<double> beta;
  double gamma = 0.0;
  /// Smoothness and solution variance the bounds were evaluated with.
  double L = 0.0;
  double sigma_sq = 0.0;
  double D_sq = 0.0;
  std::optional<MonteCarloEstimate> estimate;
  std::optional<double> theorem1_bound;
  std::optional<double> corollary_bound;
  bool satisfied = false;
  std::string error;
  std::vector<double> seed_gaps;
};

/// Rows in grid order: problems, then T, then schedules, then b. Bounds use
/// (max_i L_i, sigma_*^2) at b = 1 and effective_constants otherwise. The
/// corollary column is the C = 2 sqrt-T form for (C, beta) = (2, 1/2), the
/// general sqrt-T form for other C at beta = 1/2, the polynomial form for
/// other beta, and absent for constant and interpolation presets. Errors are
/// recorded per row. Throws PreconditionError on an empty grid.
std::vector<SweepRow> sweep(const SweepSpec& spec, unsigned workers = 1);

/// Least-squares slope of ln y against ln x. Requires >= 2 points, x > 0, y > 0.
double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// problem_id,T,b,C,beta,gamma,n_seeds,mean_gap,std_error,ci95_upper,
/// theorem1_bound,corollary_bound,satisfied followed by schedule,config_hash,
/// base_seed,error.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// problem_id,b,schedule,T,mean_gap,theorem1_bound, their log10 values and,
/// when config_hash is non-empty, a trailing config_hash column. Errored rows
/// are skipped.
void write_plot_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                    std::string_view config_hash = {});

nlohmann::json to_json(const MonteCarloEstimate& estimate);
nlohmann::json to_json(const SweepRow& row);

}  // namespace lastiter
