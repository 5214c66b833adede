#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lastiter/grid.hpp"
#include "lastiter/problem_spec.hpp"
#include "lastiter/problems.hpp"

namespace lastiter {

/// Absolute float allowance on every slack (RHS - LHS).
inline constexpr double kSlackTolerance = -1e-9;

enum class LemmaId {
  variance_transfer,
  one_step,
  one_step_reduction,
  expected_smoothness,
  weight_alpha_lower,
  weight_sum_c2,
  weight_sum_c3,
  weight_chain,
  exponent,
  exponent_boundary,
  exp_convexity,
  gautschi,
  variance_everywhere_pointwise,
  variance_everywhere_expected,
};

std::string_view to_string(LemmaId id) noexcept;
std::optional<LemmaId> lemma_from_string(std::string_view name);
const std::vector<LemmaId>& all_lemmas();

struct ParamValue {
  std::string name;
  double value = 0.0;
};

struct LemmaCheckResult {
  LemmaId id = LemmaId::variance_transfer;
  std::size_t grid_size = 0;
  /// min over the grid of RHS - LHS (units per lemma; see each check).
  double worst_slack = std::numeric_limits<double>::infinity();
  std::vector<ParamValue> worst_point;
  bool passed = true;
  /// Boundary reports: measured values, excluded from the overall verdict.
  bool flagged = false;
  std::string note;

  std::string worst_point_string() const;
};

inline LemmaCheckResult empty_result(LemmaId id) {
  LemmaCheckResult r;
  r.id = id;
  return r;
}

/// Running min-slack fold. Ties keep the earliest observation, so sequential
/// evaluation in grid order is deterministic; merge() is the associative
/// reduction for independently evaluated grid chunks (merge in grid order).
class SlackTracker {
 public:
  explicit SlackTracker(LemmaId id) : id_(id) {}
  void observe(double slack, std::vector<ParamValue> point);
  void merge(const SlackTracker& later);
  LemmaCheckResult result() const;
  std::size_t count() const noexcept { return count_; }

 private:
  LemmaId id_;
  std::size_t count_ = 0;
  double worst_ = std::numeric_limits<double>::infinity();
  std::vector<ParamValue> worst_point_;
};

/// Merges results for the same lemma (e.g. across problem classes).
LemmaCheckResult combine(const std::vector<LemmaCheckResult>& parts);

/// E||grad f_i(x)||^2 <= 2L(1+eps)(f(x) - inf f) + (1 + 1/eps) E||grad f_i(x*)||^2,
/// expectations as exact weighted sums, L = max_i L_i.
LemmaCheckResult check_variance_transfer(const FiniteSumProblem& problem,
                                         const SolutionCertificate& cert,
                                         const std::vector<Vector>& points,
                                         const std::vector<double>& eps_grid);

/// Conditional one-step inequality with (a, b, c, v) from abc_constants, for the
/// pairs (x_points[k], z_points[k]).
LemmaCheckResult check_one_step_inequality(const FiniteSumProblem& problem,
                                           const SolutionCertificate& cert, double gamma,
                                           const std::vector<Vector>& x_points,
                                           const std::vector<Vector>& z_points);

/// Agreement of the z = x one-step slack with (gamma/2) times the variance
/// transfer slack at eps = (1 - gL)/(1 + gL). Slack is -|difference|.
LemmaCheckResult check_one_step_reduction(const FiniteSumProblem& problem,
                                          const SolutionCertificate& cert, double gamma,
                                          const std::vector<Vector>& points);

/// (1/2L) E||grad f_i(x) - grad f_i(x*)||^2 <= f(x) - inf f.
LemmaCheckResult check_expected_smoothness(const FiniteSumProblem& problem,
                                           const SolutionCertificate& cert,
                                           const std::vector<Vector>& points);

struct WeightBoundsCheck {
  /// alpha_{T-1} >= (T+1)^(1-phi) / 2
  LemmaCheckResult alpha_lower = empty_result(LemmaId::weight_alpha_lower);
  /// sum_{t<T} alpha_t / alpha_{T-1} <= 2 (1 + (T^phi - 1)/phi)
  LemmaCheckResult sum_c2 = empty_result(LemmaId::weight_sum_c2);
  /// same with constant 3
  LemmaCheckResult sum_c3 = empty_result(LemmaId::weight_sum_c3);
  /// (alpha_T + sum_{t<T} alpha_t) / alpha_{T-1} <= 4 T^phi ln(T+1)
  LemmaCheckResult chain = empty_result(LemmaId::weight_chain);
};

/// Single (T, phi), T >= 2, phi in (0, 1].
WeightBoundsCheck check_weight_bounds(std::int64_t T, double phi);
/// Grid version; phi values are processed in parallel by `workers` threads
/// and reduced in grid order.
WeightBoundsCheck check_weight_bounds_grid(const std::vector<double>& T_grid,
                                           const std::vector<double>& phi_grid,
                                           unsigned workers = 1);

/// 3 + 2 (t^theta - 1)/theta <= 4 t^theta ln(t+1); absolute slack.
LemmaCheckResult check_exponent_inequality(const std::vector<double>& t_grid,
                                           const std::vector<double>& theta_grid);

/// exp(x) <= x (exp(a) - 1)/a + 1 for x = s a, s in [0, 1]; slack relative to
/// the right-hand side.
LemmaCheckResult check_exp_convexity(const std::vector<double>& x_fraction_grid,
                                     const std::vector<double>& a_grid);

/// x^(1-c) <= Gamma(x+1)/Gamma(x+c) <= (x+1)^(1-c); slack in log space
/// (min of the two one-sided log gaps).
LemmaCheckResult check_gautschi(const std::vector<double>& x_grid,
                                const std::vector<double>& c_grid);

struct VarianceEverywhereCheck {
  /// ||grad f_i(y)||^2 <= 2||grad f_i(x)||^2 + 2||grad f_i(y) - grad f_i(x)||^2, every i.
  LemmaCheckResult pointwise = empty_result(LemmaId::variance_everywhere_pointwise);
  /// E||grad f_i(y)||^2 <= 2 E||grad f_i(x)||^2 + 4L (f(y) - f(x) - <grad f(x), y - x>).
  LemmaCheckResult expected = empty_result(LemmaId::variance_everywhere_expected);
};

VarianceEverywhereCheck check_variance_everywhere(const FiniteSumProblem& problem,
                                                  const SolutionCertificate& cert,
                                                  const std::vector<Vector>& x_points,
                                                  const std::vector<Vector>& y_points);

/// Grids and problem classes for the full battery.
struct LemmaBatteryConfig {
  std::vector<ProblemSpec> problems;
  std::size_t points = 200;
  std::size_t pairs = 100;
  std::vector<double> point_radii = {0.1, 1.0, 3.0};
  std::uint64_t seed = 2024;
  GridSpec epsilon = GridSpec::log(1e-3, 1e3, 7);
  GridSpec gamma_L = GridSpec::explicit_values({0.1, 0.5, 0.9});
  GridSpec weight_T = GridSpec::range(2, 5000, 1);
  GridSpec weight_phi = GridSpec::range(0.01, 1.0, 0.01);
  GridSpec exponent_t = GridSpec::log(2.0, 1e4, 400);
  GridSpec exponent_boundary_t = GridSpec::explicit_values({1.0});
  GridSpec exponent_theta = GridSpec::linear(0.01, 2.0, 200);
  GridSpec exp_a = GridSpec::log(1e-3, 50.0, 100);
  GridSpec exp_x_fraction = GridSpec::linear(0.0, 1.0, 101);
  GridSpec gautschi_x = GridSpec::log(0.1, 1e4, 400);
  GridSpec gautschi_c = GridSpec::linear(0.0, 1.0, 101);
};

/// Three problem classes: heterogeneous least squares, interpolating least
/// squares (spread 0) and logistic regression.
LemmaBatteryConfig default_battery();

/// Missing keys fall back to default_battery(); empty grids are rejected.
LemmaBatteryConfig battery_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LemmaBatteryConfig& config);

struct LemmaBatteryReport {
  std::vector<LemmaCheckResult> rows;
  /// True when every non-flagged row passed.
  bool all_passed() const;
};

LemmaBatteryReport run_lemma_battery(const LemmaBatteryConfig& config,
                                     std::optional<LemmaId> only = std::nullopt,
                                     unsigned workers = 1);

/// Columns lemma_id,grid_size,worst_slack,worst_point,passed,flagged,note and,
/// when config_hash is non-empty, a trailing config_hash column.
void write_lemma_csv(std::ostream& out, const LemmaBatteryReport& report,
                     std::string_view config_hash = {});

}  // namespace lastiter
