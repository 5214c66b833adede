#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lastiter/problems.hpp"

namespace lastiter {

/// gamma fixed in advance.
struct ConstantStep {
  double gamma = 0.0;
};

/// gamma = 1 / (C L T^beta), C >= 2, beta in (0, 1).
struct PolynomialStep {
  double C = 2.0;
  double beta = 0.5;
};

/// Two sigma_*^2-aware presets for interpolation-adaptive runs:
///   switched: 1/(4 L sqrt T) if sigma_*^2 > 0, else 1/(4 L ln T)
///   smooth:   1/(4 L ln(T) sqrt(1 + sigma_*^2 T))
enum class InterpolationPreset { switched, smooth };

struct InterpolationStep {
  InterpolationPreset preset = InterpolationPreset::switched;
};

using StepSizeSchedule = std::variant<ConstantStep, PolynomialStep, InterpolationStep>;

/// Resolves a schedule to the scalar gamma used for a horizon-T run and checks
/// gamma * L in (0, 1) strictly. Throws ScheduleError otherwise, and
/// PreconditionError for L <= 0, T < 1 or malformed schedule parameters.
double resolve_schedule(const StepSizeSchedule& schedule, double L, std::int64_t T,
                        double sigma_star_sq = 0.0);

std::string describe(const StepSizeSchedule& schedule);

///   {"kind": "constant", "gamma"}
///   {"kind": "polynomial", "C"?, "beta"?}   (defaults 2 and 1/2)
///   {"kind": "interpolation", "preset": "switched" | "smooth"}
StepSizeSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StepSizeSchedule& schedule);

inline constexpr double kDivergenceThreshold = 1e100;

struct RunConfig {
  std::int64_t horizon = 1;
  std::uint64_t seed = 0;
  std::size_t batch_size = 1;
  StepSizeSchedule schedule = PolynomialStep{};
  /// 0 selects max(1, T / 100).
  std::int64_t record_stride = 0;
  Vector x0;
  bool keep_snapshots = false;
  /// Smoothness the schedule resolves against; defaults to max_i L_i.
  std::optional<double> smoothness;
};

struct RecordedStep {
  std::int64_t t = 0;
  double gap = 0.0;
  double x_norm = 0.0;
  std::optional<Vector> x;
};

struct Trajectory {
  std::vector<RecordedStep> steps;
  Vector final_iterate;
  std::uint64_t seed = 0;
  double gamma_used = 0.0;
  std::int64_t horizon = 0;
  std::size_t batch_size = 1;

  double final_gap() const { return steps.back().gap; }
};

/// x_{t+1} = x_t - gamma grad f_{i_t}(x_t), i_t drawn from the problem weights.
/// Requires batch_size == 1.
Trajectory sgd_run(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                   const RunConfig& config);

/// x_{t+1} = x_t - (gamma / b) sum_{i in B_t} grad f_i(x_t), with B_t uniform over
/// size-b subsets (seeded partial Fisher-Yates). The b gradients are summed in
/// ascending index order and divided once. Non-uniform weights are accepted
/// only with b == 1.
Trajectory minibatch_run(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                         const RunConfig& config);

/// Deterministic full-gradient descent with the same schedule resolution.
Trajectory gd_run(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                  const RunConfig& config);

/// Dispatches on batch_size: 1 -> sgd_run, otherwise minibatch_run.
Trajectory run(const FiniteSumProblem& problem, const SolutionCertificate& cert,
               const RunConfig& config);

/// Columns t,gap,x_norm with a header row.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace lastiter
