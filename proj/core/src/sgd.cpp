#include "lastiter/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lastiter/csv.hpp"
#include "lastiter/errors.hpp"
#include "lastiter/rng.hpp"

namespace lastiter {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Shared state of a single trajectory: recording and divergence checks.
class Recorder {
 public:
  Recorder(const FiniteSumProblem& problem, const SolutionCertificate& cert,
           const RunConfig& config, double gamma)
      : problem_(problem), cert_(cert), config_(config) {
    stride_ = config.record_stride > 0 ? config.record_stride
                                       : std::max<std::int64_t>(1, config.horizon / 100);
    traj_.seed = config.seed;
    traj_.gamma_used = gamma;
    traj_.horizon = config.horizon;
    traj_.batch_size = config.batch_size;
  }

  void maybe_record(std::int64_t t, const Vector& x) {
    if (t % stride_ != 0 && t != config_.horizon) return;
    RecordedStep step;
    step.t = t;
    step.gap = problem_.value(x) - cert_.inf_f;
    step.x_norm = x.norm();
    if (config_.keep_snapshots) step.x = x;
    traj_.steps.push_back(std::move(step));
  }

  void check_finite(std::int64_t t, const Vector& x) const {
    const bool finite = x.allFinite();
    if (finite && x.cwiseAbs().maxCoeff() <= kDivergenceThreshold) return;
    std::ostringstream os;
    os << "iterate diverged at step " << t << " (seed " << config_.seed << "): "
       << (finite ? "coordinate magnitude above 1e100" : "non-finite coordinate");
    throw DivergenceError(os.str(), t, config_.seed);
  }

  Trajectory finish(Vector x) {
    traj_.final_iterate = std::move(x);
    return std::move(traj_);
  }

 private:
  const FiniteSumProblem& problem_;
  const SolutionCertificate& cert_;
  const RunConfig& config_;
  std::int64_t stride_ = 1;
  Trajectory traj_;
};

Vector starting_point(const FiniteSumProblem& problem, const RunConfig& config) {
  if (config.x0.size() == 0) return Vector::Zero(problem.dimension());
  if (config.x0.size() != problem.dimension())
    throw PreconditionError("x0 dimension does not match the problem");
  return config.x0;
}

double run_gamma(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                 const RunConfig& config) {
  if (config.horizon < 1) throw PreconditionError("horizon T must be >= 1");
  const double L = config.smoothness.value_or(problem.max_smoothness());
  return resolve_schedule(config.schedule, L, config.horizon, cert.sigma_star_sq);
}

std::size_t sample_index(const FiniteSumProblem& problem, CounterRng& rng) {
  if (problem.uniform_weights()) return static_cast<std::size_t>(rng.below(problem.size()));
  const auto cdf = problem.cumulative_weights();
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), problem.size() - 1);
}

}  // namespace

double resolve_schedule(const StepSizeSchedule& schedule, double L, std::int64_t T,
                        double sigma_star_sq) {
  if (!(L > 0.0) || !std::isfinite(L)) throw PreconditionError("smoothness L must be positive");
  if (T < 1) throw PreconditionError("horizon T must be >= 1");
  const double t = static_cast<double>(T);

  const double gamma = std::visit(
      Overloaded{
          [&](const ConstantStep& s) { return s.gamma; },
          [&](const PolynomialStep& s) {
            if (!(s.C >= 2.0)) throw PreconditionError("polynomial schedule needs C >= 2");
            if (!(s.beta > 0.0 && s.beta < 1.0))
              throw PreconditionError("polynomial schedule needs beta in (0, 1)");
            return 1.0 / (s.C * L * std::pow(t, s.beta));
          },
          [&](const InterpolationStep& s) {
            if (T < 2) throw PreconditionError("interpolation presets need T >= 2 (ln T > 0)");
            if (!(sigma_star_sq >= 0.0)) throw PreconditionError("sigma_star_sq must be >= 0");
            if (s.preset == InterpolationPreset::switched) {
              return sigma_star_sq > 0.0 ? 1.0 / (4.0 * L * std::sqrt(t))
                                         : 1.0 / (4.0 * L * std::log(t));
            }
            return 1.0 / (4.0 * L * std::log(t) * std::sqrt(1.0 + sigma_star_sq * t));
          },
      },
      schedule);

  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ScheduleError("step size must be positive and finite (got gamma = " + fmt(gamma) + ")");
  if (!(gamma * L < 1.0)) {
    throw ScheduleError("step size violates gamma*L < 1 (gamma*L = " + fmt(gamma * L) +
                        "); the last-iterate bound requires gamma*L in (0, 1)");
  }
  return gamma;
}

std::string describe(const StepSizeSchedule& schedule) {
  return std::visit(
      Overloaded{
          [](const ConstantStep& s) { return "constant(gamma=" + fmt(s.gamma) + ")"; },
          [](const PolynomialStep& s) {
            return "polynomial(C=" + fmt(s.C) + ", beta=" + fmt(s.beta) + ")";
          },
          [](const InterpolationStep& s) {
            return std::string(s.preset == InterpolationPreset::switched
                                   ? "interpolation(switched)"
                                   : "interpolation(smooth)");
          },
      },
      schedule);
}

namespace {

StepSizeSchedule schedule_from_object(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return ConstantStep{j.at("gamma").get<double>()};
  if (kind == "polynomial") return PolynomialStep{j.value("C", 2.0), j.value("beta", 0.5)};
  if (kind == "interpolation") {
    const std::string preset = j.value("preset", std::string("switched"));
    if (preset == "switched") return InterpolationStep{InterpolationPreset::switched};
    if (preset == "smooth") return InterpolationStep{InterpolationPreset::smooth};
    throw PreconditionError("unknown interpolation preset '" + preset + "'");
  }
  throw PreconditionError("unknown schedule kind '" + kind + "'");
}

}  // namespace

StepSizeSchedule schedule_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw PreconditionError("schedule must be an object");
  try {
    return schedule_from_object(j);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("malformed schedule: ") + e.what());
  }
}

nlohmann::json to_json(const StepSizeSchedule& schedule) {
  return std::visit(
      Overloaded{
          [](const ConstantStep& s) { return nlohmann::json{{"kind", "constant"}, {"gamma", s.gamma}}; },
          [](const PolynomialStep& s) {
            return nlohmann::json{{"kind", "polynomial"}, {"C", s.C}, {"beta", s.beta}};
          },
          [](const InterpolationStep& s) {
            return nlohmann::json{
                {"kind", "interpolation"},
                {"preset", s.preset == InterpolationPreset::switched ? "switched" : "smooth"}};
          },
      },
      schedule);
}

Trajectory sgd_run(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                   const RunConfig& config) {
  if (config.batch_size != 1) throw PreconditionError("sgd_run requires batch_size == 1");
  const double gamma = run_gamma(problem, cert, config);
  Vector x = starting_point(problem, config);

  Recorder rec(problem, cert, config, gamma);
  CounterRng rng(config.seed);
  Workspace ws;
  Vector g(problem.dimension());

  rec.maybe_record(0, x);
  for (std::int64_t t = 0; t < config.horizon; ++t) {
    const std::size_t i = sample_index(problem, rng);
    g.setZero();
    problem.component(i).add_gradient(x, g, ws);
    x.noalias() -= gamma * g;
    rec.check_finite(t + 1, x);
    rec.maybe_record(t + 1, x);
  }
  return rec.finish(std::move(x));
}

Trajectory minibatch_run(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                         const RunConfig& config) {
  const std::size_t n = problem.size();
  const std::size_t b = config.batch_size;
  if (b < 1) throw PreconditionError("batch size must be >= 1");
  if (b > n) throw PreconditionError("batch size exceeds the number of components");
  if (b > 1 && !problem.uniform_weights())
    throw UnsupportedConfigurationError("mini-batches with b > 1 require uniform weights");
  const double gamma = run_gamma(problem, cert, config);
  Vector x = starting_point(problem, config);

  Recorder rec(problem, cert, config, gamma);
  CounterRng rng(config.seed);
  Workspace ws;
  Vector g(problem.dimension());

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> swaps(b);
  std::vector<std::size_t> batch(b);

  rec.maybe_record(0, x);
  for (std::int64_t t = 0; t < config.horizon; ++t) {
    if (b == 1 && !problem.uniform_weights()) {
      batch[0] = sample_index(problem, rng);
    } else {
      for (std::size_t k = 0; k < b; ++k) {
        swaps[k] = k + static_cast<std::size_t>(rng.below(n - k));
        std::swap(perm[k], perm[swaps[k]]);
      }
      std::copy_n(perm.begin(), b, batch.begin());
      for (std::size_t k = b; k-- > 0;) std::swap(perm[k], perm[swaps[k]]);
      std::sort(batch.begin(), batch.end());
    }
    g.setZero();
    for (std::size_t i : batch) problem.component(i).add_gradient(x, g, ws);
    g /= static_cast<double>(b);
    x.noalias() -= gamma * g;
    rec.check_finite(t + 1, x);
    rec.maybe_record(t + 1, x);
  }
  return rec.finish(std::move(x));
}

Trajectory gd_run(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                  const RunConfig& config) {
  const double gamma = run_gamma(problem, cert, config);
  Vector x = starting_point(problem, config);

  Recorder rec(problem, cert, config, gamma);
  Workspace ws;
  Vector scratch;
  Vector g(problem.dimension());

  rec.maybe_record(0, x);
  for (std::int64_t t = 0; t < config.horizon; ++t) {
    problem.gradient_into(x, g, ws, scratch);
    x.noalias() -= gamma * g;
    rec.check_finite(t + 1, x);
    rec.maybe_record(t + 1, x);
  }
  return rec.finish(std::move(x));
}

Trajectory run(const FiniteSumProblem& problem, const SolutionCertificate& cert,
               const RunConfig& config) {
  return config.batch_size == 1 ? sgd_run(problem, cert, config)
                                : minibatch_run(problem, cert, config);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  CsvWriter csv(out, {"t", "gap", "x_norm"});
  for (const auto& step : trajectory.steps) {
    csv.field(step.t).field(step.gap).field(step.x_norm);
    csv.end_row();
  }
}

}  // namespace lastiter
