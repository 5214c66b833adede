#include "lastiter/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lastiter/errors.hpp"

namespace lastiter {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_step(double gamma, double L) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw PreconditionError("gamma must be positive");
  if (!(L > 0.0) || !std::isfinite(L)) throw PreconditionError("L must be positive");
  const double gl = gamma * L;
  if (!(gl < 1.0))
    throw ScheduleError("gamma*L must lie in (0, 1) (got " + num(gl) +
                        "); the generic step-size bound excludes gamma*L >= 1");
}

void require_horizon(std::int64_t T) {
  if (T < 3) throw PreconditionError("T >= 3 required for the last-iterate bounds (got T = " +
                                     std::to_string(T) + ")");
}

void require_nonnegative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw PreconditionError(std::string(name) + " must be finite and >= 0");
}

void require_corollary_C(double C) {
  if (!(C >= 2.0) || !std::isfinite(C))
    throw PreconditionError("C >= 2 required (keeps gamma*L <= 1/2), got C = " + num(C));
}

double relative_gap(double x, double y) {
  const double scale = std::max(std::abs(x), std::abs(y));
  return scale == 0.0 ? 0.0 : std::abs(x - y) / scale;
}

}  // namespace

double phi(double gamma, double L) {
  require_step(gamma, L);
  const double gl = gamma * L;
  return 2.0 * gl / (1.0 + gl);
}

AbcConstants abc_constants(double gamma, double L, double sigma_star_sq) {
  require_step(gamma, L);
  require_nonnegative(sigma_star_sq, "sigma_star_sq");
  const double gl = gamma * L;
  AbcConstants k;
  k.gamma = gamma;
  k.L = L;
  k.epsilon = (1.0 - gl) / (1.0 + gl);
  k.c = gl * (1.0 + k.epsilon);
  k.a = 1.0 - k.c;
  k.b = -1.0;
  k.v = gamma * sigma_star_sq / (1.0 - gl);
  return k;
}

GammaRatioTable::GammaRatioTable(double phi, std::int64_t max_k) : phi_(phi) {
  if (!(phi >= 0.0 && phi <= 1.0)) throw PreconditionError("phi must lie in [0, 1]");
  if (max_k < 1) throw PreconditionError("table needs max_k >= 1");
  table_.resize(static_cast<std::size_t>(max_k) + 1);
  for (std::int64_t k = 0; k <= max_k; ++k) {
    const double x = static_cast<double>(k);
    table_[static_cast<std::size_t>(k)] = std::lgamma(x + phi) - std::lgamma(x + 1.0);
  }
}

double GammaRatioTable::alpha(std::int64_t T, std::int64_t t) const {
  return std::exp(log_ratio(T - t) - log_ratio(T + 1));
}

double WeightSequence::alpha(std::int64_t t) const {
  if (t < -1 || t > T_) throw std::out_of_range("alpha index outside [-1, T]");
  if (t == T_) t = T_ - 1;
  return alphas_[static_cast<std::size_t>(t + 1)];
}

double WeightSequence::closed_form(std::int64_t t) const {
  if (t < -1 || t > T_ - 1) throw std::out_of_range("closed form defined for t in [-1, T-1]");
  const double T = static_cast<double>(T_);
  const double k = static_cast<double>(T_ - t);
  const double ph = phi();
  return std::exp(std::lgamma(T + 2.0) - std::lgamma(T + 1.0 + ph) + std::lgamma(k + ph) -
                  std::lgamma(k + 1.0));
}

double WeightSequence::stationarity_residual(std::int64_t t) const {
  if (t < 0 || t > T_ - 1) throw std::out_of_range("stationarity defined for t in [0, T-1]");
  // Evaluated on the extended-precision recursion: on the rounded doubles the
  // difference alpha_t - alpha_{t-1} cancels to ~eps (T - t + 1) / a relative.
  const long double a = -static_cast<long double>(ratio_ab_);
  const long double b = -1.0L;
  const long double cur = extended_[static_cast<std::size_t>(t) + 1];
  const long double prev = extended_[static_cast<std::size_t>(t)];
  const long double lhs = a * cur;
  const long double rhs = -b * (cur - prev) * static_cast<long double>(T_ - t + 1);
  const long double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale == 0.0L ? 0.0 : static_cast<double>(std::abs(lhs - rhs) / scale);
}

WeightSequence weight_sequence(std::int64_t T, double ratio_ab) {
  if (T < 1) throw PreconditionError("weight sequence needs T >= 1");
  if (!(ratio_ab >= -1.0 && ratio_ab <= 0.0))
    throw PreconditionError("a/b must lie in (-1, 0] (got " + num(ratio_ab) + ")");

  WeightSequence seq;
  seq.T_ = T;
  seq.ratio_ab_ = ratio_ab;
  seq.alphas_.resize(static_cast<std::size_t>(T) + 1);
  seq.extended_.resize(static_cast<std::size_t>(T) + 1);
  seq.extended_[0] = 1.0L;
  long double alpha = 1.0L;
  long double sum = 0.0L;
  for (std::int64_t t = 0; t < T; ++t) {
    const long double num_t = static_cast<long double>(T - t + 1);
    alpha *= num_t / (num_t + ratio_ab);
    seq.extended_[static_cast<std::size_t>(t) + 1] = alpha;
    sum += alpha;
  }
  for (std::size_t k = 0; k < seq.extended_.size(); ++k)
    seq.alphas_[k] = static_cast<double>(seq.extended_[k]);
  seq.sum_ = static_cast<double>(sum);

  for (std::int64_t t : {std::int64_t{0}, T / 2, T - 1}) {
    const double rel = relative_gap(seq.alpha(t), seq.closed_form(t));
    if (rel > 1e-9) {
      throw std::logic_error("weight recursion and Gamma closed form disagree at t = " +
                             std::to_string(t) + " (relative " + num(rel) + ")");
    }
  }
  return seq;
}

double theorem1_bound(double gamma, double L, double D_sq, double sigma_star_sq, std::int64_t T) {
  require_horizon(T);
  require_step(gamma, L);
  require_nonnegative(D_sq, "D^2");
  require_nonnegative(sigma_star_sq, "sigma_star_sq");
  const double gl = gamma * L;
  const double t = static_cast<double>(T);
  const double inflation = std::pow(t, phi(gamma, L));
  const double bias = 2.0 * D_sq / (gamma * (1.0 - gl) * t);
  const double noise = 8.0 * gamma * std::log(t + 1.0) / ((1.0 - gl) * (1.0 - gl)) * sigma_star_sq;
  return inflation * (bias + noise);
}

PolyBound corollary_poly_bound(double C, double beta, double L, double D_sq,
                               double sigma_star_sq, std::int64_t T) {
  require_horizon(T);
  require_corollary_C(C);
  if (!(beta > 0.0 && beta < 1.0)) throw PreconditionError("beta must lie in (0, 1)");
  if (!(L > 0.0)) throw PreconditionError("L must be positive");
  require_nonnegative(D_sq, "D^2");
  require_nonnegative(sigma_star_sq, "sigma_star_sq");
  const double t = static_cast<double>(T);
  PolyBound out;
  out.B = std::exp(2.0 / (std::numbers::e * beta * C));
  out.value = 4.0 * out.B * C * L * D_sq / std::pow(t, 1.0 - beta) +
              32.0 * out.B * std::log(t + 1.0) / (C * L * std::pow(t, beta)) * sigma_star_sq;
  return out;
}

SqrtBound corollary_sqrt_bound(double C, double L, double D_sq, double sigma_star_sq,
                               std::int64_t T) {
  require_horizon(T);
  require_corollary_C(C);
  if (!(L > 0.0)) throw PreconditionError("L must be positive");
  require_nonnegative(D_sq, "D^2");
  require_nonnegative(sigma_star_sq, "sigma_star_sq");
  const double t = static_cast<double>(T);
  const double root = std::sqrt(t);
  const double log_term = std::log(t + 1.0);
  SqrtBound out;
  out.general = 9.0 * C * L * D_sq / root + 67.0 * log_term / (C * L * root) * sigma_star_sq;
  if (C == 2.0) out.c2_form = 17.0 * L * D_sq / root + 34.0 * log_term / (L * root) * sigma_star_sq;
  return out;
}

double complexity_constant(double L, double D_sq, double sigma_star_sq) {
  if (!(L > 0.0)) throw PreconditionError("L must be positive");
  require_nonnegative(D_sq, "D^2");
  require_nonnegative(sigma_star_sq, "sigma_star_sq");
  return std::max(18.0 * L * D_sq, 67.0 * sigma_star_sq / (2.0 * L));
}

double complexity_ratio(std::int64_t T) {
  const double t = static_cast<double>(T);
  const double denom = 1.0 + std::log(t + 1.0);
  return t / (denom * denom);
}

std::int64_t complexity_horizon(double epsilon, double L, double D_sq, double sigma_star_sq) {
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  const double K = complexity_constant(L, D_sq, sigma_star_sq);
  const double target = (K / epsilon) * (K / epsilon);
  const auto reached = [&](std::int64_t T) { return complexity_ratio(T) >= target; };

  std::int64_t lo = 3;
  if (reached(lo)) return lo;
  std::int64_t hi = 6;
  while (!reached(hi)) {
    lo = hi;
    if (hi > (std::numeric_limits<std::int64_t>::max() >> 2))
      throw PreconditionError("required horizon exceeds the 64-bit range");
    hi *= 2;
  }
  // invariant: !reached(lo), reached(hi)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (reached(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double complexity_k_prime(double K, double beta) {
  if (!(beta > 2.0)) throw PreconditionError("K' requires beta > 2");
  require_nonnegative(K, "K");
  const double alpha = (1.0 - 2.0 / beta) / 2.0;
  return std::pow(3.0 * K / (std::numbers::e * alpha), beta);
}

EffectiveConstants effective_constants(const FiniteSumProblem& problem, std::size_t b,
                                       const SolutionCertificate& cert,
                                       MinibatchSmoothness variant) {
  const std::size_t n = problem.size();
  if (n < 2) throw PreconditionError("effective constants need n >= 2 (formula degenerate at n = 1)");
  if (b < 1 || b > n) throw PreconditionError("batch size must satisfy 1 <= b <= n");
  if (!problem.uniform_weights())
    throw UnsupportedConfigurationError("effective constants assume uniform sampling");

  const double nn = static_cast<double>(n);
  const double bb = static_cast<double>(b);
  const double w_fullness = (nn - bb) / (bb * (nn - 1.0));
  const double w_batch = nn * (bb - 1.0) / (bb * (nn - 1.0));
  const double L_f = problem.mean_smoothness();
  const double L_max = problem.max_smoothness();

  double grad_sq_total = 0.0;
  Workspace ws;
  Vector g(problem.dimension());
  for (const auto& c : problem.components()) {
    c.gradient_into(cert.x_star, g, ws);
    grad_sq_total += g.squaredNorm();
  }

  EffectiveConstants out;
  out.L_b = variant == MinibatchSmoothness::as_printed ? w_fullness * L_f + w_batch * L_max
                                                      : w_fullness * L_max + w_batch * L_f;
  out.sigma_b_sq = (nn - bb) / (nn * bb * (nn - 1.0)) * grad_sq_total;
  return out;
}

double tphi_cap(double gamma, double L, std::int64_t T, double K) {
  if (T < 2) throw PreconditionError("T >= 2 required");
  if (!(K >= 0.0)) throw PreconditionError("K must be >= 0");
  if (!(gamma > 0.0) || !(L > 0.0)) throw PreconditionError("gamma and L must be positive");
  const double log_t = std::log(static_cast<double>(T));
  // A few ulps of slack so gamma computed as K / ln T itself passes.
  if (gamma > K / log_t * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()))
    throw PreconditionError("hypothesis gamma <= K / ln T fails (gamma = " + num(gamma) +
                            ", K / ln T = " + num(K / log_t) + ")");
  const double gl = gamma * L;
  const double value = std::pow(static_cast<double>(T), 2.0 * gl / (1.0 + gl));
  const double cap = std::exp(2.0 * L * K);
  if (value > cap * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()))
    throw std::logic_error("T^phi exceeded exp(2LK): " + num(value) + " > " + num(cap));
  return value;
}

BoundReport build_bound_report(const BoundInputs& inputs, std::optional<double> epsilon) {
  BoundReport r;
  r.inputs = inputs;
  if (inputs.C.has_value()) {
    const double beta = inputs.beta.value_or(0.5);
    r.inputs.beta = beta;
    require_corollary_C(*inputs.C);
    if (!(beta > 0.0 && beta < 1.0)) throw PreconditionError("beta must lie in (0, 1)");
    if (!(inputs.L > 0.0)) throw PreconditionError("L must be positive");
    r.inputs.gamma = 1.0 / (*inputs.C * inputs.L * std::pow(static_cast<double>(inputs.T), beta));
  }
  const BoundInputs& in = r.inputs;
  r.phi = phi(in.gamma, in.L);
  r.theorem1 = theorem1_bound(in.gamma, in.L, in.D_sq, in.sigma_star_sq, in.T);
  r.abc = abc_constants(in.gamma, in.L, in.sigma_star_sq);
  if (in.C.has_value()) {
    const PolyBound poly = corollary_poly_bound(*in.C, *in.beta, in.L, in.D_sq, in.sigma_star_sq, in.T);
    r.corollary_poly = poly.value;
    r.B = poly.B;
    if (*in.beta == 0.5) {
      const SqrtBound sq = corollary_sqrt_bound(*in.C, in.L, in.D_sq, in.sigma_star_sq, in.T);
      r.corollary_sqrt = sq.general;
      r.corollary_sqrt_c2 = sq.c2_form;
    }
  }
  if (epsilon.has_value()) {
    r.complexity_epsilon = epsilon;
    r.complexity_T = complexity_horizon(*epsilon, in.L, in.D_sq, in.sigma_star_sq);
  }
  return r;
}

nlohmann::json to_json(const AbcConstants& abc) {
  return nlohmann::json{{"a", abc.a},         {"b", abc.b},         {"c", abc.c},
                        {"v", abc.v},         {"epsilon", abc.epsilon}, {"gamma", abc.gamma},
                        {"L", abc.L}};
}

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json inputs{{"gamma", r.inputs.gamma},
                        {"L", r.inputs.L},
                        {"D_sq", r.inputs.D_sq},
                        {"sigma_star_sq", r.inputs.sigma_star_sq},
                        {"T", r.inputs.T}};
  if (r.inputs.C) inputs["C"] = *r.inputs.C;
  if (r.inputs.beta) inputs["beta"] = *r.inputs.beta;

  nlohmann::json out{{"inputs", inputs},
                     {"phi", r.phi},
                     {"theorem1", r.theorem1},
                     {"abc", to_json(r.abc)}};
  const auto opt = [&](const char* key, const auto& value) {
    out[key] = value.has_value() ? nlohmann::json(*value) : nlohmann::json(nullptr);
  };
  opt("corollary_poly", r.corollary_poly);
  opt("B", r.B);
  opt("corollary_sqrt", r.corollary_sqrt);
  opt("corollary_sqrt_c2", r.corollary_sqrt_c2);
  opt("complexity_epsilon", r.complexity_epsilon);
  opt("complexity_T", r.complexity_T);
  return out;
}

}  // namespace lastiter
