#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "lastiter/problems.hpp"

namespace lastiter {

/// phi = 2 gamma L / (1 + gamma L), the exponent of the T^phi inflation factor.
/// Requires gamma * L in (0, 1).
double phi(double gamma, double L);

/// Coefficients of the one-step inequality
///   E[a f(x_t) + b f(z_t) + c inf f] <= (1/2g) E||x_t - z_t||^2 - (1/2g) E||x_{t+1} - z_t||^2 + v
/// with eps = (1 - gL)/(1 + gL), a = 1 - gL(1 + eps), b = -1, c = gL(1 + eps),
/// v = g (1 + 1/eps) sigma_*^2 / 2 = g sigma_*^2 / (1 - gL).
struct AbcConstants {
  double a = 0.0;
  double b = -1.0;
  double c = 0.0;
  double v = 0.0;
  double epsilon = 0.0;
  double gamma = 0.0;
  double L = 0.0;

  /// a / b, in (-1, 0].
  double ratio_ab() const noexcept { return a / b; }
};

AbcConstants abc_constants(double gamma, double L, double sigma_star_sq);

/// lgamma(k + phi) - lgamma(k + 1) for k = 0..max_k; the closed form of the
/// weight sequence is a difference of two entries.
class GammaRatioTable {
 public:
  GammaRatioTable(double phi, std::int64_t max_k);
  double log_ratio(std::int64_t k) const { return table_.at(static_cast<std::size_t>(k)); }
  double phi() const noexcept { return phi_; }

  /// alpha_t for horizon T via Gamma(T+2)/Gamma(T+1+phi) * Gamma(T-t+phi)/Gamma(T-t+1).
  /// Needs max_k >= T + 1.
  double alpha(std::int64_t T, std::int64_t t) const;

 private:
  double phi_;
  std::vector<double> table_;
};

/// Weights alpha_{-1..T-1} of the last-iterate argument, alpha_{-1} = 1 and
///   alpha_t = (T - t + 1) / (T - t + 1 + a/b) * alpha_{t-1},   t = 0..T-1,
/// with alpha_T := alpha_{T-1}. The recursion is the stored representation,
/// carried in long double and rounded once per entry for the double view.
class WeightSequence {
 public:
  std::int64_t horizon() const noexcept { return T_; }
  double ratio_ab() const noexcept { return ratio_ab_; }
  double phi() const noexcept { return 1.0 + ratio_ab_; }

  /// alpha_t for t in [-1, T]; alpha_T == alpha_{T-1}.
  double alpha(std::int64_t t) const;
  /// alpha_{-1}, ..., alpha_{T-1}.
  const std::vector<double>& values() const noexcept { return alphas_; }
  /// sum_{t=0}^{T-1} alpha_t
  double sum() const noexcept { return sum_; }

  /// alpha_t from the Gamma-ratio closed form (log-Gamma, independent of the recursion).
  double closed_form(std::int64_t t) const;

  /// |a alpha_t + b (alpha_t - alpha_{t-1}) (T - t + 1)| relative to the larger
  /// side, with b = -1 and a = -ratio_ab, on the long double recursion.
  double stationarity_residual(std::int64_t t) const;

 private:
  friend WeightSequence weight_sequence(std::int64_t T, double ratio_ab);
  std::int64_t T_ = 0;
  double ratio_ab_ = 0.0;
  std::vector<double> alphas_;
  std::vector<long double> extended_;
  double sum_ = 0.0;
};

/// Requires T >= 1 and ratio_ab in [-1, 0] (-1 is the phi -> 0 limit). The
/// closed form is spot-checked at t = 0, T/2 and T-1; a relative mismatch
/// above 1e-9 throws std::logic_error.
WeightSequence weight_sequence(std::int64_t T, double ratio_ab);

/// T^phi (2 D^2 / (g (1 - gL) T) + 8 g ln(T+1) / (1 - gL)^2 * sigma_*^2).
double theorem1_bound(double gamma, double L, double D_sq, double sigma_star_sq, std::int64_t T);

struct PolyBound {
  double value = 0.0;
  /// B = exp(2 / (e beta C)).
  double B = 0.0;
};

/// 4 B C L D^2 / T^(1-beta) + 32 B ln(T+1) / (C L T^beta) * sigma_*^2.
PolyBound corollary_poly_bound(double C, double beta, double L, double D_sq, double sigma_star_sq,
                               std::int64_t T);

struct SqrtBound {
  /// 9 C L D^2 / sqrt T + 67 ln(T+1) / (C L sqrt T) * sigma_*^2.
  double general = 0.0;
  /// 17 L D^2 / sqrt T + 34 ln(T+1) / (L sqrt T) * sigma_*^2, present when C == 2.
  std::optional<double> c2_form;
};

SqrtBound corollary_sqrt_bound(double C, double L, double D_sq, double sigma_star_sq,
                               std::int64_t T);

/// K = max(18 L D^2, 67 sigma_*^2 / (2L)).
double complexity_constant(double L, double D_sq, double sigma_star_sq);

/// T / (1 + ln(T+1))^2, increasing for T >= 1.
double complexity_ratio(std::int64_t T);

/// Smallest T >= 3 with T / (1 + ln(T+1))^2 >= K^2 / eps^2 (exponential then
/// binary search). Requires eps > 0.
std::int64_t complexity_horizon(double epsilon, double L, double D_sq, double sigma_star_sq);

/// K' = (3K / (e alpha))^beta with alpha = (1 - 2/beta) / 2, beta > 2. Grows
/// without bound as beta -> 2+.
double complexity_k_prime(double K, double beta);

enum class MinibatchSmoothness {
  /// L_b = (n-b)/(b(n-1)) L_f + n(b-1)/(b(n-1)) max_i L_i
  as_printed,
  /// L_b = (n-b)/(b(n-1)) max_i L_i + n(b-1)/(b(n-1)) L_f
  swapped,
};

struct EffectiveConstants {
  double L_b = 0.0;
  double sigma_b_sq = 0.0;
};

/// Constants of the reformulated problem that mini-batch SGD solves with plain
/// SGD. sigma_b^2 = (n-b)/(n b (n-1)) sum_i ||grad f_i(x*)||^2. Requires
/// 1 <= b <= n, n >= 2 and uniform weights.
EffectiveConstants effective_constants(const FiniteSumProblem& problem, std::size_t b,
                                       const SolutionCertificate& cert,
                                       MinibatchSmoothness variant = MinibatchSmoothness::as_printed);

/// Returns T^phi after checking the hypothesis gamma <= K / ln T (T >= 2,
/// K >= 0); the returned value is guaranteed <= exp(2 L K). Throws
/// PreconditionError when the hypothesis fails.
double tphi_cap(double gamma, double L, std::int64_t T, double K);

struct BoundInputs {
  double gamma = 0.0;
  double L = 0.0;
  double D_sq = 0.0;
  double sigma_star_sq = 0.0;
  std::int64_t T = 3;
  std::optional<double> C;
  std::optional<double> beta;
};

struct BoundReport {
  BoundInputs inputs;
  double phi = 0.0;
  double theorem1 = 0.0;
  AbcConstants abc;
  std::optional<double> corollary_poly;
  std::optional<double> B;
  std::optional<double> corollary_sqrt;
  std::optional<double> corollary_sqrt_c2;
  std::optional<std::int64_t> complexity_T;
  std::optional<double> complexity_epsilon;
};

/// Evaluates every applicable bound. When C is supplied, gamma is replaced by
/// 1/(C L T^beta) (beta defaults to 1/2) and the corollaries are evaluated;
/// the sqrt-T corollary only for beta == 1/2.
BoundReport build_bound_report(const BoundInputs& inputs,
                               std::optional<double> epsilon = std::nullopt);

nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const AbcConstants& abc);

}  // namespace lastiter
