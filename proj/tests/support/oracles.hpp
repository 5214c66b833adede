#pragma once

// Reference computations written independently of the library: long-double
// arithmetic, direct transcription and brute force.

#include <cmath>
#include <cstdint>
#include <vector>

#include "lastiter/problems.hpp"

namespace oracle {

/// alpha_t through log-Gamma in long double.
inline long double alpha_gamma(std::int64_t T, long double phi, std::int64_t t) {
  const long double T1 = static_cast<long double>(T);
  const long double k = static_cast<long double>(T - t);
  return std::exp(std::lgamma(T1 + 2.0L) - std::lgamma(T1 + 1.0L + phi) + std::lgamma(k + phi) -
                  std::lgamma(k + 1.0L));
}

/// alpha_t as a telescoped product prod_{s=0..t} (T-s+1)/(T-s+phi), long double.
inline long double alpha_product(std::int64_t T, long double phi, std::int64_t t) {
  long double a = 1.0L;
  for (std::int64_t s = 0; s <= t; ++s) {
    const long double m = static_cast<long double>(T - s + 1);
    a *= m / (m - 1.0L + phi);
  }
  return a;
}

inline double theorem1(double g, double L, double D2, double s2, std::int64_t T) {
  const long double t = T;
  const long double gl = static_cast<long double>(g) * L;
  const long double ph = 2.0L * gl / (1.0L + gl);
  const long double first = 2.0L * D2 / (g * (1.0L - gl) * t);
  const long double second = 8.0L * g * std::log(t + 1.0L) * s2 / ((1.0L - gl) * (1.0L - gl));
  return static_cast<double>(std::pow(t, ph) * (first + second));
}

/// Smallest T >= 3 with T / (1 + ln(T+1))^2 >= (K / eps)^2 by linear scan.
inline std::int64_t complexity_horizon_scan(double eps, double L, double D2, double s2) {
  const double K = std::max(18.0 * L * D2, 67.0 * s2 / (2.0 * L));
  const long double target = static_cast<long double>(K / eps) * (K / eps);
  for (std::int64_t T = 3;; ++T) {
    const long double t = T;
    const long double r = t / ((1.0L + std::log(t + 1.0L)) * (1.0L + std::log(t + 1.0L)));
    if (r >= target) return T;
  }
}

/// E[f(x_T) - inf f] for SGD on f_i(x) = lambda_i x^2 / 2 (shared minimizer 0),
/// uniform sampling, constant step: mean(lambda)/2 * x0^2 * E[(1 - g lambda)^2]^T.
inline double quadratic_gap(const std::vector<double>& lambdas, double g, double x0, int T) {
  long double m2 = 0.0L;
  long double mean = 0.0L;
  for (double l : lambdas) {
    m2 += (1.0L - g * l) * (1.0L - g * l);
    mean += l;
  }
  m2 /= lambdas.size();
  mean /= lambdas.size();
  return static_cast<double>(mean / 2.0L * x0 * x0 * std::pow(m2, static_cast<long double>(T)));
}

/// Gradient of component i by finite differences of its value (central, step h).
inline lastiter::Vector numeric_gradient(const lastiter::ComponentFunction& f,
                                         const lastiter::Vector& x, double h = 1e-6) {
  lastiter::Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    lastiter::Vector xp = x;
    lastiter::Vector xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f.value(xp) - f.value(xm)) / (2.0 * h);
  }
  return g;
}

}  // namespace oracle
