#pragma once

// Small hand-built problems with known solutions.

#include <vector>

#include "lastiter/problems.hpp"

namespace fixture {

inline lastiter::Vector scalar(double v) {
  lastiter::Vector x(1);
  x[0] = v;
  return x;
}

/// f_i(x) = (x - c_i)^2 / 2, uniform weights.
inline lastiter::FiniteSumProblem shifted_quadratics(const std::vector<double>& centers) {
  std::vector<lastiter::ComponentFunction> comps;
  for (std::size_t i = 0; i < centers.size(); ++i)
    comps.emplace_back(i, lastiter::LeastSquaresTerm{lastiter::Matrix::Ones(1, 1), scalar(centers[i])});
  return lastiter::FiniteSumProblem(std::move(comps));
}

/// f_i(x) = lambda_i x^2 / 2 with integer lambda_i, built from lambda_i unit
/// rows so every gradient is computed exactly. Shared minimizer 0.
inline lastiter::FiniteSumProblem scaled_quadratics(const std::vector<int>& lambdas) {
  std::vector<lastiter::ComponentFunction> comps;
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    comps.emplace_back(i, lastiter::LeastSquaresTerm{lastiter::Matrix::Ones(lambdas[i], 1),
                                                     lastiter::Vector::Zero(lambdas[i])});
  return lastiter::FiniteSumProblem(std::move(comps));
}

inline lastiter::GeneratedProblem certified(lastiter::FiniteSumProblem p) {
  auto cert = lastiter::certify_closed_form(p);
  return {std::move(p), std::move(cert)};
}

/// The two-quadratic interpolation problem, lambda in {1, 2}.
inline lastiter::GeneratedProblem two_quadratics() { return certified(scaled_quadratics({1, 2})); }

}  // namespace fixture
