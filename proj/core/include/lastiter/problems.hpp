#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace lastiter {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// f_i(x) = 1/2 ||A x - b||^2.
struct LeastSquaresTerm {
  Matrix A;
  Vector b;
};

/// f_i(x) = ln(1 + exp(-label * <a, x>)), label in {-1, +1}.
struct LogisticTerm {
  Vector a;
  double label = 1.0;
};

/// Scratch space reused across gradient calls so the hot loop never allocates.
struct Workspace {
  Vector residual;
};

/// One convex, L_i-smooth summand of a finite-sum objective.
class ComponentFunction {
 public:
  using Term = std::variant<LeastSquaresTerm, LogisticTerm>;

  /// Throws DegenerateProblemError on zero rows / zero logistic features and
  /// PreconditionError on shape mismatches or labels outside {-1, +1}.
  ComponentFunction(std::size_t index, Term term);

  std::size_t index() const noexcept { return index_; }
  Eigen::Index dimension() const noexcept { return dimension_; }
  double smoothness() const noexcept { return smoothness_; }
  const Term& term() const noexcept { return term_; }
  bool is_least_squares() const noexcept {
    return std::holds_alternative<LeastSquaresTerm>(term_);
  }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  void gradient_into(const Vector& x, Vector& out, Workspace& ws) const;
  /// out += grad f_i(x)
  void add_gradient(const Vector& x, Vector& out, Workspace& ws) const;
  /// Curvature matrix used for the smoothness constant of weighted sums:
  /// A^T A for least squares, a a^T / 4 for logistic.
  Matrix curvature_bound() const;

 private:
  std::size_t index_;
  Term term_;
  Eigen::Index dimension_ = 0;
  double smoothness_ = 0.0;
};

/// Weighted finite sum f = sum_i w_i f_i.
///
/// Immutable after construction; safe to share across threads.
class FiniteSumProblem {
 public:
  /// Empty weights means uniform. Weights must be nonnegative and sum to one
  /// (within 1e-12); components must agree on dimension and be indexed 0..n-1.
  explicit FiniteSumProblem(std::vector<ComponentFunction> components,
                            std::vector<double> weights = {});

  std::size_t size() const noexcept { return components_.size(); }
  Eigen::Index dimension() const noexcept { return dimension_; }
  std::span<const double> weights() const noexcept { return weights_; }
  bool uniform_weights() const noexcept { return uniform_; }
  const ComponentFunction& component(std::size_t i) const { return components_.at(i); }
  std::span<const ComponentFunction> components() const noexcept { return components_; }

  /// L = max_i L_i.
  double max_smoothness() const noexcept { return max_smoothness_; }
  /// L_f, smoothness constant of the weighted mean f.
  double mean_smoothness() const noexcept { return mean_smoothness_; }
  bool all_least_squares() const noexcept;

  double value(const Vector& x) const;
  /// Uniform weights: sum of component gradients in ascending index order,
  /// divided once by n. Otherwise the weighted sum in ascending order.
  Vector gradient(const Vector& x) const;
  void gradient_into(const Vector& x, Vector& out, Workspace& ws, Vector& scratch) const;
  /// sum_i w_i ||grad f_i(x)||^2
  double gradient_second_moment(const Vector& x) const;

  /// Index distribution: cumulative weights, last entry exactly 1.
  std::span<const double> cumulative_weights() const noexcept { return cumulative_; }

 private:
  std::vector<ComponentFunction> components_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  bool uniform_ = true;
  Eigen::Index dimension_ = 0;
  double max_smoothness_ = 0.0;
  double mean_smoothness_ = 0.0;
};

enum class Provenance { closed_form, numerical_solve };

std::string_view to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view s);

struct SolutionCertificate {
  Vector x_star;
  double inf_f = 0.0;
  double sigma_star_sq = 0.0;
  double grad_norm_residual = 0.0;
  double tolerance = 0.0;
  Provenance provenance = Provenance::closed_form;
};

struct GeneratedProblem {
  FiniteSumProblem problem;
  SolutionCertificate certificate;
};

inline constexpr double kDefaultCertificationTolerance = 1e-10;
inline constexpr std::int64_t kDefaultCertificationIterCap = 1'000'000;

struct LeastSquaresSpec {
  std::size_t n = 10;
  std::size_t d = 2;
  /// Rows per A_i; 0 means d.
  std::size_t rows = 0;
  /// Dispersion of the per-component minimizers; 0 forces a shared one.
  double spread = 1.0;
  std::uint64_t seed = 0;
  double tolerance = kDefaultCertificationTolerance;
  /// Upper bound on n * rows * d stored doubles.
  std::size_t memory_budget = 50'000'000;
};

struct LogisticSpec {
  std::size_t n = 20;
  std::size_t d = 2;
  std::uint64_t seed = 0;
  double tolerance = kDefaultCertificationTolerance;
  std::int64_t iter_cap = kDefaultCertificationIterCap;
  std::size_t memory_budget = 50'000'000;
};

/// Random least-squares instance with a closed-form certificate.
GeneratedProblem make_least_squares(const LeastSquaresSpec& spec);

/// Random logistic-regression instance certified numerically. The first 2d
/// components are +/- label pairs on scaled coordinate axes, which rules out
/// separability and guarantees a finite minimizer; requires n >= 2d.
GeneratedProblem make_logistic(const LogisticSpec& spec);

/// Closed-form certificate for an all-least-squares problem (normal equations
/// of the mean). Throws DegenerateProblemError on a singular mean Hessian.
SolutionCertificate certify_closed_form(const FiniteSumProblem& problem,
                                        double tol = kDefaultCertificationTolerance);

/// Full-gradient descent with step 1/L_f, falling back to Armijo backtracking
/// whenever a step fails to decrease f. Starts at `start` (zeros if empty).
/// Throws CertificationError carrying the best residual on cap exhaustion.
SolutionCertificate certify_solution(const FiniteSumProblem& problem, double tol,
                                     std::int64_t iter_cap, const Vector& start = Vector());

/// Exact finite sum sum_i w_i ||grad f_i(x)||^2.
double sigma_star_sq(const FiniteSumProblem& problem, const Vector& x);

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
double max_eigenvalue(const Matrix& symmetric);

}  // namespace lastiter
