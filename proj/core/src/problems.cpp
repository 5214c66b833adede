#include "lastiter/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "lastiter/errors.hpp"
#include "lastiter/rng.hpp"

namespace lastiter {

namespace {

// Numerically stable ln(1 + exp(-s)).
double softplus_neg(double s) {
  if (s > 0.0) return std::log1p(std::exp(-s));
  return -s + std::log1p(std::exp(s));
}

// 1 / (1 + exp(s)), stable for both signs.
double sigmoid_neg(double s) {
  if (s >= 0.0) {
    const double e = std::exp(-s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s));
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dimension(const FiniteSumProblem& problem, const Vector& x) {
  if (x.size() != problem.dimension()) {
    std::ostringstream os;
    os << "point has dimension " << x.size() << ", problem has dimension " << problem.dimension();
    throw PreconditionError(os.str());
  }
}

Vector standard_normal(CounterRng& rng, Eigen::Index size) {
  Vector v(size);
  for (Eigen::Index k = 0; k < size; ++k) v[k] = rng.normal();
  return v;
}

}  // namespace

ComponentFunction::ComponentFunction(std::size_t index, Term term)
    : index_(index), term_(std::move(term)) {
  std::visit(
      Overloaded{
          [&](const LeastSquaresTerm& t) {
            if (t.A.cols() < 1) throw PreconditionError("least-squares term needs at least one column");
            if (t.A.rows() < 1) throw DegenerateProblemError("least-squares term has no rows");
            if (t.b.size() != t.A.rows())
              throw PreconditionError("least-squares term: b length must equal rows of A");
            if (!t.A.allFinite() || !t.b.allFinite())
              throw PreconditionError("least-squares term has non-finite entries");
            for (Eigen::Index r = 0; r < t.A.rows(); ++r) {
              if (t.A.row(r).squaredNorm() == 0.0)
                throw DegenerateProblemError("least-squares component " + std::to_string(index) +
                                             " has a zero row");
            }
            dimension_ = t.A.cols();
            smoothness_ = max_eigenvalue(t.A.transpose() * t.A);
          },
          [&](const LogisticTerm& t) {
            if (t.a.size() < 1) throw PreconditionError("logistic term needs a non-empty feature");
            if (!t.a.allFinite()) throw PreconditionError("logistic term has non-finite entries");
            if (t.label != 1.0 && t.label != -1.0)
              throw PreconditionError("logistic label must be -1 or +1");
            if (t.a.squaredNorm() == 0.0)
              throw DegenerateProblemError("logistic component " + std::to_string(index) +
                                           " has a zero feature row");
            dimension_ = t.a.size();
            smoothness_ = t.a.squaredNorm() / 4.0;
          },
      },
      term_);
}

double ComponentFunction::value(const Vector& x) const {
  return std::visit(Overloaded{
                        [&](const LeastSquaresTerm& t) {
                          return 0.5 * (t.A * x - t.b).squaredNorm();
                        },
                        [&](const LogisticTerm& t) { return softplus_neg(t.label * t.a.dot(x)); },
                    },
                    term_);
}

Vector ComponentFunction::gradient(const Vector& x) const {
  Vector out(dimension_);
  Workspace ws;
  gradient_into(x, out, ws);
  return out;
}

void ComponentFunction::gradient_into(const Vector& x, Vector& out, Workspace& ws) const {
  std::visit(Overloaded{
                 [&](const LeastSquaresTerm& t) {
                   ws.residual.resize(t.A.rows());
                   ws.residual.noalias() = t.A * x;
                   ws.residual -= t.b;
                   out.noalias() = t.A.transpose() * ws.residual;
                 },
                 [&](const LogisticTerm& t) {
                   const double s = t.label * t.a.dot(x);
                   out = (-t.label * sigmoid_neg(s)) * t.a;
                 },
             },
             term_);
}

void ComponentFunction::add_gradient(const Vector& x, Vector& out, Workspace& ws) const {
  std::visit(Overloaded{
                 [&](const LeastSquaresTerm& t) {
                   ws.residual.resize(t.A.rows());
                   ws.residual.noalias() = t.A * x;
                   ws.residual -= t.b;
                   out.noalias() += t.A.transpose() * ws.residual;
                 },
                 [&](const LogisticTerm& t) {
                   const double s = t.label * t.a.dot(x);
                   out += (-t.label * sigmoid_neg(s)) * t.a;
                 },
             },
             term_);
}

Matrix ComponentFunction::curvature_bound() const {
  return std::visit(Overloaded{
                        [](const LeastSquaresTerm& t) -> Matrix { return t.A.transpose() * t.A; },
                        [](const LogisticTerm& t) -> Matrix {
                          return 0.25 * (t.a * t.a.transpose());
                        },
                    },
                    term_);
}

FiniteSumProblem::FiniteSumProblem(std::vector<ComponentFunction> components,
                                   std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  const std::size_t n = components_.size();
  if (n == 0) throw PreconditionError("a finite-sum problem needs at least one component");
  dimension_ = components_.front().dimension();
  for (std::size_t i = 0; i < n; ++i) {
    if (components_[i].index() != i)
      throw PreconditionError("component indices must be 0..n-1 in order");
    if (components_[i].dimension() != dimension_)
      throw PreconditionError("components disagree on dimension");
  }

  if (weights_.empty()) {
    weights_.assign(n, 1.0 / static_cast<double>(n));
    uniform_ = true;
  } else {
    if (weights_.size() != n) throw PreconditionError("weights must have one entry per component");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw PreconditionError("weights must be finite and nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("weights must sum to 1");
    uniform_ = std::all_of(weights_.begin(), weights_.end(),
                           [&](double w) { return w == weights_.front(); }) &&
               weights_.front() == 1.0 / static_cast<double>(n);
  }

  cumulative_.resize(n);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    running += weights_[i];
    cumulative_[i] = running;
  }
  cumulative_.back() = 1.0;

  Matrix curvature = Matrix::Zero(dimension_, dimension_);
  for (std::size_t i = 0; i < n; ++i) {
    max_smoothness_ = std::max(max_smoothness_, components_[i].smoothness());
    curvature += weights_[i] * components_[i].curvature_bound();
  }
  mean_smoothness_ = std::min(max_eigenvalue(curvature), max_smoothness_);
}

bool FiniteSumProblem::all_least_squares() const noexcept {
  return std::all_of(components_.begin(), components_.end(),
                     [](const ComponentFunction& c) { return c.is_least_squares(); });
}

double FiniteSumProblem::value(const Vector& x) const {
  check_dimension(*this, x);
  double total = 0.0;
  if (uniform_) {
    for (const auto& c : components_) total += c.value(x);
    return total / static_cast<double>(size());
  }
  for (std::size_t i = 0; i < size(); ++i) total += weights_[i] * components_[i].value(x);
  return total;
}

Vector FiniteSumProblem::gradient(const Vector& x) const {
  Vector out(dimension_);
  Workspace ws;
  Vector scratch;
  gradient_into(x, out, ws, scratch);
  return out;
}

void FiniteSumProblem::gradient_into(const Vector& x, Vector& out, Workspace& ws,
                                     Vector& scratch) const {
  check_dimension(*this, x);
  out.setZero(dimension_);
  if (uniform_) {
    for (const auto& c : components_) c.add_gradient(x, out, ws);
    out /= static_cast<double>(size());
    return;
  }
  scratch.resize(dimension_);
  for (std::size_t i = 0; i < size(); ++i) {
    components_[i].gradient_into(x, scratch, ws);
    out += weights_[i] * scratch;
  }
}

double FiniteSumProblem::gradient_second_moment(const Vector& x) const {
  check_dimension(*this, x);
  Workspace ws;
  Vector g(dimension_);
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    components_[i].gradient_into(x, g, ws);
    total += weights_[i] * g.squaredNorm();
  }
  return total;
}

std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::closed_form ? "closed_form" : "numerical_solve";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "closed_form") return Provenance::closed_form;
  if (s == "numerical_solve") return Provenance::numerical_solve;
  throw PreconditionError("unknown provenance '" + std::string(s) + "'");
}

double max_eigenvalue(const Matrix& symmetric) {
  if (symmetric.rows() == 1) return symmetric(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

double sigma_star_sq(const FiniteSumProblem& problem, const Vector& x) {
  return problem.gradient_second_moment(x);
}

SolutionCertificate certify_closed_form(const FiniteSumProblem& problem, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("certification tolerance must be positive");
  if (!problem.all_least_squares())
    throw UnsupportedConfigurationError("closed-form certificates need least-squares components");

  const Eigen::Index d = problem.dimension();
  Matrix hessian = Matrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const auto& t = std::get<LeastSquaresTerm>(problem.component(i).term());
    hessian.noalias() += problem.weights()[i] * (t.A.transpose() * t.A);
    rhs.noalias() += problem.weights()[i] * (t.A.transpose() * t.b);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-12 * hi)) {
    std::ostringstream os;
    os << "mean Hessian is singular (eigenvalues in [" << lo << ", " << hi
       << "]); regenerate with a new seed";
    throw DegenerateProblemError(os.str());
  }

  Eigen::LLT<Matrix> llt(hessian);
  Vector x = llt.solve(rhs);
  // One step of iterative refinement against the problem's own gradient.
  x -= llt.solve(problem.gradient(x));

  SolutionCertificate cert;
  cert.grad_norm_residual = problem.gradient(x).norm();
  if (cert.grad_norm_residual > tol) {
    std::ostringstream os;
    os << "closed-form solve left residual " << cert.grad_norm_residual << " above tolerance "
       << tol;
    throw CertificationError(os.str(), cert.grad_norm_residual, 0);
  }
  cert.x_star = std::move(x);
  cert.inf_f = problem.value(cert.x_star);
  cert.sigma_star_sq = sigma_star_sq(problem, cert.x_star);
  cert.tolerance = tol;
  cert.provenance = Provenance::closed_form;
  return cert;
}

SolutionCertificate certify_solution(const FiniteSumProblem& problem, double tol,
                                     std::int64_t iter_cap, const Vector& start) {
  if (!(tol > 0.0)) throw PreconditionError("certification tolerance must be positive");
  if (iter_cap < 0) throw PreconditionError("iteration cap must be nonnegative");

  Vector x = start.size() == 0 ? Vector::Zero(problem.dimension()) : start;
  check_dimension(problem, x);

  const double base_step = 1.0 / problem.mean_smoothness();
  Workspace ws;
  Vector scratch;
  Vector g(problem.dimension());
  problem.gradient_into(x, g, ws, scratch);
  double fx = problem.value(x);
  double residual = g.norm();
  double best = residual;
  Vector candidate(problem.dimension());

  std::int64_t it = 0;
  for (; residual > tol && it < iter_cap; ++it) {
    double step = base_step;
    candidate = x - step * g;
    double fc = problem.value(candidate);
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(fx) + 1.0);
    if (!(fc <= fx + slack)) {
      const double g2 = g.squaredNorm();
      for (int k = 0; k < 60; ++k) {
        step *= 0.5;
        candidate = x - step * g;
        fc = problem.value(candidate);
        if (fc <= fx - 0.5 * step * g2) break;
      }
    }
    x.swap(candidate);
    fx = fc;
    problem.gradient_into(x, g, ws, scratch);
    residual = g.norm();
    best = std::min(best, residual);
  }

  if (residual > tol) {
    std::ostringstream os;
    os << "certification did not reach tolerance " << tol << " within " << iter_cap
       << " iterations (best residual " << best << ")";
    throw CertificationError(os.str(), best, it);
  }

  SolutionCertificate cert;
  cert.x_star = std::move(x);
  cert.inf_f = problem.value(cert.x_star);
  cert.sigma_star_sq = sigma_star_sq(problem, cert.x_star);
  cert.grad_norm_residual = residual;
  cert.tolerance = tol;
  cert.provenance = Provenance::numerical_solve;
  return cert;
}

GeneratedProblem make_least_squares(const LeastSquaresSpec& spec) {
  if (spec.n < 1 || spec.d < 1) throw PreconditionError("least squares needs n >= 1 and d >= 1");
  if (!(spec.spread >= 0.0) || !std::isfinite(spec.spread))
    throw PreconditionError("spread must be finite and nonnegative");
  const std::size_t rows = spec.rows == 0 ? spec.d : spec.rows;
  if (spec.n * rows * spec.d > spec.memory_budget) {
    std::ostringstream os;
    os << "n*rows*d = " << spec.n * rows * spec.d << " exceeds memory budget "
       << spec.memory_budget;
    throw PreconditionError(os.str());
  }

  const CounterRng root(spec.seed);
  CounterRng matrix_rng = root.split(1);
  CounterRng center_rng = root.split(2);
  CounterRng offset_rng = root.split(3);

  const auto d = static_cast<Eigen::Index>(spec.d);
  const auto m = static_cast<Eigen::Index>(rows);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  const Vector center = standard_normal(center_rng, d);

  std::vector<ComponentFunction> components;
  components.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    Matrix A(m, d);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < d; ++c) A(r, c) = scale * matrix_rng.normal();
    Vector target = center;
    if (spec.spread > 0.0) target += spec.spread * standard_normal(offset_rng, d);
    Vector b = A * target;
    components.emplace_back(i, LeastSquaresTerm{std::move(A), std::move(b)});
  }

  FiniteSumProblem problem(std::move(components));
  SolutionCertificate cert = certify_closed_form(problem, spec.tolerance);
  return {std::move(problem), std::move(cert)};
}

GeneratedProblem make_logistic(const LogisticSpec& spec) {
  if (spec.n < 1 || spec.d < 1) throw PreconditionError("logistic needs n >= 1 and d >= 1");
  if (!(spec.tolerance > 0.0)) throw PreconditionError("certification tolerance must be positive");
  if (spec.n < 2 * spec.d) {
    std::ostringstream os;
    os << "logistic generator needs n >= 2d (got n=" << spec.n << ", d=" << spec.d
       << "): each coordinate carries both class labels so the minimizer is finite";
    throw DegenerateProblemError(os.str());
  }
  if (spec.n * spec.d > spec.memory_budget)
    throw PreconditionError("n*d exceeds memory budget");

  const CounterRng root(spec.seed);
  CounterRng feature_rng = root.split(1);
  CounterRng truth_rng = root.split(2);
  CounterRng label_rng = root.split(3);

  const auto d = static_cast<Eigen::Index>(spec.d);
  const Vector truth = 2.0 * standard_normal(truth_rng, d);

  std::vector<ComponentFunction> components;
  components.reserve(spec.n);
  std::size_t index = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (double label : {1.0, -1.0}) {
      components.emplace_back(index++, LogisticTerm{Vector::Unit(d, j), label});
    }
  }
  while (index < spec.n) {
    Vector a = standard_normal(feature_rng, d);
    if (a.squaredNorm() < 1e-12) continue;
    const double p = 1.0 / (1.0 + std::exp(-a.dot(truth)));
    const double label = label_rng.uniform() < p ? 1.0 : -1.0;
    components.emplace_back(index++, LogisticTerm{std::move(a), label});
  }

  FiniteSumProblem problem(std::move(components));
  SolutionCertificate cert = certify_solution(problem, spec.tolerance, spec.iter_cap);
  return {std::move(problem), std::move(cert)};
}

}  // namespace lastiter
