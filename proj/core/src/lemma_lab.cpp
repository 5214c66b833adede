#include "lastiter/lemma_lab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "lastiter/bounds.hpp"
#include "lastiter/csv.hpp"
#include "lastiter/errors.hpp"
#include "lastiter/rng.hpp"

namespace lastiter {

namespace {

struct LemmaName {
  LemmaId id;
  std::string_view name;
};

constexpr std::array<LemmaName, 14> kLemmaNames{{
    {LemmaId::variance_transfer, "variance_transfer"},
    {LemmaId::one_step, "one_step"},
    {LemmaId::one_step_reduction, "one_step_reduction"},
    {LemmaId::expected_smoothness, "expected_smoothness"},
    {LemmaId::weight_alpha_lower, "weight_alpha_lower"},
    {LemmaId::weight_sum_c2, "weight_sum_c2"},
    {LemmaId::weight_sum_c3, "weight_sum_c3"},
    {LemmaId::weight_chain, "weight_chain"},
    {LemmaId::exponent, "exponent"},
    {LemmaId::exponent_boundary, "exponent_boundary"},
    {LemmaId::exp_convexity, "exp_convexity"},
    {LemmaId::gautschi, "gautschi"},
    {LemmaId::variance_everywhere_pointwise, "variance_everywhere_pointwise"},
    {LemmaId::variance_everywhere_expected, "variance_everywhere_expected"},
}};

void require_pairs(const std::vector<Vector>& xs, const std::vector<Vector>& ys) {
  if (xs.size() != ys.size()) throw PreconditionError("point lists must have equal length");
}

double expected_shifted_sq(const FiniteSumProblem& problem, const Vector& x, const Vector& z,
                           double gamma) {
  Workspace ws;
  Vector g(problem.dimension());
  Vector step(problem.dimension());
  double total = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    problem.component(i).gradient_into(x, g, ws);
    step = x - gamma * g - z;
    total += problem.weights()[i] * step.squaredNorm();
  }
  return total;
}

double variance_transfer_slack(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                               const Vector& x, double eps) {
  const double L = problem.max_smoothness();
  const double lhs = problem.gradient_second_moment(x);
  const double gap = problem.value(x) - cert.inf_f;
  const double rhs = 2.0 * L * (1.0 + eps) * gap + (1.0 + 1.0 / eps) * cert.sigma_star_sq;
  return rhs - lhs;
}

double one_step_slack(const FiniteSumProblem& problem, const SolutionCertificate& cert,
                      const AbcConstants& k, const Vector& x, const Vector& z) {
  const double lhs = k.a * problem.value(x) + k.b * problem.value(z) + k.c * cert.inf_f;
  const double inv = 1.0 / (2.0 * k.gamma);
  const double rhs = inv * (x - z).squaredNorm() -
                     inv * expected_shifted_sq(problem, x, z, k.gamma) + k.v;
  return rhs - lhs;
}

double powm1_over(double t, double theta) {
  // (t^theta - 1) / theta
  return std::expm1(theta * std::log(t)) / theta;
}

}  // namespace

std::string_view to_string(LemmaId id) noexcept {
  for (const auto& e : kLemmaNames)
    if (e.id == id) return e.name;
  return "unknown";
}

std::optional<LemmaId> lemma_from_string(std::string_view name) {
  for (const auto& e : kLemmaNames)
    if (e.name == name) return e.id;
  return std::nullopt;
}

const std::vector<LemmaId>& all_lemmas() {
  static const std::vector<LemmaId> ids = [] {
    std::vector<LemmaId> v;
    for (const auto& e : kLemmaNames) v.push_back(e.id);
    return v;
  }();
  return ids;
}

std::string LemmaCheckResult::worst_point_string() const {
  std::string out;
  for (const auto& p : worst_point) {
    if (!out.empty()) out += ';';
    out += p.name + '=' + format_double(p.value);
  }
  return out;
}

void SlackTracker::observe(double slack, std::vector<ParamValue> point) {
  ++count_;
  // NaN counts as a violation and sticks.
  if (count_ == 1 || slack < worst_ || (std::isnan(slack) && !std::isnan(worst_))) {
    worst_ = slack;
    worst_point_ = std::move(point);
  }
}

void SlackTracker::merge(const SlackTracker& later) {
  if (later.count_ == 0) return;
  if (count_ == 0 || later.worst_ < worst_ || (std::isnan(later.worst_) && !std::isnan(worst_))) {
    worst_ = later.worst_;
    worst_point_ = later.worst_point_;
  }
  count_ += later.count_;
}

LemmaCheckResult SlackTracker::result() const {
  LemmaCheckResult r;
  r.id = id_;
  r.grid_size = count_;
  r.worst_slack = worst_;
  r.worst_point = worst_point_;
  r.passed = count_ > 0 && worst_ >= kSlackTolerance;
  return r;
}

LemmaCheckResult combine(const std::vector<LemmaCheckResult>& parts) {
  if (parts.empty()) throw PreconditionError("nothing to combine");
  LemmaCheckResult out = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    const auto& p = parts[k];
    out.grid_size += p.grid_size;
    if (p.worst_slack < out.worst_slack || std::isnan(p.worst_slack)) {
      out.worst_slack = p.worst_slack;
      out.worst_point = p.worst_point;
    }
  }
  out.passed = out.grid_size > 0 && out.worst_slack >= kSlackTolerance;
  return out;
}

LemmaCheckResult check_variance_transfer(const FiniteSumProblem& problem,
                                         const SolutionCertificate& cert,
                                         const std::vector<Vector>& points,
                                         const std::vector<double>& eps_grid) {
  SlackTracker tr(LemmaId::variance_transfer);
  for (double eps : eps_grid)
    if (!(eps > 0.0)) throw PreconditionError("variance transfer needs eps > 0");
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (double eps : eps_grid) {
      tr.observe(variance_transfer_slack(problem, cert, points[p], eps),
                 {{"point", static_cast<double>(p)}, {"epsilon", eps}});
    }
  }
  return tr.result();
}

LemmaCheckResult check_one_step_inequality(const FiniteSumProblem& problem,
                                           const SolutionCertificate& cert, double gamma,
                                           const std::vector<Vector>& x_points,
                                           const std::vector<Vector>& z_points) {
  require_pairs(x_points, z_points);
  const AbcConstants k = abc_constants(gamma, problem.max_smoothness(), cert.sigma_star_sq);
  SlackTracker tr(LemmaId::one_step);
  for (std::size_t p = 0; p < x_points.size(); ++p) {
    tr.observe(one_step_slack(problem, cert, k, x_points[p], z_points[p]),
               {{"pair", static_cast<double>(p)}, {"gamma_L", gamma * k.L}});
  }
  return tr.result();
}

LemmaCheckResult check_one_step_reduction(const FiniteSumProblem& problem,
                                          const SolutionCertificate& cert, double gamma,
                                          const std::vector<Vector>& points) {
  const AbcConstants k = abc_constants(gamma, problem.max_smoothness(), cert.sigma_star_sq);
  SlackTracker tr(LemmaId::one_step_reduction);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double direct = one_step_slack(problem, cert, k, points[p], points[p]);
    const double via_transfer =
        0.5 * gamma * variance_transfer_slack(problem, cert, points[p], k.epsilon);
    tr.observe(-std::abs(direct - via_transfer),
               {{"point", static_cast<double>(p)}, {"gamma_L", gamma * k.L}});
  }
  return tr.result();
}

LemmaCheckResult check_expected_smoothness(const FiniteSumProblem& problem,
                                           const SolutionCertificate& cert,
                                           const std::vector<Vector>& points) {
  const double L = problem.max_smoothness();
  Workspace ws;
  Vector gx(problem.dimension());
  Vector gs(problem.dimension());
  SlackTracker tr(LemmaId::expected_smoothness);
  for (std::size_t p = 0; p < points.size(); ++p) {
    double spread = 0.0;
    for (std::size_t i = 0; i < problem.size(); ++i) {
      problem.component(i).gradient_into(points[p], gx, ws);
      problem.component(i).gradient_into(cert.x_star, gs, ws);
      spread += problem.weights()[i] * (gx - gs).squaredNorm();
    }
    const double gap = problem.value(points[p]) - cert.inf_f;
    tr.observe(gap - spread / (2.0 * L), {{"point", static_cast<double>(p)}});
  }
  return tr.result();
}

namespace {

struct WeightTrackers {
  SlackTracker lower{LemmaId::weight_alpha_lower};
  SlackTracker c2{LemmaId::weight_sum_c2};
  SlackTracker c3{LemmaId::weight_sum_c3};
  SlackTracker chain{LemmaId::weight_chain};

  void observe(std::int64_t T, double phi) {
    if (T < 2) throw PreconditionError("weight bounds need T >= 2");
    if (!(phi > 0.0 && phi <= 1.0)) throw PreconditionError("weight bounds need phi in (0, 1]");
    const WeightSequence seq = weight_sequence(T, phi - 1.0);
    const double t = static_cast<double>(T);
    const double last = seq.alpha(T - 1);
    const double ratio = seq.sum() / last;
    const double harmonic = 1.0 + powm1_over(t, phi);
    const std::vector<ParamValue> at{{"T", t}, {"phi", phi}};
    lower.observe(last - std::pow(t + 1.0, 1.0 - phi) / 2.0, at);
    c2.observe(2.0 * harmonic - ratio, at);
    c3.observe(3.0 * harmonic - ratio, at);
    chain.observe(4.0 * std::pow(t, phi) * std::log1p(t) - (seq.alpha(T) + seq.sum()) / last, at);
  }

  void merge(const WeightTrackers& o) {
    lower.merge(o.lower);
    c2.merge(o.c2);
    c3.merge(o.c3);
    chain.merge(o.chain);
  }

  WeightBoundsCheck result() const {
    return {lower.result(), c2.result(), c3.result(), chain.result()};
  }
};

std::int64_t as_horizon(double v) {
  const auto T = static_cast<std::int64_t>(std::llround(v));
  if (std::abs(static_cast<double>(T) - v) > 1e-9) throw PreconditionError("T must be an integer");
  return T;
}

}  // namespace

WeightBoundsCheck check_weight_bounds(std::int64_t T, double phi) {
  WeightTrackers tr;
  tr.observe(T, phi);
  return tr.result();
}

WeightBoundsCheck check_weight_bounds_grid(const std::vector<double>& T_grid,
                                           const std::vector<double>& phi_grid,
                                           unsigned workers) {
  std::vector<std::int64_t> horizons;
  horizons.reserve(T_grid.size());
  for (double v : T_grid) horizons.push_back(as_horizon(v));

  std::vector<WeightTrackers> per_phi(phi_grid.size());
  const auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < phi_grid.size(); k += stride) {
      for (std::int64_t T : horizons) per_phi[k].observe(T, phi_grid[k]);
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(phi_grid.size())));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }

  WeightTrackers total;
  for (const auto& part : per_phi) total.merge(part);
  return total.result();
}

LemmaCheckResult check_exponent_inequality(const std::vector<double>& t_grid,
                                           const std::vector<double>& theta_grid) {
  SlackTracker tr(LemmaId::exponent);
  for (double t : t_grid) {
    if (!(t >= 1.0)) throw PreconditionError("exponent inequality needs t >= 1");
    for (double theta : theta_grid) {
      if (!(theta > 0.0)) throw PreconditionError("exponent inequality needs theta > 0");
      const double lhs = 3.0 + 2.0 * powm1_over(t, theta);
      const double rhs = 4.0 * std::pow(t, theta) * std::log1p(t);
      tr.observe(rhs - lhs, {{"t", t}, {"theta", theta}});
    }
  }
  return tr.result();
}

LemmaCheckResult check_exp_convexity(const std::vector<double>& x_fraction_grid,
                                     const std::vector<double>& a_grid) {
  SlackTracker tr(LemmaId::exp_convexity);
  for (double a : a_grid) {
    if (!(a > 0.0)) throw PreconditionError("exp convexity needs a > 0");
    const double chord = std::expm1(a) / a;
    for (double s : x_fraction_grid) {
      if (!(s >= 0.0 && s <= 1.0)) throw PreconditionError("x must lie in [0, a]");
      const double x = s == 1.0 ? a : s * a;
      const double rhs = x * chord + 1.0;
      tr.observe((rhs - std::exp(x)) / rhs, {{"x", x}, {"a", a}});
    }
  }
  return tr.result();
}

LemmaCheckResult check_gautschi(const std::vector<double>& x_grid,
                                const std::vector<double>& c_grid) {
  SlackTracker tr(LemmaId::gautschi);
  for (double x : x_grid) {
    if (!(x > 0.0)) throw PreconditionError("Gautschi needs x > 0");
    for (double c : c_grid) {
      if (!(c >= 0.0 && c <= 1.0)) throw PreconditionError("Gautschi needs c in [0, 1]");
      const double log_ratio = std::lgamma(x + 1.0) - std::lgamma(x + c);
      const double lower = log_ratio - (1.0 - c) * std::log(x);
      const double upper = (1.0 - c) * std::log1p(x) - log_ratio;
      tr.observe(std::min(lower, upper), {{"x", x}, {"c", c}});
    }
  }
  return tr.result();
}

VarianceEverywhereCheck check_variance_everywhere(const FiniteSumProblem& problem,
                                                  const SolutionCertificate& /*cert*/,
                                                  const std::vector<Vector>& x_points,
                                                  const std::vector<Vector>& y_points) {
  require_pairs(x_points, y_points);
  const double L = problem.max_smoothness();
  Workspace ws;
  Vector gx(problem.dimension());
  Vector gy(problem.dimension());
  SlackTracker pointwise(LemmaId::variance_everywhere_pointwise);
  SlackTracker expected(LemmaId::variance_everywhere_expected);
  for (std::size_t p = 0; p < x_points.size(); ++p) {
    const Vector& x = x_points[p];
    const Vector& y = y_points[p];
    double ex = 0.0;
    double ey = 0.0;
    for (std::size_t i = 0; i < problem.size(); ++i) {
      problem.component(i).gradient_into(x, gx, ws);
      problem.component(i).gradient_into(y, gy, ws);
      const double nx = gx.squaredNorm();
      const double ny = gy.squaredNorm();
      pointwise.observe(2.0 * nx + 2.0 * (gy - gx).squaredNorm() - ny,
                        {{"pair", static_cast<double>(p)}, {"component", static_cast<double>(i)}});
      ex += problem.weights()[i] * nx;
      ey += problem.weights()[i] * ny;
    }
    const double bregman = problem.value(y) - problem.value(x) - problem.gradient(x).dot(y - x);
    expected.observe(2.0 * ex + 4.0 * L * bregman - ey, {{"pair", static_cast<double>(p)}});
  }
  return {pointwise.result(), expected.result()};
}

LemmaBatteryConfig default_battery() {
  LemmaBatteryConfig c;
  ProblemSpec hetero;
  hetero.id = "ls_heterogeneous";
  hetero.source = LeastSquaresSpec{.n = 20, .d = 5, .rows = 0, .spread = 1.0, .seed = 11};
  ProblemSpec interp;
  interp.id = "ls_interpolating";
  interp.source = LeastSquaresSpec{.n = 20, .d = 5, .rows = 0, .spread = 0.0, .seed = 12};
  ProblemSpec logistic;
  logistic.id = "logistic";
  logistic.source = LogisticSpec{.n = 40, .d = 4, .seed = 13};
  c.problems = {hetero, interp, logistic};
  return c;
}

LemmaBatteryConfig battery_from_json(const nlohmann::json& j) {
  LemmaBatteryConfig c = default_battery();
  if (!j.is_object()) throw PreconditionError("lemma battery config must be an object");
  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> known = {"description", "problems",    "points", "pairs",
                                                "seed",        "point_radii", "grids"};
    if (!known.contains(key)) throw PreconditionError("unknown lemma battery key '" + key + "'");
  }
  if (j.contains("problems")) {
    c.problems.clear();
    for (const auto& p : j.at("problems")) c.problems.push_back(problem_spec_from_json(p));
    if (c.problems.empty()) throw PreconditionError("lemma battery needs at least one problem");
  }
  c.points = j.value("points", c.points);
  c.pairs = j.value("pairs", c.pairs);
  c.seed = j.value("seed", c.seed);
  if (j.contains("point_radii")) c.point_radii = j.at("point_radii").get<std::vector<double>>();
  if (c.points == 0 || c.pairs == 0) throw PreconditionError("points and pairs must be >= 1");
  if (c.point_radii.empty()) throw PreconditionError("point_radii must be non-empty");

  const auto grid = [&](const char* key, GridSpec& target) {
    if (!j.contains("grids") || !j.at("grids").contains(key)) return;
    target = grid_from_json(j.at("grids").at(key));
    target.expand();
  };
  grid("epsilon", c.epsilon);
  grid("gamma_L", c.gamma_L);
  grid("weight_T", c.weight_T);
  grid("weight_phi", c.weight_phi);
  grid("exponent_t", c.exponent_t);
  grid("exponent_boundary_t", c.exponent_boundary_t);
  grid("exponent_theta", c.exponent_theta);
  grid("exp_a", c.exp_a);
  grid("exp_x_fraction", c.exp_x_fraction);
  grid("gautschi_x", c.gautschi_x);
  grid("gautschi_c", c.gautschi_c);
  return c;
}

nlohmann::json to_json(const LemmaBatteryConfig& c) {
  nlohmann::json problems = nlohmann::json::array();
  for (const auto& p : c.problems) problems.push_back(to_json(p));
  return {{"problems", problems},
          {"points", c.points},
          {"pairs", c.pairs},
          {"point_radii", c.point_radii},
          {"seed", c.seed},
          {"grids",
           {{"epsilon", to_json(c.epsilon)},
            {"gamma_L", to_json(c.gamma_L)},
            {"weight_T", to_json(c.weight_T)},
            {"weight_phi", to_json(c.weight_phi)},
            {"exponent_t", to_json(c.exponent_t)},
            {"exponent_boundary_t", to_json(c.exponent_boundary_t)},
            {"exponent_theta", to_json(c.exponent_theta)},
            {"exp_a", to_json(c.exp_a)},
            {"exp_x_fraction", to_json(c.exp_x_fraction)},
            {"gautschi_x", to_json(c.gautschi_x)},
            {"gautschi_c", to_json(c.gautschi_c)}}}};
}

bool LemmaBatteryReport::all_passed() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const LemmaCheckResult& r) { return r.flagged || r.passed; });
}

namespace {

// Points x* + r u with u ~ N(0, I/d); the first point is x* itself.
std::vector<Vector> sample_points(const SolutionCertificate& cert, std::size_t count,
                                  const std::vector<double>& radii, CounterRng rng) {
  const Eigen::Index d = cert.x_star.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<Vector> pts;
  pts.reserve(count);
  pts.push_back(cert.x_star);
  for (std::size_t k = 1; k < count; ++k) {
    const double r = radii[k % radii.size()];
    Vector u(d);
    for (Eigen::Index j = 0; j < d; ++j) u[j] = rng.normal() * scale;
    pts.push_back(cert.x_star + r * u);
  }
  return pts;
}

LemmaCheckResult tag_problem(LemmaCheckResult r, std::size_t problem_index) {
  r.worst_point.insert(r.worst_point.begin(), {"problem", static_cast<double>(problem_index)});
  return r;
}

std::string format_note(const char* prefix, double value) {
  return std::string(prefix) + format_double(value);
}

}  // namespace

LemmaBatteryReport run_lemma_battery(const LemmaBatteryConfig& config, std::optional<LemmaId> only,
                                     unsigned workers) {
  const auto wanted = [&](std::initializer_list<LemmaId> ids) {
    if (!only) return true;
    return std::find(ids.begin(), ids.end(), *only) != ids.end();
  };

  LemmaBatteryReport report;
  const auto add = [&](LemmaCheckResult r) {
    if (!only || r.id == *only) report.rows.push_back(std::move(r));
  };

  const bool need_problems =
      wanted({LemmaId::variance_transfer, LemmaId::one_step, LemmaId::one_step_reduction,
              LemmaId::expected_smoothness, LemmaId::variance_everywhere_pointwise,
              LemmaId::variance_everywhere_expected});
  if (need_problems) {
    if (config.problems.empty()) throw PreconditionError("lemma battery needs problems");
    const std::vector<double> eps = config.epsilon.expand();
    const std::vector<double> gls = config.gamma_L.expand();
    std::vector<LemmaCheckResult> vt, os, red, es, vp, ve;
    const CounterRng root(config.seed);
    for (std::size_t p = 0; p < config.problems.size(); ++p) {
      const GeneratedProblem gp = materialize(config.problems[p]);
      const auto& prob = gp.problem;
      const auto& cert = gp.certificate;
      const CounterRng stream = root.split(p);
      const auto points = sample_points(cert, config.points, config.point_radii, stream.split(0));
      const auto xs = sample_points(cert, config.pairs, config.point_radii, stream.split(1));
      const auto zs = sample_points(cert, config.pairs, config.point_radii, stream.split(2));
      const double L = prob.max_smoothness();

      if (wanted({LemmaId::variance_transfer}))
        vt.push_back(tag_problem(check_variance_transfer(prob, cert, points, eps), p));
      if (wanted({LemmaId::expected_smoothness}))
        es.push_back(tag_problem(check_expected_smoothness(prob, cert, points), p));
      for (double gl : gls) {
        if (wanted({LemmaId::one_step}))
          os.push_back(tag_problem(check_one_step_inequality(prob, cert, gl / L, xs, zs), p));
        if (wanted({LemmaId::one_step_reduction}))
          red.push_back(tag_problem(check_one_step_reduction(prob, cert, gl / L, points), p));
      }
      if (wanted({LemmaId::variance_everywhere_pointwise, LemmaId::variance_everywhere_expected})) {
        auto ve_check = check_variance_everywhere(prob, cert, xs, zs);
        vp.push_back(tag_problem(std::move(ve_check.pointwise), p));
        ve.push_back(tag_problem(std::move(ve_check.expected), p));
      }
    }
    for (auto* group : {&vt, &os, &red, &es, &vp, &ve})
      if (!group->empty()) add(combine(*group));
  }

  if (wanted({LemmaId::weight_alpha_lower, LemmaId::weight_sum_c2, LemmaId::weight_sum_c3,
              LemmaId::weight_chain})) {
    WeightBoundsCheck w = check_weight_bounds_grid(config.weight_T.expand(),
                                                   config.weight_phi.expand(), workers);
    w.sum_c2.note = w.sum_c2.passed ? "constant-2 statement holds on the grid"
                                    : "constant-2 statement fails on the grid";
    w.sum_c3.note = w.sum_c3.passed ? "constant-3 fallback holds on the grid"
                                    : "constant-3 fallback fails on the grid";
    add(std::move(w.alpha_lower));
    add(std::move(w.sum_c2));
    add(std::move(w.sum_c3));
    add(std::move(w.chain));
  }

  if (wanted({LemmaId::exponent, LemmaId::exponent_boundary})) {
    const std::vector<double> thetas = config.exponent_theta.expand();
    LemmaCheckResult region = check_exponent_inequality(config.exponent_t.expand(), thetas);
    const std::vector<double> region_t = config.exponent_t.expand();
    region.note = format_note("verified region t >= ",
                              *std::min_element(region_t.begin(), region_t.end()));
    add(std::move(region));

    LemmaCheckResult boundary = check_exponent_inequality(config.exponent_boundary_t.expand(), thetas);
    boundary.id = LemmaId::exponent_boundary;
    boundary.flagged = true;
    boundary.note = "at t=1: lhs=3 rhs=4ln2=" + format_double(4.0 * std::log(2.0)) +
                    " (reported, not a verdict)";
    add(std::move(boundary));
  }

  if (wanted({LemmaId::exp_convexity}))
    add(check_exp_convexity(config.exp_x_fraction.expand(), config.exp_a.expand()));
  if (wanted({LemmaId::gautschi}))
    add(check_gautschi(config.gautschi_x.expand(), config.gautschi_c.expand()));

  // Stable output order: the declaration order of LemmaId.
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const LemmaCheckResult& a, const LemmaCheckResult& b) {
                     return static_cast<int>(a.id) < static_cast<int>(b.id);
                   });
  return report;
}

void write_lemma_csv(std::ostream& out, const LemmaBatteryReport& report,
                     std::string_view config_hash) {
  std::vector<std::string> header{"lemma_id", "grid_size", "worst_slack", "worst_point",
                                  "passed",   "flagged",   "note"};
  if (!config_hash.empty()) header.emplace_back("config_hash");
  CsvWriter csv(out, std::move(header));
  for (const auto& r : report.rows) {
    csv.field(to_string(r.id))
        .field(static_cast<std::uint64_t>(r.grid_size))
        .field(r.worst_slack)
        .field(std::string_view(r.worst_point_string()))
        .field(r.passed)
        .field(r.flagged)
        .field(std::string_view(r.note));
    if (!config_hash.empty()) csv.field(config_hash);
    csv.end_row();
  }
}

}  // namespace lastiter
