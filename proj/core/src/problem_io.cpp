#include "lastiter/problem_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "lastiter/errors.hpp"

namespace lastiter {

using nlohmann::json;

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw PreconditionError("expected a JSON array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw PreconditionError("expected a JSON array of numbers");
    v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  }
  return v;
}

namespace {

json component_to_json(const ComponentFunction& c) {
  json out;
  if (const auto* ls = std::get_if<LeastSquaresTerm>(&c.term())) {
    out["kind"] = "least_squares";
    json rows = json::array();
    for (Eigen::Index r = 0; r < ls->A.rows(); ++r) {
      rows.push_back(vector_to_json(ls->A.row(r).transpose()));
    }
    out["A"] = std::move(rows);
    out["b"] = vector_to_json(ls->b);
  } else {
    const auto& lg = std::get<LogisticTerm>(c.term());
    out["kind"] = "logistic";
    out["a"] = vector_to_json(lg.a);
    out["label"] = lg.label;
  }
  out["smoothness"] = c.smoothness();
  return out;
}

ComponentFunction component_from_json(std::size_t index, const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "least_squares") {
    const json& rows = j.at("A");
    if (!rows.is_array() || rows.empty()) throw PreconditionError("A must be a non-empty array");
    const Vector first = vector_from_json(rows[0]);
    Matrix A(static_cast<Eigen::Index>(rows.size()), first.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const Vector row = vector_from_json(rows[r]);
      if (row.size() != first.size()) throw PreconditionError("ragged matrix A");
      A.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return ComponentFunction(index, LeastSquaresTerm{std::move(A), vector_from_json(j.at("b"))});
  }
  if (kind == "logistic") {
    return ComponentFunction(index,
                             LogisticTerm{vector_from_json(j.at("a")), j.at("label").get<double>()});
  }
  throw PreconditionError("unknown component kind '" + kind + "'");
}

}  // namespace

json to_json(const FiniteSumProblem& problem) {
  json doc;
  doc["schema"] = kProblemSchema;
  doc["dimension"] = problem.dimension();
  json weights = json::array();
  for (double w : problem.weights()) weights.push_back(w);
  doc["weights"] = std::move(weights);
  json comps = json::array();
  for (const auto& c : problem.components()) comps.push_back(component_to_json(c));
  doc["components"] = std::move(comps);
  doc["L"] = problem.max_smoothness();
  doc["L_f"] = problem.mean_smoothness();
  return doc;
}

json to_json(const SolutionCertificate& cert) {
  return json{{"x_star", vector_to_json(cert.x_star)},
              {"inf_f", cert.inf_f},
              {"sigma_star_sq", cert.sigma_star_sq},
              {"grad_norm_residual", cert.grad_norm_residual},
              {"tolerance", cert.tolerance},
              {"provenance", std::string(to_string(cert.provenance))}};
}

json to_json(const FiniteSumProblem& problem, const SolutionCertificate& cert) {
  json doc = to_json(problem);
  doc["certificate"] = to_json(cert);
  return doc;
}

FiniteSumProblem problem_from_json(const json& doc) {
  if (doc.contains("schema") && doc.at("schema") != kProblemSchema)
    throw PreconditionError("unsupported problem schema " + doc.at("schema").dump());
  const json& comps = doc.at("components");
  if (!comps.is_array()) throw PreconditionError("components must be an array");
  std::vector<ComponentFunction> components;
  components.reserve(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    components.push_back(component_from_json(i, comps[i]));
  }
  std::vector<double> weights;
  if (doc.contains("weights")) weights = doc.at("weights").get<std::vector<double>>();
  FiniteSumProblem problem(std::move(components), std::move(weights));
  if (doc.contains("dimension") && doc.at("dimension").get<Eigen::Index>() != problem.dimension())
    throw PreconditionError("declared dimension does not match the components");
  return problem;
}

SolutionCertificate certificate_from_json(const json& doc, const FiniteSumProblem& problem) {
  const json& c = doc.contains("certificate") ? doc.at("certificate") : doc;
  SolutionCertificate cert;
  cert.x_star = vector_from_json(c.at("x_star"));
  if (cert.x_star.size() != problem.dimension())
    throw PreconditionError("certificate x_star has the wrong dimension");
  cert.inf_f = c.at("inf_f").get<double>();
  cert.sigma_star_sq = c.at("sigma_star_sq").get<double>();
  cert.grad_norm_residual = c.at("grad_norm_residual").get<double>();
  cert.tolerance = c.value("tolerance", kDefaultCertificationTolerance);
  cert.provenance = provenance_from_string(c.at("provenance").get<std::string>());

  const double residual = problem.gradient(cert.x_star).norm();
  if (residual > cert.tolerance) {
    std::ostringstream os;
    os << "certificate does not certify: ||grad f(x*)|| = " << residual << " > tolerance "
       << cert.tolerance;
    throw CertificationError(os.str(), residual, 0);
  }
  const double sigma = sigma_star_sq(problem, cert.x_star);
  if (std::abs(sigma - cert.sigma_star_sq) > 1e-9 * (1.0 + sigma))
    throw PreconditionError("certificate sigma_star_sq disagrees with the problem");
  return cert;
}

GeneratedProblem generated_from_json(const json& doc) {
  FiniteSumProblem problem = problem_from_json(doc);
  SolutionCertificate cert = certificate_from_json(doc, problem);
  return {std::move(problem), std::move(cert)};
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t json_fingerprint(const json& doc) {
  // nlohmann::json objects are std::map-backed, so dump() is key-sorted.
  return fnv1a64(doc.dump());
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace lastiter
