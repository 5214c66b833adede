#pragma once

#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "lastiter/problems.hpp"

namespace lastiter {

/// A problem stored as a full document (see problem_io.hpp). Documents without
/// a certificate block are certified on load: closed form when every component
/// is least squares, numerically otherwise.
struct DocumentSpec {
  nlohmann::json document;
  double tolerance = kDefaultCertificationTolerance;
  std::int64_t iter_cap = kDefaultCertificationIterCap;
};

/// Declarative problem description used by experiment configs:
///   {"generator": "least_squares", "n", "d", "rows"?, "spread", "seed", "tol"?}
///   {"generator": "logistic", "n", "d", "seed", "tol"?, "iter_cap"?}
///   {"generator": "document", "document": {...}}
///   {"generator": "file", "path": "problem.json"}
/// An optional "id" names the problem in sweep output.
struct ProblemSpec {
  std::string id;
  std::variant<LeastSquaresSpec, LogisticSpec, DocumentSpec> source;
};

/// Throws PreconditionError describing the first malformed field.
ProblemSpec problem_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProblemSpec& spec);

GeneratedProblem materialize(const ProblemSpec& spec);
GeneratedProblem certify_document(const DocumentSpec& spec);

}  // namespace lastiter
