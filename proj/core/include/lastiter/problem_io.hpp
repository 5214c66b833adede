#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "lastiter/problems.hpp"

namespace lastiter {

inline constexpr const char* kProblemSchema = "lastiter.problem/1";

/// Problem document:
///   { "schema", "dimension", "weights": [...],
///     "components": [ {"kind": "least_squares", "A": [[row]...], "b": [...], "smoothness"}
///                   | {"kind": "logistic", "a": [...], "label": +-1, "smoothness"} ],
///     "L", "L_f",
///     "certificate": { "x_star", "inf_f", "sigma_star_sq", "grad_norm_residual",
///                      "tolerance", "provenance" } }
/// Doubles are written in shortest round-trip form, so a reload reproduces
/// every coefficient bit for bit.
nlohmann::json to_json(const FiniteSumProblem& problem, const SolutionCertificate& cert);
nlohmann::json to_json(const FiniteSumProblem& problem);
nlohmann::json to_json(const SolutionCertificate& cert);

FiniteSumProblem problem_from_json(const nlohmann::json& doc);
/// Reads the certificate block and re-checks it against `problem`:
/// dimension, ||grad f(x*)|| <= tolerance, and sigma_star_sq.
SolutionCertificate certificate_from_json(const nlohmann::json& doc,
                                          const FiniteSumProblem& problem);
GeneratedProblem generated_from_json(const nlohmann::json& doc);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a over a string.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
/// FNV-1a of the compact canonical dump (object keys sorted).
std::uint64_t json_fingerprint(const nlohmann::json& doc);
std::string hex64(std::uint64_t value);

}  // namespace lastiter
