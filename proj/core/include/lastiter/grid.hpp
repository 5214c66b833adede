#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

namespace lastiter {

/// Declarative parameter grid, loaded from config:
///   [v0, v1, ...]                                   explicit values
///   {"type": "linear", "min", "max", "count"}       inclusive endpoints
///   {"type": "log",    "min", "max", "count"}       geometric, min > 0
///   {"type": "range",  "min", "max", "step"}        min, min+step, ... <= max
struct GridSpec {
  enum class Kind { values, linear, log, range };
  Kind kind = Kind::values;
  std::vector<double> values;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
  double step = 1.0;

  static GridSpec explicit_values(std::vector<double> v);
  static GridSpec linear(double lo, double hi, std::size_t count);
  static GridSpec log(double lo, double hi, std::size_t count);
  static GridSpec range(double lo, double hi, double step);

  /// Throws PreconditionError for empty or malformed grids.
  std::vector<double> expand() const;
};

std::vector<double> linspace(double lo, double hi, std::size_t count);
std::vector<double> logspace(double lo, double hi, std::size_t count);

GridSpec grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GridSpec& grid);

}  // namespace lastiter
