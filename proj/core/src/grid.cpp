#include "lastiter/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lastiter/errors.hpp"

namespace lastiter {

GridSpec GridSpec::explicit_values(std::vector<double> v) {
  GridSpec g;
  g.kind = Kind::values;
  g.values = std::move(v);
  return g;
}

GridSpec GridSpec::linear(double lo, double hi, std::size_t count) {
  GridSpec g;
  g.kind = Kind::linear;
  g.min = lo;
  g.max = hi;
  g.count = count;
  return g;
}

GridSpec GridSpec::log(double lo, double hi, std::size_t count) {
  GridSpec g = linear(lo, hi, count);
  g.kind = Kind::log;
  return g;
}

GridSpec GridSpec::range(double lo, double hi, double step) {
  GridSpec g;
  g.kind = Kind::range;
  g.min = lo;
  g.max = hi;
  g.step = step;
  return g;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double span = hi - lo;
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = lo + span * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  std::vector<double> exps = linspace(std::log(lo), std::log(hi), count);
  for (double& e : exps) e = std::exp(e);
  if (!exps.empty()) {
    exps.front() = lo;
    exps.back() = hi;
  }
  return exps;
}

std::vector<double> GridSpec::expand() const {
  std::vector<double> out;
  switch (kind) {
    case Kind::values:
      out = values;
      break;
    case Kind::linear:
      if (!(min <= max)) throw PreconditionError("linear grid needs min <= max");
      out = linspace(min, max, count);
      break;
    case Kind::log:
      if (!(min > 0.0 && min <= max)) throw PreconditionError("log grid needs 0 < min <= max");
      out = logspace(min, max, count);
      break;
    case Kind::range: {
      if (!(step > 0.0)) throw PreconditionError("range grid needs step > 0");
      if (!(min <= max)) throw PreconditionError("range grid needs min <= max");
      const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
      out.reserve(n);
      for (std::size_t k = 0; k < n; ++k)
        out.push_back(std::min(min + step * static_cast<double>(k), max));
      break;
    }
  }
  if (out.empty()) throw PreconditionError("grid is empty");
  for (double v : out) {
    if (!std::isfinite(v)) throw PreconditionError("grid contains a non-finite value");
  }
  return out;
}

GridSpec grid_from_json(const nlohmann::json& j) {
  if (j.is_array()) {
    std::vector<double> v;
    for (const auto& e : j) {
      if (!e.is_number()) throw PreconditionError("grid values must be numbers");
      v.push_back(e.get<double>());
    }
    if (v.empty()) throw PreconditionError("grid is empty");
    return GridSpec::explicit_values(std::move(v));
  }
  if (!j.is_object()) throw PreconditionError("grid must be an array or an object");
  const std::string type = j.at("type").get<std::string>();
  if (type == "linear" || type == "log") {
    const auto count = j.at("count").get<std::int64_t>();
    if (count < 1) throw PreconditionError("grid count must be >= 1");
    const double lo = j.at("min").get<double>();
    const double hi = j.at("max").get<double>();
    return type == "linear" ? GridSpec::linear(lo, hi, static_cast<std::size_t>(count))
                            : GridSpec::log(lo, hi, static_cast<std::size_t>(count));
  }
  if (type == "range") {
    return GridSpec::range(j.at("min").get<double>(), j.at("max").get<double>(),
                           j.value("step", 1.0));
  }
  throw PreconditionError("unknown grid type '" + type + "'");
}

nlohmann::json to_json(const GridSpec& g) {
  switch (g.kind) {
    case GridSpec::Kind::values:
      return g.values;
    case GridSpec::Kind::linear:
      return {{"type", "linear"}, {"min", g.min}, {"max", g.max}, {"count", g.count}};
    case GridSpec::Kind::log:
      return {{"type", "log"}, {"min", g.min}, {"max", g.max}, {"count", g.count}};
    case GridSpec::Kind::range:
      return {{"type", "range"}, {"min", g.min}, {"max", g.max}, {"step", g.step}};
  }
  return nullptr;
}

}  // namespace lastiter
