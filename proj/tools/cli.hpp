#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lastiter/errors.hpp"
#include "lastiter/lemma_lab.hpp"
#include "lastiter/montecarlo.hpp"

namespace lastiter::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolated = 2;

/// Every problem found while validating a config, one entry per field.
class ConfigError : public PreconditionError {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct Options {
  std::filesystem::path out_dir = ".";
  unsigned workers = 1;
  bool deterministic_output = false;
  bool dump_seeds = false;
};

/// --workers wins, then LASTITER_WORKERS, then 1. Throws PreconditionError on
/// a malformed or zero value.
unsigned resolve_workers(std::optional<unsigned> flag, const char* env_value);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Fully validated single-point experiment with its problem materialized.
struct RunExperiment {
  ProblemSpec problem_spec;
  std::optional<GeneratedProblem> problem;
  RunConfig run;
  std::uint64_t n_seeds = 1000;
  std::uint64_t base_seed = 0;
  MinibatchSmoothness minibatch_smoothness = MinibatchSmoothness::as_printed;
  /// Constants the run and its bounds use (effective constants for b > 1).
  double L = 0.0;
  double sigma_sq = 0.0;
  double D_sq = 0.0;
  double gamma = 0.0;
  nlohmann::json resolved;
  std::string config_hash;
};

/// {"problem": {...}, "run": {"T", "schedule", "b"?, "x0"?, "n_seeds"?,
/// "base_seed"?, "minibatch_smoothness"?}}. Throws ConfigError listing every
/// violated field.
RunExperiment load_run_config(const nlohmann::json& doc);

struct SweepExperiment {
  SweepSpec spec;
  nlohmann::json resolved;
  std::string config_hash;
};

/// {"problems": [...], "sweep": {"T_grid", "schedules", "b_grid"?, "n_seeds"?,
/// "base_seed"?, "x0"?, "minibatch_smoothness"?}}.
SweepExperiment load_sweep_config(const nlohmann::json& doc);

struct LemmaExperiment {
  LemmaBatteryConfig battery;
  nlohmann::json resolved;
  std::string config_hash;
};

/// A battery document (see battery_from_json); null selects the defaults.
LemmaExperiment load_lemma_config(const nlohmann::json& doc);

struct BoundArgs {
  std::optional<double> gamma;
  std::optional<double> C;
  std::optional<double> beta;
  double L = 0.0;
  double D_sq = 0.0;
  double sigma_star_sq = 0.0;
  std::int64_t T = 0;
  std::optional<double> epsilon;
};

int cmd_run(const std::filesystem::path& config_path, const Options& options, std::ostream& log);
int cmd_sweep(const std::filesystem::path& config_path, const Options& options, std::ostream& log);
int cmd_bound(const BoundArgs& args, const Options& options, bool write_file, std::ostream& out);
int cmd_verify_lemmas(const std::optional<std::filesystem::path>& config_path,
                      const std::optional<std::string>& only, const Options& options,
                      std::ostream& log);

/// Parses argv and dispatches; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace lastiter::cli
