#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"

namespace lastiter::cli {

int main_entry(int argc, char** argv) {
  CLI::App app{"lastiter: SGD last-iterate bounds, lemma checks and Monte Carlo sweeps"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  std::optional<unsigned> workers;
  bool deterministic = false;
  bool dump_seeds = false;
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--workers", workers, "Worker threads (default: LASTITER_WORKERS or 1)");
  app.add_flag("--deterministic-output", deterministic, "Zero the timestamp in reports");
  app.add_flag("--dump-seeds", dump_seeds, "Also write per-seed gaps");

  std::string config;
  auto* run = app.add_subcommand("run", "Estimate one parameter point and compare to its bounds");
  run->add_option("--config", config, "Experiment config (JSON)")->required();
  run->fallthrough();

  auto* sweep = app.add_subcommand("sweep", "Estimate a grid of parameter points");
  sweep->add_option("--config", config, "Sweep config (JSON)")->required();
  sweep->fallthrough();

  BoundArgs bargs;
  auto* bound = app.add_subcommand("bound", "Evaluate the closed-form bounds");
  bound->add_option("--gamma", bargs.gamma, "Step size");
  bound->add_option("--C", bargs.C, "Schedule constant C (gamma = 1/(C L T^beta))");
  bound->add_option("--beta", bargs.beta, "Schedule exponent (default 0.5)");
  bound->add_option("--L", bargs.L, "Smoothness constant")->required();
  bound->add_option("--D-sq", bargs.D_sq, "Squared initial distance")->required();
  bound->add_option("--sigma-star-sq", bargs.sigma_star_sq, "Solution gradient variance")
      ->required();
  bound->add_option("--T", bargs.T, "Horizon")->required();
  bound->add_option("--epsilon", bargs.epsilon, "Target accuracy for the complexity horizon");
  bound->fallthrough();

  std::optional<std::string> lemma;
  auto* lemmas = app.add_subcommand("verify-lemmas", "Run the inequality battery");
  lemmas->add_option("--config", config, "Battery config (JSON); defaults when omitted");
  lemmas->add_option("--lemma", lemma, "Run a single lemma_id");
  lemmas->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  Options options;
  options.out_dir = out_dir;
  options.deterministic_output = deterministic;
  options.dump_seeds = dump_seeds;
  try {
    options.workers = resolve_workers(workers, std::getenv("LASTITER_WORKERS"));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }

  if (*run) return cmd_run(config, options, std::cerr);
  if (*sweep) return cmd_sweep(config, options, std::cerr);
  if (*bound) return cmd_bound(bargs, options, app.count("--out") > 0, std::cout);
  return cmd_verify_lemmas(config.empty() ? std::nullopt
                                          : std::optional<std::filesystem::path>(config),
                           lemma, options, std::cerr);
}

}  // namespace lastiter::cli
