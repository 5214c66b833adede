#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "lastiter/bounds.hpp"
#include "lastiter/csv.hpp"

using namespace lastiter;
using namespace lastiter::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("lastiter_" + std::string(info->test_suite_name()) + "_" + info->name() + "_" +
             std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const json& doc) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json small_run() {
  return {{"problem",
           {{"id", "ls"}, {"generator", "least_squares"}, {"n", 8}, {"d", 2}, {"spread", 1.0}, {"seed", 4}}},
          {"run",
           {{"T", 50},
            {"schedule", {{"kind", "polynomial"}, {"C", 2}, {"beta", 0.5}}},
            {"n_seeds", 64},
            {"base_seed", 3}}}};
}

json small_sweep() {
  return {{"problems",
           {{{"id", "a"}, {"generator", "least_squares"}, {"n", 6}, {"d", 2}, {"spread", 1.0}, {"seed", 1}},
            {{"id", "b"}, {"generator", "logistic"}, {"n", 8}, {"d", 2}, {"seed", 2}}}},
          {"sweep",
           {{"T_grid", {10, 40}},
            {"schedules", {{{"kind", "polynomial"}}}},
            {"b_grid", {1, 3}},
            {"n_seeds", 40},
            {"base_seed", 7}}}};
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "lastiter");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  return main_entry(static_cast<int>(args.size()), argv.data());
}

bool mentions(const ConfigError& e, const std::string& needle) {
  for (const auto& i : e.issues())
    if (i.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Workers, Resolution) {
  EXPECT_EQ(resolve_workers(std::nullopt, nullptr), 1u);
  EXPECT_EQ(resolve_workers(std::nullopt, "4"), 4u);
  EXPECT_EQ(resolve_workers(2u, "4"), 2u);
  EXPECT_THROW(resolve_workers(std::nullopt, "zero"), PreconditionError);
  EXPECT_THROW(resolve_workers(std::nullopt, "0"), PreconditionError);
  EXPECT_THROW(resolve_workers(0u, nullptr), PreconditionError);
}

TEST(RunConfigLoad, Resolves) {
  const RunExperiment ex = load_run_config(small_run());
  EXPECT_EQ(ex.run.horizon, 50);
  EXPECT_EQ(ex.n_seeds, 64u);
  EXPECT_EQ(ex.L, ex.problem->problem.max_smoothness());
  EXPECT_DOUBLE_EQ(ex.gamma, 1.0 / (2.0 * ex.L * std::sqrt(50.0)));
  EXPECT_EQ(ex.config_hash.size(), 16u);
  EXPECT_EQ(load_run_config(small_run()).resolved, ex.resolved);
}

TEST(RunConfigLoad, GammaLOneNamesPrecondition) {
  json doc = small_run();
  const RunExperiment ok = load_run_config(doc);
  doc["run"]["schedule"] = {{"kind", "constant"}, {"gamma", 1.0 / ok.L}};
  try {
    load_run_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e, "gamma*L < 1")) << e.what();
  }
}

TEST(RunConfigLoad, ShortHorizonNamesRequirement) {
  json doc = small_run();
  doc["run"]["T"] = 2;
  try {
    load_run_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e, "T >= 3")) << e.what();
  }
}

TEST(RunConfigLoad, ListsEveryIssue) {
  json doc = small_run();
  doc["run"]["T"] = 2;
  doc["run"]["n_seeds"] = 1;
  doc["run"]["colour"] = "red";
  doc["run"]["minibatch_smoothness"] = "sideways";
  try {
    load_run_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.issues().size(), 4u) << e.what();
    EXPECT_TRUE(mentions(e, "run.colour"));
    EXPECT_TRUE(mentions(e, "run.n_seeds"));
  }
}

TEST(RunConfigLoad, MinibatchUsesEffectiveConstants) {
  json doc = small_run();
  doc["run"]["b"] = 4;
  const RunExperiment ex = load_run_config(doc);
  const auto ec = effective_constants(ex.problem->problem, 4, ex.problem->certificate);
  EXPECT_EQ(ex.L, ec.L_b);
  EXPECT_EQ(ex.sigma_sq, ec.sigma_b_sq);
  doc["run"]["b"] = 9;
  EXPECT_THROW(load_run_config(doc), ConfigError);
}

TEST(CmdRun, ReportBoundsMatchBoundsModule) {
  TempDir dir;
  const auto cfg = dir.write("run.json", small_run());
  std::ostringstream log;
  Options opt;
  opt.out_dir = dir.path();
  ASSERT_EQ(cmd_run(cfg, opt, log), kExitOk) << log.str();

  const json report = json::parse(slurp(dir.path() / "run_report.json"));
  const RunExperiment ex = load_run_config(small_run());
  BoundInputs in;
  in.gamma = ex.gamma;
  in.L = ex.L;
  in.D_sq = ex.D_sq;
  in.sigma_star_sq = ex.sigma_sq;
  in.T = 50;
  in.C = 2.0;
  in.beta = 0.5;
  const BoundReport expected = build_bound_report(in);
  EXPECT_EQ(report["bounds"], json::parse(to_json(expected).dump()));
  EXPECT_EQ(report["bounds"]["theorem1"].get<double>(), expected.theorem1);
  EXPECT_EQ(report["config_hash"], ex.config_hash);
  EXPECT_EQ(report["estimate"]["n_seeds"], 64);
  EXPECT_TRUE(report["satisfied"].get<bool>());
  EXPECT_FALSE(fs::exists(dir.path() / "run_seeds.csv"));
}

TEST(CmdRun, InvalidConfigExitsOne) {
  TempDir dir;
  json doc = small_run();
  doc["run"]["schedule"] = {{"kind", "constant"}, {"gamma", 1e6}};
  const auto cfg = dir.write("run.json", doc);
  std::ostringstream log;
  Options opt;
  opt.out_dir = dir.path();
  EXPECT_EQ(cmd_run(cfg, opt, log), kExitError);
  EXPECT_NE(log.str().find("gamma*L < 1"), std::string::npos) << log.str();
  EXPECT_FALSE(fs::exists(dir.path() / "run_report.json"));

  doc = small_run();
  doc["run"]["T"] = 2;
  std::ostringstream log2;
  EXPECT_EQ(cmd_run(dir.write("run2.json", doc), opt, log2), kExitError);
  EXPECT_NE(log2.str().find("T >= 3"), std::string::npos) << log2.str();

  std::ostringstream log3;
  EXPECT_EQ(cmd_run(dir.path() / "missing.json", opt, log3), kExitError);
}

TEST(CmdRun, DumpSeedsWritesEveryGap) {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path();
  opt.dump_seeds = true;
  std::ostringstream log;
  ASSERT_EQ(cmd_run(dir.write("run.json", small_run()), opt, log), kExitOk);
  const auto rows = parse_csv(slurp(dir.path() / "run_seeds.csv"));
  ASSERT_EQ(rows.size(), 65u);
  EXPECT_EQ(rows[1][0], "3");
  EXPECT_EQ(rows[64][0], "66");
}

TEST(CmdSweep, WritesTablesAndSlopes) {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path();
  std::ostringstream log;
  ASSERT_EQ(cmd_sweep(dir.write("sweep.json", small_sweep()), opt, log), kExitOk) << log.str();
  const auto table = parse_csv(slurp(dir.path() / "sweep.csv"));
  EXPECT_EQ(table.size(), 1u + 2u * 2u * 2u);
  const auto plot = parse_csv(slurp(dir.path() / "sweep_plot.csv"));
  EXPECT_EQ(plot.size(), table.size());
  const json doc = json::parse(slurp(dir.path() / "sweep.json"));
  EXPECT_EQ(doc["rows"].size(), 8u);
  EXPECT_EQ(doc["loglog_slopes"].size(), 4u);
  EXPECT_EQ(doc["seeds"]["last_seed"], 46);
  EXPECT_EQ(doc["tool"], "lastiter");
}

TEST(CmdSweep, InvalidCases) {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path();

  json doc = small_sweep();
  doc["sweep"]["T_grid"] = {2, 10};
  std::ostringstream log1;
  EXPECT_EQ(cmd_sweep(dir.write("a.json", doc), opt, log1), kExitError);
  EXPECT_NE(log1.str().find("T >= 3"), std::string::npos) << log1.str();

  doc = small_sweep();
  doc["sweep"]["T_grid"] = json::array();
  std::ostringstream log2;
  EXPECT_EQ(cmd_sweep(dir.write("b.json", doc), opt, log2), kExitError);

  // gamma*L >= 1 is detected per row; the sweep finishes and reports it.
  doc = small_sweep();
  doc["sweep"]["schedules"] = {{{"kind", "constant"}, {"gamma", 1e6}}};
  std::ostringstream log3;
  EXPECT_EQ(cmd_sweep(dir.write("c.json", doc), opt, log3), kExitError);
  EXPECT_NE(log3.str().find("gamma*L < 1"), std::string::npos) << log3.str();
  EXPECT_EQ(parse_csv(slurp(dir.path() / "sweep.csv")).size(), 9u);
}

TEST(CmdBound, TableAndFiles) {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path();
  BoundArgs args;
  args.C = 2.0;
  args.L = 1.0;
  args.D_sq = 1.0;
  args.sigma_star_sq = 0.0;
  args.T = 100;
  args.epsilon = 18.0;
  std::ostringstream out;
  ASSERT_EQ(cmd_bound(args, opt, true, out), kExitOk) << out.str();
  EXPECT_NE(out.str().find("corollary_sqrt_c2"), std::string::npos);
  const json doc = json::parse(slurp(dir.path() / "bound.json"));
  EXPECT_NEAR(doc["report"]["corollary_sqrt_c2"].get<double>(), 1.7, 1e-15);
  EXPECT_EQ(doc["report"]["complexity_T"], 14);
  const auto rows = parse_csv(slurp(dir.path() / "bound.csv"));
  ASSERT_GT(rows.size(), 1u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"quantity", "value", "config_hash"}));
  bool saw_phi = false;
  for (const auto& r : rows)
    if (r[0] == "phi") saw_phi = std::stod(r[1]) == phi(0.05, 1.0);
  EXPECT_TRUE(saw_phi);
}

TEST(CmdBound, ValidationExitsOne) {
  Options opt;
  BoundArgs args;
  args.L = 1.0;
  args.T = 10;
  std::ostringstream out;
  EXPECT_EQ(cmd_bound(args, opt, false, out), kExitError);  // neither gamma nor C
  args.gamma = 1.0;
  std::ostringstream out2;
  EXPECT_EQ(cmd_bound(args, opt, false, out2), kExitError);  // gamma*L = 1
  args.gamma = 0.5;
  args.T = 2;
  std::ostringstream out3;
  EXPECT_EQ(cmd_bound(args, opt, false, out3), kExitError);
  EXPECT_NE(out3.str().find("T >= 3"), std::string::npos);
}

TEST(CmdLemmas, DefaultBatteryPasses) {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path();
  std::ostringstream log;
  EXPECT_EQ(cmd_verify_lemmas(std::nullopt, std::nullopt, opt, log), kExitOk) << log.str();
  const auto rows = parse_csv(slurp(dir.path() / "lemmas.csv"));
  EXPECT_EQ(rows.size(), all_lemmas().size() + 1);
  EXPECT_NE(log.str().find("FLAG exponent_boundary"), std::string::npos);
  EXPECT_EQ(log.str().find("FAIL"), std::string::npos) << log.str();
}

TEST(CmdLemmas, FilterAndValidation) {
  TempDir dir;
  Options opt;
  opt.out_dir = dir.path();
  std::ostringstream log;
  EXPECT_EQ(cmd_verify_lemmas(std::nullopt, std::string("exp_convexity"), opt, log), kExitOk);
  const auto rows = parse_csv(slurp(dir.path() / "lemmas.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][0], "exp_convexity");

  std::ostringstream log2;
  EXPECT_EQ(cmd_verify_lemmas(std::nullopt, std::string("nonsense"), opt, log2), kExitError);

  std::ostringstream log3;
  const auto cfg = dir.write("lemmas.json", {{"grids", {{"gautschi_x", json::array()}}}});
  EXPECT_EQ(cmd_verify_lemmas(cfg, std::nullopt, opt, log3), kExitError);
}

TEST(MainEntry, UsageErrorsExitOne) {
  EXPECT_EQ(invoke({}), kExitError);
  EXPECT_EQ(invoke({"frobnicate"}), kExitError);
  EXPECT_EQ(invoke({"run"}), kExitError);
}

TEST(MainEntry, DeterministicAcrossWorkerCounts) {
  TempDir dir;
  const auto run_cfg = dir.write("run.json", small_run());
  const auto sweep_cfg = dir.write("sweep.json", small_sweep());
  for (const char* w : {"1", "3"}) {
    const std::string out = (dir.path() / ("w" + std::string(w))).string();
    ASSERT_EQ(invoke({"--deterministic-output", "--dump-seeds", "--workers", w, "--out", out, "run",
                      "--config", run_cfg.string()}),
              kExitOk);
    ASSERT_EQ(invoke({"--deterministic-output", "--dump-seeds", "--workers", w, "--out", out, "sweep",
                      "--config", sweep_cfg.string()}),
              kExitOk);
    ASSERT_EQ(invoke({"--deterministic-output", "--workers", w, "--out", out, "verify-lemmas",
                      "--lemma", "weight_sum_c2"}),
              kExitOk);
  }
  for (const char* f : {"run_report.json", "run_seeds.csv", "sweep.csv", "sweep_plot.csv",
                        "sweep.json", "sweep_seeds.csv", "lemmas.csv", "lemmas.json"}) {
    const std::string a = slurp(dir.path() / "w1" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir.path() / "w3" / f)) << f;
  }
}

TEST(MainEntry, TimestampOnlyDiffersWithoutFlag) {
  TempDir dir;
  const auto run_cfg = dir.write("run.json", small_run());
  ASSERT_EQ(invoke({"--out", (dir.path() / "a").string(), "run", "--config", run_cfg.string()}), kExitOk);
  json doc = json::parse(slurp(dir.path() / "a" / "run_report.json"));
  EXPECT_NE(doc["timestamp"], "1970-01-01T00:00:00Z");
}
