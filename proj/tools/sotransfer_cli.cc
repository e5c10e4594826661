#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sotransfer/common.h"
#include "sotransfer/harness/run.h"
#include "sotransfer/harness/spec.h"
#include "sotransfer/policies/policy.h"
#include "sotransfer/ppo/budget.h"
#include "sotransfer/ppo/rollout_env.h"

namespace {

using namespace sotransfer;
using namespace sotransfer::harness;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void AddCommon(CLI::App* cmd, Common& common) {
  cmd->add_option("-c,--config", common.config, "experiment config file");
  cmd->add_option("--set", common.overrides, "section.key=value override (repeatable)");
  cmd->add_flag("-q,--quiet", common.quiet, "no progress output");
}

ExperimentSpec Resolve(const Common& common, bool needs_file = true) {
  ExperimentSpec spec;
  if (!common.config.empty()) {
    spec = LoadConfig(common.config);
  } else {
    Require(!needs_file, "--config is required");
    spec.methods = {Method::kSoCma};
  }
  for (const std::string& kv : common.overrides) {
    const auto eq = kv.find('=');
    Require(eq != std::string::npos, "--set expects section.key=value, got '" + kv + "'");
    SetKey(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  spec.Validate();
  return spec;
}

Logger MakeLogger(const Common& common) {
  if (common.quiet) return {};
  const auto start = std::chrono::steady_clock::now();
  return [start](const std::string& msg) {
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::fprintf(stderr, "[%7.1fs] %s\n", s, msg.c_str());
  };
}

int Run(int argc, char** argv) {
  CLI::App app{"Strategy-optimization policy transfer experiments"};
  app.require_subcommand(1);

  Common common;

  auto* train = app.add_subcommand("train-source", "train or load the source policies");
  AddCommon(train, common);
  std::vector<std::string> families;
  train->add_option("--families", families,
                    "universal, robust, hist, osi, oracle (default: what the methods need)")
      ->delimiter(',');

  auto* transfer = app.add_subcommand("transfer", "run transfer methods under the budget");
  AddCommon(transfer, common);
  std::vector<std::string> methods;
  transfer
      ->add_option("-m,--method", methods,
                   "so-cma | so-ba | so-mb | finetune-robust | finetune-hist | "
                   "finetune-uposi | oracle | center")
      ->delimiter(',');

  auto* sweep = app.add_subcommand("sweep", "one experiment per value of a target key");
  AddCommon(sweep, common);
  std::string sweep_parameter;
  std::vector<std::string> sweep_values;
  sweep->add_option("--parameter", sweep_parameter, "[target] key to vary");
  sweep->add_option("--values", sweep_values, "comma list of values")->delimiter(',');

  auto* eval = app.add_subcommand("eval", "evaluate a trained policy in the target");
  AddCommon(eval, common);
  std::string policy_kind = "strategy";
  std::vector<double> mu;
  int episodes = 0;
  std::uint64_t seed = 0;
  bool stochastic = false;
  eval->add_option("--policy", policy_kind, "strategy | robust | hist | uposi | oracle")
      ->check(CLI::IsMember({"strategy", "robust", "hist", "uposi", "oracle"}));
  eval->add_option("--mu", mu, "normalized mu for --policy strategy (default: center)")
      ->delimiter(',');
  eval->add_option("--episodes", episodes, "episodes (default: experiment.eval_episodes)");
  eval->add_option("--seed", seed, "seed (default: experiment.base_seed)");
  eval->add_flag("--stochastic", stochastic, "sample actions");

  auto* report = app.add_subcommand("report", "merge experiment tables");
  std::vector<std::string> report_dirs;
  std::string report_out = "report";
  report->add_option("dirs", report_dirs, "experiment directories")->required();
  report->add_option("-o,--out", report_out, "output prefix");

  auto* config_cmd = app.add_subcommand("config", "print the resolved config with all defaults");
  AddCommon(config_cmd, common);
  bool with_help = false;
  config_cmd->add_flag("--help-keys", with_help, "list every key with its meaning");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) {
      ExperimentSpec spec = Resolve(common);
      SourceNeeds needs = families.empty() ? NeedsFor(spec.methods) : SourceNeeds{};
      bool oracle = false;
      for (const std::string& f : families) {
        if (f == "universal") needs.universal = true;
        else if (f == "robust") needs.robust = true;
        else if (f == "hist") needs.hist = true;
        else if (f == "osi") needs.osi = true;
        else if (f == "oracle") oracle = true;
        else throw ConfigError("unknown family '" + f + "'");
      }
      const Logger log = MakeLogger(common);
      for (int i = 0; i < spec.seeds; ++i) {
        const std::uint64_t s = spec.base_seed + i;
        const SourcePolicies sources = PrepareSources(spec, s, needs, log);
        if (oracle) PrepareOracle(spec, s, log);
        std::cout << "seed " << s << ": " << sources.directory << "\n";
      }
    } else if (*transfer) {
      ExperimentSpec spec = Resolve(common);
      if (!methods.empty()) {
        spec.methods.clear();
        for (const std::string& m : methods) spec.methods.push_back(ParseMethod(m));
        spec.Validate();
      }
      const ExperimentResult result = RunExperiment(spec, MakeLogger(common));
      int failed = 0;
      for (const MethodRun& run : result.runs) failed += run.failed ? 1 : 0;
      std::cout << "results in " << result.directory << "\n";
      if (failed > 0) {
        std::cerr << failed << " method run(s) failed; see run.json files\n";
        return kExitRuntime;
      }
    } else if (*sweep) {
      ExperimentSpec spec = Resolve(common);
      if (!sweep_parameter.empty()) spec.sweep_parameter = sweep_parameter;
      if (!sweep_values.empty()) spec.sweep_values = sweep_values;
      RunSweep(spec, MakeLogger(common));
      std::cout << "sweep table in " << spec.output_dir << "/sweep.csv\n";
    } else if (*eval) {
      ExperimentSpec spec = Resolve(common);
      const std::uint64_t s = seed ? seed : spec.base_seed;
      const int n = episodes > 0 ? episodes : spec.eval_episodes;
      const Logger log = MakeLogger(common);
      ppo::FixedEnv env(spec.TargetConfig(), spec.TargetDynamics());
      SourceNeeds needs;
      needs.universal = policy_kind == "strategy" || policy_kind == "uposi";
      needs.robust = policy_kind == "robust";
      needs.hist = policy_kind == "hist";
      needs.osi = policy_kind == "uposi";
      const SourcePolicies sources = PrepareSources(spec, s, needs, log);
      policies::Policy pi = [&] {
        if (policy_kind == "robust") return policies::MakeRobust(sources.robust);
        if (policy_kind == "hist") return policies::MakeHist(sources.hist, spec.history);
        if (policy_kind == "uposi") return policies::MakeUposi(sources.universal, sources.osi);
        if (policy_kind == "oracle") return policies::MakeRobust(PrepareOracle(spec, s, log));
        Vec m = Vec::Constant(spec.dim_mu, 0.5);
        if (!mu.empty()) m = Eigen::Map<const Vec>(mu.data(), static_cast<Eigen::Index>(mu.size()));
        return policies::MakeStrategy(sources.universal, m);
      }();
      Rng rng(MixSeed(s, 6));
      const EvalStats stats = EvaluatePolicy(pi, env, n, !stochastic, rng);
      std::printf("mean %.3f std %.3f episodes %d\n", stats.mean, stats.std, n);
    } else if (*report) {
      MergeReports(report_dirs, report_out);
      std::cout << report_out << "_final.csv " << report_out << "_curves.csv\n";
    } else if (*config_cmd) {
      const ExperimentSpec spec = Resolve(common, false);
      if (with_help) {
        for (const KeyDoc& k : ConfigKeys()) {
          std::printf("%-12s %-24s %s\n", k.section.c_str(), k.key.c_str(), k.help.c_str());
        }
      } else {
        std::cout << EmitConfig(spec);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return Run(argc, argv); }
