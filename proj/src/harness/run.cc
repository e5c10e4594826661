#include "sotransfer/harness/run.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "sotransfer/envs/env.h"
#include "sotransfer/envs/params.h"
#include "sotransfer/ppo/checkpoint.h"
#include "sotransfer/ppo/context.h"
#include "sotransfer/ppo/ppo.h"
#include "sotransfer/strategy/gp.h"
#include "sotransfer/strategy/model_based.h"
#include "sotransfer/strategy/search.h"

namespace sotransfer::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSaltUniversal = 1;
constexpr std::uint64_t kSaltRobust = 2;
constexpr std::uint64_t kSaltHist = 3;
constexpr std::uint64_t kSaltOsi = 4;
constexpr std::uint64_t kSaltOracle = 5;
constexpr std::uint64_t kSaltEval = 6;
constexpr std::uint64_t kSaltMethod = 100;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

void Say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json NumJson(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double NumFromJson(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::ofstream OpenOut(const std::string& path) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  return out;
}

void WriteText(const std::string& path, const std::string& text) {
  OpenOut(path) << text;
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void SaveNet(const std::string& path, const ppo::ActorCritic& ac, const std::string& kind,
             const std::string& hash) {
  ppo::CheckpointHeader h;
  h.policy_kind = kind;
  h.config_hash = hash;
  ppo::WriteJsonFile(path, {{"header", ppo::HeaderToJson(h)}, {"model", ppo::ToJson(ac)}});
}

std::shared_ptr<const ppo::ActorCritic> LoadNet(const std::string& path,
                                                const std::string& hash) {
  if (!fs::exists(path)) return nullptr;
  const json j = ppo::ReadJsonFile(path);
  if (ppo::HeaderFromJson(j.at("header")).config_hash != hash) return nullptr;
  return std::make_shared<const ppo::ActorCritic>(ppo::ActorCriticFromJson(j.at("model")));
}

// Lines of the canonical config that belong to `sections`.
std::string SectionText(const ExperimentSpec& spec, const std::vector<std::string>& sections) {
  std::istringstream in(EmitConfig(spec));
  std::string line, section, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    if (std::find(sections.begin(), sections.end(), section) != sections.end()) {
      out += section + "." + line + "\n";
    }
  }
  return out;
}

std::string OracleHash(const ExperimentSpec& spec, std::uint64_t seed) {
  return ppo::HexHash(
      ppo::Fnv1a(SourceHash(spec, seed) + SectionText(spec, {"target", "oracle"})));
}

std::vector<std::uint64_t> Seeds(const ExperimentSpec& spec) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < spec.seeds; ++i) seeds.push_back(spec.base_seed + i);
  return seeds;
}

std::string SeedDir(const std::string& root, std::uint64_t seed) {
  return root + "/seed_" + std::to_string(seed);
}

Vec CenterMu(int dim) { return Vec::Constant(dim, 0.5); }

// Best complete record evaluated within the first s samples.
const strategy::FitnessRecord* BestRecordAt(const strategy::SearchResult& r, std::int64_t s) {
  const strategy::FitnessRecord* best = nullptr;
  for (const auto& rec : r.records) {
    if (rec.samples <= s && !rec.truncated && (best == nullptr || rec.mean > best->mean)) {
      best = &rec;
    }
  }
  return best;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

json RunToJson(const MethodRun& run) {
  json rows = json::array();
  for (const CurveRow& r : run.curve) {
    rows.push_back({{"samples", r.samples},
                    {"used", r.used},
                    {"value", NumJson(r.value)},
                    {"eval_return", NumJson(r.eval_return)},
                    {"best_ever", NumJson(r.best_ever)},
                    {"latest", NumJson(r.latest)}});
  }
  json j = {{"method", MethodName(run.method)},
            {"seed", run.seed},
            {"failed", run.failed},
            {"error", run.error},
            {"final_return", NumJson(run.final_return)},
            {"curve", rows}};
  if (run.best_mu) j["best_mu"] = ppo::ToJson(*run.best_mu);
  return j;
}

MethodRun RunFromJson(const json& j) {
  MethodRun run;
  run.method = ParseMethod(j.at("method").get<std::string>());
  run.seed = j.at("seed").get<std::uint64_t>();
  run.failed = j.at("failed").get<bool>();
  run.error = j.at("error").get<std::string>();
  run.final_return = NumFromJson(j.at("final_return"));
  for (const json& r : j.at("curve")) {
    CurveRow row;
    row.samples = r.at("samples").get<std::int64_t>();
    row.used = r.at("used").get<std::int64_t>();
    row.value = NumFromJson(r.at("value"));
    row.eval_return = NumFromJson(r.at("eval_return"));
    row.best_ever = NumFromJson(r.at("best_ever"));
    row.latest = NumFromJson(r.at("latest"));
    run.curve.push_back(row);
  }
  if (j.contains("best_mu")) run.best_mu = ppo::VecFromJson(j.at("best_mu"));
  return run;
}

void WriteCurveCsv(const std::string& path, const std::vector<CurveRow>& curve) {
  std::ofstream out = OpenOut(path);
  out << "samples,used,return,eval_return,best_ever,latest\n";
  for (const CurveRow& r : curve) {
    out << r.samples << ',' << r.used << ',' << Num(r.value) << ',' << Num(r.eval_return)
        << ',' << Num(r.best_ever) << ',' << Num(r.latest) << '\n';
  }
}

void CopyCurves(const std::string& from, const std::string& to) {
  if (!fs::exists(from)) return;
  fs::create_directories(to);
  for (const auto& entry : fs::directory_iterator(from)) {
    const std::string ext = entry.path().extension().string();
    if (ext == ".csv" || entry.path().filename() == "osi_report.json") {
      fs::copy_file(entry.path(), fs::path(to) / entry.path().filename(),
                    fs::copy_options::overwrite_existing);
    }
  }
}

struct Stats {
  int n = 0;
  double mean = kNaN;
  double std = kNaN;
};

Stats Summarize(const std::vector<double>& values) {
  std::vector<double> finite;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  Stats s;
  s.n = static_cast<int>(finite.size());
  if (s.n > 0) {
    s.mean = Mean(finite);
    s.std = SampleStd(finite);
  }
  return s;
}

// Runs the search and fills the curve from its records.
void RunStrategySearch(const ExperimentSpec& spec, Method method,
                       const SourcePolicies& sources, ppo::FixedEnv& target,
                       ppo::FixedEnv& eval_env, std::uint64_t seed, Rng& rng,
                       const std::string& dir, MethodRun& run) {
  Require(sources.universal != nullptr, "strategy search needs the universal policy");
  std::unique_ptr<strategy::SearchResult> result;
  if (method == Method::kSoModelBased) {
    result = std::make_unique<strategy::ModelBasedResult>(strategy::SoModelBased(
        sources.universal, target, spec.TargetConfig(), spec.model_based, rng));
  } else {
    strategy::TargetObjective objective(sources.universal, target, spec.n_trials);
    result = std::make_unique<strategy::SearchResult>(
        method == Method::kSoCma ? strategy::SoCma(objective, spec.cma, rng)
                                 : strategy::SoBayes(objective, spec.bayes, rng));
  }
  strategy::WriteTraceCsv(dir + "/trace.csv", result->records);
  if (!result->log.empty()) {
    std::string text;
    for (const std::string& line : result->log) text += line + "\n";
    WriteText(dir + "/search_log.txt", text);
  }

  const int dim = sources.universal->InputSize() - eval_env.ObservationSize();
  std::map<const strategy::FitnessRecord*, double> evaluated;
  auto evaluate_best = [&](std::int64_t s) {
    const strategy::FitnessRecord* rec = BestRecordAt(*result, s);
    auto it = evaluated.find(rec);
    if (it != evaluated.end()) return it->second;
    policies::Policy pi = policies::MakeStrategy(sources.universal,
                                                 rec ? rec->mu : CenterMu(dim));
    Rng eval_rng(MixSeed(seed, kSaltEval));
    const double v = EvaluatePolicy(pi, eval_env, spec.eval_episodes, true, eval_rng).mean;
    evaluated[rec] = v;
    return v;
  };

  const std::int64_t used = target.budget()->used();
  for (std::int64_t s : Milestones(spec.budget, spec.milestone_every)) {
    CurveRow row;
    row.samples = s;
    row.used = std::min(s, used);
    const double best = result->BestAt(s);
    const double latest = result->LatestAt(s);
    row.best_ever = std::isfinite(best) ? best : kNaN;
    row.latest = std::isfinite(latest) ? latest : kNaN;
    row.value = row.best_ever;
    row.eval_return = evaluate_best(s);
    run.curve.push_back(row);
  }
  const strategy::FitnessRecord* final_rec = BestRecordAt(*result, spec.budget);
  run.best_mu = final_rec ? final_rec->mu : CenterMu(dim);
  run.final_return = run.curve.back().eval_return;
}

void RunFinetune(const ExperimentSpec& spec, Method method, const SourcePolicies& sources,
                 ppo::FixedEnv& target, ppo::FixedEnv& eval_env, std::uint64_t seed,
                 Rng& rng, const std::string& dir, MethodRun& run) {
  std::shared_ptr<const ppo::ActorCritic> base;
  std::unique_ptr<ppo::ContextBuilder> context;
  std::string kind;
  const int obs_dim = target.ObservationSize();
  switch (method) {
    case Method::kFinetuneRobust:
      base = sources.robust;
      context = std::make_unique<ppo::ObservationContext>(obs_dim);
      kind = "robust";
      break;
    case Method::kFinetuneHist:
      base = sources.hist;
      context = std::make_unique<ppo::HistoryContext>(obs_dim, spec.history);
      kind = "hist";
      break;
    default:
      Require(sources.osi != nullptr, "finetune-uposi needs the OSI model");
      base = sources.universal;
      context = std::make_unique<policies::OsiContext>(sources.osi);
      kind = "uposi";
      break;
  }
  Require(base != nullptr, MethodName(method) + " needs its source policy");
  ppo::ActorCritic ac = *base;
  ppo::SampleBudget& budget = *target.budget();

  auto evaluate = [&](const ppo::ActorCritic& net) {
    policies::Policy pi(kind, std::make_shared<const ppo::ActorCritic>(net),
                        context->Clone());
    Rng eval_rng(MixSeed(seed, kSaltEval));
    return EvaluatePolicy(pi, eval_env, spec.eval_episodes, true, eval_rng).mean;
  };

  const std::vector<std::int64_t> milestones = Milestones(spec.budget, spec.milestone_every);
  std::map<std::int64_t, CurveRow> rows;
  struct Pending {
    std::int64_t at;
    std::int64_t used;
    std::shared_ptr<const ppo::ActorCritic> snapshot;
  };
  std::vector<Pending> pending;
  auto record = [&](std::int64_t at, std::int64_t used, const ppo::ActorCritic& net) {
    CurveRow row;
    row.samples = at;
    row.used = used;
    row.eval_return = evaluate(net);
    row.value = row.eval_return;
    row.best_ever = kNaN;
    row.latest = kNaN;
    rows[at] = row;
  };
  for (std::int64_t s : milestones) {
    if (s >= spec.budget) continue;  // the final row is taken after training
    budget.AddMilestone(s, [&, s](std::int64_t) {
      if (spec.debit_evaluations) {
        pending.push_back({s, budget.used(), std::make_shared<const ppo::ActorCritic>(ac)});
      } else {
        record(s, budget.used(), ac);
      }
    });
  }
  auto flush = [&] {
    while (!pending.empty()) {
      std::vector<Pending> batch;
      batch.swap(pending);
      for (const Pending& p : batch) record(p.at, p.used, *p.snapshot);
    }
  };

  std::vector<ppo::IterationLog> log;
  try {
    log = ppo::Finetune(ac, *context, target, budget.remaining(), spec.finetune, rng,
                        [&](const ppo::IterationLog&, const ppo::ActorCritic&) { flush(); });
  } catch (const ppo::BudgetExhausted&) {
    // Only reachable when evaluations are debited.
  }
  flush();
  ppo::WriteTrainingCsv(dir + "/finetune.csv", log);

  const double final_value = evaluate(ac);
  for (std::int64_t s : milestones) {
    if (rows.count(s) == 0) {
      CurveRow row;
      row.samples = s;
      row.used = budget.used();
      row.eval_return = final_value;
      row.value = final_value;
      row.best_ever = kNaN;
      row.latest = kNaN;
      rows[s] = row;
    }
  }
  for (const auto& kv : rows) run.curve.push_back(kv.second);
  run.final_return = final_value;
}

}  // namespace

double SampleStd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<std::int64_t> Milestones(std::int64_t budget, std::int64_t every) {
  Require(budget > 0 && every > 0, "milestones: budget and spacing must be > 0");
  std::vector<std::int64_t> out;
  for (std::int64_t s = every; s < budget; s += every) out.push_back(s);
  out.push_back(budget);
  return out;
}

EvalStats EvaluatePolicy(policies::Policy& policy, ppo::RolloutEnv& env, int n_episodes,
                         bool deterministic, Rng& rng) {
  Require(n_episodes >= 1, "evaluate_policy: n_episodes must be >= 1");
  EvalStats stats;
  for (int i = 0; i < n_episodes; ++i) {
    stats.returns.push_back(policies::RunEpisode(policy, env, deterministic, rng).total_return);
  }
  stats.mean = Mean(stats.returns);
  double ss = 0.0;
  for (double r : stats.returns) ss += (r - stats.mean) * (r - stats.mean);
  stats.std = std::sqrt(ss / n_episodes);
  return stats;
}

SourceNeeds NeedsFor(const std::vector<Method>& methods) {
  SourceNeeds n;
  for (Method m : methods) {
    n.universal = n.universal || IsStrategySearch(m) || m == Method::kCenter ||
                  m == Method::kFinetuneUposi;
    n.robust = n.robust || m == Method::kFinetuneRobust;
    n.hist = n.hist || m == Method::kFinetuneHist;
    n.osi = n.osi || m == Method::kFinetuneUposi;
  }
  return n;
}

SourceNeeds AllSources() { return {true, true, true, true}; }

SourcePolicies PrepareSources(const ExperimentSpec& spec, std::uint64_t seed,
                              const SourceNeeds& needs, const Logger& log) {
  const std::string hash = SourceHash(spec, seed);
  SourcePolicies out;
  out.directory = spec.SourceDir() + "/" + hash;
  fs::create_directories(out.directory);
  WriteText(out.directory + "/source.ini",
            SectionText(spec, {"experiment", "source", "ppo", "osi"}) +
                "seed = " + std::to_string(seed) + "\n");

  auto family = [&](const std::string& name, bool needed, std::uint64_t salt,
                    const std::function<ppo::ActorCritic(Rng&, std::vector<ppo::IterationLog>*)>&
                        train) -> std::shared_ptr<const ppo::ActorCritic> {
    if (!needed) return nullptr;
    const std::string path = out.directory + "/" + name + ".json";
    if (auto cached = LoadNet(path, hash)) {
      Say(log, "seed " + std::to_string(seed) + ": loaded " + name + " policy");
      return cached;
    }
    Say(log, "seed " + std::to_string(seed) + ": training " + name + " policy");
    Rng rng(MixSeed(seed, salt));
    std::vector<ppo::IterationLog> curve;
    ppo::ActorCritic ac = train(rng, &curve);
    ppo::WriteTrainingCsv(out.directory + "/" + name + "_train.csv", curve);
    SaveNet(path, ac, name, hash);
    return std::make_shared<const ppo::ActorCritic>(std::move(ac));
  };

  out.universal = family("universal", needs.universal || needs.osi, kSaltUniversal,
                         [&](Rng& rng, std::vector<ppo::IterationLog>* curve) {
                           return ppo::TrainUniversal(spec.source, true, spec.ppo, rng, curve);
                         });
  out.robust = family("robust", needs.robust, kSaltRobust,
                      [&](Rng& rng, std::vector<ppo::IterationLog>* curve) {
                        return policies::TrainRobust(spec.source, spec.ppo, rng, curve);
                      });
  out.hist = family("hist", needs.hist, kSaltHist,
                    [&](Rng& rng, std::vector<ppo::IterationLog>* curve) {
                      return policies::TrainHist(spec.source, spec.history, spec.ppo, rng,
                                                 curve);
                    });
  if (needs.osi) {
    const std::string path = out.directory + "/osi.json";
    bool loaded = false;
    if (fs::exists(path)) {
      const json j = ppo::ReadJsonFile(path);
      if (ppo::HeaderFromJson(j.at("header")).config_hash == hash) {
        out.osi = std::make_shared<const policies::OsiModel>(policies::OsiFromJson(j.at("model")));
        loaded = true;
        Say(log, "seed " + std::to_string(seed) + ": loaded osi model");
      }
    }
    if (!loaded) {
      Say(log, "seed " + std::to_string(seed) + ": training osi model");
      Rng rng(MixSeed(seed, kSaltOsi));
      ppo::RandomizedEnv env(spec.source);
      policies::OsiDataOptions data_options = spec.osi_data;
      data_options.history = spec.history;
      const policies::OsiDataset data =
          policies::CollectOsiDataset(*out.universal, env, data_options, rng);
      policies::OsiReport report;
      policies::OsiModel model =
          policies::TrainOsi(data, env.ObservationSize(), env.ActionSize(), spec.history,
                             data_options.with_actions, spec.osi_train, rng, &report);
      ppo::CheckpointHeader h;
      h.policy_kind = "osi";
      h.config_hash = hash;
      ppo::WriteJsonFile(path, {{"header", ppo::HeaderToJson(h)},
                                {"model", policies::OsiToJson(model)}});
      ppo::WriteJsonFile(out.directory + "/osi_report.json",
                         {{"train_rmse", report.train_rmse},
                          {"holdout_rmse", report.holdout_rmse},
                          {"midpoint_rmse", report.midpoint_rmse},
                          {"holdout_rmse_per_dim", ppo::ToJson(report.holdout_rmse_per_dim)},
                          {"midpoint_rmse_per_dim", ppo::ToJson(report.midpoint_rmse_per_dim)}});
      out.osi = std::make_shared<const policies::OsiModel>(std::move(model));
    }
  }
  return out;
}

std::shared_ptr<const ppo::ActorCritic> PrepareOracle(const ExperimentSpec& spec,
                                                      std::uint64_t seed, const Logger& log) {
  const std::string hash = OracleHash(spec, seed);
  const std::string dir = spec.SourceDir() + "/oracle_" + hash;
  const std::string path = dir + "/oracle.json";
  if (auto cached = LoadNet(path, hash)) {
    Say(log, "seed " + std::to_string(seed) + ": loaded oracle policy");
    return cached;
  }
  Say(log, "seed " + std::to_string(seed) + ": training oracle policy");
  fs::create_directories(dir);
  WriteText(dir + "/oracle.ini", SectionText(spec, {"experiment", "source", "target", "oracle"}) +
                                     "seed = " + std::to_string(seed) + "\n");
  Rng rng(MixSeed(seed, kSaltOracle));
  ppo::FixedEnv env(spec.TargetConfig(), spec.TargetDynamics());
  ppo::ObservationContext context(env.ObservationSize());
  ppo::PpoConfig config = spec.ppo;
  config.iterations = spec.oracle.iterations;
  config.steps_per_iteration = spec.oracle.steps_per_iteration;
  std::vector<ppo::IterationLog> curve;
  ppo::ActorCritic ac = ppo::TrainPolicy(context, env, config, rng, &curve);
  ppo::WriteTrainingCsv(dir + "/oracle_train.csv", curve);
  SaveNet(path, ac, "oracle", hash);
  return std::make_shared<const ppo::ActorCritic>(std::move(ac));
}

MethodRun RunMethod(const ExperimentSpec& spec, Method method, std::uint64_t seed,
                    const SourcePolicies& sources, const Logger& log) {
  MethodRun run;
  run.method = method;
  run.seed = seed;
  const std::string dir = SeedDir(spec.output_dir + "/" + MethodName(method), seed);
  fs::create_directories(dir);
  Say(log, "seed " + std::to_string(seed) + ": " + MethodName(method));
  try {
    const envs::EnvConfig target_config = spec.TargetConfig();
    const envs::DynParams dynamics = spec.TargetDynamics();
    ppo::SampleBudget budget(spec.budget);
    ppo::FixedEnv target(target_config, dynamics, &budget);
    ppo::FixedEnv eval_env(target_config, dynamics,
                           spec.debit_evaluations && IsFinetune(method) ? &budget : nullptr);
    Rng rng(MixSeed(seed, kSaltMethod + static_cast<std::uint64_t>(method)));

    if (IsStrategySearch(method)) {
      RunStrategySearch(spec, method, sources, target, eval_env, seed, rng, dir, run);
    } else if (IsFinetune(method)) {
      RunFinetune(spec, method, sources, target, eval_env, seed, rng, dir, run);
    } else if (method == Method::kOracle) {
      auto oracle = PrepareOracle(spec, seed, log);
      CopyCurves(spec.SourceDir() + "/oracle_" + OracleHash(spec, seed), dir);
      policies::Policy pi = policies::MakeRobust(oracle);
      Rng eval_rng(MixSeed(seed, kSaltEval));
      CurveRow row;
      row.samples = static_cast<std::int64_t>(spec.oracle.iterations) *
                    spec.oracle.steps_per_iteration;
      row.used = row.samples;
      row.eval_return = EvaluatePolicy(pi, eval_env, spec.eval_episodes, true, eval_rng).mean;
      row.value = row.eval_return;
      row.best_ever = kNaN;
      row.latest = kNaN;
      run.curve.push_back(row);
      run.final_return = row.value;
    } else {
      Require(sources.universal != nullptr, "center needs the universal policy");
      const int dim = sources.universal->InputSize() - target.ObservationSize();
      policies::Policy pi = policies::MakeStrategy(sources.universal, CenterMu(dim));
      Rng eval_rng(MixSeed(seed, kSaltEval));
      CurveRow row;
      row.eval_return = EvaluatePolicy(pi, eval_env, spec.eval_episodes, true, eval_rng).mean;
      row.value = row.eval_return;
      row.best_ever = kNaN;
      row.latest = kNaN;
      run.curve.push_back(row);
      run.final_return = row.value;
      run.best_mu = CenterMu(dim);
    }
    WriteCurveCsv(dir + "/curve.csv", run.curve);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    run.failed = true;
    run.error = e.what();
    run.curve.clear();
    run.final_return = kNaN;
    Say(log, "seed " + std::to_string(seed) + ": " + MethodName(method) + " failed: " + e.what());
  }
  ppo::WriteJsonFile(dir + "/run.json", RunToJson(run));
  return run;
}

ExperimentResult RunExperiment(const ExperimentSpec& spec, const Logger& log) {
  spec.Validate();
  ExperimentResult result;
  result.directory = spec.output_dir;
  fs::create_directories(spec.output_dir);
  WriteText(spec.output_dir + "/config.ini", EmitConfig(spec));
  WriteText(spec.output_dir + "/spec_hash.txt", SpecHash(spec) + "\n");

  const SourceNeeds needs = NeedsFor(spec.methods);
  for (std::uint64_t seed : Seeds(spec)) {
    SourcePolicies sources = PrepareSources(spec, seed, needs, log);
    CopyCurves(sources.directory, SeedDir(spec.output_dir + "/sources", seed));
    for (Method m : spec.methods) result.runs.push_back(RunMethod(spec, m, seed, sources, log));
  }
  WriteSummaries(spec.output_dir);
  return result;
}

void WriteSummaries(const std::string& directory) {
  std::map<std::string, std::vector<MethodRun>> by_method;
  std::vector<std::string> order;
  for (Method m : {Method::kSoCma, Method::kSoBayes, Method::kSoModelBased,
                   Method::kFinetuneRobust, Method::kFinetuneHist, Method::kFinetuneUposi,
                   Method::kOracle, Method::kCenter}) {
    const fs::path mdir = fs::path(directory) / MethodName(m);
    if (!fs::is_directory(mdir)) continue;
    std::vector<fs::path> seed_dirs;
    for (const auto& e : fs::directory_iterator(mdir)) {
      if (e.is_directory() && fs::exists(e.path() / "run.json")) seed_dirs.push_back(e.path());
    }
    std::sort(seed_dirs.begin(), seed_dirs.end());
    for (const fs::path& p : seed_dirs) {
      by_method[MethodName(m)].push_back(
          RunFromJson(ppo::ReadJsonFile((p / "run.json").string())));
    }
    if (!by_method[MethodName(m)].empty()) order.push_back(MethodName(m));
  }

  std::ofstream curves = OpenOut(directory + "/curves.csv");
  curves << "method,samples,n,mean,std,eval_mean,eval_std,latest_mean\n";
  std::ofstream final_csv = OpenOut(directory + "/final.csv");
  final_csv << "method,n,failed,mean,std,per_seed\n";
  for (const std::string& name : order) {
    const std::vector<MethodRun>& runs = by_method[name];
    std::map<std::int64_t, std::vector<const CurveRow*>> rows;
    std::vector<double> finals;
    std::string per_seed;
    int failed = 0;
    for (const MethodRun& run : runs) {
      if (run.failed) {
        ++failed;
        continue;
      }
      for (const CurveRow& r : run.curve) rows[r.samples].push_back(&r);
      finals.push_back(run.final_return);
      per_seed += (per_seed.empty() ? "" : ";") + Num(run.final_return);
    }
    for (const auto& [samples, list] : rows) {
      std::vector<double> value, eval, latest;
      for (const CurveRow* r : list) {
        value.push_back(r->value);
        eval.push_back(r->eval_return);
        latest.push_back(r->latest);
      }
      const Stats v = Summarize(value), e = Summarize(eval), l = Summarize(latest);
      curves << name << ',' << samples << ',' << v.n << ',' << Num(v.mean) << ','
             << Num(v.std) << ',' << Num(e.mean) << ',' << Num(e.std) << ','
             << Num(l.mean) << '\n';
    }
    const Stats f = Summarize(finals);
    final_csv << name << ',' << f.n << ',' << failed << ',' << Num(f.mean) << ','
              << Num(f.std) << ',' << per_seed << '\n';
  }
}

SweepResult RunSweep(const ExperimentSpec& spec, const Logger& log) {
  Require(!spec.sweep_parameter.empty(), "sweep.parameter is not set");
  Require(!spec.sweep_values.empty(), "sweep.values is empty");
  bool known = false;
  for (const KeyDoc& k : ConfigKeys()) {
    known = known || (k.section == "target" && k.key == spec.sweep_parameter);
  }
  Require(known, "sweep.parameter '" + spec.sweep_parameter + "' is not a [target] key");

  std::vector<ExperimentSpec> cells;
  for (const std::string& value : spec.sweep_values) {
    ExperimentSpec cell = spec;
    SetKey(cell, "target." + spec.sweep_parameter, value);
    cell.output_dir = spec.output_dir + "/" + spec.sweep_parameter + "=" + value;
    cell.source_dir = spec.SourceDir();
    cell.Validate();
    cells.push_back(cell);
  }
  SweepResult result;
  std::ofstream out = OpenOut(spec.output_dir + "/sweep.csv");
  out << "value,method,n,mean,std\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    Say(log, "sweep " + spec.sweep_parameter + " = " + spec.sweep_values[i]);
    result.values.push_back(spec.sweep_values[i]);
    result.cells.push_back(RunExperiment(cells[i], log));
    for (Method m : spec.methods) {
      std::vector<double> finals;
      for (const MethodRun& run : result.cells.back().runs) {
        if (run.method == m && !run.failed) finals.push_back(run.final_return);
      }
      const Stats s = Summarize(finals);
      out << spec.sweep_values[i] << ',' << MethodName(m) << ',' << s.n << ','
          << Num(s.mean) << ',' << Num(s.std) << '\n';
    }
  }
  WriteText(spec.output_dir + "/config.ini", EmitConfig(spec));
  WriteText(spec.output_dir + "/spec_hash.txt", SpecHash(spec) + "\n");
  return result;
}

void MergeReports(const std::vector<std::string>& directories, const std::string& out_prefix) {
  Require(!directories.empty(), "report: no experiment directories");
  for (const std::string table : {"final", "curves"}) {
    std::string header;
    std::string body;
    for (const std::string& dir : directories) {
      const std::string path = dir + "/" + table + ".csv";
      Require(fs::exists(path), "report: missing " + path);
      std::istringstream in(ReadText(path));
      std::string line;
      bool first = true;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
          first = false;
          if (header.empty()) header = "experiment," + line;
          Require(header == "experiment," + line, "report: column mismatch in " + path);
          continue;
        }
        fs::path name = fs::path(dir).lexically_normal();
        if (name.filename().empty()) name = name.parent_path();
        body += name.filename().string() + "," + line + "\n";
      }
    }
    WriteText(out_prefix + "_" + table + ".csv", header + "\n" + body);
  }
}

}  // namespace sotransfer::harness
