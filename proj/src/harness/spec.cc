#include "sotransfer/harness/spec.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sotransfer/ppo/checkpoint.h"

namespace sotransfer::harness {

namespace {

const std::vector<std::pair<Method, std::string>>& MethodTable() {
  static const std::vector<std::pair<Method, std::string>> table = {
      {Method::kSoCma, "so-cma"},
      {Method::kSoBayes, "so-ba"},
      {Method::kSoModelBased, "so-mb"},
      {Method::kFinetuneRobust, "finetune-robust"},
      {Method::kFinetuneHist, "finetune-hist"},
      {Method::kFinetuneUposi, "finetune-uposi"},
      {Method::kOracle, "oracle"},
      {Method::kCenter, "center"},
  };
  return table;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ToDouble(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  return v;
}

long long ToInt(const std::string& s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("expected an integer, got '" + s + "'");
  }
  return v;
}

bool ToBool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

std::string Join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

std::string JoinDoubles(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double d : v) s.push_back(FormatDouble(d));
  return Join(s);
}

template <typename E>
E ToEnum(const std::string& s, const std::vector<std::pair<E, std::string>>& table) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  std::vector<std::string> names;
  for (const auto& kv : table) names.push_back(kv.second);
  throw ConfigError("'" + s + "' is not one of: " + Join(names));
}

template <typename E>
std::string FromEnum(E e, const std::vector<std::pair<E, std::string>>& table) {
  for (const auto& [v, name] : table) {
    if (v == e) return name;
  }
  return "?";
}

const std::vector<std::pair<envs::EnvKind, std::string>> kEnvKinds = {
    {envs::EnvKind::kPendulum, "pendulum_x"}, {envs::EnvKind::kHopper, "hopper_lite"}};
const std::vector<std::pair<envs::ContactBackend, std::string>> kContacts = {
    {envs::ContactBackend::kHard, "hard"}, {envs::ContactBackend::kSoft, "soft"}};
const std::vector<std::pair<envs::JointLimitMode, std::string>> kLimits = {
    {envs::JointLimitMode::kHard, "hard"}, {envs::JointLimitMode::kSoft, "soft"}};
const std::vector<std::pair<envs::ActuatorModel, std::string>> kActuators = {
    {envs::ActuatorModel::kLinear, "linear"}, {envs::ActuatorModel::kPiecewise, "piecewise"}};
const std::vector<std::pair<envs::RewardMode, std::string>> kRewards = {
    {envs::RewardMode::kDense, "dense"}, {envs::RewardMode::kSparse, "sparse"}};
const std::vector<std::pair<Preset, std::string>> kPresets = {
    {Preset::kDesk, "desk"}, {Preset::kFull, "full"}};

struct KeyDef {
  std::string section;
  std::string key;
  std::string help;
  std::function<void(ExperimentSpec&, const std::string&)> set;
  std::function<std::string(const ExperimentSpec&)> get;
};

#define INT_KEY(sec, name, field, help)                                          \
  KeyDef{sec, name, help,                                                        \
         [](ExperimentSpec& s, const std::string& v) {                           \
           s.field = static_cast<decltype(s.field)>(ToInt(v));                   \
         },                                                                      \
         [](const ExperimentSpec& s) { return std::to_string(s.field); }}
#define DBL_KEY(sec, name, field, help)                                          \
  KeyDef{sec, name, help,                                                        \
         [](ExperimentSpec& s, const std::string& v) { s.field = ToDouble(v); }, \
         [](const ExperimentSpec& s) { return FormatDouble(s.field); }}
#define BOOL_KEY(sec, name, field, help)                                         \
  KeyDef{sec, name, help,                                                        \
         [](ExperimentSpec& s, const std::string& v) { s.field = ToBool(v); },   \
         [](const ExperimentSpec& s) { return std::string(s.field ? "true" : "false"); }}
#define ENUM_KEY(sec, name, field, table, help)                                  \
  KeyDef{sec, name, help,                                                        \
         [](ExperimentSpec& s, const std::string& v) { s.field = ToEnum(v, table); }, \
         [](const ExperimentSpec& s) { return FromEnum(s.field, table); }}

const std::vector<KeyDef>& Keys() {
  static const std::vector<KeyDef> keys = {
      // env_kind and dim_mu are applied first; see ApplyOrdered.
      ENUM_KEY("experiment", "env_kind", source.kind, kEnvKinds,
               "pendulum_x or hopper_lite"),
      KeyDef{"experiment", "method", "comma list of transfer methods",
             [](ExperimentSpec& s, const std::string& v) {
               s.methods.clear();
               for (const std::string& m : SplitList(v)) s.methods.push_back(ParseMethod(m));
             },
             [](const ExperimentSpec& s) {
               std::vector<std::string> names;
               for (Method m : s.methods) names.push_back(MethodName(m));
               return Join(names);
             }},
      INT_KEY("experiment", "budget", budget, "target steps per method"),
      INT_KEY("experiment", "seeds", seeds, "number of seeds"),
      INT_KEY("experiment", "base_seed", base_seed, "first seed"),
      KeyDef{"experiment", "output_dir", "result directory",
             [](ExperimentSpec& s, const std::string& v) { s.output_dir = v; },
             [](const ExperimentSpec& s) { return s.output_dir; }},
      KeyDef{"experiment", "source_dir", "trained source policies (default <output_dir>/sources)",
             [](ExperimentSpec& s, const std::string& v) { s.source_dir = v; },
             [](const ExperimentSpec& s) { return s.source_dir; }},
      ENUM_KEY("experiment", "preset", preset, kPresets, "desk or full training scale"),
      INT_KEY("experiment", "milestone_every", milestone_every, "curve row spacing in target steps"),
      INT_KEY("experiment", "eval_episodes", eval_episodes, "deterministic episodes per evaluation"),
      INT_KEY("experiment", "n_trials", n_trials, "episodes per strategy fitness"),
      BOOL_KEY("experiment", "debit_evaluations", debit_evaluations,
               "charge milestone evaluations to the budget"),
      INT_KEY("experiment", "history", history, "Hist and OSI window length"),

      INT_KEY("source", "dim_mu", dim_mu, "hopper preset 0, 2, 5 or 6 (pendulum: 0 to 4)"),
      KeyDef{"source", "active", "randomized dimensions (default from dim_mu)",
             [](ExperimentSpec& s, const std::string& v) {
               s.source.active = SplitList(v);
               s.dim_mu = static_cast<int>(s.source.active.size());
             },
             [](const ExperimentSpec& s) { return Join(s.source.active); }},
      INT_KEY("source", "horizon", source.horizon, "episode length"),
      DBL_KEY("source", "init_noise", source.init_noise, "p0 half-width"),
      DBL_KEY("source", "dt_sim", source.dt_sim, "integration step, s"),
      INT_KEY("source", "substeps", source.substeps, "integration steps per control step"),
      ENUM_KEY("source", "reward", source.reward, kRewards, "dense or sparse"),
      BOOL_KEY("source", "early_termination", source.early_termination, "end episodes on a fall"),
      KeyDef{"source", "ranges", "name:lo:hi overrides, comma separated",
             [](ExperimentSpec& s, const std::string& v) {
               s.source.range_overrides.clear();
               for (const std::string& item : SplitList(v)) {
                 const auto a = item.find(':');
                 const auto b = item.rfind(':');
                 if (a == std::string::npos || a == b) {
                   throw ConfigError("range '" + item + "' is not name:lo:hi");
                 }
                 s.source.range_overrides[Trim(item.substr(0, a))] =
                     envs::ParamRange{ToDouble(Trim(item.substr(a + 1, b - a - 1))),
                                      ToDouble(Trim(item.substr(b + 1)))};
               }
             },
             [](const ExperimentSpec& s) {
               std::vector<std::string> items;
               for (const auto& [name, r] : s.source.range_overrides) {
                 items.push_back(name + ":" + FormatDouble(r.lo) + ":" + FormatDouble(r.hi));
               }
               return Join(items);
             }},

      ENUM_KEY("target", "contact", target.contact, kContacts, "hard or soft"),
      DBL_KEY("target", "soft_contact_stiffness", target.soft_contact_stiffness, "N/m"),
      DBL_KEY("target", "soft_contact_damping", target.soft_contact_damping, "N s/m"),
      ENUM_KEY("target", "joint_limit", target.joint_limit, kLimits, "hard or soft"),
      DBL_KEY("target", "hip_limit", target.hip_limit, "rad"),
      DBL_KEY("target", "armature", target.armature, "added inertia"),
      DBL_KEY("target", "latency", target.latency, "s"),
      ENUM_KEY("target", "actuator", target.actuator, kActuators, "linear or piecewise"),
      DBL_KEY("target", "slope", target.slope, "rad"),
      KeyDef{"target", "mass_scales", "per-body multipliers",
             [](ExperimentSpec& s, const std::string& v) {
               s.target.mass_scales.clear();
               for (const std::string& x : SplitList(v)) s.target.mass_scales.push_back(ToDouble(x));
             },
             [](const ExperimentSpec& s) { return JoinDoubles(s.target.mass_scales); }},
      BOOL_KEY("target", "soft_foot", target.soft_foot, "deformable foot"),
      DBL_KEY("target", "soft_foot_stiffness", target.soft_foot_stiffness, "N/m"),
      DBL_KEY("target", "soft_foot_damping", target.soft_foot_damping, "N s/m"),
      KeyDef{"target", "dynamics", "nominal, or one value per active dimension",
             [](ExperimentSpec& s, const std::string& v) {
               if (v == "nominal") {
                 s.target_dynamics.reset();
                 return;
               }
               std::vector<double> values;
               for (const std::string& x : SplitList(v)) values.push_back(ToDouble(x));
               s.target_dynamics = values;
             },
             [](const ExperimentSpec& s) {
               return s.target_dynamics ? JoinDoubles(*s.target_dynamics)
                                        : std::string("nominal");
             }},

      KeyDef{"target", "reward", "source, dense or sparse",
             [](ExperimentSpec& s, const std::string& v) {
               if (v == "source") {
                 s.target_reward.reset();
               } else {
                 s.target_reward = ToEnum(v, kRewards);
               }
             },
             [](const ExperimentSpec& s) {
               return s.target_reward ? FromEnum(*s.target_reward, kRewards)
                                      : std::string("source");
             }},

      INT_KEY("ppo", "iterations", ppo.iterations, "source training iterations"),
      INT_KEY("ppo", "steps_per_iteration", ppo.steps_per_iteration, "steps per iteration"),
      DBL_KEY("ppo", "clip", ppo.clip, "surrogate clip"),
      DBL_KEY("ppo", "gamma", ppo.gamma, "discount"),
      DBL_KEY("ppo", "lambda", ppo.lambda, "GAE lambda"),
      INT_KEY("ppo", "epochs", ppo.epochs, "epochs per update"),
      INT_KEY("ppo", "minibatch", ppo.minibatch, "minibatch size"),
      DBL_KEY("ppo", "learning_rate", ppo.learning_rate, "Adam step size"),
      DBL_KEY("ppo", "entropy_coef", ppo.entropy_coef, "entropy bonus"),
      DBL_KEY("ppo", "value_coef", ppo.value_coef, "value loss weight"),
      DBL_KEY("ppo", "max_grad_norm", ppo.max_grad_norm, "global gradient cap"),
      DBL_KEY("ppo", "init_log_std", ppo.init_log_std, "initial action log-std"),
      BOOL_KEY("ppo", "scale_rewards", ppo.scale_rewards, "divide rewards by return std"),

      INT_KEY("finetune", "steps_per_iteration", finetune.steps_per_iteration,
              "target steps per fine-tuning iteration"),
      DBL_KEY("finetune", "learning_rate", finetune.learning_rate, "Adam step size"),
      INT_KEY("finetune", "epochs", finetune.epochs, "epochs per update"),
      INT_KEY("finetune", "minibatch", finetune.minibatch, "minibatch size"),

      INT_KEY("oracle", "iterations", oracle.iterations, "oracle training iterations"),
      INT_KEY("oracle", "steps_per_iteration", oracle.steps_per_iteration, "steps per iteration"),

      INT_KEY("osi", "episodes", osi_data.episodes, "dataset episodes"),
      INT_KEY("osi", "samples_per_episode", osi_data.samples_per_episode, "windows per episode"),
      BOOL_KEY("osi", "with_actions", osi_data.with_actions, "interleave past actions"),
      BOOL_KEY("osi", "deterministic", osi_data.deterministic, "mean actions while collecting"),
      INT_KEY("osi", "epochs", osi_train.epochs, "training epochs"),
      INT_KEY("osi", "minibatch", osi_train.minibatch, "minibatch size"),
      DBL_KEY("osi", "learning_rate", osi_train.learning_rate, "Adam step size"),
      DBL_KEY("osi", "holdout_fraction", osi_train.holdout_fraction, "held-out share"),

      DBL_KEY("cma", "mean0", cma.mean0, "initial mean, every coordinate"),
      DBL_KEY("cma", "sigma0", cma.sigma0, "initial step size"),
      INT_KEY("cma", "lambda", cma.lambda, "population (0: 4 + floor(3 ln N))"),

      INT_KEY("bayes", "initial_points", bayes.initial_points, "uniform initial design"),
      INT_KEY("bayes", "probes", bayes.probes, "random acquisition probes"),
      INT_KEY("bayes", "local_starts", bayes.local_starts, "local searches from the best probes"),

      INT_KEY("model_based", "initial_samples", model_based.initial_samples, "phase-one transitions"),
      INT_KEY("model_based", "refit_steps", model_based.refit_steps, "gradient steps per refit"),
      INT_KEY("model_based", "initial_fit_steps", model_based.initial_fit_steps, "first fit steps"),
      INT_KEY("model_based", "surrogate_horizon", model_based.surrogate_horizon, "model rollout length"),
      INT_KEY("model_based", "surrogate_generations", model_based.surrogate_generations,
              "CMA generations on the model"),
      INT_KEY("model_based", "surrogate_episodes", model_based.surrogate_episodes,
              "model rollouts per candidate"),
      INT_KEY("model_based", "hidden", model_based.train.hidden, "recurrent width"),

      KeyDef{"sweep", "parameter", "target key to vary",
             [](ExperimentSpec& s, const std::string& v) { s.sweep_parameter = v; },
             [](const ExperimentSpec& s) { return s.sweep_parameter; }},
      KeyDef{"sweep", "values", "comma list",
             [](ExperimentSpec& s, const std::string& v) { s.sweep_values = SplitList(v); },
             [](const ExperimentSpec& s) { return Join(s.sweep_values); }},
  };
  return keys;
}

#undef INT_KEY
#undef DBL_KEY
#undef BOOL_KEY
#undef ENUM_KEY

const KeyDef* FindKey(const std::string& section, const std::string& key) {
  for (const KeyDef& k : Keys()) {
    if (k.section == section && k.key == key) return &k;
  }
  return nullptr;
}

std::string Suggest(const std::string& section, const std::string& key) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const KeyDef& k : Keys()) {
    const std::size_t d = EditDistance(key, k.key) + (k.section == section ? 0 : 1);
    if (d < best_d) {
      best_d = d;
      best = k.section == section ? k.key : k.section + "." + k.key;
    }
  }
  return best;
}

int DefaultDim(envs::EnvKind kind) {
  return kind == envs::EnvKind::kPendulum
             ? static_cast<int>(envs::EnvConfig::Pendulum().active.size())
             : 5;
}

// Sets the source environment for the kind and dimension without touching
// other explicitly given keys.
void ResetSource(ExperimentSpec& s) {
  if (s.source.kind == envs::EnvKind::kPendulum) {
    s.source = envs::EnvConfig::Pendulum();
    Require(s.dim_mu >= 0 && s.dim_mu <= 4, "pendulum dim_mu must lie in [0, 4]");
    s.source.active.resize(s.dim_mu);
  } else {
    s.source = envs::EnvConfig::Hopper(s.dim_mu);
  }
}

}  // namespace

std::string MethodName(Method m) { return FromEnum(m, MethodTable()); }

Method ParseMethod(const std::string& name) {
  for (const auto& [m, n] : MethodTable()) {
    if (n == name) return m;
  }
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& kv : MethodTable()) {
    const std::size_t d = EditDistance(name, kv.second);
    if (d < best_d) {
      best_d = d;
      best = kv.second;
    }
  }
  throw ConfigError("unknown method '" + name + "' (did you mean '" + best + "'?)");
}

bool IsStrategySearch(Method m) {
  return m == Method::kSoCma || m == Method::kSoBayes || m == Method::kSoModelBased;
}

bool IsFinetune(Method m) {
  return m == Method::kFinetuneRobust || m == Method::kFinetuneHist ||
         m == Method::kFinetuneUposi;
}

std::size_t EditDistance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void ExperimentSpec::Validate() const {
  source.Validate();
  target.Validate();
  Require(budget > 0, "experiment.budget must be > 0");
  Require(seeds >= 1, "experiment.seeds must be >= 1");
  Require(!methods.empty(), "experiment.method must name at least one method");
  Require(milestone_every > 0, "experiment.milestone_every must be > 0");
  Require(eval_episodes >= 1, "experiment.eval_episodes must be >= 1");
  Require(n_trials >= 1, "experiment.n_trials must be >= 1");
  Require(history >= 1, "experiment.history must be >= 1");
  Require(dim_mu == static_cast<int>(source.active.size()),
          "source.dim_mu does not match the active list");
  ppo.Validate();
  finetune.Validate();
  oracle.Validate();
  bool needs_mu = false;
  for (Method m : methods) {
    needs_mu = needs_mu || IsStrategySearch(m) || m == Method::kFinetuneUposi ||
               m == Method::kCenter;
  }
  Require(!needs_mu || dim_mu >= 1,
          "strategy and UPOSI methods need source.dim_mu >= 1");
  for (Method m : methods) {
    if (m == Method::kSoModelBased) {
      Require(budget > model_based.initial_samples,
              "so-mb needs a budget above model_based.initial_samples");
    }
  }
  if (target_dynamics) {
    Require(target_dynamics->size() == source.active.size(),
            "target.dynamics needs one value per active dimension");
    TargetDynamics().Validate();
  }
}

envs::EnvConfig ExperimentSpec::TargetConfig() const {
  envs::EnvConfig c = source;
  c.gap = target;
  if (target_reward) c.reward = *target_reward;
  return c;
}

envs::DynParams ExperimentSpec::TargetDynamics() const {
  const envs::EnvConfig c = TargetConfig();
  if (!target_dynamics) return envs::NominalDynamics(c);
  return envs::MakeDynamics(c, Eigen::Map<const Vec>(target_dynamics->data(),
                                                     target_dynamics->size()));
}

std::string ExperimentSpec::SourceDir() const {
  return source_dir.empty() ? output_dir + "/sources" : source_dir;
}

void SetKey(ExperimentSpec& spec, const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  Require(dot != std::string::npos, "key '" + dotted_key + "' must be section.key");
  const std::string section = dotted_key.substr(0, dot);
  const std::string key = dotted_key.substr(dot + 1);
  const KeyDef* def = FindKey(section, key);
  if (def == nullptr) {
    throw ConfigError("unknown key '" + dotted_key + "' (did you mean '" +
                      Suggest(section, key) + "'?)");
  }
  def->set(spec, value);
  if (dotted_key == "experiment.env_kind") spec.dim_mu = DefaultDim(spec.source.kind);
  if (dotted_key == "experiment.env_kind" || dotted_key == "source.dim_mu") {
    ResetSource(spec);
  }
}

ExperimentSpec ParseConfig(const std::string& text, const std::string& origin) {
  struct Entry {
    const KeyDef* def;
    std::string value;
    int line;
  };
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto fail = [&](int line, const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = Trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const KeyDef& k : Keys()) known = known || k.section == section;
      if (!known) fail(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (section.empty()) fail(line_no, "key '" + key + "' outside a section");
    const KeyDef* def = FindKey(section, key);
    if (def == nullptr) {
      fail(line_no, "unknown key '" + key + "' in [" + section + "] (did you mean '" +
                        Suggest(section, key) + "'?)");
    }
    if (!seen.insert(section + "." + key).second) {
      fail(line_no, "duplicate key '" + key + "' in [" + section + "]");
    }
    entries.push_back({def, value, line_no});
  }

  ExperimentSpec spec;
  auto apply = [&](const Entry& e) {
    try {
      e.def->set(spec, e.value);
    } catch (const ConfigError& err) {
      fail(e.line, e.def->section + "." + e.def->key + ": " + err.what());
    }
  };
  // Structural keys first: they rebuild the source defaults that the other
  // keys then override.
  for (const Entry& e : entries) {
    if (e.def->key == "env_kind") apply(e);
  }
  spec.dim_mu = DefaultDim(spec.source.kind);
  for (const Entry& e : entries) {
    if (e.def->key == "dim_mu") apply(e);
  }
  try {
    ResetSource(spec);
  } catch (const ConfigError& err) {
    fail(0, err.what());
  }
  for (const Entry& e : entries) {
    if (e.def->key == "preset") apply(e);
  }
  if (spec.preset == Preset::kFull) {
    spec.ppo = ppo::PpoConfig::Full();
    spec.oracle.iterations = 25;
    spec.oracle.steps_per_iteration = 40000;
  }
  for (const Entry& e : entries) {
    if (e.def->key != "env_kind" && e.def->key != "dim_mu" && e.def->key != "preset") {
      apply(e);
    }
  }
  try {
    spec.Validate();
  } catch (const ConfigError& err) {
    throw ConfigError(origin + ": " + err.what());
  }
  return spec;
}

ExperimentSpec LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path);
}

std::string EmitConfig(const ExperimentSpec& spec) {
  std::ostringstream out;
  std::string section;
  for (const KeyDef& k : Keys()) {
    if (k.section != section) {
      out << (section.empty() ? "" : "\n") << '[' << k.section << "]\n";
      section = k.section;
    }
    out << k.key << " = " << k.get(spec) << '\n';
  }
  return out.str();
}

ppo::PpoConfig DeskSourcePpo() {
  ppo::PpoConfig c = ppo::PpoConfig::Desk();
  c.iterations = 300;
  return c;
}

std::string SpecHash(const ExperimentSpec& spec) {
  std::string text;
  for (const KeyDef& k : Keys()) {
    if (k.key == "output_dir" || k.key == "source_dir") continue;
    text += k.section + "." + k.key + "=" + k.get(spec) + "\n";
  }
  return ppo::HexHash(ppo::Fnv1a(text));
}

std::string SourceHash(const ExperimentSpec& spec, std::uint64_t seed) {
  std::ostringstream text;
  for (const KeyDef& k : Keys()) {
    if (k.section == "source" || k.section == "ppo" || k.section == "osi" ||
        k.key == "env_kind" || k.key == "history") {
      text << k.section << '.' << k.key << '=' << k.get(spec) << '\n';
    }
  }
  text << "seed=" << seed << '\n';
  return ppo::HexHash(ppo::Fnv1a(text.str()));
}

std::vector<KeyDoc> ConfigKeys() {
  std::vector<KeyDoc> docs;
  for (const KeyDef& k : Keys()) docs.push_back({k.section, k.key, k.help});
  return docs;
}

}  // namespace sotransfer::harness
