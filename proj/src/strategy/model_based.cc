#include "sotransfer/strategy/model_based.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sotransfer/strategy/cma.h"

namespace sotransfer::strategy {

namespace {

constexpr int kSegment = 100;     // steps per train/validation split unit
constexpr int kValidationEvery = 5;

Vec StdFloor(const Vec& var) {
  Vec s = var.cwiseSqrt();
  for (int i = 0; i < s.size(); ++i) {
    if (!(s[i] > 1e-6)) s[i] = 1.0;
  }
  return s;
}

Vec ModelInput(const DynamicsModel& m, const Vec& obs, const Vec& action) {
  Vec x(obs.size() + action.size());
  x << obs, action.cwiseMax(-1.0).cwiseMin(1.0);
  return (x - m.in_mean).cwiseQuotient(m.in_std);
}

std::vector<Trajectory> Split(const Trajectory& t, int segment) {
  std::vector<Trajectory> out;
  for (int s = 0; s < t.length(); s += segment) {
    const int len = std::min(segment, t.length() - s);
    if (len < 2) continue;
    out.push_back({t.observations.middleCols(s, len + 1), t.actions.middleCols(s, len)});
  }
  return out;
}

}  // namespace

DynamicsModel MakeDynamicsModel(const std::vector<Trajectory>& data, int hidden, Rng& rng,
                                double learning_rate) {
  Require(!data.empty(), "model: empty dataset");
  const int od = static_cast<int>(data.front().observations.rows());
  const int ad = static_cast<int>(data.front().actions.rows());
  int total = 0;
  for (const Trajectory& t : data) total += t.length();
  Require(total > 0, "model: dataset has no transitions");
  Mat in(od + ad, total), out(od, total);
  int c = 0;
  for (const Trajectory& t : data) {
    for (int i = 0; i < t.length(); ++i, ++c) {
      in.col(c) << t.observations.col(i), t.actions.col(i).cwiseMax(-1.0).cwiseMin(1.0);
      out.col(c) = t.observations.col(i + 1) - t.observations.col(i);
    }
  }
  DynamicsModel m;
  m.in_mean = in.rowwise().mean();
  m.in_std = StdFloor((in.colwise() - m.in_mean).array().square().rowwise().mean());
  m.out_mean = out.rowwise().mean();
  m.out_std = StdFloor((out.colwise() - m.out_mean).array().square().rowwise().mean());
  m.rnn = nn::MakeRecurrent(od + ad, hidden, od, rng);
  m.adam = nn::AdamState::ForSize(m.rnn.NumParams(), learning_rate);
  return m;
}

void TrainDynamics(DynamicsModel& model, const std::vector<Trajectory>& data, int steps,
                   const DynamicsTrainOptions& options, Rng& rng) {
  if (steps <= 0) return;
  int min_len = std::numeric_limits<int>::max();
  for (const Trajectory& t : data) min_len = std::min(min_len, t.length());
  std::vector<int> eligible;
  int chunk = options.chunk;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].length() >= chunk) eligible.push_back(static_cast<int>(i));
  }
  if (eligible.empty()) {
    chunk = min_len;
    for (std::size_t i = 0; i < data.size(); ++i) eligible.push_back(static_cast<int>(i));
  }
  Require(chunk >= 1, "model: trajectories too short to train on");
  std::vector<double> weights;
  for (int i : eligible) weights.push_back(data[i].length() - chunk + 1);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  const int od = model.obs_dim();
  const int in_dim = static_cast<int>(model.in_mean.size());
  Vec params = nn::Flatten(model.rnn);

  for (int step = 0; step < steps; ++step) {
    std::vector<Mat> inputs(chunk, Mat(in_dim, options.batch));
    std::vector<Mat> targets(chunk, Mat(od, options.batch));
    for (int b = 0; b < options.batch; ++b) {
      const Trajectory& t = data[eligible[pick(rng)]];
      std::uniform_int_distribution<int> start(0, t.length() - chunk);
      const int s0 = start(rng);
      for (int k = 0; k < chunk; ++k) {
        const int i = s0 + k;
        inputs[k].col(b) = ModelInput(model, t.observations.col(i), t.actions.col(i));
        targets[k].col(b) =
            (t.observations.col(i + 1) - t.observations.col(i) - model.out_mean)
                .cwiseQuotient(model.out_std);
      }
    }
    const nn::RecurrentResult fwd = nn::RecurrentForward(model.rnn, inputs);
    const double scale = 2.0 / (static_cast<double>(chunk) * options.batch * od);
    std::vector<Mat> grads(chunk);
    for (int k = 0; k < chunk; ++k) grads[k] = scale * (fwd.outputs[k] - targets[k]);
    const Vec g = nn::Flatten(nn::RecurrentBackward(model.rnn, inputs, grads));
    if (!g.allFinite()) throw RuntimeFailure("model: non-finite gradient");
    nn::AdamStep(model.adam, params, g);
    nn::Assign(model.rnn, params);
  }
}

double OneStepError(const DynamicsModel& model, const std::vector<Trajectory>& data) {
  double sq = 0.0;
  long count = 0;
  for (const Trajectory& t : data) {
    std::vector<Mat> inputs;
    for (int i = 0; i < t.length(); ++i) {
      inputs.push_back(ModelInput(model, t.observations.col(i), t.actions.col(i)));
    }
    if (inputs.empty()) continue;
    const nn::RecurrentResult fwd = nn::RecurrentForward(model.rnn, inputs);
    for (int i = 0; i < t.length(); ++i) {
      const Vec target = (t.observations.col(i + 1) - t.observations.col(i) -
                          model.out_mean).cwiseQuotient(model.out_std);
      sq += (fwd.outputs[i].col(0) - target).squaredNorm();
      count += target.size();
    }
  }
  Require(count > 0, "model: empty validation set");
  return std::sqrt(sq / static_cast<double>(count));
}

double SurrogateReturn(const DynamicsModel& model, const ppo::ActorCritic& up,
                       const Vec& mu, const Vec& start, const envs::EnvConfig& config,
                       int horizon) {
  const bool sparse = config.reward == envs::RewardMode::kSparse;
  const double period = config.ControlPeriod();
  Mat h = Mat::Zero(model.rnn.hidden, 1);
  Vec obs = start;
  double ret = 0.0;
  double distance = 0.0;
  Vec x(up.InputSize());
  for (int t = 0; t < horizon; ++t) {
    x << obs, mu;
    const Vec a = ppo::ActionMean(up, x);
    h = nn::RecurrentCell(model.rnn, h, ModelInput(model, obs, a));
    const Vec y = model.rnn.w_out * h.col(0) + model.rnn.b_out;
    obs += y.cwiseProduct(model.out_std) + model.out_mean;
    if (!obs.allFinite()) break;
    ret += envs::ObservationReward(config, obs, a);
    distance += envs::ObservationVelocity(config, obs) * period;
    if (envs::ObservationTerminal(config, obs)) break;
  }
  return sparse ? distance : ret;
}

namespace {

// Runs one episode of pi_mu in the target, recording it. Returns false if the
// budget ran out, in which case `traj` holds the partial episode.
bool RecordEpisode(const ppo::ActorCritic& up, const Vec& mu, bool deterministic,
                   ppo::FixedEnv& target, std::int64_t max_steps, Rng& rng,
                   Trajectory& traj, double& ret) {
  std::vector<Vec> obs{target.Reset(rng)};
  std::vector<Vec> acts;
  ret = 0.0;
  bool ok = true;
  Vec x(up.InputSize());
  while (static_cast<std::int64_t>(acts.size()) < max_steps) {
    x << obs.back(), mu;
    const Vec a = ppo::Act(up, x, deterministic, rng);
    envs::StepResult r;
    try {
      r = target.Step(a);
    } catch (const ppo::BudgetExhausted&) {
      ok = false;
      break;
    }
    acts.push_back(a);
    obs.push_back(r.observation);
    ret += r.reward;
    if (r.Done()) break;
  }
  traj.observations.resize(obs.front().size(), acts.size() + 1);
  traj.actions.resize(up.ActionSize(), acts.size());
  for (std::size_t i = 0; i < acts.size(); ++i) {
    traj.observations.col(i) = obs[i];
    traj.actions.col(i) = acts[i];
  }
  traj.observations.col(acts.size()) = obs[acts.size()];
  return ok;
}

}  // namespace

ModelBasedResult SoModelBased(std::shared_ptr<const ppo::ActorCritic> up,
                              ppo::FixedEnv& target, const envs::EnvConfig& target_config,
                              const ModelBasedOptions& options, Rng& rng) {
  ppo::SampleBudget* budget = target.budget();
  Require(budget != nullptr, "model-based: target environment has no budget");
  Require(budget->remaining() > options.initial_samples,
          "model-based: budget must exceed the initial sample count " +
              std::to_string(options.initial_samples));
  const int dim = up->InputSize() - target.ObservationSize();
  Require(dim >= 1, "model-based: policy is not conditioned on mu");
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ModelBasedResult result;
  result.best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<Trajectory> train, validation;
  std::vector<Vec> starts;
  auto add_data = [&](const Trajectory& t, bool allow_validation) {
    if (t.length() == 0) return;
    starts.push_back(t.observations.col(0));
    std::vector<Trajectory> parts = Split(t, kSegment);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const bool hold = allow_validation && (train.size() + validation.size()) %
                                                    kValidationEvery ==
                                                kValidationEvery - 1;
      (hold ? validation : train).push_back(std::move(parts[i]));
    }
  };

  const std::int64_t phase1_end = budget->used() + options.initial_samples;
  while (budget->used() < phase1_end) {
    Vec mu(dim);
    for (int i = 0; i < dim; ++i) mu[i] = unit(rng);
    Trajectory t;
    double ret;
    RecordEpisode(*up, mu, false, target, phase1_end - budget->used(), rng, t, ret);
    add_data(t, true);
  }
  result.initial_samples = options.initial_samples;

  const bool learned = !options.surrogate_override;
  DynamicsModel model, stable;
  int increases = 0;
  if (learned) {
    Require(!train.empty() && !validation.empty(), "model-based: not enough initial data");
    model = MakeDynamicsModel(train, options.train.hidden, rng, options.train.learning_rate);
    TrainDynamics(model, train, options.initial_fit_steps, options.train, rng);
    result.validation_error.push_back(OneStepError(model, validation));
    stable = model;
  }

  int iteration = 0;
  while (!budget->Exhausted()) {
    SurrogateFn surrogate = options.surrogate_override;
    if (learned) {
      surrogate = [&](const Vec& mu, Rng& r) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(starts.size()) - 1);
        double sum = 0.0;
        for (int e = 0; e < options.surrogate_episodes; ++e) {
          sum += SurrogateReturn(model, *up, mu, starts[pick(r)], target_config,
                                 options.surrogate_horizon);
        }
        return sum / options.surrogate_episodes;
      };
    }
    CmaState cma = CmaInit(Vec::Constant(dim, 0.5), 0.25);
    Vec mu_hat = Vec::Constant(dim, 0.5);
    double best_surrogate = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < options.surrogate_generations; ++g) {
      const Mat x = CmaAsk(cma, rng);
      Vec f(cma.lambda);
      for (int k = 0; k < cma.lambda; ++k) {
        const Vec c = ClipToUnitBox(x.col(k));
        f[k] = surrogate(c, rng);
        if (!std::isfinite(f[k])) f[k] = -1e12;
        if (f[k] > best_surrogate) {
          best_surrogate = f[k];
          mu_hat = c;
        }
      }
      CmaTell(cma, x, f);
    }

    FitnessRecord rec;
    rec.mu = mu_hat;
    rec.generation = iteration;
    for (int e = 0; e < options.real_episodes; ++e) {
      Trajectory t;
      double ret;
      const bool ok = RecordEpisode(*up, mu_hat, true, target,
                                    std::numeric_limits<std::int64_t>::max(), rng, t, ret);
      if (t.length() > 0) {
        rec.trials.push_back(ret);
        add_data(t, false);
      }
      if (!ok) {
        rec.truncated = true;
        break;
      }
    }
    if (rec.trials.empty()) break;
    double sum = 0.0;
    for (double v : rec.trials) sum += v;
    rec.mean = sum / rec.trials.size();
    rec.samples = budget->used();
    if (!rec.truncated && rec.mean > result.best_fitness) {
      result.best_fitness = rec.mean;
      result.best_mu = rec.mu;
    }
    result.records.push_back(rec);
    if (rec.truncated) break;

    if (learned && !result.frozen) {
      TrainDynamics(model, train, options.refit_steps, options.train, rng);
      const double err = OneStepError(model, validation);
      increases = err > result.validation_error.back() ? increases + 1 : 0;
      result.validation_error.push_back(err);
      if (increases >= options.divergence_patience) {
        result.frozen = true;
        model = stable;
        result.log.push_back("iteration " + std::to_string(iteration) +
                             ": validation error rose " +
                             std::to_string(options.divergence_patience) +
                             " refits in a row, model frozen");
      } else if (increases == 0) {
        stable = model;
      }
    }
    ++iteration;
  }
  if (result.best_mu.size() == 0) {
    result.best_mu = Vec::Constant(dim, 0.5);
    result.log.push_back("no complete evaluation; returning the box center");
  }
  return result;
}

}  // namespace sotransfer::strategy
