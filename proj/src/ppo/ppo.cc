#include "sotransfer/ppo/ppo.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "sotransfer/nn/gaussian.h"

namespace sotransfer::ppo {

void PpoConfig::Validate() const {
  Require(steps_per_iteration >= 1, "ppo: steps_per_iteration must be >= 1");
  Require(iterations >= 0, "ppo: iterations must be >= 0");
  Require(clip > 0.0 && clip < 1.0, "ppo: clip must lie in (0, 1)");
  Require(gamma > 0.0 && gamma <= 1.0, "ppo: gamma must lie in (0, 1]");
  Require(lambda > 0.0 && lambda <= 1.0, "ppo: lambda must lie in (0, 1]");
  Require(epochs >= 1 && minibatch >= 1, "ppo: epochs and minibatch must be >= 1");
  Require(learning_rate > 0.0, "ppo: learning_rate must be > 0");
  Require(entropy_coef >= 0.0 && value_coef >= 0.0,
          "ppo: loss coefficients must be >= 0");
  Require(max_grad_norm > 0.0, "ppo: max_grad_norm must be > 0");
}

PpoConfig PpoConfig::Desk() { return PpoConfig{}; }

PpoConfig PpoConfig::Full() {
  PpoConfig c;
  c.iterations = 500;
  c.steps_per_iteration = 40000;
  return c;
}

PpoConfig PpoConfig::Finetune() {
  PpoConfig c;
  c.steps_per_iteration = 2000;
  return c;
}

UpdateBatch PrepareUpdate(const RolloutBatch& batch, const PpoConfig& config,
                          double reward_scale) {
  const Vec rewards = batch.rewards * reward_scale;
  GaeResult gae = ComputeGae(rewards, batch.values, batch.terminals,
                             batch.episode_ends, batch.bootstrap, config.gamma,
                             config.lambda);
  return UpdateBatch{batch.contexts, batch.actions, batch.log_probs,
                     NormalizeAdvantages(gae.advantages), gae.returns};
}

Mat DiscountedRunningReturns(const RolloutBatch& batch, double gamma) {
  Mat out(1, batch.size());
  for (int e = 0; e < batch.NumEpisodes(); ++e) {
    double g = 0.0;
    for (int t = batch.episode_starts[e]; t < batch.episode_ends[e]; ++t) {
      g = gamma * g + batch.rewards[t];
      out(0, t) = g;
    }
  }
  return out;
}

namespace {

Mat Gather(const Mat& m, const std::vector<int>& idx) {
  Mat out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(j) = m.col(idx[j]);
  return out;
}

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

LossAndGrad PpoLoss(const ActorCritic& ac, const UpdateBatch& batch,
                    const std::vector<int>& indices, const PpoConfig& config) {
  const int b = static_cast<int>(indices.size());
  Require(b >= 1, "ppo: empty minibatch");
  const Mat x = ac.normalizer.Apply(Gather(batch.contexts, indices));
  const Mat actions = Gather(batch.actions, indices);
  const nn::MlpTape tape_a = nn::ForwardBatch(ac.actor, x);
  const nn::MlpTape tape_c = nn::ForwardBatch(ac.critic, x);
  const Mat& means = tape_a.Output();
  const int na = ac.ActionSize();

  const Vec& raw_ls = ac.head.log_std;
  const Vec ls = ac.head.ClampedLogStd();
  const Vec inv_var = (-2.0 * ls).array().exp();
  Vec ls_live(na);
  for (int i = 0; i < na; ++i) ls_live[i] = raw_ls[i] == ls[i] ? 1.0 : 0.0;

  Mat d_mean = Mat::Zero(na, b);
  Vec d_ls = Vec::Zero(na);
  Mat d_value(1, b);
  LossAndGrad out;
  double surrogate = 0.0, value_loss = 0.0, kl = 0.0, clipped = 0.0;
  const double lo = 1.0 - config.clip, hi = 1.0 + config.clip;

  for (int j = 0; j < b; ++j) {
    const int k = indices[j];
    const Vec diff = actions.col(j) - means.col(j);
    double logp = 0.0;
    for (int i = 0; i < na; ++i) {
      logp += -0.5 * diff[i] * diff[i] * inv_var[i] - ls[i] - kHalfLog2Pi;
    }
    const double log_ratio = logp - batch.log_probs[k];
    const double ratio = std::exp(log_ratio);
    const double adv = batch.advantages[k];
    const double unclipped = ratio * adv;
    const double clipped_obj = std::clamp(ratio, lo, hi) * adv;
    surrogate += std::min(unclipped, clipped_obj);
    kl += -log_ratio;
    if (ratio < lo || ratio > hi) clipped += 1.0;
    if (unclipped <= clipped_obj) {
      const double g = -adv * ratio / b;  // d loss / d logp
      for (int i = 0; i < na; ++i) {
        d_mean(i, j) = g * diff[i] * inv_var[i];
        d_ls[i] += g * (diff[i] * diff[i] * inv_var[i] - 1.0) * ls_live[i];
      }
    }
    const double v = tape_c.Output()(0, j);
    const double err = v - batch.returns[k];
    value_loss += 0.5 * err * err;
    d_value(0, j) = config.value_coef * err / b;
  }
  surrogate /= b;
  value_loss /= b;
  const double entropy = nn::GaussianEntropy(raw_ls);
  d_ls -= config.entropy_coef * ls_live;

  out.loss = -surrogate + config.value_coef * value_loss -
             config.entropy_coef * entropy;
  out.stats.policy_loss = -surrogate;
  out.stats.value_loss = value_loss;
  out.stats.entropy = entropy;
  out.stats.approx_kl = kl / b;
  out.stats.clip_fraction = clipped / b;

  const nn::Mlp ga = nn::Backward(ac.actor, tape_a, d_mean);
  const nn::Mlp gc = nn::Backward(ac.critic, tape_c, d_value);
  const Vec fa = nn::Flatten(ga);
  const Vec fc = nn::Flatten(gc);
  out.grad.resize(fa.size() + na + fc.size());
  out.grad << fa, d_ls, fc;
  return out;
}

UpdateStats PpoUpdate(ActorCritic& ac, nn::AdamState& adam,
                      const UpdateBatch& batch, const PpoConfig& config, Rng& rng) {
  const int n = static_cast<int>(batch.advantages.size());
  Require(n >= 1, "ppo: empty batch");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Vec params = FlattenParams(ac);
  UpdateStats mean_stats;
  int count = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += config.minibatch) {
      const int end = std::min(n, start + config.minibatch);
      std::vector<int> idx(order.begin() + start, order.begin() + end);
      LossAndGrad lg = PpoLoss(ac, batch, idx, config);
      if (!std::isfinite(lg.loss)) {
        throw RuntimeFailure("ppo: non-finite loss at epoch " +
                             std::to_string(epoch) + " (policy " +
                             std::to_string(lg.stats.policy_loss) + ", value " +
                             std::to_string(lg.stats.value_loss) + ")");
      }
      const double norm = lg.grad.norm();
      if (norm > config.max_grad_norm) lg.grad *= config.max_grad_norm / norm;
      nn::AdamStep(adam, params, lg.grad);
      AssignParams(ac, params);
      mean_stats.policy_loss += lg.stats.policy_loss;
      mean_stats.value_loss += lg.stats.value_loss;
      mean_stats.entropy += lg.stats.entropy;
      mean_stats.approx_kl += lg.stats.approx_kl;
      mean_stats.clip_fraction += lg.stats.clip_fraction;
      mean_stats.grad_norm += norm;
      ++count;
    }
  }
  mean_stats.policy_loss /= count;
  mean_stats.value_loss /= count;
  mean_stats.entropy /= count;
  mean_stats.approx_kl /= count;
  mean_stats.clip_fraction /= count;
  mean_stats.grad_norm /= count;
  return mean_stats;
}

std::vector<IterationLog> Train(ActorCritic& ac, const ContextBuilder& context,
                                RolloutEnv& env, const PpoConfig& config, Rng& rng,
                                const TrainOptions& options) {
  config.Validate();
  ac.Validate();
  nn::AdamState adam = nn::AdamState::ForSize(ac.NumParams(), config.learning_rate);
  std::vector<IterationLog> log;
  std::int64_t total = 0;
  CollectOptions collect{config.steps_per_iteration, options.collect_mode, false};
  for (int it = 0; it < config.iterations; ++it) {
    RolloutBatch batch = CollectRollouts(ac, context, env, collect, rng);
    total += batch.size();
    if (config.scale_rewards && options.update_normalizer) {
      ac.return_stats.Update(DiscountedRunningReturns(batch, config.gamma));
    }
    const double scale = config.scale_rewards ? ac.RewardScale() : 1.0;
    UpdateBatch update = PrepareUpdate(batch, config, scale);
    IterationLog entry;
    entry.iteration = it;
    entry.total_steps = total;
    entry.stats = PpoUpdate(ac, adam, update, config, rng);
    if (options.update_normalizer) ac.normalizer.Update(batch.contexts);
    double sum = 0.0;
    for (int e = 0; e < batch.NumEpisodes(); ++e) {
      if (batch.complete[e]) {
        sum += batch.episode_returns[e];
        ++entry.episodes;
      }
    }
    entry.mean_return = entry.episodes > 0 ? sum / entry.episodes
                                           : batch.episode_returns.back();
    log.push_back(entry);
    if (options.on_iteration) options.on_iteration(entry, ac);
  }
  return log;
}

ActorCritic TrainPolicy(const ContextBuilder& context, RolloutEnv& env,
                        const PpoConfig& config, Rng& rng,
                        std::vector<IterationLog>* log,
                        const TrainOptions& options) {
  ActorCritic ac = MakeActorCritic(context.Width(), env.ActionSize(), rng,
                                   config.init_log_std);
  std::vector<IterationLog> l = Train(ac, context, env, config, rng, options);
  if (log) *log = std::move(l);
  return ac;
}

ActorCritic TrainUniversal(const envs::EnvConfig& env_config, bool condition_on_mu,
                           const PpoConfig& config, Rng& rng,
                           std::vector<IterationLog>* log) {
  RandomizedEnv env(env_config);
  const int obs = env.ObservationSize();
  const int dim = condition_on_mu ? static_cast<int>(env_config.active.size()) : 0;
  if (dim == 0) return TrainPolicy(ObservationContext(obs), env, config, rng, log);
  return TrainPolicy(ParamsContext(obs, dim), env, config, rng, log);
}

std::vector<IterationLog> Finetune(ActorCritic& ac, const ContextBuilder& context,
                                   RolloutEnv& target, std::int64_t budget_steps,
                                   const PpoConfig& config, Rng& rng,
                                   const IterationCallback& on_iteration) {
  PpoConfig c = config;
  c.iterations = static_cast<int>(budget_steps / config.steps_per_iteration);
  if (c.iterations == 0) return {};
  TrainOptions options;
  options.update_normalizer = false;
  options.collect_mode = CollectMode::kExactSteps;
  options.on_iteration = on_iteration;
  return Train(ac, context, target, c, rng, options);
}

}  // namespace sotransfer::ppo
