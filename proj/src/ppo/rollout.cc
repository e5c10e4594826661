#include "sotransfer/ppo/rollout.h"

#include <string>

#include "sotransfer/nn/gaussian.h"

namespace sotransfer::ppo {

void RolloutBatch::Validate() const {
  const int n = size();
  Require(observations.cols() == n && contexts.cols() == n &&
              actions.cols() == n && values.size() == n &&
              log_probs.size() == n && static_cast<int>(terminals.size()) == n,
          "rollout: per-step arrays differ in length");
  const std::size_t ne = episode_ends.size();
  Require(episode_starts.size() == ne && bootstrap.size() == ne &&
              complete.size() == ne && episode_mu.size() == ne &&
              episode_returns.size() == ne,
          "rollout: per-episode arrays differ in length");
  int expected_start = 0;
  for (std::size_t e = 0; e < ne; ++e) {
    Require(episode_starts[e] == expected_start &&
                episode_ends[e] > episode_starts[e],
            "rollout: episode " + std::to_string(e) + " boundaries invalid");
    for (int t = episode_starts[e]; t < episode_ends[e] - 1; ++t) {
      Require(!terminals[t], "rollout: terminal flag inside episode " +
                                 std::to_string(e));
    }
    if (terminals[episode_ends[e] - 1]) {
      Require(bootstrap[e] == 0.0, "rollout: terminal episode bootstraps");
    }
    expected_start = episode_ends[e];
  }
  Require(expected_start == n, "rollout: episodes do not cover the batch");
}

RolloutBatch CollectRollouts(const ActorCritic& ac, const ContextBuilder& context,
                             RolloutEnv& env, const CollectOptions& options,
                             Rng& rng) {
  Require(options.n_steps >= 1, "collect: n_steps must be >= 1");
  Require(context.Width() == ac.InputSize(),
          "collect: context width " + std::to_string(context.Width()) +
              " does not match policy input " + std::to_string(ac.InputSize()));
  const int obs_dim = env.ObservationSize();
  const int act_dim = env.ActionSize();
  Require(act_dim == ac.ActionSize(), "collect: action width mismatch");

  std::vector<Vec> obs, ctx, act;
  std::vector<double> rew, val, lps;
  RolloutBatch batch;
  std::unique_ptr<ContextBuilder> builder = context.Clone();

  int t = 0;
  while (true) {
    Vec o = env.Reset(rng);
    builder->BeginEpisode(env.EpisodeMu());
    batch.episode_starts.push_back(t);
    batch.episode_mu.push_back(env.EpisodeMu());
    double ret = 0.0;
    bool done = false;
    bool cut = false;
    while (!done) {
      const Vec x = builder->Build(o);
      const Vec mean = ActionMean(ac, x);
      const Vec a = options.deterministic
                        ? mean
                        : nn::GaussianSample(mean, ac.head.log_std, rng);
      builder->RecordAction(a);
      const envs::StepResult r = env.Step(a);
      obs.push_back(o);
      ctx.push_back(x);
      act.push_back(a);
      rew.push_back(r.reward);
      val.push_back(StateValue(ac, x));
      lps.push_back(nn::GaussianLogProb(mean, ac.head.log_std, a));
      batch.terminals.push_back(r.terminated ? 1 : 0);
      ret += r.reward;
      ++t;
      o = r.observation;
      done = r.Done();
      if (!done && options.mode == CollectMode::kExactSteps &&
          t >= options.n_steps) {
        cut = true;
        break;
      }
    }
    double boot = 0.0;
    if (!batch.terminals.back()) boot = StateValue(ac, builder->Build(o));
    batch.episode_ends.push_back(t);
    batch.bootstrap.push_back(boot);
    batch.complete.push_back(cut ? 0 : 1);
    batch.episode_returns.push_back(ret);
    if (t >= options.n_steps) break;
  }

  batch.observations.resize(obs_dim, t);
  batch.contexts.resize(ac.InputSize(), t);
  batch.actions.resize(act_dim, t);
  batch.rewards.resize(t);
  batch.values.resize(t);
  batch.log_probs.resize(t);
  for (int i = 0; i < t; ++i) {
    batch.observations.col(i) = obs[i];
    batch.contexts.col(i) = ctx[i];
    batch.actions.col(i) = act[i];
    batch.rewards[i] = rew[i];
    batch.values[i] = val[i];
    batch.log_probs[i] = lps[i];
  }
  return batch;
}

}  // namespace sotransfer::ppo
