#ifndef SOTRANSFER_PPO_ROLLOUT_ENV_H_
#define SOTRANSFER_PPO_ROLLOUT_ENV_H_

#include <functional>

#include "sotransfer/envs/env.h"
#include "sotransfer/ppo/budget.h"

namespace sotransfer::ppo {

// Episode source for rollout collection and evaluation.
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual envs::Observation Reset(Rng& rng) = 0;
  virtual envs::StepResult Step(const Vec& action) = 0;
  // Normalized dynamics of the current episode; empty when not randomized.
  virtual Vec EpisodeMu() const = 0;
  virtual int ObservationSize() const = 0;
  virtual int ActionSize() const = 0;
};

using MuSampler = std::function<envs::DynParams(Rng&)>;

// Source environment: a new mu is drawn at every reset and held for the
// whole episode.
class RandomizedEnv : public RolloutEnv {
 public:
  explicit RandomizedEnv(envs::EnvConfig config, MuSampler sampler = {});

  envs::Observation Reset(Rng& rng) override;
  envs::StepResult Step(const Vec& action) override;
  Vec EpisodeMu() const override { return episode_mu_; }
  int ObservationSize() const override { return env_.ObservationSize(); }
  int ActionSize() const override { return env_.ActionSize(); }
  const envs::DynParams& current() const { return env_.params(); }

 private:
  envs::Env env_;
  MuSampler sampler_;
  Vec episode_mu_;
};

// Environment with fixed dynamics. When `budget` is set every step is
// debited from it, and stepping with an exhausted budget throws
// BudgetExhausted.
class FixedEnv : public RolloutEnv {
 public:
  FixedEnv(envs::EnvConfig config, envs::DynParams mu,
           SampleBudget* budget = nullptr);

  envs::Observation Reset(Rng& rng) override;
  envs::StepResult Step(const Vec& action) override;
  Vec EpisodeMu() const override { return mu_normalized_; }
  int ObservationSize() const override { return env_.ObservationSize(); }
  int ActionSize() const override { return env_.ActionSize(); }
  SampleBudget* budget() const { return budget_; }

 private:
  envs::Env env_;
  envs::DynParams mu_;
  Vec mu_normalized_;
  SampleBudget* budget_;
};

}  // namespace sotransfer::ppo

#endif  // SOTRANSFER_PPO_ROLLOUT_ENV_H_
