#include "sotransfer/ppo/rollout_env.h"

namespace sotransfer::ppo {

RandomizedEnv::RandomizedEnv(envs::EnvConfig config, MuSampler sampler)
    : env_(std::move(config)), sampler_(std::move(sampler)) {
  if (!sampler_) {
    const envs::EnvConfig& c = env_.config();
    sampler_ = [names = c.active, ranges = c.ActiveRanges()](Rng& rng) {
      return envs::SampleDynamics(names, ranges, rng);
    };
  }
}

envs::Observation RandomizedEnv::Reset(Rng& rng) {
  envs::DynParams mu = sampler_(rng);
  episode_mu_ = envs::NormalizeParams(mu);
  return env_.Reset(mu, rng);
}

envs::StepResult RandomizedEnv::Step(const Vec& action) { return env_.Step(action); }

FixedEnv::FixedEnv(envs::EnvConfig config, envs::DynParams mu, SampleBudget* budget)
    : env_(std::move(config)), mu_(std::move(mu)), budget_(budget) {
  mu_.Validate();
  mu_normalized_ = envs::NormalizeParams(mu_);
}

envs::Observation FixedEnv::Reset(Rng& rng) { return env_.Reset(mu_, rng); }

envs::StepResult FixedEnv::Step(const Vec& action) {
  if (budget_ != nullptr && budget_->Exhausted()) {
    throw BudgetExhausted("target environment: sample budget exhausted");
  }
  envs::StepResult r = env_.Step(action);
  if (budget_ != nullptr) budget_->Debit(1);
  return r;
}

}  // namespace sotransfer::ppo
