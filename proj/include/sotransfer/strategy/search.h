#ifndef SOTRANSFER_STRATEGY_SEARCH_H_
#define SOTRANSFER_STRATEGY_SEARCH_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sotransfer/common.h"
#include "sotransfer/policies/policy.h"
#include "sotransfer/ppo/actor_critic.h"
#include "sotransfer/ppo/budget.h"
#include "sotransfer/ppo/rollout_env.h"

namespace sotransfer::strategy {

struct FitnessRecord {
  Vec mu;  // normalized, inside the unit box
  std::vector<double> trials;
  double mean = 0.0;
  std::int64_t samples = 0;  // cumulative target steps after this evaluation
  bool truncated = false;    // the budget ran out mid-evaluation
  int generation = 0;
  int candidate = 0;
};

// Fitness source for strategy search over the unit box.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int Dim() const = 0;
  virtual bool Exhausted() const = 0;
  virtual FitnessRecord Evaluate(const Vec& mu, Rng& rng) = 0;
};

// Runs pi_mu in a budget-debiting target environment.
class TargetObjective : public Objective {
 public:
  TargetObjective(std::shared_ptr<const ppo::ActorCritic> up, ppo::FixedEnv& target,
                  int n_trials = 3);
  int Dim() const override { return dim_; }
  bool Exhausted() const override;
  FitnessRecord Evaluate(const Vec& mu, Rng& rng) override;

 private:
  std::shared_ptr<const ppo::ActorCritic> up_;
  ppo::FixedEnv& target_;
  int n_trials_;
  int dim_;
};

// n_trials deterministic episodes of pi_mu; each step is debited through
// `target`. A budget cut ends the evaluation with `truncated` set and the
// partial return kept as the last trial.
FitnessRecord EvaluateStrategy(const Vec& mu, std::shared_ptr<const ppo::ActorCritic> up,
                               ppo::FixedEnv& target, int n_trials, Rng& rng);

// Deterministic function with an evaluation cap; for synthetic benchmarks.
class FunctionObjective : public Objective {
 public:
  FunctionObjective(int dim, std::function<double(const Vec&)> f, std::int64_t max_evals);
  int Dim() const override { return dim_; }
  bool Exhausted() const override { return evals_ >= max_evals_; }
  FitnessRecord Evaluate(const Vec& mu, Rng& rng) override;
  std::int64_t evals() const { return evals_; }

 private:
  int dim_;
  std::function<double(const Vec&)> f_;
  std::int64_t max_evals_;
  std::int64_t evals_ = 0;
};

struct SearchResult {
  Vec best_mu;
  double best_fitness = 0.0;
  std::vector<FitnessRecord> records;
  std::vector<std::string> log;  // notable events (fallbacks, freezes)
  int population = 1;            // records per generation
  // Best complete-record fitness among records with samples <= s.
  double BestAt(std::int64_t s) const;
  // Mean fitness of the last generation fully evaluated by s.
  double LatestAt(std::int64_t s) const;
  // Running maximum over complete records, one entry per record.
  std::vector<double> BestTrace() const;
};

struct CmaOptions {
  double mean0 = 0.5;
  double sigma0 = 0.25;
  int lambda = 0;  // 0: default rule
};

// Ask, evaluate every candidate clipped to the box, tell with the unclipped
// candidates, until the objective is exhausted. Returns the best mu ever
// evaluated.
SearchResult SoCma(Objective& objective, const CmaOptions& options, Rng& rng);

// generation, candidate, mu..., trial returns, mean, samples, truncated
void WriteTraceCsv(const std::string& path, const std::vector<FitnessRecord>& records);

}  // namespace sotransfer::strategy

#endif  // SOTRANSFER_STRATEGY_SEARCH_H_
