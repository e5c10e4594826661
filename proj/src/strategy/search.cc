#include "sotransfer/strategy/search.h"

#include <algorithm>
#include <fstream>
#include <limits>

#include "sotransfer/strategy/cma.h"

namespace sotransfer::strategy {

TargetObjective::TargetObjective(std::shared_ptr<const ppo::ActorCritic> up,
                                 ppo::FixedEnv& target, int n_trials)
    : up_(std::move(up)), target_(target), n_trials_(n_trials) {
  Require(target_.budget() != nullptr, "strategy: target environment has no budget");
  dim_ = up_->InputSize() - target_.ObservationSize();
  Require(dim_ >= 1, "strategy: policy is not conditioned on mu");
}

bool TargetObjective::Exhausted() const { return target_.budget()->Exhausted(); }

FitnessRecord TargetObjective::Evaluate(const Vec& mu, Rng& rng) {
  return EvaluateStrategy(mu, up_, target_, n_trials_, rng);
}

FitnessRecord EvaluateStrategy(const Vec& mu, std::shared_ptr<const ppo::ActorCritic> up,
                               ppo::FixedEnv& target, int n_trials, Rng& rng) {
  Require(n_trials >= 1, "strategy: n_trials must be >= 1");
  FitnessRecord rec;
  rec.mu = mu;
  policies::Policy policy = policies::MakeStrategy(std::move(up), mu);
  for (int i = 0; i < n_trials; ++i) {
    policies::EpisodeResult r = policies::RunEpisode(policy, target, true, rng);
    if (r.budget_cut && r.length == 0 && !rec.trials.empty()) {
      rec.truncated = true;
      break;
    }
    rec.trials.push_back(r.total_return);
    if (r.budget_cut) {
      rec.truncated = true;
      break;
    }
  }
  double sum = 0.0;
  for (double t : rec.trials) sum += t;
  rec.mean = sum / static_cast<double>(rec.trials.size());
  if (target.budget() != nullptr) rec.samples = target.budget()->used();
  return rec;
}

FunctionObjective::FunctionObjective(int dim, std::function<double(const Vec&)> f,
                                     std::int64_t max_evals)
    : dim_(dim), f_(std::move(f)), max_evals_(max_evals) {}

FitnessRecord FunctionObjective::Evaluate(const Vec& mu, Rng&) {
  if (Exhausted()) throw ppo::BudgetExhausted("function objective: evaluations exhausted");
  FitnessRecord rec;
  rec.mu = mu;
  rec.mean = f_(mu);
  rec.trials = {rec.mean};
  rec.samples = ++evals_;
  return rec;
}

double SearchResult::BestAt(std::int64_t s) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const FitnessRecord& r : records) {
    if (r.samples <= s && !r.truncated) best = std::max(best, r.mean);
  }
  return best;
}

double SearchResult::LatestAt(std::int64_t s) const {
  // A generation counts once every one of its records is complete by s.
  double latest = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i;
    double sum = 0.0;
    bool complete = true;
    for (; j < records.size() && records[j].generation == records[i].generation; ++j) {
      if (records[j].samples > s || records[j].truncated) complete = false;
      sum += records[j].mean;
    }
    if (!complete || static_cast<int>(j - i) < population) break;
    latest = sum / static_cast<double>(j - i);
    i = j;
  }
  return latest;
}

std::vector<double> SearchResult::BestTrace() const {
  std::vector<double> trace;
  double best = -std::numeric_limits<double>::infinity();
  for (const FitnessRecord& r : records) {
    if (!r.truncated) best = std::max(best, r.mean);
    trace.push_back(best);
  }
  return trace;
}

SearchResult SoCma(Objective& objective, const CmaOptions& options, Rng& rng) {
  const int n = objective.Dim();
  CmaState cma = CmaInit(Vec::Constant(n, options.mean0), options.sigma0, options.lambda);
  SearchResult result;
  result.population = cma.lambda;
  result.best_fitness = -std::numeric_limits<double>::infinity();
  while (!objective.Exhausted()) {
    const Mat x = CmaAsk(cma, rng);
    Vec fitness(cma.lambda);
    bool complete = true;
    for (int k = 0; k < cma.lambda; ++k) {
      if (objective.Exhausted()) {
        complete = false;
        break;
      }
      FitnessRecord rec = objective.Evaluate(ClipToUnitBox(x.col(k)), rng);
      rec.generation = cma.generation;
      rec.candidate = k;
      fitness[k] = rec.mean;
      if (!rec.truncated && rec.mean > result.best_fitness) {
        result.best_fitness = rec.mean;
        result.best_mu = rec.mu;
      }
      result.records.push_back(rec);
      if (rec.truncated) {
        complete = false;
        break;
      }
    }
    if (!complete) break;
    CmaTell(cma, x, fitness);
  }
  if (result.best_mu.size() == 0) {
    result.best_mu = Vec::Constant(n, options.mean0);
    result.log.push_back("no complete evaluation; returning the initial mean");
  }
  return result;
}

void WriteTraceCsv(const std::string& path, const std::vector<FitnessRecord>& records) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  const int n = records.empty() ? 0 : static_cast<int>(records.front().mu.size());
  std::size_t trials = 0;
  for (const FitnessRecord& r : records) trials = std::max(trials, r.trials.size());
  out << "generation,candidate";
  for (int i = 0; i < n; ++i) out << ",mu" << i;
  for (std::size_t i = 0; i < trials; ++i) out << ",trial" << i;
  out << ",mean,samples,truncated\n";
  out.precision(10);
  for (const FitnessRecord& r : records) {
    out << r.generation << ',' << r.candidate;
    for (int i = 0; i < n; ++i) out << ',' << r.mu[i];
    for (std::size_t i = 0; i < trials; ++i) {
      out << ',';
      if (i < r.trials.size()) out << r.trials[i];
    }
    out << ',' << r.mean << ',' << r.samples << ',' << (r.truncated ? 1 : 0) << '\n';
  }
}

}  // namespace sotransfer::strategy
