#ifndef SOTRANSFER_PPO_BUDGET_H_
#define SOTRANSFER_PPO_BUDGET_H_

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>

namespace sotransfer::ppo {

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shared counter of target-environment steps. Every transfer method debits
// the same type, so a comparison at budget B can never exceed B steps.
class SampleBudget {
 public:
  explicit SampleBudget(std::int64_t limit);

  std::int64_t limit() const { return limit_; }
  std::int64_t used() const { return used_; }
  std::int64_t remaining() const { return limit_ - used_; }
  bool Exhausted() const { return used_ >= limit_; }

  // Throws BudgetExhausted if fewer than n steps remain.
  void Debit(std::int64_t n = 1);

  // Called once when `used` first reaches `at`.
  void AddMilestone(std::int64_t at, std::function<void(std::int64_t)> callback);

 private:
  std::int64_t limit_;
  std::int64_t used_ = 0;
  std::multimap<std::int64_t, std::function<void(std::int64_t)>> milestones_;
};

}  // namespace sotransfer::ppo

#endif  // SOTRANSFER_PPO_BUDGET_H_
