#include "sotransfer/ppo/budget.h"

#include <string>

#include "sotransfer/common.h"

namespace sotransfer::ppo {

SampleBudget::SampleBudget(std::int64_t limit) : limit_(limit) {
  Require(limit >= 0, "budget: limit must be >= 0");
}

void SampleBudget::Debit(std::int64_t n) {
  if (n > remaining()) {
    throw BudgetExhausted("budget: " + std::to_string(n) + " steps requested, " +
                          std::to_string(remaining()) + " remaining");
  }
  const std::int64_t before = used_;
  used_ += n;
  auto it = milestones_.upper_bound(before);
  while (it != milestones_.end() && it->first <= used_) {
    auto callback = std::move(it->second);
    const std::int64_t at = it->first;
    it = milestones_.erase(it);
    callback(at);
  }
}

void SampleBudget::AddMilestone(std::int64_t at,
                                std::function<void(std::int64_t)> callback) {
  Require(at > used_, "budget: milestone already passed");
  milestones_.emplace(at, std::move(callback));
}

}  // namespace sotransfer::ppo
