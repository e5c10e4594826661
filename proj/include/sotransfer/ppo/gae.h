#ifndef SOTRANSFER_PPO_GAE_H_
#define SOTRANSFER_PPO_GAE_H_

#include <vector>

#include "sotransfer/common.h"

namespace sotransfer::ppo {

struct GaeResult {
  Vec advantages;
  Vec returns;  // advantages + values
};

// One episode segment. `terminal` marks a true failure on the last step, in
// which case `bootstrap_value` is ignored.
GaeResult ComputeGae(const Vec& rewards, const Vec& values, bool terminal,
                     double bootstrap_value, double gamma, double lambda);

// Concatenated segments delimited by `episode_ends` (exclusive).
GaeResult ComputeGae(const Vec& rewards, const Vec& values,
                     const std::vector<char>& terminals,
                     const std::vector<int>& episode_ends,
                     const std::vector<double>& bootstrap, double gamma,
                     double lambda);

// Zero mean, unit population standard deviation.
Vec NormalizeAdvantages(const Vec& advantages);

}  // namespace sotransfer::ppo

#endif  // SOTRANSFER_PPO_GAE_H_
