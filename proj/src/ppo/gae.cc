#include "sotransfer/ppo/gae.h"

#include <cmath>

namespace sotransfer::ppo {

GaeResult ComputeGae(const Vec& rewards, const Vec& values, bool terminal,
                     double bootstrap_value, double gamma, double lambda) {
  const int n = static_cast<int>(rewards.size());
  Require(values.size() == n, "gae: rewards and values differ in length");
  GaeResult out{Vec(n), Vec(n)};
  double next_value = terminal ? 0.0 : bootstrap_value;
  double running = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = delta + gamma * lambda * running;
    out.advantages[t] = running;
    next_value = values[t];
  }
  out.returns = out.advantages + values;
  return out;
}

GaeResult ComputeGae(const Vec& rewards, const Vec& values,
                     const std::vector<char>& terminals,
                     const std::vector<int>& episode_ends,
                     const std::vector<double>& bootstrap, double gamma,
                     double lambda) {
  const int n = static_cast<int>(rewards.size());
  Require(values.size() == n && static_cast<int>(terminals.size()) == n,
          "gae: per-step arrays differ in length");
  Require(bootstrap.size() == episode_ends.size(),
          "gae: one bootstrap value per episode required");
  GaeResult out{Vec(n), Vec(n)};
  int start = 0;
  for (std::size_t e = 0; e < episode_ends.size(); ++e) {
    const int end = episode_ends[e];
    Require(end > start && end <= n, "gae: bad episode boundary");
    const int len = end - start;
    GaeResult seg = ComputeGae(rewards.segment(start, len),
                               values.segment(start, len),
                               terminals[end - 1] != 0, bootstrap[e], gamma, lambda);
    out.advantages.segment(start, len) = seg.advantages;
    out.returns.segment(start, len) = seg.returns;
    start = end;
  }
  Require(start == n, "gae: episodes do not cover all steps");
  return out;
}

Vec NormalizeAdvantages(const Vec& advantages) {
  const double n = static_cast<double>(advantages.size());
  if (n == 0) return advantages;
  const double mean = advantages.mean();
  Vec centered = advantages.array() - mean;
  const double std = std::sqrt(centered.squaredNorm() / n);
  return centered / (std + 1e-8);
}

}  // namespace sotransfer::ppo
