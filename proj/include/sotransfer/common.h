#ifndef SOTRANSFER_COMMON_H_
#define SOTRANSFER_COMMON_H_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace sotransfer {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// All stochastic code takes one of these by reference; seeding is the
// caller's job.
using Rng = std::mt19937_64;

// Invalid shapes, ranges, or configuration values. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse at runtime, e.g. stepping a terminated environment.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during training or fitting (non-finite loss, failed
// factorization). Maps to CLI exit code 3.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ConfigError with `what` when `cond` is false.
inline void Require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

inline bool AllFinite(const Vec& v) { return v.allFinite(); }

// Standard normal vector of length n.
inline Vec StandardNormal(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec z(n);
  for (int i = 0; i < n; ++i) z[i] = normal(rng);
  return z;
}

// Derives an independent child seed; used to give each component of an
// experiment its own stream.
inline std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace sotransfer

#endif  // SOTRANSFER_COMMON_H_
