#ifndef SOTRANSFER_ENVS_PARAMS_H_
#define SOTRANSFER_ENVS_PARAMS_H_

#include <string>
#include <vector>

#include "sotransfer/common.h"

namespace sotransfer::envs {

enum class EnvKind { kPendulum, kHopper };

struct ParamRange {
  double lo = 0.0;
  double hi = 1.0;
};

// One randomizable physical parameter: its name, randomization range and the
// value used when the parameter is not randomized.
struct ParamSpec {
  std::string name;
  ParamRange range;
  double nominal = 0.0;
};

// All parameters an environment kind understands, in canonical order.
const std::vector<ParamSpec>& ParamCatalog(EnvKind kind);
const ParamSpec& FindParam(EnvKind kind, const std::string& name);

// A dynamics vector mu over a named subset of the catalog.
struct DynParams {
  std::vector<std::string> names;
  Vec values;
  std::vector<ParamRange> ranges;

  int size() const { return static_cast<int>(names.size()); }
  // Throws ConfigError on inconsistent sizes, lo > hi, or values outside
  // their ranges.
  void Validate() const;
  // Value of `name`, or `fallback` when the name is not part of mu.
  double Get(const std::string& name, double fallback) const;
};

// Per-dimension affine map into [0, 1]. A collapsed range maps to 0.5.
Vec NormalizeParams(const DynParams& mu);
// Inverse map; u is clipped into [0, 1] first.
DynParams DenormalizeParams(const Vec& u, const std::vector<std::string>& names,
                            const std::vector<ParamRange>& ranges);

// Independent uniform draw per dimension.
DynParams SampleDynamics(const std::vector<std::string>& names,
                         const std::vector<ParamRange>& ranges, Rng& rng);

Vec ClipUnit(const Vec& u);

}  // namespace sotransfer::envs

#endif  // SOTRANSFER_ENVS_PARAMS_H_
