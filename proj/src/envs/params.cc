#include "sotransfer/envs/params.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace sotransfer::envs {

const std::vector<ParamSpec>& ParamCatalog(EnvKind kind) {
  static const std::vector<ParamSpec> kPendulum = {
      {"mass", {0.5, 2.0}, 1.0},
      {"length", {0.5, 2.0}, 1.0},
      {"damping", {0.05, 0.5}, 0.1},
      {"torque_gain", {0.5, 1.5}, 1.0},
  };
  // Mass ranges are multipliers of the nominal body masses.
  static const std::vector<ParamSpec> kHopper = {
      {"foot_mass", {0.4, 3.0}, 1.0},
      {"restitution", {0.0, 0.3}, 0.0},
      {"friction", {0.2, 1.0}, 0.8},
      {"torso_mass", {0.4, 3.0}, 1.0},
      {"strength", {0.5, 1.5}, 1.0},
      {"joint_damping", {0.5, 3.0}, 1.0},
  };
  return kind == EnvKind::kPendulum ? kPendulum : kHopper;
}

const ParamSpec& FindParam(EnvKind kind, const std::string& name) {
  for (const ParamSpec& p : ParamCatalog(kind)) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown dynamics parameter '" + name + "'");
}

void DynParams::Validate() const {
  Require(values.size() == size() && ranges.size() == names.size(),
          "dyn_params: names, values and ranges differ in length");
  for (int i = 0; i < size(); ++i) {
    const ParamRange& r = ranges[i];
    Require(r.lo <= r.hi, "dyn_params: range of '" + names[i] + "' has lo > hi");
    Require(std::isfinite(values[i]) && values[i] >= r.lo - 1e-12 &&
                values[i] <= r.hi + 1e-12,
            "dyn_params: '" + names[i] + "' = " + std::to_string(values[i]) +
                " outside [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
  }
}

double DynParams::Get(const std::string& name, double fallback) const {
  for (int i = 0; i < size(); ++i) {
    if (names[i] == name) return values[i];
  }
  return fallback;
}

Vec NormalizeParams(const DynParams& mu) {
  Vec u(mu.size());
  for (int i = 0; i < mu.size(); ++i) {
    const double width = mu.ranges[i].hi - mu.ranges[i].lo;
    u[i] = width > 0.0 ? (mu.values[i] - mu.ranges[i].lo) / width : 0.5;
  }
  return u;
}

Vec ClipUnit(const Vec& u) { return u.cwiseMax(0.0).cwiseMin(1.0); }

DynParams DenormalizeParams(const Vec& u, const std::vector<std::string>& names,
                            const std::vector<ParamRange>& ranges) {
  Require(u.size() == static_cast<Eigen::Index>(names.size()) &&
              names.size() == ranges.size(),
          "denormalize_params: dimension mismatch");
  DynParams mu{names, Vec(u.size()), ranges};
  const Vec c = ClipUnit(u);
  for (int i = 0; i < mu.size(); ++i) {
    mu.values[i] = ranges[i].lo + c[i] * (ranges[i].hi - ranges[i].lo);
  }
  return mu;
}

DynParams SampleDynamics(const std::vector<std::string>& names,
                         const std::vector<ParamRange>& ranges, Rng& rng) {
  Require(names.size() == ranges.size(), "sample_dynamics: dimension mismatch");
  DynParams mu{names, Vec(static_cast<Eigen::Index>(names.size())), ranges};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < mu.size(); ++i) {
    const double t = unit(rng);
    mu.values[i] = ranges[i].lo + t * (ranges[i].hi - ranges[i].lo);
  }
  return mu;
}

}  // namespace sotransfer::envs
