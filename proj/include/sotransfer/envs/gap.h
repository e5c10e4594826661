#ifndef SOTRANSFER_ENVS_GAP_H_
#define SOTRANSFER_ENVS_GAP_H_

#include <vector>

namespace sotransfer::envs {

enum class ContactBackend { kHard, kSoft };
enum class JointLimitMode { kHard, kSoft };
enum class ActuatorModel { kLinear, kPiecewise };

// Which reality gaps a target environment applies. The default-constructed
// value is the identity gap (the source simulator).
struct GapConfig {
  // kHard: velocity-level impulses with projection. kSoft: penalty forces
  // with the stiffness/damping below.
  ContactBackend contact = ContactBackend::kHard;
  double soft_contact_stiffness = 5000.0;  // N/m
  double soft_contact_damping = 150.0;     // N s/m
  JointLimitMode joint_limit = JointLimitMode::kHard;
  double hip_limit = 0.8;   // rad, symmetric
  double armature = 0.0;    // added to each actuated coordinate's inertia
  double latency = 0.0;     // s, rounded to whole control steps
  ActuatorModel actuator = ActuatorModel::kLinear;
  double slope = 0.0;       // rad, gravity rotation
  std::vector<double> mass_scales;  // per body; empty means all 1
  // Deformable foot: penalty contact with these constants, regardless of
  // `contact`.
  bool soft_foot = false;
  double soft_foot_stiffness = 10000.0;
  double soft_foot_damping = 1.0;

  double MassScale(std::size_t body) const {
    return body < mass_scales.size() ? mass_scales[body] : 1.0;
  }
  // Throws ConfigError on out-of-range values.
  void Validate() const;
};

bool operator==(const GapConfig& a, const GapConfig& b);

}  // namespace sotransfer::envs

#endif  // SOTRANSFER_ENVS_GAP_H_
