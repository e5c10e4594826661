#include "sotransfer/envs/primitives.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace sotransfer::envs {

void GapConfig::Validate() const {
  Require(latency >= 0.0, "gap: latency must be >= 0");
  Require(armature >= 0.0, "gap: armature must be >= 0");
  Require(std::abs(slope) <= 0.3, "gap: slope must lie in [-0.3, 0.3]");
  Require(hip_limit > 0.0 && hip_limit < 1.5, "gap: hip_limit must lie in (0, 1.5)");
  Require(soft_contact_stiffness > 0.0 && soft_contact_damping >= 0.0,
          "gap: soft contact needs stiffness > 0 and damping >= 0");
  if (soft_foot) {
    Require(soft_foot_stiffness > 0.0, "gap: soft foot stiffness must be > 0");
    Require(soft_foot_damping >= 0.0, "gap: soft foot damping must be >= 0");
  }
  for (double s : mass_scales) Require(s > 0.0, "gap: mass scales must be > 0");
}

bool operator==(const GapConfig& a, const GapConfig& b) {
  return a.contact == b.contact &&
         a.soft_contact_stiffness == b.soft_contact_stiffness &&
         a.soft_contact_damping == b.soft_contact_damping &&
         a.joint_limit == b.joint_limit && a.hip_limit == b.hip_limit &&
         a.armature == b.armature && a.latency == b.latency &&
         a.actuator == b.actuator && a.slope == b.slope &&
         a.mass_scales == b.mass_scales && a.soft_foot == b.soft_foot &&
         a.soft_foot_stiffness == b.soft_foot_stiffness &&
         a.soft_foot_damping == b.soft_foot_damping;
}

ContactImpulse ContactForceHard(double penetration, double normal_velocity,
                                double tangential_velocity, double friction,
                                double restitution,
                                const Eigen::Matrix2d& inverse_mass) {
  ContactImpulse out;
  out.position_correction = std::max(0.0, penetration);
  out.post_normal_velocity = normal_velocity;
  out.post_tangential_velocity = tangential_velocity;
  if (normal_velocity >= 0.0) return out;

  // Index 0 is tangential, 1 is normal.
  const Eigen::Matrix2d& w = inverse_mass;
  const Eigen::Vector2d target(-tangential_velocity,
                               -(1.0 + restitution) * normal_velocity);
  Eigen::Vector2d j = w.partialPivLu().solve(target);
  if (j[1] >= 0.0 && std::abs(j[0]) <= friction * j[1]) {
    out.sticking = true;
  } else {
    const double dir = j[0] > 0.0 ? 1.0 : -1.0;
    const double denom = w(1, 1) + dir * friction * w(1, 0);
    if (denom > 1e-12) {
      j[1] = target[1] / denom;
      j[0] = dir * friction * j[1];
    } else {
      j[1] = target[1] / w(1, 1);
      j[0] = 0.0;
    }
    if (j[1] < 0.0) j.setZero();
  }
  out.tangential = j[0];
  out.normal = j[1];
  const Eigen::Vector2d dv = w * j;
  out.post_tangential_velocity = tangential_velocity + dv[0];
  out.post_normal_velocity = normal_velocity + dv[1];
  return out;
}

ContactForce ContactForceSoft(double penetration, double penetration_rate,
                              double tangential_velocity, double stiffness,
                              double damping, double friction) {
  ContactForce f;
  if (penetration <= 0.0) return f;
  f.normal = std::max(0.0, stiffness * penetration + damping * penetration_rate);
  f.tangential =
      -friction * f.normal * std::tanh(tangential_velocity / kFrictionSmoothing);
  return f;
}

double JointLimitTorque(double q, double lo, double hi, JointLimitMode mode) {
  if (mode == JointLimitMode::kHard) return 0.0;
  if (q > hi) return kSoftLimitStiffness * (hi - q);
  if (q < lo) return kSoftLimitStiffness * (lo - q);
  return 0.0;
}

double ActuatorApply(double command, ActuatorModel model, double gain) {
  const double c = std::clamp(command, -1.0, 1.0);
  if (model == ActuatorModel::kLinear || std::abs(c) <= 0.5) return gain * c;
  const double mag = 0.5 + 0.4 * (std::abs(c) - 0.5);
  return gain * std::copysign(mag, c);
}

int LatencySteps(double latency, double control_period) {
  Require(latency >= 0.0 && control_period > 0.0,
          "latency: need latency >= 0 and a positive control period");
  return static_cast<int>(std::lround(latency / control_period));
}

LatencyQueue::LatencyQueue(int length, int action_dim)
    : queue_(static_cast<std::size_t>(std::max(0, length)), Vec::Zero(action_dim)) {}

Vec LatencyQueue::Push(const Vec& action) {
  if (queue_.empty()) return action;
  queue_.push_back(action);
  Vec out = std::move(queue_.front());
  queue_.pop_front();
  return out;
}

Eigen::Vector2d GravityVector(double slope) {
  Require(std::abs(slope) <= 0.3, "gravity_vector: |slope| must be <= 0.3");
  return {-kGravity * std::sin(slope), -kGravity * std::cos(slope)};
}

double RewardLocomotion(double forward_velocity, const Vec& action) {
  return forward_velocity - 0.001 * action.squaredNorm() + 1.0;
}

}  // namespace sotransfer::envs
