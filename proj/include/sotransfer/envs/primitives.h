#ifndef SOTRANSFER_ENVS_PRIMITIVES_H_
#define SOTRANSFER_ENVS_PRIMITIVES_H_

#include <deque>

#include "sotransfer/common.h"
#include "sotransfer/envs/gap.h"

namespace sotransfer::envs {

inline constexpr double kGravity = 9.81;
inline constexpr double kSoftLimitStiffness = 200.0;  // N m / rad
inline constexpr double kFrictionSmoothing = 0.01;    // m/s

// Result of resolving one point contact at the velocity level.
struct ContactImpulse {
  double normal = 0.0;      // j_n >= 0
  double tangential = 0.0;  // |j_t| <= friction * j_n
  double post_normal_velocity = 0.0;
  double post_tangential_velocity = 0.0;
  double position_correction = 0.0;  // distance to push the point out
  bool sticking = false;
};

// Complementarity-style resolution of a single contact. `normal_velocity` is
// positive when separating. `inverse_mass` maps (tangential, normal) impulses
// to velocity changes of the contact point; for a free point mass it is
// I / m. The normal impulse makes the post-impact normal velocity equal to
// -restitution times the approach velocity; the tangential impulse stops slip
// when the friction cone allows it and otherwise slides at the cone boundary.
ContactImpulse ContactForceHard(double penetration, double normal_velocity,
                                double tangential_velocity, double friction,
                                double restitution,
                                const Eigen::Matrix2d& inverse_mass);

struct ContactForce {
  double normal = 0.0;
  double tangential = 0.0;
};

// Penalty contact: f_n = max(0, k d + c d_dot) for d > 0, tangential force
// -friction * f_n * tanh(v_t / kFrictionSmoothing).
ContactForce ContactForceSoft(double penetration, double penetration_rate,
                              double tangential_velocity, double stiffness,
                              double damping, double friction);

// Soft mode: restoring torque kSoftLimitStiffness * violation. Hard mode
// returns zero; the integrator projects onto the limit instead.
double JointLimitTorque(double q, double lo, double hi, JointLimitMode mode);

// Torque or thrust for a command in [-1, 1] (clipped). The piecewise model
// follows the linear one up to |command| = 0.5 and then rises with slope 0.4.
double ActuatorApply(double command, ActuatorModel model, double gain);

// Queue length for a latency, rounded to the nearest control step.
int LatencySteps(double latency, double control_period);

// FIFO of pending actions. With length 0 actions pass straight through.
class LatencyQueue {
 public:
  LatencyQueue() = default;
  LatencyQueue(int length, int action_dim);
  Vec Push(const Vec& action);
  int length() const { return static_cast<int>(queue_.size()); }
  const std::deque<Vec>& pending() const { return queue_; }

 private:
  std::deque<Vec> queue_;
};

// Gravity rotated by the slope angle: (-g sin a, -g cos a).
Eigen::Vector2d GravityVector(double slope);

// v - 0.001 |a|^2 + 1
double RewardLocomotion(double forward_velocity, const Vec& action);

}  // namespace sotransfer::envs

#endif  // SOTRANSFER_ENVS_PRIMITIVES_H_
