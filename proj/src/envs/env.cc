#include "sotransfer/envs/env.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace sotransfer::envs {

namespace {

// pendulum_x nominal constants
constexpr double kPendulumMass = 1.0;
constexpr double kPendulumLength = 1.0;
constexpr double kPendulumTorque = 5.0;

// hopper_lite nominal constants
constexpr double kTorsoMass = 3.0;
constexpr double kFootMass = 0.5;
constexpr double kHipGain = 15.0;       // N m at full command
constexpr double kThrustGain = 60.0;    // N at full command
constexpr double kLegStiffness = 600.0; // N/m
constexpr double kRestLength = 1.0;
constexpr double kMinLength = 0.5;
constexpr double kMaxLength = 1.0;
constexpr double kStandHeight = 1.0;
constexpr double kFallHeight = 0.45 * kStandHeight;
constexpr double kFallAngle = 1.0;
constexpr double kContactTolerance = 1e-6;

double WrapAngle(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

}  // namespace

struct Env::Physics {
  Eigen::Vector2d gravity;
  double armature = 0.0;
  ActuatorModel actuator = ActuatorModel::kLinear;
  JointLimitMode limit_mode = JointLimitMode::kHard;

  // pendulum
  double mass = 1.0;
  double length = 1.0;
  double damping = 0.1;
  double torque_max = kPendulumTorque;

  // hopper
  double m_torso = kTorsoMass;
  double m_foot = kFootMass;
  double friction = 0.8;
  double restitution = 0.0;
  double joint_damping = 1.0;
  double strength = 1.0;
  double hip_limit = 0.8;
  bool penalty_contact = false;
  double contact_k = 0.0;
  double contact_c = 0.0;
};

namespace {

using Physics = Env::Physics;
using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;
using Mat24 = Eigen::Matrix<double, 2, 4>;

Physics Resolve(const EnvConfig& config, const DynParams& mu) {
  const GapConfig& gap = config.gap;
  Physics p;
  p.gravity = GravityVector(gap.slope);
  p.armature = gap.armature;
  p.actuator = gap.actuator;
  p.limit_mode = gap.joint_limit;
  auto get = [&](const char* name) {
    return mu.Get(name, FindParam(config.kind, name).nominal);
  };
  if (config.kind == EnvKind::kPendulum) {
    p.mass = kPendulumMass * get("mass") * gap.MassScale(0);
    p.length = kPendulumLength * get("length");
    p.damping = get("damping");
    p.torque_max = kPendulumTorque * get("torque_gain");
    return p;
  }
  p.m_torso = kTorsoMass * get("torso_mass") * gap.MassScale(0);
  p.m_foot = kFootMass * get("foot_mass") * gap.MassScale(1);
  p.friction = get("friction");
  p.restitution = get("restitution");
  p.joint_damping = get("joint_damping");
  p.strength = get("strength");
  p.hip_limit = gap.hip_limit;
  if (gap.soft_foot) {
    p.penalty_contact = true;
    p.contact_k = gap.soft_foot_stiffness;
    p.contact_c = gap.soft_foot_damping;
  } else if (gap.contact == ContactBackend::kSoft) {
    p.penalty_contact = true;
    p.contact_k = gap.soft_contact_stiffness;
    p.contact_c = gap.soft_contact_damping;
  }
  return p;
}

// ---------------------------------------------------------------- pendulum

double PendulumInertia(const Physics& p) {
  return p.mass * p.length * p.length + p.armature;
}

double PendulumAcceleration(const Physics& p, double theta, double omega,
                            double torque) {
  const double gravity_torque =
      p.mass * p.length *
      (p.gravity.x() * std::cos(theta) + p.gravity.y() * std::sin(theta));
  return (gravity_torque - p.damping * omega + torque) / PendulumInertia(p);
}

void PendulumSubstep(const Physics& p, EnvState& s, const Vec& command,
                     double dt, double& peak) {
  const double torque = ActuatorApply(command[0], p.actuator, p.torque_max);
  peak = std::max(peak, std::abs(torque));
  s.v[0] += dt * PendulumAcceleration(p, s.q[0], s.v[0], torque);
  s.q[0] += dt * s.v[0];
}

// ------------------------------------------------------------------ hopper

struct HopperTerms {
  Mat4 mass;
  Vec4 force;
  Mat24 foot_jacobian;
  Eigen::Vector2d foot_pos;
  Eigen::Vector2d foot_vel;
};

Mat24 FootJacobian(double theta, double length) {
  const double s = std::sin(theta), c = std::cos(theta);
  Mat24 j;
  j << 1.0, 0.0, length * c, s,
       0.0, 1.0, length * s, -c;
  return j;
}

Eigen::Vector2d FootPosition(const Vec& q) {
  return {q[0] + q[3] * std::sin(q[2]), q[1] - q[3] * std::cos(q[2])};
}

// Mass matrix and generalized forces without contact. torque/thrust are the
// actuator outputs.
HopperTerms HopperDynamics(const Physics& p, const Vec& q, const Vec& v,
                           double torque, double thrust) {
  const double th = q[2], len = q[3];
  const double thd = v[2], ld = v[3];
  const double s = std::sin(th), c = std::cos(th);
  HopperTerms t;
  t.foot_jacobian = FootJacobian(th, len);
  const Mat24& j = t.foot_jacobian;
  t.foot_pos = FootPosition(q);
  t.foot_vel = j * Vec4(v);

  t.mass.setZero();
  t.mass(0, 0) = t.mass(1, 1) = p.m_torso;
  t.mass.noalias() += p.m_foot * j.transpose() * j;
  t.mass(2, 2) += p.armature;
  t.mass(3, 3) += p.armature;

  // Velocity-product part of the foot acceleration.
  const Eigen::Vector2d jdot_v(2.0 * ld * thd * c - len * thd * thd * s,
                               2.0 * ld * thd * s + len * thd * thd * c);
  t.force.setZero();
  t.force.head<2>() = p.m_torso * p.gravity;
  t.force.noalias() += j.transpose() * (p.m_foot * (p.gravity - jdot_v));
  t.force[2] += torque - p.joint_damping * thd +
                JointLimitTorque(th, -p.hip_limit, p.hip_limit, p.limit_mode);
  t.force[3] += thrust + kLegStiffness * (kRestLength - len) -
                p.joint_damping * ld;
  return t;
}

void ProjectJoints(const Physics& p, Vec4& q) {
  q[3] = std::clamp(q[3], kMinLength, kMaxLength);
  if (p.limit_mode == JointLimitMode::kHard) {
    q[2] = std::clamp(q[2], -p.hip_limit, p.hip_limit);
  }
}

void HopperSubstep(const Physics& p, EnvState& s, const Vec& command, double dt,
                   double& peak, double& normal_force) {
  const double torque = ActuatorApply(command[0], p.actuator, kHipGain * p.strength);
  const double thrust = ActuatorApply(command[1], p.actuator, kThrustGain * p.strength);
  peak = std::max({peak, std::abs(torque), std::abs(thrust)});

  HopperTerms t = HopperDynamics(p, s.q, s.v, torque, thrust);
  double fn = 0.0;
  if (p.penalty_contact) {
    const double pen = -t.foot_pos.y();
    if (pen > 0.0) {
      const ContactForce f = ContactForceSoft(pen, -t.foot_vel.y(), t.foot_vel.x(),
                                              p.contact_k, p.contact_c, p.friction);
      t.force.noalias() += t.foot_jacobian.transpose() *
                           Eigen::Vector2d(f.tangential, f.normal);
      fn = f.normal;
    }
  }

  const Eigen::LDLT<Mat4> solver(t.mass);
  Vec4 v = s.v;
  v += dt * solver.solve(t.force);

  // Joint stops: generalized impulse that lands the joint exactly on its limit.
  auto stop = [&](int i, double lo, double hi) {
    const double next = s.q[i] + dt * v[i];
    double bound = 0.0;
    if (next > hi && v[i] > 0.0) bound = hi;
    else if (next < lo && v[i] < 0.0) bound = lo;
    else return;
    const double target = (bound - s.q[i]) / dt;
    const Vec4 col = solver.solve(Vec4::Unit(i));
    v -= col * ((v[i] - target) / col[i]);
  };
  stop(3, kMinLength, kMaxLength);
  if (p.limit_mode == JointLimitMode::kHard) stop(2, -p.hip_limit, p.hip_limit);

  if (!p.penalty_contact && t.foot_pos.y() <= kContactTolerance) {
    const Eigen::Vector2d vf = t.foot_jacobian * v;
    if (vf.y() < 0.0) {
      const Eigen::Matrix<double, 4, 2> minv_jt =
          solver.solve(t.foot_jacobian.transpose());
      const Eigen::Matrix2d w = t.foot_jacobian * minv_jt;
      const double e = s.in_contact ? 0.0 : p.restitution;
      const ContactImpulse imp = ContactForceHard(
          -t.foot_pos.y(), vf.y(), vf.x(), p.friction, e, w);
      v += minv_jt * Eigen::Vector2d(imp.tangential, imp.normal);
      fn = imp.normal / dt;
    }
  }

  Vec4 q = s.q;
  q += dt * v;
  ProjectJoints(p, q);
  if (!p.penalty_contact) {
    double foot_z = FootPosition(q).y();
    if (foot_z < 0.0) {
      const Eigen::Matrix<double, 1, 4> jn = FootJacobian(q[2], q[3]).row(1);
      const Vec4 dir = solver.solve(Vec4(jn.transpose()));
      q += dir * (-foot_z / jn.dot(dir));
      ProjectJoints(p, q);
      foot_z = FootPosition(q).y();
      if (foot_z < 0.0) q[1] -= foot_z;
    }
  }
  s.q = q;
  s.v = v;

  const double foot_z = FootPosition(s.q).y();
  s.penetration = std::max(0.0, -foot_z);
  s.in_contact = p.penalty_contact ? foot_z < 0.0 : foot_z <= kContactTolerance;
  normal_force += fn;
}

double HopperEnergy(const Physics& p, const Vec& q, const Vec& v) {
  const HopperTerms t = HopperDynamics(p, q, v, 0.0, 0.0);
  const double kinetic = 0.5 * v.dot(t.mass * v);
  const Eigen::Vector2d torso(q[0], q[1]);
  const double potential = -p.m_torso * p.gravity.dot(torso) -
                           p.m_foot * p.gravity.dot(t.foot_pos);
  const double spring = 0.5 * kLegStiffness * std::pow(kRestLength - q[3], 2);
  return kinetic + potential + spring;
}

}  // namespace

// ------------------------------------------------------------------ config

std::vector<std::string> HopperPreset(int dim_mu) {
  switch (dim_mu) {
    case 0: return {};
    case 2: return {"foot_mass", "restitution"};
    case 5: return {"foot_mass", "restitution", "friction", "torso_mass", "strength"};
    case 6:
      return {"foot_mass", "restitution", "friction", "torso_mass", "strength",
              "joint_damping"};
    default:
      throw ConfigError("hopper dim(mu) preset must be 0, 2, 5 or 6, got " +
                        std::to_string(dim_mu));
  }
}

EnvConfig EnvConfig::Pendulum() {
  EnvConfig c;
  c.kind = EnvKind::kPendulum;
  c.dt_sim = 0.01;
  c.substeps = 1;
  c.active = {"mass", "length", "damping", "torque_gain"};
  c.horizon = 200;
  c.init_noise = 0.1;
  return c;
}

EnvConfig EnvConfig::Hopper(int dim_mu) {
  EnvConfig c;
  c.kind = EnvKind::kHopper;
  c.dt_sim = 0.002;
  c.substeps = 4;
  c.active = HopperPreset(dim_mu);
  c.horizon = 1000;
  c.init_noise = 0.005;
  return c;
}

ParamRange EnvConfig::RangeOf(const std::string& name) const {
  auto it = range_overrides.find(name);
  if (it != range_overrides.end()) return it->second;
  return FindParam(kind, name).range;
}

std::vector<ParamRange> EnvConfig::ActiveRanges() const {
  std::vector<ParamRange> ranges;
  for (const std::string& n : active) ranges.push_back(RangeOf(n));
  return ranges;
}

void EnvConfig::Validate() const {
  Require(dt_sim > 0.0, "env: dt_sim must be > 0");
  Require(substeps >= 1, "env: substeps must be >= 1");
  Require(horizon >= 1, "env: horizon must be >= 1");
  Require(gamma > 0.0 && gamma <= 1.0, "env: gamma must lie in (0, 1]");
  Require(init_noise >= 0.0, "env: init_noise must be >= 0");
  Require(kind == EnvKind::kHopper || init_noise <= 1.0,
          "env: pendulum init_noise must be <= 1");
  Require(kind == EnvKind::kPendulum || init_noise <= 0.015,
          "env: hopper init_noise must be <= 0.015 (foot starts 2 cm up)");
  Require(reward == RewardMode::kDense || kind == EnvKind::kHopper,
          "env: sparse reward is only defined for the hopper");
  gap.Validate();
  for (std::size_t i = 0; i < active.size(); ++i) {
    FindParam(kind, active[i]);
    for (std::size_t j = 0; j < i; ++j) {
      Require(active[i] != active[j], "env: duplicate active parameter " + active[i]);
    }
  }
  for (const auto& [name, r] : range_overrides) {
    FindParam(kind, name);
    Require(r.lo <= r.hi, "env: range override for " + name + " has lo > hi");
  }
}

DynParams SampleDynamics(const EnvConfig& config, Rng& rng) {
  return SampleDynamics(config.active, config.ActiveRanges(), rng);
}

DynParams NominalDynamics(const EnvConfig& config) {
  Vec values(static_cast<Eigen::Index>(config.active.size()));
  for (std::size_t i = 0; i < config.active.size(); ++i) {
    const ParamRange r = config.RangeOf(config.active[i]);
    values[i] = std::clamp(FindParam(config.kind, config.active[i]).nominal, r.lo, r.hi);
  }
  return DynParams{config.active, values, config.ActiveRanges()};
}

DynParams MakeDynamics(const EnvConfig& config, const Vec& values) {
  Require(values.size() == static_cast<Eigen::Index>(config.active.size()),
          "make_dynamics: dimension mismatch");
  return DynParams{config.active, values, config.ActiveRanges()};
}

// --------------------------------------------------------------------- env

Env::Env(EnvConfig config) : config_(std::move(config)) { config_.Validate(); }

int Env::ObservationSize() const {
  return config_.kind == EnvKind::kPendulum ? 3 : 11;
}

int Env::ActionSize() const { return config_.kind == EnvKind::kPendulum ? 1 : 2; }

Observation Env::Reset(const DynParams& mu, Rng& rng) {
  mu.Validate();
  Require(mu.names == config_.active,
          "reset: dynamics dimensions do not match the active set");
  mu_ = mu;
  phys_ = std::make_shared<const Physics>(Resolve(config_, mu_));

  const double w = config_.init_noise;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto jitter = [&]() { return w > 0.0 ? w * unit(rng) : 0.0; };

  state_ = EnvState{};
  if (config_.kind == EnvKind::kPendulum) {
    state_.q = Vec::Constant(1, jitter());
    state_.v = Vec::Constant(1, jitter());
  } else {
    state_.q = Vec(4);
    state_.v = Vec(4);
    state_.q << 0.0, kStandHeight, 0.0, 0.98;
    for (int i = 1; i < 4; ++i) state_.q[i] += jitter();
    for (int i = 0; i < 4; ++i) state_.v[i] = jitter();
    state_.in_contact = FootPosition(state_.q).y() <= kContactTolerance;
  }
  state_.start_x = state_.q[0];
  state_.latency = LatencyQueue(
      LatencySteps(config_.gap.latency, config_.ControlPeriod()), ActionSize());
  ready_ = true;
  return Observe();
}

StepResult Env::Step(const Vec& action) {
  if (!ready_) throw ProtocolError("step: call reset first");
  if (state_.terminated) throw ProtocolError("step: episode already ended, reset first");
  Require(action.size() == ActionSize(), "step: action has wrong dimension");
  Require(action.allFinite(), "step: non-finite action");
  const Vec command = action.cwiseMax(-1.0).cwiseMin(1.0);
  const Vec applied = state_.latency.Push(command);

  const Physics& p = *phys_;
  const double dt = config_.dt_sim;
  const double x_before = state_.q[0];
  double peak = 0.0;
  double normal_sum = 0.0;
  for (int k = 0; k < config_.substeps; ++k) {
    if (config_.kind == EnvKind::kPendulum) {
      PendulumSubstep(p, state_, applied, dt, peak);
    } else {
      HopperSubstep(p, state_, applied, dt, peak, normal_sum);
    }
  }
  state_.normal_force = normal_sum / config_.substeps;
  state_.time += dt * config_.substeps;
  ++state_.steps;
  if (!state_.q.allFinite() || !state_.v.allFinite()) {
    throw RuntimeFailure("step: simulation state became non-finite");
  }

  StepResult r;
  r.info.peak_actuation = peak;
  r.info.in_contact = state_.in_contact;
  if (config_.kind == EnvKind::kPendulum) {
    const double err = WrapAngle(state_.q[0] - std::numbers::pi);
    r.reward = -(err * err + 0.1 * state_.v[0] * state_.v[0] +
                 0.001 * command.squaredNorm());
    r.info.forward_velocity = state_.v[0];
  } else {
    const double vel = (state_.q[0] - x_before) / config_.ControlPeriod();
    r.info.forward_velocity = vel;
    r.reward = RewardLocomotion(vel, command);
    if (config_.early_termination) {
      r.terminated = state_.q[1] < kFallHeight || std::abs(state_.q[2]) > kFallAngle;
    }
  }
  r.truncated = !r.terminated && state_.steps >= config_.horizon;
  if (config_.reward == RewardMode::kSparse) {
    r.reward = r.Done() ? state_.q[0] - state_.start_x : 0.0;
  }
  state_.terminated = r.Done();
  r.observation = Observe();
  return r;
}

Observation Env::Observe() const {
  const EnvState& s = state_;
  if (config_.kind == EnvKind::kPendulum) {
    Observation o(3);
    o << std::cos(s.q[0]), std::sin(s.q[0]), s.v[0];
    return o;
  }
  constexpr double kNominalWeight = (kTorsoMass + kFootMass) * kGravity;
  Observation o(11);
  o << s.q[1], s.v[1], s.v[0], s.q[2], s.v[2], s.q[3], s.v[3],
      s.in_contact ? 1.0 : 0.0, std::sin(s.q[2]), std::cos(s.q[2]),
      s.normal_force / kNominalWeight;
  return o;
}

double Env::MechanicalEnergy() const {
  Require(ready_, "energy: call reset first");
  const Physics& p = *phys_;
  if (config_.kind == EnvKind::kPendulum) {
    const double th = state_.q[0];
    const Eigen::Vector2d bob(p.length * std::sin(th), -p.length * std::cos(th));
    return 0.5 * PendulumInertia(p) * state_.v[0] * state_.v[0] -
           p.mass * p.gravity.dot(bob);
  }
  return HopperEnergy(p, state_.q, state_.v);
}

Vec Env::FreeAcceleration() const {
  Require(ready_, "acceleration: call reset first");
  const Physics& p = *phys_;
  if (config_.kind == EnvKind::kPendulum) {
    return Vec::Constant(1, PendulumAcceleration(p, state_.q[0], state_.v[0], 0.0));
  }
  const HopperTerms t = HopperDynamics(p, state_.q, state_.v, 0.0, 0.0);
  return t.mass.ldlt().solve(t.force);
}

double ObservationReward(const EnvConfig& config, const Observation& next,
                         const Vec& action) {
  const Vec command = action.cwiseMax(-1.0).cwiseMin(1.0);
  if (config.kind == EnvKind::kPendulum) {
    const double theta = std::atan2(next[1], next[0]);
    const double err = WrapAngle(theta - std::numbers::pi);
    return -(err * err + 0.1 * next[2] * next[2] + 0.001 * command.squaredNorm());
  }
  return RewardLocomotion(next[2], command);
}

bool ObservationTerminal(const EnvConfig& config, const Observation& next) {
  if (config.kind == EnvKind::kPendulum || !config.early_termination) return false;
  return next[0] < kFallHeight || std::abs(next[3]) > kFallAngle;
}

double ObservationVelocity(const EnvConfig& config, const Observation& next) {
  return config.kind == EnvKind::kPendulum ? 0.0 : next[2];
}

}  // namespace sotransfer::envs
