#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <random>

namespace dfsc {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Position = Vec2<double>;

// Single-object state: (px, py, vx, vy, omega). Constant-velocity models keep omega at 0.
constexpr int kStateDim = 5;
using State = Eigen::Matrix<double, kStateDim, 1>;
using ParticleMatrix = Eigen::Matrix<double, kStateDim, Eigen::Dynamic>;

using Rng = std::mt19937_64;

using SensorId = int;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  a = std::remainder(a, Scalar(2) * pi);
  if (a <= -pi) a += Scalar(2) * pi;
  return a;
}

template <typename Scalar>
constexpr Scalar deg2rad(Scalar d) {
  return d * std::numbers::pi_v<Scalar> / Scalar(180);
}

inline Position position_of(const State& x) { return x.head<2>(); }

}  // namespace dfsc
