#pragma once

// Small builders shared by the unit tests.

#include "dfsc/lmb.hpp"

#include <random>

namespace dfsc::test {

inline TrackLabel label(int k, SensorId s = 1, int i = 0) { return {k, s, i}; }

inline State state(double px, double py, double vx = 0.0, double vy = 0.0, double w = 0.0) {
  State x;
  x << px, py, vx, vy, w;
  return x;
}

/// n equally weighted particles, Gaussian position spread `sigma` around (px, py).
inline LabeledTrack gaussian_track(TrackLabel l, double r, double px, double py, double sigma, int n,
                                   Rng& rng, double vx = 0.0, double vy = 0.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  LabeledTrack t;
  t.label = l;
  t.r = r;
  t.particles.resize(kStateDim, n);
  for (int j = 0; j < n; ++j) {
    t.particles.col(j) = state(px + sigma * g(rng), py + sigma * g(rng), vx + g(rng), vy + g(rng));
  }
  t.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  return t;
}

/// All particles at one state.
inline LabeledTrack point_track(TrackLabel l, double r, const State& x, int n = 4) {
  LabeledTrack t;
  t.label = l;
  t.r = r;
  t.particles = x.replicate(1, n);
  t.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  return t;
}

}  // namespace dfsc::test

namespace dfsc::test {

/// Two sensors 400 m apart looking at two targets; cheap enough for full runs.
inline const char* kSmallScenario = R"({
  "name": "small",
  "duration": 8,
  "comm_range": 800,
  "profile": {"pd_max": 0.98, "rho_min": 0, "rho_max": 600, "lambda": 65, "theta_max_deg": 45},
  "actions": [{"id": 0}, {"id": 1, "dtheta_deg": 22.5}, {"id": 2, "dtheta_deg": -22.5}],
  "sensors": [
    {"id": 1, "x": 0, "y": 0, "theta_deg": 90},
    {"id": 2, "x": 400, "y": 0, "theta_deg": 90}
  ],
  "targets": [
    {"id": 1, "birth": 0, "death": 8, "state": [50, 250, 3, 0]},
    {"id": 2, "birth": 1, "death": 8, "state": [350, 300, -2, 1]}
  ],
  "noise": {"sigma": 5},
  "clutter": {"rate": 2},
  "constraints": {"psi_th": 0.99, "eta_th": 20, "d_th": 750, "rho_eps": 15},
  "filter": {"particles": 60, "r_report": 0.5, "merge_dist": 20}
})";

}  // namespace dfsc::test
