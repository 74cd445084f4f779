#include "dfsc/geometry.hpp"

#include <algorithm>

namespace dfsc {

bool DetectionProfile::valid() const {
  return pd_max > 0.0 && pd_max <= 1.0 && rho_min >= 0.0 && rho_min < rho_max &&
         lambda_taper > 0.0 && theta_max > 0.0 && theta_max <= std::numbers::pi;
}

double DetectionProfile::fov_area() const {
  return theta_max * (rho_max * rho_max - rho_min * rho_min);
}

SensorPose apply_command(const SensorPose& pose, const ControlCommand& cmd) {
  return {pose.px + cmd.dx, pose.py + cmd.dy, wrap_angle(pose.theta + cmd.dtheta)};
}

std::vector<Detection> generate_detections(const SensorPose& pose, const DetectionProfile& profile,
                                           const std::vector<Position>& targets,
                                           double noise_sigma, double clutter_rate, Rng& rng) {
  std::vector<Detection> out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double pd = detection_probability(profile, pose, targets[i]);
    if (pd <= 0.0 || unit(rng) >= pd) continue;
    Measurement z = to_sensor_frame(pose, targets[i]);
    if (noise_sigma > 0.0) {
      z.x() += noise_sigma * noise(rng);
      z.y() += noise_sigma * noise(rng);
    }
    out.push_back({z, static_cast<int>(i)});
  }

  if (clutter_rate > 0.0) {
    const int n_clutter = std::poisson_distribution<int>(clutter_rate)(rng);
    const double r2_lo = profile.rho_min * profile.rho_min;
    const double r2_hi = profile.rho_max * profile.rho_max;
    for (int c = 0; c < n_clutter; ++c) {
      // area-uniform over the annular sector
      const double rho = std::sqrt(r2_lo + (r2_hi - r2_lo) * unit(rng));
      const double bearing = profile.theta_max * (2.0 * unit(rng) - 1.0);
      out.push_back({{rho * std::cos(bearing), rho * std::sin(bearing)}, -1});
    }
  }

  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

MeasurementSet measurements_of(const std::vector<Detection>& detections) {
  MeasurementSet z;
  z.reserve(detections.size());
  for (const auto& d : detections) z.push_back(d.z);
  return z;
}

}  // namespace dfsc
