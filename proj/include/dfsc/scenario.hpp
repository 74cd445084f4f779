#pragma once

// Scenario files: JSON schema, validation and defaults.

#include "dfsc/geometry.hpp"
#include "dfsc/lmb.hpp"
#include "dfsc/objective.hpp"
#include "dfsc/optimizers.hpp"
#include "dfsc/truth.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfsc {

/// Malformed or invalid scenario. `where` is "line N" for syntax errors and a
/// JSON pointer such as "/sensors/2/profile/rho_max" for field errors.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

struct SensorSpec {
  SensorId id = 0;
  SensorPose pose;
  DetectionProfile profile;
  ActionCatalogue actions;
};

struct FilterConfig {
  int particles = 500;
  double r_birth = 0.03;
  double r_min = 1e-3;
  double r_estimate = 0.9;            // PIMS selection
  std::optional<double> r_report;     // reported estimates; r_estimate when unset
  double merge_dist = 10.0;
  double birth_position_sigma = 5.0;
  double birth_velocity_sigma = 10.0;
  double birth_omega_sigma = 0.05;
  int max_births = 5;
  double birth_assoc_threshold = 0.05;
  int gibbs_iterations = 1000;
  MotionModel motion;
};

struct OptimizerConfig {
  int iteration_cap = 20;
  DcdConfig dcd;
};

struct MetricsConfig {
  double c = 100.0;
  double p = 1.0;
  int window = 10;
};

struct Scenario {
  std::string name;
  int duration = 0;
  double dt = 1.0;
  double comm_range = 800.0;
  std::vector<SensorSpec> sensors;
  std::vector<TargetSpec> targets;
  double noise_sigma = 5.0;
  double clutter_rate = 5.0;
  ConstraintConfig constraints;
  OptimizerConfig optimizer;
  MetricsConfig metrics;
  FilterConfig filter;

  const SensorSpec& sensor(SensorId id) const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

}  // namespace dfsc
