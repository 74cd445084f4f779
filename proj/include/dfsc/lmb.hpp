#pragma once

// Particle (SMC) labeled multi-Bernoulli density and its filter recursion.

#include "dfsc/geometry.hpp"
#include "dfsc/types.hpp"

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfsc {

/// (birth step, birth sensor, index within that sensor's births at that step).
/// Including the sensor keeps labels minted at different nodes disjoint.
struct TrackLabel {
  int birth_time = 0;
  SensorId sensor_id = 0;
  int birth_index = 0;

  friend auto operator<=>(const TrackLabel&, const TrackLabel&) = default;
  friend bool operator==(const TrackLabel&, const TrackLabel&) = default;
  std::string str() const;
};

struct LabeledTrack {
  TrackLabel label;
  double r = 0.0;
  ParticleMatrix particles;  // one state per column
  Eigen::VectorXd weights;

  Eigen::Index size() const { return particles.cols(); }
};

/// Tracks kept sorted by label; labels are unique.
class LmbDensity {
 public:
  LmbDensity() = default;
  explicit LmbDensity(std::vector<LabeledTrack> tracks);

  const std::vector<LabeledTrack>& tracks() const { return tracks_; }
  std::vector<LabeledTrack>& tracks() { return tracks_; }
  std::size_t size() const { return tracks_.size(); }
  bool empty() const { return tracks_.empty(); }

  const LabeledTrack* find(const TrackLabel& label) const;
  /// Inserts keeping label order; throws on a duplicate label.
  void insert(LabeledTrack track);
  std::vector<TrackLabel> labels() const;

 private:
  std::vector<LabeledTrack> tracks_;
};

class NumericalDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MotionKind { ConstantVelocity, ConstantTurn };

struct MotionModel {
  MotionKind kind = MotionKind::ConstantVelocity;
  double dt = 1.0;
  double sigma_accel = 1.0;   // m/s^2
  double sigma_omega = 0.02;  // rad/s, constant-turn only
  double survival_prob = 0.99;
};

/// Deterministic transition of one state; omega == 0 reduces constant-turn to constant-velocity.
State transition(const State& x, MotionKind kind, double dt);
/// Transition plus sampled process noise.
State sample_transition(const State& x, const MotionModel& model, Rng& rng);

struct BirthModel {
  int step = 0;
  SensorId sensor = 0;
  double r_birth = 0.03;
  int particles = 500;
  double position_sigma = 5.0;
  double velocity_sigma = 10.0;
  double omega_sigma = 0.05;
  std::vector<Position> positions;  // inverse-measurement positions from the previous scan
};

struct SensorModel {
  DetectionProfile profile;
  double noise_sigma = 5.0;
};

struct UpdateOptions {
  int exhaustive_max_tracks = 6;
  int exhaustive_max_measurements = 6;
  int gibbs_iterations = 1000;
  double gate_relative = 1e-12;      // drop pairings below this fraction of the peak likelihood
  double birth_assoc_threshold = 0.05;
  int max_births = 5;
};

struct UpdateResult {
  LmbDensity posterior;
  Eigen::VectorXd measurement_association;  // posterior prob. each z came from an existing track
  std::vector<int> birth_candidates;         // indices into Z, at most max_births
  bool used_gibbs = false;
};

// ---------------------------------------------------------------------------

double label_set_weight(const LmbDensity& density, const std::vector<TrackLabel>& labels);

using LabeledState = std::pair<TrackLabel, State>;

/// Multi-object density with kernel-density single-object terms; 0 for repeated or unknown labels.
double lmb_density_eval(const LmbDensity& density, const std::vector<LabeledState>& X);

/// Gaussian KDE of a track's particles over (px, py, vx, vy), Silverman bandwidth per axis.
class ParticleKde {
 public:
  explicit ParticleKde(const LabeledTrack& track);
  double operator()(const State& x) const;
  double log_density(const State& x) const;
  /// Leave-one-out density: particle `skip` dropped and the rest renormalised.
  double log_density_without(const State& x, Eigen::Index skip) const;

 private:
  double log_sum(const State& x, Eigen::Index skip) const;

  const LabeledTrack* track_;
  Eigen::Vector4d bandwidth_;
  double log_norm_;
};

LmbDensity predict(const LmbDensity& density, const MotionModel& model, const BirthModel& birth,
                   Rng& rng);

/// LMB -> GLMB -> LMB update. Empty Z with zero p_D everywhere is the identity.
UpdateResult update_with_births(const LmbDensity& density, const MeasurementSet& Z,
                                const SensorPose& pose, const SensorModel& sensor,
                                double clutter_intensity, Rng& rng,
                                const UpdateOptions& opts = {});

LmbDensity update(const LmbDensity& density, const MeasurementSet& Z, const SensorPose& pose,
                  const SensorModel& sensor, double clutter_intensity, Rng& rng,
                  const UpdateOptions& opts = {});

/// Z = {} update, used as the fallback when the association weights degenerate.
LmbDensity misdetection_update(const LmbDensity& density, const SensorPose& pose,
                               const SensorModel& sensor);

double eap_cardinality(const LmbDensity& density);
State eap_state(const LabeledTrack& track);

struct Estimate {
  TrackLabel label;
  State state;
};

/// Tracks with r >= threshold, highest r first, capped at round-half-up of the EAP cardinality.
std::vector<Estimate> extract_estimates(const LmbDensity& density, double r_threshold);

LmbDensity prune_resample(const LmbDensity& density, double r_min, int target_particles, Rng& rng);

/// Systematic resampling indices for normalized weights.
std::vector<Eigen::Index> systematic_resample(const Eigen::VectorXd& weights, int n, Rng& rng);

}  // namespace dfsc
