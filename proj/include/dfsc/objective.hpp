#pragma once

// Scoring of a hypothesised multi-sensor command at one node: predicted ideal
// measurement sets, noise-free pseudo-update, pseudo-fusion, the approximated
// KLD reward with dropped-track penalty, and the feasibility constraints.

#include "dfsc/fusion.hpp"
#include "dfsc/geometry.hpp"
#include "dfsc/lmb.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

namespace dfsc {

using MultiSensorCommand = std::map<SensorId, ControlCommand>;
using ExistenceMap = std::map<TrackLabel, double>;
using PositionMap = std::map<SensorId, Position>;

enum class VoidDirection {
  AtLeast,  // psi >= psi_th: exclusion disc must be empty with high probability
  Below,    // psi < psi_th
};

struct ConstraintConfig {
  double psi_th = 0.99;
  double eta_th = 20.0;
  double d_th = 750.0;
  double rho_eps = 15.0;
  VoidDirection void_direction = VoidDirection::AtLeast;
};

class DivergenceInfinite : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Existence values inside log terms are clamped to [kLogGuard, 1 - kLogGuard].
constexpr double kLogGuard = 1e-12;

// --- PIMS and pseudo-update -------------------------------------------------

MeasurementSet compute_pims(const LmbDensity& predicted, const SensorPose& hyp_pose,
                            const DetectionProfile& profile, double r_threshold);

/// Update against PIMS with zero clutter. Deterministic: the association rng is
/// seeded with a constant, and PIMS-scale clusters are enumerated exhaustively.
LmbDensity pseudo_update(const LmbDensity& predicted, const MeasurementSet& pims,
                         const SensorPose& hyp_pose, const SensorModel& sensor);

// --- divergences ------------------------------------------------------------

template <typename Scalar>
Scalar kld_univariate_normal(Scalar mu_p, Scalar sigma_p, Scalar mu_q, Scalar sigma_q) {
  if (!(sigma_p > Scalar(0)) || !(sigma_q > Scalar(0))) {
    throw std::invalid_argument("standard deviations must be positive");
  }
  const Scalar dm = mu_p - mu_q;
  return std::log(sigma_q / sigma_p) + (sigma_p * sigma_p + dm * dm) / (Scalar(2) * sigma_q * sigma_q) -
         Scalar(0.5);
}

/// Bernoulli KLD r_post || r_prior with guarded logs.
double bernoulli_kld(double r_post, double r_prior);

/// Full LMB KLD, posterior || prior; single-object terms estimated by KDE over
/// posterior particles. Prior labels missing from the posterior count as r = 0.
double kld_lmb_closed_form(const LmbDensity& posterior, const LmbDensity& prior);

/// Spatial KLD between two particle clouds, KDE-estimated and floored at 0.
double kld_particles(const LabeledTrack& posterior, const LabeledTrack& prior);

/// Existence-only KLD over labels present in both; absent labels are left to the penalty.
double approx_kld(const ExistenceMap& posterior, const ExistenceMap& prior);
double approx_kld(const LmbDensity& posterior, const LmbDensity& prior);

/// Sum of log(1 - r) over prior labels missing from the posterior. -inf when a
/// dropped label has r = 1.
double penalty(const ExistenceMap& prior, const ExistenceMap& posterior);
double penalty(const LmbDensity& prior, const LmbDensity& posterior);

double objective(const ExistenceMap& prior, const ExistenceMap& fused_pseudo);
double objective(const LmbDensity& prior, const LmbDensity& fused_pseudo);

ExistenceMap existence_map(const LmbDensity& density);

// --- constraints --------------------------------------------------------------

/// Probability that no object lies within rho_eps of the hypothesised sensor position.
double void_probability(const LmbDensity& fused_pseudo, const SensorPose& hyp_pose, double rho_eps);
double void_probability(std::span<const TrackSummary> fused_pseudo);

/// Weight of a particle cloud within `radius` of `centre`.
double mass_within(const ParticleMatrix& particles, const Eigen::VectorXd& weights,
                   const Position& centre, double radius);

/// Distance to the nearest other sensor; nullopt for a singleton network.
std::optional<double> sparsity(const PositionMap& positions_after, SensorId self);

/// Whether some other sensor is strictly closer than d_th; nullopt for a singleton network.
std::optional<bool> connectivity(const PositionMap& positions_after, SensorId self, double d_th);

struct ConstraintValues {
  double void_prob = 1.0;
  std::optional<double> sparsity;
  std::optional<bool> connected;
};

bool void_ok(double void_prob, const ConstraintConfig& cfg);
bool feasible(const ConstraintValues& v, const ConstraintConfig& cfg);

/// Number of constraint groups that must be relaxed before the candidate is
/// admissible: 0 feasible, 1 needs connectivity dropped, 2 needs the void
/// constraint dropped too, 3 only admissible with sensor spacing ignored.
int relaxation_level(const ConstraintValues& v, const ConstraintConfig& cfg);

}  // namespace dfsc
