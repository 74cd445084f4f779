#include "dfsc/objective.hpp"

#include <algorithm>
#include <limits>

namespace dfsc {

MeasurementSet compute_pims(const LmbDensity& predicted, const SensorPose& hyp_pose,
                            const DetectionProfile& profile, double r_threshold) {
  MeasurementSet pims;
  for (const Estimate& e : extract_estimates(predicted, r_threshold)) {
    const Position p = position_of(e.state);
    if (detection_probability(profile, hyp_pose, p) > 0.0) {
      pims.push_back(to_sensor_frame(hyp_pose, p));
    }
  }
  return pims;
}

LmbDensity pseudo_update(const LmbDensity& predicted, const MeasurementSet& pims,
                         const SensorPose& hyp_pose, const SensorModel& sensor) {
  Rng rng(0x9e3779b97f4a7c15ULL);
  return update(predicted, pims, hyp_pose, sensor, 0.0, rng);
}

double bernoulli_kld(double r_post, double r_prior) {
  const double a = std::clamp(r_post, kLogGuard, 1.0 - kLogGuard);
  const double b = std::clamp(r_prior, kLogGuard, 1.0 - kLogGuard);
  return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
}

double kld_particles(const LabeledTrack& posterior, const LabeledTrack& prior) {
  const ParticleKde p_post(posterior);
  const ParticleKde p_prior(prior);
  // A KDE evaluated at its own particles is dominated by the self kernel in 4D;
  // drop it, and do the same for the prior when both share one particle set
  // (the pseudo-update only reweights).
  const bool shared = prior.particles.cols() == posterior.particles.cols() && prior.particles == posterior.particles;
  double d = 0.0;
  for (Eigen::Index j = 0; j < posterior.particles.cols(); ++j) {
    const double w = posterior.weights[j];
    if (w <= 0.0) continue;
    const State x = posterior.particles.col(j);
    const double lq = shared ? p_prior.log_density_without(x, j) : p_prior.log_density(x);
    d += w * (p_post.log_density_without(x, j) - lq);
  }
  return std::max(0.0, d);
}

double kld_lmb_closed_form(const LmbDensity& posterior, const LmbDensity& prior) {
  for (const auto& t : posterior.tracks()) {
    if (!prior.find(t.label) && t.r > 0.0) {
      throw DivergenceInfinite("posterior label " + t.label.str() + " has no prior mass");
    }
  }
  double d = 0.0;
  for (const auto& pr : prior.tracks()) {
    const LabeledTrack* po = posterior.find(pr.label);
    const double r_post = po ? po->r : 0.0;
    if ((pr.r <= 0.0 && r_post > 0.0) || (pr.r >= 1.0 && r_post < 1.0)) {
      throw DivergenceInfinite("prior existence of " + pr.label.str() + " is degenerate");
    }
    d += bernoulli_kld(r_post, pr.r);
    if (po && r_post > 0.0) d += r_post * kld_particles(*po, pr);
  }
  return d;
}

ExistenceMap existence_map(const LmbDensity& density) {
  ExistenceMap m;
  for (const auto& t : density.tracks()) m.emplace(t.label, t.r);
  return m;
}

double approx_kld(const ExistenceMap& posterior, const ExistenceMap& prior) {
  double d = 0.0;
  for (const auto& [label, r_prior] : prior) {
    auto it = posterior.find(label);
    if (it == posterior.end()) continue;
    d += bernoulli_kld(it->second, r_prior);
  }
  return d;
}

double approx_kld(const LmbDensity& posterior, const LmbDensity& prior) {
  return approx_kld(existence_map(posterior), existence_map(prior));
}

double penalty(const ExistenceMap& prior, const ExistenceMap& posterior) {
  double phi = 0.0;
  for (const auto& [label, r_prior] : prior) {
    if (posterior.contains(label)) continue;
    if (r_prior >= 1.0) return -std::numeric_limits<double>::infinity();
    phi += std::log(1.0 - r_prior);
  }
  return phi;
}

double penalty(const LmbDensity& prior, const LmbDensity& posterior) {
  return penalty(existence_map(prior), existence_map(posterior));
}

double objective(const ExistenceMap& prior, const ExistenceMap& fused_pseudo) {
  const double phi = penalty(prior, fused_pseudo);
  if (phi == -std::numeric_limits<double>::infinity()) return phi;
  return approx_kld(fused_pseudo, prior) + phi;
}

double objective(const LmbDensity& prior, const LmbDensity& fused_pseudo) {
  return objective(existence_map(prior), existence_map(fused_pseudo));
}

double mass_within(const ParticleMatrix& particles, const Eigen::VectorXd& weights,
                   const Position& centre, double radius) {
  const double r2 = radius * radius;
  double m = 0.0;
  for (Eigen::Index j = 0; j < particles.cols(); ++j) {
    if ((particles.col(j).head<2>() - centre).squaredNorm() <= r2) m += weights[j];
  }
  return m;
}

double void_probability(const LmbDensity& fused_pseudo, const SensorPose& hyp_pose, double rho_eps) {
  if (!(rho_eps > 0.0)) throw std::invalid_argument("rho_eps must be positive");
  double psi = 1.0;
  for (const auto& t : fused_pseudo.tracks()) {
    psi *= 1.0 - t.r * mass_within(t.particles, t.weights, hyp_pose.position(), rho_eps);
  }
  return std::clamp(psi, 0.0, 1.0);
}

double void_probability(std::span<const TrackSummary> fused_pseudo) {
  double psi = 1.0;
  for (const auto& t : fused_pseudo) psi *= 1.0 - t.r * t.exclusion_mass;
  return std::clamp(psi, 0.0, 1.0);
}

std::optional<double> sparsity(const PositionMap& positions_after, SensorId self) {
  const auto me = positions_after.find(self);
  if (me == positions_after.end() || positions_after.size() < 2) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [id, p] : positions_after) {
    if (id != self) best = std::min(best, (p - me->second).norm());
  }
  return best;
}

std::optional<bool> connectivity(const PositionMap& positions_after, SensorId self, double d_th) {
  if (!(d_th > 0.0)) throw std::invalid_argument("d_th must be positive");
  const auto nearest = sparsity(positions_after, self);
  if (!nearest) return std::nullopt;
  return *nearest < d_th;
}

bool void_ok(double void_prob, const ConstraintConfig& cfg) {
  return cfg.void_direction == VoidDirection::AtLeast ? void_prob >= cfg.psi_th
                                                      : void_prob < cfg.psi_th;
}

int relaxation_level(const ConstraintValues& v, const ConstraintConfig& cfg) {
  if (v.sparsity && !(*v.sparsity > cfg.eta_th)) return 3;
  if (!void_ok(v.void_prob, cfg)) return 2;
  if (v.connected && !*v.connected) return 1;
  return 0;
}

bool feasible(const ConstraintValues& v, const ConstraintConfig& cfg) {
  return relaxation_level(v, cfg) == 0;
}

}  // namespace dfsc
