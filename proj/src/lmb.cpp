#include "dfsc/lmb.hpp"

#include "dfsc/association.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dfsc {

std::string TrackLabel::str() const {
  std::ostringstream os;
  os << '(' << birth_time << ',' << sensor_id << ',' << birth_index << ')';
  return os.str();
}

LmbDensity::LmbDensity(std::vector<LabeledTrack> tracks) : tracks_(std::move(tracks)) {
  std::sort(tracks_.begin(), tracks_.end(),
            [](const auto& a, const auto& b) { return a.label < b.label; });
  for (std::size_t i = 1; i < tracks_.size(); ++i) {
    if (tracks_[i].label == tracks_[i - 1].label) {
      throw std::invalid_argument("duplicate track label " + tracks_[i].label.str());
    }
  }
}

const LabeledTrack* LmbDensity::find(const TrackLabel& label) const {
  auto it = std::lower_bound(tracks_.begin(), tracks_.end(), label,
                             [](const LabeledTrack& t, const TrackLabel& l) { return t.label < l; });
  return (it != tracks_.end() && it->label == label) ? &*it : nullptr;
}

void LmbDensity::insert(LabeledTrack track) {
  auto it = std::lower_bound(tracks_.begin(), tracks_.end(), track.label,
                             [](const LabeledTrack& t, const TrackLabel& l) { return t.label < l; });
  if (it != tracks_.end() && it->label == track.label) {
    throw std::invalid_argument("duplicate track label " + track.label.str());
  }
  tracks_.insert(it, std::move(track));
}

std::vector<TrackLabel> LmbDensity::labels() const {
  std::vector<TrackLabel> out;
  out.reserve(tracks_.size());
  for (const auto& t : tracks_) out.push_back(t.label);
  return out;
}

// ---------------------------------------------------------------------------
// Density evaluation

double label_set_weight(const LmbDensity& density, const std::vector<TrackLabel>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!density.find(labels[i])) return 0.0;
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (labels[i] == labels[j]) return 0.0;
    }
  }
  double w = 1.0;
  for (const auto& t : density.tracks()) {
    const bool in = std::find(labels.begin(), labels.end(), t.label) != labels.end();
    w *= in ? t.r : 1.0 - t.r;
  }
  return w;
}

ParticleKde::ParticleKde(const LabeledTrack& track) : track_(&track) {
  const auto& x = track.particles;
  const Eigen::VectorXd& w = track.weights;
  const Eigen::Vector4d mean = x.topRows<4>() * w;
  const Eigen::Vector4d var =
      ((x.topRows<4>().colwise() - mean).array().square().matrix() * w).cwiseMax(0.0);
  // Effective sample size stands in for n with unequal weights.
  const double n_eff = std::max(1.0, 1.0 / w.squaredNorm());
  constexpr double d = 4.0;
  const double factor = std::pow(4.0 / (d + 2.0), 1.0 / (d + 4.0)) * std::pow(n_eff, -1.0 / (d + 4.0));
  bandwidth_ = (var.cwiseSqrt() * factor).cwiseMax(1e-6);
  log_norm_ = -0.5 * d * std::log(2.0 * std::numbers::pi) - bandwidth_.array().log().sum();
}

double ParticleKde::log_sum(const State& x, Eigen::Index skip) const {
  const auto& p = track_->particles;
  const Eigen::VectorXd& w = track_->weights;
  const Eigen::Vector4d q = x.head<4>();
  double mx = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd e(p.cols());
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    if (w[j] <= 0.0 || j == skip) {
      e[j] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double m = ((p.col(j).head<4>() - q).array() / bandwidth_.array()).square().sum();
    e[j] = std::log(w[j]) - 0.5 * m;
    mx = std::max(mx, e[j]);
  }
  if (!std::isfinite(mx)) return mx;
  return log_norm_ + mx + std::log((e.array() - mx).exp().sum());
}

double ParticleKde::log_density(const State& x) const { return log_sum(x, -1); }

double ParticleKde::log_density_without(const State& x, Eigen::Index skip) const {
  const double rest = 1.0 - track_->weights[skip];
  if (!(rest > 1e-12)) return log_density(x);
  return log_sum(x, skip) - std::log(rest);
}

double ParticleKde::operator()(const State& x) const { return std::exp(log_density(x)); }

double lmb_density_eval(const LmbDensity& density, const std::vector<LabeledState>& X) {
  std::vector<TrackLabel> labels;
  labels.reserve(X.size());
  for (const auto& [l, x] : X) labels.push_back(l);
  double v = label_set_weight(density, labels);
  if (v == 0.0) return 0.0;
  for (const auto& [l, x] : X) v *= ParticleKde(*density.find(l))(x);
  return v;
}

// ---------------------------------------------------------------------------
// Prediction

State transition(const State& x, MotionKind kind, double dt) {
  State out = x;
  const double omega = kind == MotionKind::ConstantTurn ? x[4] : 0.0;
  if (kind == MotionKind::ConstantVelocity || omega == 0.0) {
    out[0] = x[0] + dt * x[2];
    out[1] = x[1] + dt * x[3];
    if (kind == MotionKind::ConstantVelocity) out[4] = 0.0;
    return out;
  }
  const double s = std::sin(omega * dt);
  const double c = std::cos(omega * dt);
  out[0] = x[0] + s / omega * x[2] - (1.0 - c) / omega * x[3];
  out[1] = x[1] + (1.0 - c) / omega * x[2] + s / omega * x[3];
  out[2] = c * x[2] - s * x[3];
  out[3] = s * x[2] + c * x[3];
  return out;
}

State sample_transition(const State& x, const MotionModel& model, Rng& rng) {
  State out = transition(x, model.kind, model.dt);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double dt = model.dt;
  if (model.sigma_accel > 0.0) {
    const double ax = model.sigma_accel * n01(rng);
    const double ay = model.sigma_accel * n01(rng);
    out[0] += 0.5 * dt * dt * ax;
    out[1] += 0.5 * dt * dt * ay;
    out[2] += dt * ax;
    out[3] += dt * ay;
  }
  if (model.kind == MotionKind::ConstantTurn && model.sigma_omega > 0.0) {
    out[4] += dt * model.sigma_omega * n01(rng);
  }
  return out;
}

LmbDensity predict(const LmbDensity& density, const MotionModel& model, const BirthModel& birth,
                   Rng& rng) {
  LmbDensity out = density;
  for (auto& track : out.tracks()) {
    track.r *= model.survival_prob;
    for (Eigen::Index j = 0; j < track.particles.cols(); ++j) {
      track.particles.col(j) = sample_transition(track.particles.col(j), model, rng);
    }
  }

  std::normal_distribution<double> n01(0.0, 1.0);
  int index = 0;
  for (const Position& p : birth.positions) {
    LabeledTrack t;
    t.label = {birth.step, birth.sensor, index++};
    t.r = birth.r_birth;
    t.particles.resize(kStateDim, birth.particles);
    t.weights = Eigen::VectorXd::Constant(birth.particles, 1.0 / birth.particles);
    for (int j = 0; j < birth.particles; ++j) {
      State x;
      x << p.x() + birth.position_sigma * n01(rng), p.y() + birth.position_sigma * n01(rng),
          birth.velocity_sigma * n01(rng), birth.velocity_sigma * n01(rng),
          model.kind == MotionKind::ConstantTurn ? birth.omega_sigma * n01(rng) : 0.0;
      // The source measurement is one scan old.
      t.particles.col(j) = sample_transition(x, model, rng);
    }
    out.insert(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Update

namespace {

struct TrackTerms {
  Eigen::VectorXd pd;          // per particle
  Eigen::MatrixXd likelihood;  // particles x measurements, g(z|x)
};

TrackTerms track_terms(const LabeledTrack& track, const MeasurementSet& Z, const SensorPose& pose,
                       const SensorModel& sensor) {
  const Eigen::Index J = track.particles.cols();
  TrackTerms terms;
  terms.pd.resize(J);
  terms.likelihood.setZero(J, static_cast<Eigen::Index>(Z.size()));
  for (Eigen::Index j = 0; j < J; ++j) {
    const Position p = track.particles.col(j).head<2>();
    terms.pd[j] = detection_probability(sensor.profile, pose, p);
    if (terms.pd[j] <= 0.0) continue;
    for (std::size_t k = 0; k < Z.size(); ++k) {
      terms.likelihood(j, static_cast<Eigen::Index>(k)) =
          measurement_likelihood(pose, p, Z[k], sensor.noise_sigma);
    }
  }
  return terms;
}

}  // namespace

UpdateResult update_with_births(const LmbDensity& density, const MeasurementSet& Z,
                                const SensorPose& pose, const SensorModel& sensor,
                                double clutter_intensity, Rng& rng, const UpdateOptions& opts) {
  if (clutter_intensity < 0.0) throw std::invalid_argument("negative clutter intensity");
  const auto& tracks = density.tracks();
  const Eigen::Index n = static_cast<Eigen::Index>(tracks.size());
  const Eigen::Index m = static_cast<Eigen::Index>(Z.size());

  std::vector<TrackTerms> terms;
  terms.reserve(tracks.size());
  AssociationProblem problem;
  problem.r.resize(n);
  problem.miss.resize(n);
  problem.detect.setZero(n, m);
  problem.clutter = clutter_intensity;
  const double peak = 1.0 / (2.0 * std::numbers::pi * sensor.noise_sigma * sensor.noise_sigma);
  const double gate = opts.gate_relative * peak;

  for (Eigen::Index i = 0; i < n; ++i) {
    const LabeledTrack& t = tracks[i];
    terms.push_back(track_terms(t, Z, pose, sensor));
    const TrackTerms& tt = terms.back();
    problem.r[i] = t.r;
    problem.miss[i] = std::clamp(t.weights.dot((1.0 - tt.pd.array()).matrix()), 0.0, 1.0);
    if (m > 0) {
      const Eigen::RowVectorXd det =
          (t.weights.array() * tt.pd.array()).matrix().transpose() * tt.likelihood;
      for (Eigen::Index k = 0; k < m; ++k) problem.detect(i, k) = det[k] >= gate ? det[k] : 0.0;
    }
  }

  AssociationOptions aopts{opts.exhaustive_max_tracks, opts.exhaustive_max_measurements,
                           opts.gibbs_iterations};
  const AssociationResult assoc = marginalize_associations(problem, aopts, rng);

  UpdateResult result;
  result.used_gibbs = assoc.used_gibbs;
  result.measurement_association = assoc.measurement_association;

  std::vector<LabeledTrack> posterior;
  posterior.reserve(tracks.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    LabeledTrack t = tracks[i];
    const TrackTerms& tt = terms[i];
    if (problem.miss[i] == 1.0 && (m == 0 || problem.detect.row(i).isZero(0.0))) {
      // invisible to this sensor: likelihood-free
      posterior.push_back(std::move(t));
      continue;
    }
    t.r = assoc.r_post[i];
    if (t.r > 0.0) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(t.weights.size());
      if (assoc.miss_weight[i] > 0.0 && problem.miss[i] > 0.0) {
        w += (assoc.miss_weight[i] / problem.miss[i]) *
             (t.weights.array() * (1.0 - tt.pd.array())).matrix();
      }
      for (Eigen::Index k = 0; k < m; ++k) {
        const double beta = assoc.detect_weight(i, k);
        if (beta <= 0.0 || problem.detect(i, k) <= 0.0) continue;
        w += (beta / problem.detect(i, k)) *
             (t.weights.array() * tt.pd.array() * tt.likelihood.col(k).array()).matrix();
      }
      const double s = w.sum();
      if (s > 0.0 && std::isfinite(s)) t.weights = w / s;
    }
    posterior.push_back(std::move(t));
  }
  result.posterior = LmbDensity(std::move(posterior));

  std::vector<int> candidates;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (result.measurement_association[k] < opts.birth_assoc_threshold) {
      candidates.push_back(static_cast<int>(k));
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return result.measurement_association[a] < result.measurement_association[b];
  });
  if (static_cast<int>(candidates.size()) > opts.max_births) candidates.resize(opts.max_births);
  result.birth_candidates = std::move(candidates);
  return result;
}

LmbDensity update(const LmbDensity& density, const MeasurementSet& Z, const SensorPose& pose,
                  const SensorModel& sensor, double clutter_intensity, Rng& rng,
                  const UpdateOptions& opts) {
  return update_with_births(density, Z, pose, sensor, clutter_intensity, rng, opts).posterior;
}

LmbDensity misdetection_update(const LmbDensity& density, const SensorPose& pose,
                               const SensorModel& sensor) {
  LmbDensity out = density;
  for (auto& t : out.tracks()) {
    Eigen::VectorXd miss(t.weights.size());
    for (Eigen::Index j = 0; j < miss.size(); ++j) {
      miss[j] = 1.0 - detection_probability(sensor.profile, pose,
                                            Position(t.particles.col(j).head<2>()));
    }
    const double eta = t.weights.dot(miss);
    const double denom = 1.0 - t.r + t.r * eta;
    if (denom <= 0.0 || eta <= 0.0) {
      t.r = 0.0;
      continue;
    }
    t.r = t.r * eta / denom;
    t.weights = t.weights.cwiseProduct(miss) / eta;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Estimation and housekeeping

double eap_cardinality(const LmbDensity& density) {
  double s = 0.0;
  for (const auto& t : density.tracks()) s += t.r;
  return s;
}

State eap_state(const LabeledTrack& track) { return track.particles * track.weights; }

std::vector<Estimate> extract_estimates(const LmbDensity& density, double r_threshold) {
  std::vector<const LabeledTrack*> picked;
  for (const auto& t : density.tracks()) {
    if (t.r >= r_threshold) picked.push_back(&t);
  }
  std::stable_sort(picked.begin(), picked.end(),
                   [](const LabeledTrack* a, const LabeledTrack* b) { return a->r > b->r; });
  const auto cap = static_cast<std::size_t>(std::floor(eap_cardinality(density) + 0.5));
  if (picked.size() > cap) picked.resize(cap);
  std::vector<Estimate> out;
  out.reserve(picked.size());
  for (const LabeledTrack* t : picked) out.push_back({t->label, eap_state(*t)});
  return out;
}

std::vector<Eigen::Index> systematic_resample(const Eigen::VectorXd& weights, int n, Rng& rng) {
  std::vector<Eigen::Index> idx(n);
  const double u0 = std::uniform_real_distribution<double>(0.0, 1.0 / n)(rng);
  const double total = weights.sum();
  double cum = weights[0] / total;
  Eigen::Index j = 0;
  for (int i = 0; i < n; ++i) {
    const double u = u0 + static_cast<double>(i) / n;
    while (u > cum && j + 1 < weights.size()) cum += weights[++j] / total;
    idx[i] = j;
  }
  return idx;
}

LmbDensity prune_resample(const LmbDensity& density, double r_min, int target_particles, Rng& rng) {
  if (target_particles < 1) throw std::invalid_argument("target_particles must be >= 1");
  std::vector<LabeledTrack> kept;
  for (const auto& t : density.tracks()) {
    if (t.r < r_min) continue;
    LabeledTrack out;
    out.label = t.label;
    out.r = t.r;
    const auto idx = systematic_resample(t.weights, target_particles, rng);
    out.particles.resize(kStateDim, target_particles);
    for (int i = 0; i < target_particles; ++i) out.particles.col(i) = t.particles.col(idx[i]);
    out.weights = Eigen::VectorXd::Constant(target_particles, 1.0 / target_particles);
    kept.push_back(std::move(out));
  }
  return LmbDensity(std::move(kept));
}

}  // namespace dfsc
