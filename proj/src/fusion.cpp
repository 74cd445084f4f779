#include "dfsc/fusion.hpp"

#include <algorithm>

namespace dfsc {

double fuse_existence(std::span<const double> rs) {
  double q = 0.0;
  for (double r : rs) {
    const double rc = std::clamp(r, 0.0, 1.0 - kExistenceClamp);
    q += rc / (1.0 - rc);
  }
  return q / (1.0 + q);
}

ParticleCloud fuse_track_particles(std::span<const ParticleContribution> contribs) {
  double total_r = 0.0;
  Eigen::Index total_j = 0;
  for (const auto& c : contribs) {
    total_r += c.r;
    total_j += c.particles->cols();
  }
  if (!(total_r > 0.0)) throw NoMassError("no contributor carries existence mass");

  ParticleCloud out;
  out.particles.resize(kStateDim, total_j);
  out.weights.resize(total_j);
  Eigen::Index offset = 0;
  for (const auto& c : contribs) {
    const Eigen::Index n = c.particles->cols();
    out.particles.middleCols(offset, n) = *c.particles;
    out.weights.segment(offset, n) = (c.r / total_r) * *c.weights;
    offset += n;
  }
  return out;
}

LmbDensity fuse_union(const FusionInput& inputs) {
  std::map<TrackLabel, std::vector<const LabeledTrack*>> by_label;
  for (const auto& [sensor, density] : inputs) {
    for (const auto& t : density.tracks()) by_label[t.label].push_back(&t);
  }
  std::vector<LabeledTrack> fused;
  fused.reserve(by_label.size());
  std::vector<double> rs;
  std::vector<ParticleContribution> parts;
  for (const auto& [label, group] : by_label) {
    if (group.size() == 1) {
      fused.push_back(*group.front());
      continue;
    }
    rs.clear();
    parts.clear();
    for (const LabeledTrack* t : group) {
      rs.push_back(t->r);
      parts.push_back({t->r, &t->particles, &t->weights});
    }
    try {
      ParticleCloud cloud = fuse_track_particles(parts);
      fused.push_back({label, fuse_existence(rs), std::move(cloud.particles), std::move(cloud.weights)});
    } catch (const NoMassError&) {
      // zero existence everywhere: the label is omitted
    }
  }
  return LmbDensity(std::move(fused));
}

LmbDensity fuse(const FusionInput& inputs, const FusionConfig& cfg, Rng& rng) {
  return prune_resample(fuse_union(inputs), cfg.r_min, cfg.particles, rng);
}

MergeResult merge_duplicates_traced(const LmbDensity& density, double merge_dist) {
  if (!(merge_dist > 0.0)) throw std::invalid_argument("merge_dist must be positive");
  std::vector<LabeledTrack> items = density.tracks();
  auto merge = [](const LabeledTrack& a, const LabeledTrack& b) {
    const double rs[] = {a.r, b.r};
    LabeledTrack out;
    out.r = fuse_existence(rs);
    if (a.r + b.r > 0.0) {
      const ParticleContribution parts[] = {{a.r, &a.particles, &a.weights},
                                            {b.r, &b.particles, &b.weights}};
      ParticleCloud cloud = fuse_track_particles(parts);
      out.particles = std::move(cloud.particles);
      out.weights = std::move(cloud.weights);
    } else {
      out.particles = a.particles;
      out.weights = a.weights;
    }
    return out;
  };
  LabelAlias alias = greedy_merge(
      items, merge_dist, [](const LabeledTrack& t) { return position_of(eap_state(t)); }, merge);
  return {LmbDensity(std::move(items)), std::move(alias)};
}

LmbDensity merge_duplicates(const LmbDensity& density, double merge_dist) {
  return merge_duplicates_traced(density, merge_dist).density;
}

SummaryFusion fuse_summaries(std::span<const std::span<const TrackSummary>> contributions,
                             double merge_dist) {
  std::map<TrackLabel, std::vector<const TrackSummary*>> by_label;
  for (const auto& c : contributions) {
    for (const auto& t : c) by_label[t.label].push_back(&t);
  }
  SummaryFusion out;
  out.tracks.reserve(by_label.size());
  std::vector<double> rs;
  for (const auto& [label, group] : by_label) {
    if (group.size() == 1) {
      out.tracks.push_back(*group.front());
      continue;
    }
    rs.clear();
    double total = 0.0;
    for (const TrackSummary* t : group) {
      rs.push_back(t->r);
      total += t->r;
    }
    if (!(total > 0.0)) continue;
    TrackSummary f;
    f.label = label;
    f.r = fuse_existence(rs);
    for (const TrackSummary* t : group) {
      const double alpha = t->r / total;
      f.eap += alpha * t->eap;
      f.exclusion_mass += alpha * t->exclusion_mass;
      f.observed = f.observed || t->observed;
    }
    out.tracks.push_back(f);
  }

  auto merge = [](const TrackSummary& a, const TrackSummary& b) {
    const double rs2[] = {a.r, b.r};
    TrackSummary f;
    f.r = fuse_existence(rs2);
    const double total = a.r + b.r;
    const double wa = total > 0.0 ? a.r / total : 1.0;
    const double wb = total > 0.0 ? b.r / total : 0.0;
    f.eap = wa * a.eap + wb * b.eap;
    f.exclusion_mass = wa * a.exclusion_mass + wb * b.exclusion_mass;
    f.observed = a.observed || b.observed;
    return f;
  };
  out.alias = greedy_merge(out.tracks, merge_dist, [](const TrackSummary& t) { return t.eap; }, merge);
  return out;
}

}  // namespace dfsc
