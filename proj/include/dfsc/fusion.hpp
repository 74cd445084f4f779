#pragma once

// Complementary fusion of LMB posteriors held by a node and its neighbours:
// odds-sum existence fusion, union of existence-weighted particle clouds and
// EAP-distance merging of duplicate labels.

#include "dfsc/lmb.hpp"

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace dfsc {

class NoMassError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs of exactly 1 are clamped to 1 - 1e-9 before the odds transform.
constexpr double kExistenceClamp = 1e-9;

double fuse_existence(std::span<const double> rs);

struct ParticleContribution {
  double r = 0.0;
  const ParticleMatrix* particles = nullptr;
  const Eigen::VectorXd* weights = nullptr;
};

struct ParticleCloud {
  ParticleMatrix particles;
  Eigen::VectorXd weights;
};

/// Union of the clouds, each rescaled by r_i / sum r. Throws NoMassError when all r are 0.
ParticleCloud fuse_track_particles(std::span<const ParticleContribution> contribs);

using FusionInput = std::map<SensorId, LmbDensity>;

/// Label-wise fusion without resampling.
LmbDensity fuse_union(const FusionInput& inputs);

struct FusionConfig {
  double r_min = 1e-3;
  int particles = 500;
};

LmbDensity fuse(const FusionInput& inputs, const FusionConfig& cfg, Rng& rng);

using LabelAlias = std::map<TrackLabel, TrackLabel>;  // absorbed label -> surviving label

struct MergeResult {
  LmbDensity density;
  LabelAlias alias;
};

MergeResult merge_duplicates_traced(const LmbDensity& density, double merge_dist);
LmbDensity merge_duplicates(const LmbDensity& density, double merge_dist);

/// Greedy closest-pair agglomeration over label-sorted items. Pairs closer than
/// `merge_dist` are merged into the smaller label until none remain; equal
/// distances resolve to the lexicographically first pair.
template <typename Item, typename PositionOf, typename Merge>
LabelAlias greedy_merge(std::vector<Item>& items, double merge_dist, PositionOf position_of,
                        Merge merge) {
  LabelAlias alias;
  for (;;) {
    std::size_t best_i = 0, best_j = 0;
    double best = merge_dist;
    bool found = false;
    std::vector<Position> pos;
    pos.reserve(items.size());
    for (const auto& it : items) pos.push_back(position_of(it));
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (std::size_t j = i + 1; j < items.size(); ++j) {
        const double d = (pos[i] - pos[j]).norm();
        if (d < best) {
          best = d;
          best_i = i;
          best_j = j;
          found = true;
        }
      }
    }
    if (!found) break;
    const TrackLabel kept = items[best_i].label;
    const TrackLabel gone = items[best_j].label;
    items[best_i] = merge(items[best_i], items[best_j]);
    items[best_i].label = kept;
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(best_j));
    for (auto& [from, to] : alias) {
      if (to == gone) to = kept;
    }
    alias[gone] = kept;
  }
  return alias;
}

// ---------------------------------------------------------------------------
// Sufficient statistics of a track for control scoring. Fusion and merging act
// linearly on them, so scoring a hypothesised command never materializes the
// fused particle union.

struct TrackSummary {
  TrackLabel label;
  double r = 0.0;
  Position eap = Position::Zero();
  double exclusion_mass = 0.0;  // particle weight inside the scoring node's exclusion disc
  bool observed = false;        // covered by the contributing sensor's hypothesised FoV
};

struct SummaryFusion {
  std::vector<TrackSummary> tracks;  // label-sorted, duplicates merged
  LabelAlias alias;
};

SummaryFusion fuse_summaries(std::span<const std::span<const TrackSummary>> contributions,
                             double merge_dist);

}  // namespace dfsc
