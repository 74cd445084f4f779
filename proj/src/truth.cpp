#include "dfsc/truth.hpp"

#include <algorithm>

namespace dfsc {

TruthSet step_ground_truth(const std::vector<TargetSpec>& targets, const TruthSet& previous, int step,
                           Rng& rng) {
  TruthSet out;
  for (const TargetSpec& t : targets) {
    if (step < t.birth || step >= t.death) continue;
    if (step == t.birth) {
      out.push_back({t.id, t.initial});
      continue;
    }
    auto it = std::find_if(previous.begin(), previous.end(),
                           [&](const TruthState& s) { return s.id == t.id; });
    if (it == previous.end()) continue;  // never seeded, e.g. a gap in the caller's history
    out.push_back({t.id, sample_transition(it->x, t.motion, rng)});
  }
  return out;
}

std::vector<TruthSet> simulate_truth(const std::vector<TargetSpec>& targets, int duration, Rng& rng) {
  std::vector<TruthSet> out;
  out.reserve(duration);
  TruthSet current;
  for (int k = 0; k < duration; ++k) {
    current = step_ground_truth(targets, current, k, rng);
    out.push_back(current);
  }
  return out;
}

std::vector<Position> positions_of(const TruthSet& truth) {
  std::vector<Position> out;
  out.reserve(truth.size());
  for (const auto& t : truth) out.push_back(position_of(t.x));
  return out;
}

}  // namespace dfsc
