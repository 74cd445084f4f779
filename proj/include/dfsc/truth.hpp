#pragma once

// Ground-truth target motion for the simulator.

#include "dfsc/lmb.hpp"

#include <vector>

namespace dfsc {

struct TargetSpec {
  int id = 0;
  int birth = 0;  // alive for birth <= k < death
  int death = 0;
  State initial = State::Zero();
  MotionModel motion;
};

struct TruthState {
  int id = 0;
  State x = State::Zero();
};

using TruthSet = std::vector<TruthState>;

/// Truth at `step` from the truth at step - 1: survivors move, targets born at
/// `step` appear at their initial state, targets whose death is `step` vanish.
TruthSet step_ground_truth(const std::vector<TargetSpec>& targets, const TruthSet& previous, int step,
                           Rng& rng);

/// Steps 0 .. duration - 1.
std::vector<TruthSet> simulate_truth(const std::vector<TargetSpec>& targets, int duration, Rng& rng);

std::vector<Position> positions_of(const TruthSet& truth);

}  // namespace dfsc
