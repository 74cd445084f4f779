#pragma once

// Command selection: distributed flooding control (DF-SC), independent
// per-sensor control (I-SC) and distributed multi-start coordinate descent (DCD-SC).

#include "dfsc/network.hpp"
#include "dfsc/objective.hpp"

#include <map>
#include <optional>
#include <vector>

namespace dfsc {

/// Constraint relaxation level first (lower is better), then reward.
struct Score {
  double reward = 0.0;
  int level = 0;
};

/// Strict preference; NaN rewards rank as -inf.
bool better(const Score& a, const Score& b);

/// What an optimizer needs from the world: the roster, who couples into whose
/// reward, the action catalogues and a reward oracle.
class RewardOracle {
 public:
  virtual ~RewardOracle() = default;
  virtual const std::vector<SensorId>& roster() const = 0;
  /// Sensors whose commands enter node s's density terms, ascending, including s.
  virtual std::vector<SensorId> coupled(SensorId s) const = 0;
  virtual const ActionCatalogue& actions(SensorId s) const = 0;
  /// Scores `cmd` from node s's point of view. `cmd` covers the roster.
  virtual Score evaluate(SensorId s, const MultiSensorCommand& cmd) const = 0;
};

/// The identity command of a catalogue, or its lowest id when none is the identity.
const ControlCommand& stay_command(const ActionCatalogue& catalogue);

MultiSensorCommand all_stay(const RewardOracle& oracle);

enum class ConvergedBy { Converged, Cycle, IterationCap, NotIterative };
const char* to_string(ConvergedBy c);

struct OptimizerReport {
  int iterations_used = 0;
  long long reward_evaluations = 0;
  std::map<SensorId, long long> evaluations_per_node;
  std::map<SensorId, int> iterations_per_node;  // DCD-SC: coordinate steps over all runs
  ConvergedBy converged_by = ConvergedBy::NotIterative;
  MultiSensorCommand selected;
  bool relaxed = false;  // some node had no fully feasible candidate
  int flood_rounds = 0;
};

// --- DF-SC --------------------------------------------------------------------

struct FloodState {
  SensorId self = 0;
  int t = 0;
  std::map<SensorId, std::pair<ControlCommand, int>> latest;  // command, iteration stamp
  std::vector<MultiSensorCommand> history;                   // decision vector of iterations 1..t
  bool converged = false;
  std::optional<MultiSensorCommand> final_cmd;
};

/// Best response of `state.self` to the others' latest decisions; appends the
/// resulting decision vector. Exactly |U| reward evaluations.
ControlCommand dfsc_optimize_step(FloodState& state, const RewardOracle& oracle,
                                  long long& evaluations, bool& relaxed);

/// Smallest t' with 1 < t' < t, u(t-1) = u(t'-1) and u(t) = u(t'), where
/// history[i] holds the decision of iteration i + 1.
std::optional<int> stopping_criterion(const std::vector<MultiSensorCommand>& history);

struct ConsensusCheck {
  SensorId node = 0;
  int t = 0;
  int t_prime = 0;
  bool holds = false;  // every node's vectors at t and t' agree
};

struct DfscTrace {
  std::map<SensorId, std::vector<MultiSensorCommand>> histories;
  std::optional<ConsensusCheck> firing;
  bool staleness_ok = true;
};

struct DfscResult {
  MultiSensorCommand commands;
  OptimizerReport report;
  DfscTrace trace;
};

/// Round-based simulation of asynchronous flooding control over one connected
/// component. Each iteration floods the previous decisions for diameter rounds,
/// then every node runs its best response.
DfscResult dfsc_run(const RewardOracle& oracle, const NetworkGraph& graph, int iteration_cap);

// --- I-SC ---------------------------------------------------------------------

/// Node s alone: argmax over its catalogue with every other sensor assumed to stay.
ControlCommand isc_select(const RewardOracle& oracle, SensorId s, long long& evaluations,
                          bool& relaxed);

OptimizerReport isc_run(const RewardOracle& oracle);

// --- DCD-SC -------------------------------------------------------------------

/// ceil(log(1 - p) / log(1 - 1/M)); nullopt unless M >= 2 and 0 < p < 1.
std::optional<int> required_runs(int local_optima, double p_success);

struct DcdConfig {
  std::optional<int> runs;  // nullopt: required_runs(2 |N(s)|, p_success)
  int inner_cap = 30;       // coordinate steps per run
  double p_success = 0.95;
};

/// Runs chosen for node s under `cfg`.
int dcd_runs_for(const RewardOracle& oracle, SensorId s, const DcdConfig& cfg);

struct DcdNodeResult {
  MultiSensorCommand best;
  Score best_score;
  long long evaluations = 0;
  int iterations = 0;
  int runs = 0;
};

/// Multi-start cyclic coordinate descent over node s's coupled sensors.
DcdNodeResult dcdsc_node(const RewardOracle& oracle, SensorId s, int runs, int inner_cap, Rng& rng);

/// rng_for(s) supplies each node's generator.
template <typename RngFor>
OptimizerReport dcdsc_run(const RewardOracle& oracle, const DcdConfig& cfg, RngFor rng_for) {
  OptimizerReport rep;
  rep.converged_by = ConvergedBy::NotIterative;
  for (SensorId s : oracle.roster()) {
    Rng& rng = rng_for(s);
    const DcdNodeResult r = dcdsc_node(oracle, s, dcd_runs_for(oracle, s, cfg), cfg.inner_cap, rng);
    rep.selected[s] = r.best.at(s);
    rep.evaluations_per_node[s] = r.evaluations;
    rep.iterations_per_node[s] = r.iterations;
    rep.reward_evaluations += r.evaluations;
    rep.iterations_used = std::max(rep.iterations_used, r.iterations);
    rep.relaxed = rep.relaxed || r.best_score.level > 0;
  }
  return rep;
}

}  // namespace dfsc
