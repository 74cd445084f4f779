#pragma once

// Per-step pipeline (predict, control, measure, update, share, fuse, estimate)
// and Monte Carlo campaigns.

#include "dfsc/fusion.hpp"
#include "dfsc/metrics.hpp"
#include "dfsc/network.hpp"
#include "dfsc/optimizers.hpp"
#include "dfsc/scenario.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dfsc {

enum class Method { Dfsc, Isc, Dcdsc, Fixed };
const char* to_string(Method m);
std::optional<Method> parse_method(const std::string& s);

/// Which pseudo-posteriors enter a node's fused density terms.
enum class DensityScope { Local, Neighbourhood, Global };

/// Derived generator for one (seed, run, step, node, purpose) tuple.
Rng derive_rng(std::uint64_t seed, int step, int node, int purpose);

// --- control scoring ------------------------------------------------------------

/// Pseudo-update of one sensor under one command, reduced to what scoring needs.
struct PseudoEntry {
  std::vector<TrackSummary> tracks;        // exclusion_mass left at 0
  std::vector<Eigen::VectorXd> weights;    // pseudo-posterior weights over the predicted particles
};

/// Everything shared by the scoring nodes in one step: predicted densities,
/// current poses and lazily computed pseudo-updates per (sensor, command).
class StepContext {
 public:
  StepContext(const Scenario& sc, const std::map<SensorId, SensorPose>& poses,
              const std::map<SensorId, LmbDensity>& predicted, const NetworkGraph& graph);

  const Scenario& scenario() const { return *sc_; }
  const NetworkGraph& graph() const { return *graph_; }
  const SensorPose& pose(SensorId s) const { return poses_->at(s); }
  const LmbDensity& predicted(SensorId s) const { return predicted_->at(s); }
  const SensorSpec& spec(SensorId s) const { return *specs_.at(s); }
  SensorModel sensor_model(SensorId s) const;

  const PseudoEntry& pseudo(SensorId s, const ControlCommand& u) const;
  std::size_t pseudo_updates() const { return cache_.size(); }

 private:
  const Scenario* sc_;
  const std::map<SensorId, SensorPose>* poses_;
  const std::map<SensorId, LmbDensity>* predicted_;
  const NetworkGraph* graph_;
  std::map<SensorId, const SensorSpec*> specs_;
  mutable std::map<std::pair<SensorId, int>, PseudoEntry> cache_;
};

/// Reward oracle over one connected component.
class ControlProblem : public RewardOracle {
 public:
  ControlProblem(const StepContext& ctx, std::vector<SensorId> roster, DensityScope scope);

  const std::vector<SensorId>& roster() const override { return roster_; }
  std::vector<SensorId> coupled(SensorId s) const override;
  const ActionCatalogue& actions(SensorId s) const override;
  Score evaluate(SensorId s, const MultiSensorCommand& cmd) const override;

  /// Fused pseudo-posterior summaries behind evaluate(s, cmd).
  SummaryFusion fused_pseudo(SensorId s, const MultiSensorCommand& cmd) const;
  ExistenceMap pseudo_existence(SensorId s, const MultiSensorCommand& cmd) const;
  ConstraintValues constraints(SensorId s, const MultiSensorCommand& cmd) const;

 private:
  std::vector<SensorId> density_contributors(SensorId s) const;
  ConstraintValues constraint_values(SensorId s, const MultiSensorCommand& cmd,
                                     const SummaryFusion& fused) const;

  const StepContext* ctx_;
  std::vector<SensorId> roster_;
  DensityScope scope_;
};

// --- records ------------------------------------------------------------------

/// Optimizer outcome for one connected component at one step.
struct ComponentControl {
  std::vector<SensorId> roster;
  OptimizerReport report;
  std::optional<ConsensusCheck> firing;  // DF-SC only
  bool staleness_ok = true;
  std::map<SensorId, int> catalogue_size;
};

struct StepRecord {
  int step = 0;
  std::vector<TruthState> truth;
  std::vector<Estimate> estimates;                      // network-wide fused
  std::map<SensorId, std::vector<Estimate>> node_estimates;  // fused over N(s) and s
  std::map<SensorId, std::vector<Estimate>> local_estimates; // local posterior only
  MultiSensorCommand commands;
  std::map<SensorId, SensorPose> poses;                 // after the commands
  std::vector<ComponentControl> control;
  double ospa = 0.0;
  double ospa2 = 0.0;
  double control_seconds = 0.0;
  int degeneracy_fallbacks = 0;
  std::vector<std::string> stages;                      // pipeline audit
  int fused_posterior_step = -1;                        // step stamp of the posteriors fused
};

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  Method method = Method::Fixed;
  std::vector<StepRecord> steps;
  double mean_ospa = 0.0;
  double mean_ospa2 = 0.0;
  double control_seconds = 0.0;
};

struct RunOptions {
  bool global_density = false;
  std::optional<int> dcd_runs;
  std::optional<int> iteration_cap;
};

RunRecord run_single(const Scenario& sc, Method method, int run_index, std::uint64_t seed,
                     const RunOptions& opts = {});

struct Campaign {
  Method method = Method::Fixed;
  std::vector<RunRecord> runs;
  double mean_ospa = 0.0;
  double mean_ospa2 = 0.0;
  double mean_evaluations_per_sensor_step = 0.0;
  double mean_control_seconds_per_sensor_step = 0.0;
  std::vector<double> mean_cardinality;  // per step
  std::vector<double> truth_cardinality;  // per step, from run 0
};

/// Runs use seeds base_seed + run index.
Campaign run_monte_carlo(const Scenario& sc, Method method, int n_runs, std::uint64_t base_seed,
                         const RunOptions& opts = {});

}  // namespace dfsc
