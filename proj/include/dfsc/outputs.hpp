#pragma once

// Campaign output files and the offline metrics recomputation.

#include "dfsc/simulation.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace dfsc {

struct OptimizerStats {
  long long components = 0;  // (step, connected component) control problems
  long long converged = 0;
  long long cycles = 0;
  long long capped = 0;
  long long not_iterative = 0;
  double mean_iterations = 0.0;
  int max_iterations = 0;
  long long reward_evaluations = 0;
  long long consensus_firings = 0;
  long long consensus_violations = 0;
  long long staleness_violations = 0;
  long long relaxed = 0;
  long long accounting_mismatches = 0;  // nodes whose count differs from iterations x |U|
  long long degeneracy_fallbacks = 0;

  double convergence_rate() const {
    return components ? static_cast<double>(converged + cycles) / static_cast<double>(components) : 1.0;
  }
};

OptimizerStats optimizer_stats(const Campaign& c);
nlohmann::json to_json(const OptimizerStats& s);

/// Writes summary.csv, cardinality.csv, tracks.jsonl, truth.jsonl, report.json
/// and timing.csv into `dir`. Everything except timing.csv is a pure function
/// of (scenario, methods, runs, seed).
void write_outputs(const std::string& dir, const Scenario& sc, const std::vector<Campaign>& campaigns,
                   std::uint64_t base_seed);

struct MetricsRow {
  std::string method;
  int run = 0;
  int steps = 0;
  double mean_ospa = 0.0;
  double mean_ospa2 = 0.0;
};

/// Recomputes OSPA and OSPA2 from tracks.jsonl / truth.jsonl.
std::vector<MetricsRow> metrics_from_files(const std::string& tracks_path, const std::string& truth_path,
                                           double c, double p, int window);

}  // namespace dfsc
