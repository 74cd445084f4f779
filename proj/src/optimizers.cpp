#include "dfsc/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfsc {

namespace {

double rank_value(double r) { return std::isnan(r) ? -std::numeric_limits<double>::infinity() : r; }

struct BestResponse {
  ControlCommand command;
  Score score;
};

/// Exhaustive search over `who`'s catalogue with the rest of `cmd` frozen.
/// Ties keep the lowest command id.
BestResponse best_response(const RewardOracle& oracle, SensorId scorer, SensorId who,
                           MultiSensorCommand cmd, long long& evaluations) {
  std::vector<ControlCommand> catalogue = oracle.actions(who);
  std::stable_sort(catalogue.begin(), catalogue.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
  if (catalogue.empty()) throw std::invalid_argument("empty action catalogue");
  BestResponse best{catalogue.front(), {}};
  bool first = true;
  for (const ControlCommand& u : catalogue) {
    cmd[who] = u;
    const Score s = oracle.evaluate(scorer, cmd);
    ++evaluations;
    if (first || better(s, best.score)) {
      best = {u, s};
      first = false;
    }
  }
  return best;
}

}  // namespace

bool better(const Score& a, const Score& b) {
  if (a.level != b.level) return a.level < b.level;
  return rank_value(a.reward) > rank_value(b.reward);
}

const ControlCommand& stay_command(const ActionCatalogue& catalogue) {
  if (catalogue.empty()) throw std::invalid_argument("empty action catalogue");
  const ControlCommand* lowest = &catalogue.front();
  for (const auto& c : catalogue) {
    if (c.dx == 0.0 && c.dy == 0.0 && c.dtheta == 0.0) return c;
    if (c.id < lowest->id) lowest = &c;
  }
  return *lowest;
}

MultiSensorCommand all_stay(const RewardOracle& oracle) {
  MultiSensorCommand cmd;
  for (SensorId s : oracle.roster()) cmd[s] = stay_command(oracle.actions(s));
  return cmd;
}

const char* to_string(ConvergedBy c) {
  switch (c) {
    case ConvergedBy::Converged: return "converged";
    case ConvergedBy::Cycle: return "cycle";
    case ConvergedBy::IterationCap: return "iteration-cap";
    case ConvergedBy::NotIterative: return "not-iterative";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

ControlCommand dfsc_optimize_step(FloodState& state, const RewardOracle& oracle,
                                  long long& evaluations, bool& relaxed) {
  MultiSensorCommand cmd;
  for (const auto& [id, entry] : state.latest) cmd[id] = entry.first;
  const BestResponse br = best_response(oracle, state.self, state.self, cmd, evaluations);
  cmd[state.self] = br.command;
  relaxed = relaxed || br.score.level > 0;
  ++state.t;
  state.history.push_back(std::move(cmd));
  return br.command;
}

std::optional<int> stopping_criterion(const std::vector<MultiSensorCommand>& history) {
  const int t = static_cast<int>(history.size());
  auto u = [&](int i) -> const MultiSensorCommand& { return history[i - 1]; };
  for (int tp = 2; tp < t; ++tp) {
    if (u(t - 1) == u(tp - 1) && u(t) == u(tp)) return tp;
  }
  return std::nullopt;
}

DfscResult dfsc_run(const RewardOracle& oracle, const NetworkGraph& graph, int iteration_cap) {
  if (iteration_cap < 1) throw std::invalid_argument("iteration_cap must be >= 1");
  const std::vector<SensorId>& roster = oracle.roster();
  const int rounds_per_flood = graph.diameter(roster);

  std::map<SensorId, FloodState> states;
  const MultiSensorCommand init = all_stay(oracle);
  for (SensorId s : roster) {
    FloodState st;
    st.self = s;
    for (const auto& [id, c] : init) st.latest[id] = {c, 0};
    states.emplace(s, std::move(st));
  }

  DfscResult res;
  res.report.converged_by = ConvergedBy::IterationCap;
  Inboxes inboxes;
  for (SensorId s : roster) inboxes[s];

  int t = 0;
  while (t < iteration_cap) {
    ++t;
    for (SensorId s : roster) {
      for (const auto& [id, entry] : states[s].latest) {
        if (entry.second != t - 1) res.trace.staleness_ok = false;
      }
      long long& evals = res.report.evaluations_per_node[s];
      dfsc_optimize_step(states[s], oracle, evals, res.report.relaxed);
    }

    for (SensorId s : roster) {
      const auto tp = stopping_criterion(states[s].history);
      if (!tp) continue;
      ConsensusCheck check{s, t, *tp, true};
      for (SensorId other : roster) {
        const auto& h = states[other].history;
        if (!(h[t - 1] == h[*tp - 1])) check.holds = false;
      }
      res.trace.firing = check;
      res.report.converged_by = *tp == t - 1 ? ConvergedBy::Converged : ConvergedBy::Cycle;
      break;
    }
    if (res.trace.firing) break;

    // flood-out of this iteration's own decisions
    for (SensorId s : roster) {
      const ControlCommand& mine = states[s].history.back().at(s);
      inboxes[s][{s, t}] = FloodMessage{s, t, mine, 0};
    }
    for (int r = 0; r < rounds_per_flood; ++r) inboxes = flood_round(graph, inboxes);
    res.report.flood_rounds += rounds_per_flood;
    for (SensorId s : roster) {
      Inbox& box = inboxes[s];
      for (SensorId origin : roster) {
        const FloodMessage* msg = latest_from(box, origin);
        if (msg) {
          states[s].latest[origin] = {std::get<ControlCommand>(msg->payload), msg->iteration};
        }
      }
      std::erase_if(box, [t](const auto& kv) { return kv.first.second < t; });
    }
  }

  if (res.trace.firing) {
    const SensorId origin = res.trace.firing->node;
    const MultiSensorCommand decision = states[origin].history.back();
    Inboxes bcast;
    for (SensorId s : roster) bcast[s];
    bcast[origin][{origin, t + 1}] = FloodMessage{origin, t + 1, ConvergenceBroadcast{decision}, 0};
    for (int r = 0; r < rounds_per_flood; ++r) bcast = flood_round(graph, bcast);
    res.report.flood_rounds += rounds_per_flood;
    for (SensorId s : roster) {
      const FloodMessage* msg = latest_from(bcast[s], origin);
      if (!msg) throw std::logic_error("convergence broadcast did not reach every node");
      const auto& received = std::get<ConvergenceBroadcast>(msg->payload).decision;
      res.commands[s] = received.at(s);
      states[s].converged = true;
      states[s].final_cmd = received;
    }
  } else {
    for (SensorId s : roster) res.commands[s] = states[s].history.back().at(s);
  }

  for (SensorId s : roster) {
    res.trace.histories[s] = states[s].history;
    res.report.reward_evaluations += res.report.evaluations_per_node[s];
    res.report.iterations_per_node[s] = states[s].t;
  }
  res.report.iterations_used = t;
  res.report.selected = res.commands;
  return res;
}

// ---------------------------------------------------------------------------

ControlCommand isc_select(const RewardOracle& oracle, SensorId s, long long& evaluations,
                          bool& relaxed) {
  const BestResponse br = best_response(oracle, s, s, all_stay(oracle), evaluations);
  relaxed = relaxed || br.score.level > 0;
  return br.command;
}

OptimizerReport isc_run(const RewardOracle& oracle) {
  OptimizerReport rep;
  for (SensorId s : oracle.roster()) {
    long long evals = 0;
    rep.selected[s] = isc_select(oracle, s, evals, rep.relaxed);
    rep.evaluations_per_node[s] = evals;
    rep.iterations_per_node[s] = 1;
    rep.reward_evaluations += evals;
  }
  rep.iterations_used = 1;
  return rep;
}

// ---------------------------------------------------------------------------

std::optional<int> required_runs(int local_optima, double p_success) {
  if (local_optima < 2 || !(p_success > 0.0 && p_success < 1.0)) return std::nullopt;
  const double m = std::log(1.0 - p_success) / std::log(1.0 - 1.0 / local_optima);
  return static_cast<int>(std::ceil(m - 1e-9));
}

int dcd_runs_for(const RewardOracle& oracle, SensorId s, const DcdConfig& cfg) {
  if (cfg.runs) return *cfg.runs;
  const int neighbours = static_cast<int>(oracle.coupled(s).size()) - 1;
  return required_runs(2 * neighbours, cfg.p_success).value_or(1);
}

DcdNodeResult dcdsc_node(const RewardOracle& oracle, SensorId s, int runs, int inner_cap, Rng& rng) {
  if (runs < 1 || inner_cap < 1) throw std::invalid_argument("runs and inner_cap must be >= 1");
  const std::vector<SensorId> coords = oracle.coupled(s);
  DcdNodeResult out;
  out.runs = runs;
  for (int run = 0; run < runs; ++run) {
    MultiSensorCommand vec = all_stay(oracle);
    for (SensorId c : coords) {
      const auto& cat = oracle.actions(c);
      std::uniform_int_distribution<std::size_t> pick(0, cat.size() - 1);
      vec[c] = cat[pick(rng)];
    }
    Score final_score;
    std::size_t unchanged = 0;
    std::size_t ci = 0;
    int steps = 0;
    while (steps < inner_cap && unchanged < coords.size()) {
      const SensorId c = coords[ci];
      const BestResponse br = best_response(oracle, s, c, vec, out.evaluations);
      ++steps;
      if (br.command == vec[c]) {
        ++unchanged;
      } else {
        vec[c] = br.command;
        unchanged = 0;
      }
      final_score = br.score;
      ci = (ci + 1) % coords.size();
    }
    out.iterations += steps;
    if (run == 0 || better(final_score, out.best_score)) {
      out.best = vec;
      out.best_score = final_score;
    }
  }
  return out;
}

}  // namespace dfsc
