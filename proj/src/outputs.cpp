#include "dfsc/outputs.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dfsc {

using nlohmann::json;

OptimizerStats optimizer_stats(const Campaign& c) {
  OptimizerStats s;
  long long iter_sum = 0;
  for (const auto& run : c.runs) {
    for (const auto& st : run.steps) {
      s.degeneracy_fallbacks += st.degeneracy_fallbacks;
      for (const auto& cc : st.control) {
        ++s.components;
        switch (cc.report.converged_by) {
          case ConvergedBy::Converged: ++s.converged; break;
          case ConvergedBy::Cycle: ++s.cycles; break;
          case ConvergedBy::IterationCap: ++s.capped; break;
          case ConvergedBy::NotIterative: ++s.not_iterative; break;
        }
        iter_sum += cc.report.iterations_used;
        s.max_iterations = std::max(s.max_iterations, cc.report.iterations_used);
        s.reward_evaluations += cc.report.reward_evaluations;
        if (cc.firing) {
          ++s.consensus_firings;
          if (!cc.firing->holds) ++s.consensus_violations;
        }
        if (!cc.staleness_ok) ++s.staleness_violations;
        if (cc.report.relaxed) ++s.relaxed;
        for (SensorId id : cc.roster) {
          const long long expect = static_cast<long long>(cc.report.iterations_per_node.at(id)) *
                                   cc.catalogue_size.at(id);
          if (cc.report.evaluations_per_node.at(id) != expect) ++s.accounting_mismatches;
        }
      }
    }
  }
  if (s.components) s.mean_iterations = static_cast<double>(iter_sum) / static_cast<double>(s.components);
  return s;
}

json to_json(const OptimizerStats& s) {
  return {{"control_problems", s.components},
          {"converged", s.converged},
          {"cycles", s.cycles},
          {"iteration_cap", s.capped},
          {"not_iterative", s.not_iterative},
          {"convergence_rate", s.convergence_rate()},
          {"mean_iterations", s.mean_iterations},
          {"max_iterations", s.max_iterations},
          {"reward_evaluations", s.reward_evaluations},
          {"consensus_firings", s.consensus_firings},
          {"consensus_violations", s.consensus_violations},
          {"staleness_violations", s.staleness_violations},
          {"relaxed", s.relaxed},
          {"accounting_mismatches", s.accounting_mismatches},
          {"degeneracy_fallbacks", s.degeneracy_fallbacks}};
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << std::fixed << std::setprecision(6);
  return out;
}

json label_json(const TrackLabel& l) { return json::array({l.birth_time, l.sensor_id, l.birth_index}); }

}  // namespace

void write_outputs(const std::string& dir, const Scenario& sc, const std::vector<Campaign>& campaigns,
                   std::uint64_t base_seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);

  {
    auto out = open_out(root / "summary.csv");
    out << "method,runs,mean_ospa,mean_ospa2,evaluations_per_sensor_step,mean_iterations\n";
    for (const auto& c : campaigns) {
      out << to_string(c.method) << ',' << c.runs.size() << ',' << c.mean_ospa << ',' << c.mean_ospa2 << ','
          << c.mean_evaluations_per_sensor_step << ',' << optimizer_stats(c).mean_iterations << '\n';
    }
  }
  {
    auto out = open_out(root / "timing.csv");
    out << "method,runs,control_seconds_per_sensor_step\n";
    for (const auto& c : campaigns) {
      out << to_string(c.method) << ',' << c.runs.size() << ',' << std::setprecision(9)
          << c.mean_control_seconds_per_sensor_step << std::setprecision(6) << '\n';
    }
  }
  {
    auto out = open_out(root / "cardinality.csv");
    out << "step,truth";
    for (const auto& c : campaigns) out << ',' << to_string(c.method);
    out << '\n';
    for (int k = 0; k < sc.duration; ++k) {
      out << k << ',' << (campaigns.empty() ? 0.0 : campaigns.front().truth_cardinality[k]);
      for (const auto& c : campaigns) out << ',' << c.mean_cardinality[k];
      out << '\n';
    }
  }
  {
    auto out = open_out(root / "tracks.jsonl");
    for (const auto& c : campaigns) {
      for (const auto& run : c.runs) {
        for (const auto& st : run.steps) {
          json tracks = json::array();
          for (const auto& e : st.estimates) {
            tracks.push_back({{"label", label_json(e.label)},
                              {"x", e.state[0]},
                              {"y", e.state[1]},
                              {"vx", e.state[2]},
                              {"vy", e.state[3]}});
          }
          out << json{{"method", to_string(c.method)}, {"run", run.run}, {"step", st.step}, {"tracks", tracks}}.dump()
              << '\n';
        }
      }
    }
  }
  if (!campaigns.empty()) {
    auto out = open_out(root / "truth.jsonl");
    for (const auto& run : campaigns.front().runs) {
      for (const auto& st : run.steps) {
        json targets = json::array();
        for (const auto& t : st.truth) targets.push_back({{"id", t.id}, {"x", t.x[0]}, {"y", t.x[1]}});
        out << json{{"run", run.run}, {"step", st.step}, {"targets", targets}}.dump() << '\n';
      }
    }
  }
  {
    json report;
    report["scenario"] = sc.name;
    report["base_seed"] = base_seed;
    report["duration"] = sc.duration;
    report["sensors"] = sc.sensors.size();
    json methods = json::object();
    for (const auto& c : campaigns) {
      json m = to_json(optimizer_stats(c));
      m["runs"] = c.runs.size();
      m["mean_ospa"] = c.mean_ospa;
      m["mean_ospa2"] = c.mean_ospa2;
      m["evaluations_per_sensor_step"] = c.mean_evaluations_per_sensor_step;
      methods[to_string(c.method)] = m;
    }
    report["methods"] = methods;
    auto out = open_out(root / "report.json");
    out << report.dump(2) << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error&) {
      throw ScenarioError(path + " line " + std::to_string(lineno), "malformed JSON");
    }
  }
  return out;
}

}  // namespace

std::vector<MetricsRow> metrics_from_files(const std::string& tracks_path, const std::string& truth_path,
                                           double c, double p, int window) {
  // run -> step -> positions / histories
  std::map<int, std::map<int, std::vector<std::pair<int, Position>>>> truth;
  for (const json& j : read_jsonl(truth_path)) {
    auto& slot = truth[j.at("run").get<int>()][j.at("step").get<int>()];
    for (const json& t : j.at("targets")) {
      slot.emplace_back(t.at("id").get<int>(), Position(t.at("x").get<double>(), t.at("y").get<double>()));
    }
  }
  using Key = std::pair<std::string, int>;
  std::map<Key, std::map<int, std::vector<std::pair<TrackLabel, Position>>>> tracks;
  for (const json& j : read_jsonl(tracks_path)) {
    auto& slot = tracks[{j.at("method").get<std::string>(), j.at("run").get<int>()}][j.at("step").get<int>()];
    for (const json& t : j.at("tracks")) {
      const auto& l = t.at("label");
      slot.emplace_back(TrackLabel{l.at(0).get<int>(), l.at(1).get<int>(), l.at(2).get<int>()},
                        Position(t.at("x").get<double>(), t.at("y").get<double>()));
    }
  }

  std::vector<MetricsRow> rows;
  for (const auto& [key, steps] : tracks) {
    const auto tr = truth.find(key.second);
    if (tr == truth.end()) throw std::runtime_error("no truth for run " + std::to_string(key.second));
    MetricsRow row{key.first, key.second, 0, 0.0, 0.0};
    std::map<TrackLabel, TrackHistory> eh;
    std::map<int, TrackHistory> th;
    for (const auto& [k, est] : steps) {
      std::vector<Position> X, Y;
      for (const auto& [l, pos] : est) {
        X.push_back(pos);
        eh[l][k] = pos;
      }
      if (auto ts = tr->second.find(k); ts != tr->second.end()) {
        for (const auto& [id, pos] : ts->second) {
          Y.push_back(pos);
          th[id][k] = pos;
        }
      }
      std::vector<TrackHistory> ev, tv;
      for (const auto& [l, h] : eh) ev.push_back(h);
      for (const auto& [id, h] : th) tv.push_back(h);
      row.mean_ospa += ospa(X, Y, c, p);
      row.mean_ospa2 += ospa2(ev, tv, k, window, c, p);
      ++row.steps;
    }
    if (row.steps) {
      row.mean_ospa /= row.steps;
      row.mean_ospa2 /= row.steps;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dfsc
