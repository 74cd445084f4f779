#pragma once

// Communication graph and simulated flooding transport.

#include "dfsc/geometry.hpp"

#include <map>
#include <set>
#include <utility>
#include <variant>
#include <vector>

namespace dfsc {

using MultiSensorCommand = std::map<SensorId, ControlCommand>;

class NetworkGraph {
 public:
  NetworkGraph() = default;
  explicit NetworkGraph(std::vector<SensorId> ids) : ids_(std::move(ids)) {
    for (SensorId s : ids_) adjacency_[s];
  }

  void connect(SensorId a, SensorId b);
  bool connected(SensorId a, SensorId b) const;

  const std::vector<SensorId>& ids() const { return ids_; }
  const std::set<SensorId>& neighbors(SensorId s) const { return adjacency_.at(s); }
  /// N(s) plus s itself, ascending.
  std::vector<SensorId> closed_neighborhood(SensorId s) const;

  std::vector<std::vector<SensorId>> components() const;
  /// Longest shortest-path hop count within the component containing `s`.
  int eccentricity(SensorId s) const;
  int diameter(const std::vector<SensorId>& component) const;

 private:
  std::vector<SensorId> ids_;
  std::map<SensorId, std::set<SensorId>> adjacency_;
};

/// Edge (a, b) iff the two sensors are within comm_range (inclusive).
NetworkGraph build_graph(const std::map<SensorId, Position>& positions, double comm_range);

struct ConvergenceBroadcast {
  MultiSensorCommand decision;
};

struct FloodMessage {
  SensorId origin = 0;
  int iteration = 0;
  std::variant<ControlCommand, ConvergenceBroadcast> payload;
  int hops = 0;
};

/// Messages known to a node, keyed by (origin, iteration) so re-flooded copies collapse.
using Inbox = std::map<std::pair<SensorId, int>, FloodMessage>;
using Inboxes = std::map<SensorId, Inbox>;

/// One synchronous hop: each node receives everything its neighbours knew at the start of the round.
Inboxes flood_round(const NetworkGraph& graph, const Inboxes& inboxes);

/// Latest-iteration message from `origin` in an inbox, if any.
const FloodMessage* latest_from(const Inbox& inbox, SensorId origin);

}  // namespace dfsc
