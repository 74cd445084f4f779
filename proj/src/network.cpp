#include "dfsc/network.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

namespace dfsc {

void NetworkGraph::connect(SensorId a, SensorId b) {
  if (a == b) throw std::invalid_argument("self edge");
  adjacency_.at(a).insert(b);
  adjacency_.at(b).insert(a);
}

bool NetworkGraph::connected(SensorId a, SensorId b) const { return adjacency_.at(a).contains(b); }

std::vector<SensorId> NetworkGraph::closed_neighborhood(SensorId s) const {
  std::vector<SensorId> out(adjacency_.at(s).begin(), adjacency_.at(s).end());
  out.insert(std::lower_bound(out.begin(), out.end(), s), s);
  return out;
}

namespace {

std::map<SensorId, int> hop_distances(const std::map<SensorId, std::set<SensorId>>& adj, SensorId src) {
  std::map<SensorId, int> dist{{src, 0}};
  std::deque<SensorId> queue{src};
  while (!queue.empty()) {
    const SensorId u = queue.front();
    queue.pop_front();
    for (SensorId v : adj.at(u)) {
      if (dist.contains(v)) continue;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
    }
  }
  return dist;
}

}  // namespace

std::vector<std::vector<SensorId>> NetworkGraph::components() const {
  std::vector<std::vector<SensorId>> out;
  std::set<SensorId> seen;
  for (SensorId s : ids_) {
    if (seen.contains(s)) continue;
    std::vector<SensorId> comp;
    for (const auto& [id, d] : hop_distances(adjacency_, s)) {
      comp.push_back(id);
      seen.insert(id);
    }
    out.push_back(std::move(comp));
  }
  return out;
}

int NetworkGraph::eccentricity(SensorId s) const {
  int ecc = 0;
  for (const auto& [id, d] : hop_distances(adjacency_, s)) ecc = std::max(ecc, d);
  return ecc;
}

int NetworkGraph::diameter(const std::vector<SensorId>& component) const {
  int d = 0;
  for (SensorId s : component) d = std::max(d, eccentricity(s));
  return d;
}

NetworkGraph build_graph(const std::map<SensorId, Position>& positions, double comm_range) {
  if (!(comm_range > 0.0)) throw std::invalid_argument("comm_range must be positive");
  std::vector<SensorId> ids;
  for (const auto& [id, p] : positions) ids.push_back(id);
  NetworkGraph g(ids);
  for (auto a = positions.begin(); a != positions.end(); ++a) {
    for (auto b = std::next(a); b != positions.end(); ++b) {
      if ((a->second - b->second).norm() <= comm_range) g.connect(a->first, b->first);
    }
  }
  return g;
}

Inboxes flood_round(const NetworkGraph& graph, const Inboxes& inboxes) {
  Inboxes next = inboxes;
  for (const auto& [node, inbox] : inboxes) {
    for (SensorId nbr : graph.neighbors(node)) {
      Inbox& dst = next[nbr];
      for (const auto& [key, msg] : inbox) {
        auto it = dst.find(key);
        if (it == dst.end()) {
          FloodMessage fwd = msg;
          ++fwd.hops;
          dst.emplace(key, std::move(fwd));
        } else if (msg.hops + 1 < it->second.hops) {
          it->second.hops = msg.hops + 1;
        }
      }
    }
  }
  return next;
}

const FloodMessage* latest_from(const Inbox& inbox, SensorId origin) {
  auto it = inbox.upper_bound({origin, std::numeric_limits<int>::max()});
  if (it == inbox.begin()) return nullptr;
  --it;
  return it->first.first == origin ? &it->second : nullptr;
}

}  // namespace dfsc
