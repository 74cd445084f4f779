#include "dfsc/association.hpp"

#include "dfsc/lmb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

namespace dfsc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Cluster {
  std::vector<int> tracks;
  std::vector<int> meas;
};

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

std::vector<Cluster> build_clusters(const Eigen::MatrixXd& detect) {
  const int n = static_cast<int>(detect.rows());
  const int m = static_cast<int>(detect.cols());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int j = 0; j < m; ++j) {
    int first = -1;
    for (int i = 0; i < n; ++i) {
      if (detect(i, j) <= 0.0) continue;
      if (first < 0) {
        first = i;
      } else {
        parent[find_root(parent, i)] = find_root(parent, first);
      }
    }
  }
  std::vector<int> root_to_cluster(n, -1);
  std::vector<Cluster> clusters;
  for (int i = 0; i < n; ++i) {
    const int root = find_root(parent, i);
    if (root_to_cluster[root] < 0) {
      root_to_cluster[root] = static_cast<int>(clusters.size());
      clusters.emplace_back();
    }
    clusters[root_to_cluster[root]].tracks.push_back(i);
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      if (detect(i, j) > 0.0) {
        clusters[root_to_cluster[find_root(parent, i)]].meas.push_back(j);
        break;
      }
    }
  }
  return clusters;
}

// Hypothesis: gamma[t] = 0 for undetected, k+1 for the cluster's k-th measurement.
using Hypothesis = std::vector<int>;

class ClusterScorer {
 public:
  ClusterScorer(const AssociationProblem& p, const Cluster& c) : p_(p), c_(c) {
    log_kappa_ = p.clutter > 0.0 ? std::log(p.clutter) : kNegInf;
    const std::size_t nt = c.tracks.size();
    const std::size_t nm = c.meas.size();
    undetected_.resize(nt);
    detected_.assign(nt, std::vector<double>(nm, kNegInf));
    for (std::size_t t = 0; t < nt; ++t) {
      const int i = c.tracks[t];
      const double r = p.r[i];
      undetected_[t] = std::log((1.0 - r) + r * p.miss[i]);
      for (std::size_t k = 0; k < nm; ++k) {
        const double d = p.detect(i, c.meas[k]);
        if (d > 0.0 && r > 0.0) detected_[t][k] = std::log(r * d);
      }
    }
  }

  double log_weight(const Hypothesis& h) const {
    double lw = 0.0;
    int assigned = 0;
    for (std::size_t t = 0; t < h.size(); ++t) {
      if (h[t] == 0) {
        lw += undetected_[t];
      } else {
        lw += detected_[t][h[t] - 1];
        ++assigned;
      }
    }
    const int unassigned = static_cast<int>(c_.meas.size()) - assigned;
    if (unassigned > 0) lw += unassigned * log_kappa_;
    return lw;
  }

  double undetected(std::size_t t) const { return undetected_[t]; }
  double detected(std::size_t t, std::size_t k) const { return detected_[t][k]; }
  double log_kappa() const { return log_kappa_; }

 private:
  const AssociationProblem& p_;
  const Cluster& c_;
  double log_kappa_;
  std::vector<double> undetected_;
  std::vector<std::vector<double>> detected_;
};

void enumerate(const ClusterScorer& scorer, std::size_t nt, std::size_t nm, Hypothesis& h,
               std::vector<bool>& used, std::size_t t, std::vector<Hypothesis>& out) {
  if (t == nt) {
    out.push_back(h);
    return;
  }
  h[t] = 0;
  enumerate(scorer, nt, nm, h, used, t + 1, out);
  for (std::size_t k = 0; k < nm; ++k) {
    if (used[k] || scorer.detected(t, k) == kNegInf) continue;
    used[k] = true;
    h[t] = static_cast<int>(k) + 1;
    enumerate(scorer, nt, nm, h, used, t + 1, out);
    used[k] = false;
  }
  h[t] = 0;
}

std::vector<Hypothesis> gibbs_hypotheses(const ClusterScorer& scorer, std::size_t nt,
                                         std::size_t nm, int iterations, Rng& rng) {
  // Detection log-odds are taken relative to leaving the measurement as clutter;
  // with zero clutter a tiny floor keeps the ratios finite.
  const double log_kappa = std::max(scorer.log_kappa(), std::log(1e-300));
  std::set<Hypothesis> seen;
  Hypothesis h(nt, 0);
  seen.insert(h);
  std::vector<int> owner(nm, -1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> logw;
  std::vector<int> option;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t t = 0; t < nt; ++t) {
      logw.clear();
      option.clear();
      logw.push_back(scorer.undetected(t));
      option.push_back(0);
      for (std::size_t k = 0; k < nm; ++k) {
        if (scorer.detected(t, k) == kNegInf) continue;
        if (owner[k] >= 0 && owner[k] != static_cast<int>(t)) continue;
        logw.push_back(scorer.detected(t, k) - log_kappa);
        option.push_back(static_cast<int>(k) + 1);
      }
      const double mx = *std::max_element(logw.begin(), logw.end());
      if (mx == kNegInf) continue;
      double total = 0.0;
      for (double& w : logw) total += (w = std::exp(w - mx));
      double u = unit(rng) * total;
      std::size_t pick = 0;
      while (pick + 1 < logw.size() && u >= logw[pick]) u -= logw[pick++];
      if (h[t] > 0) owner[h[t] - 1] = -1;
      h[t] = option[pick];
      if (h[t] > 0) owner[h[t] - 1] = static_cast<int>(t);
    }
    seen.insert(h);
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

AssociationResult marginalize_associations(const AssociationProblem& problem,
                                           const AssociationOptions& opts, Rng& rng) {
  const Eigen::Index n = problem.r.size();
  const Eigen::Index m = problem.detect.cols();
  AssociationResult res;
  res.r_post = Eigen::VectorXd::Zero(n);
  res.miss_weight = Eigen::VectorXd::Zero(n);
  res.detect_weight = Eigen::MatrixXd::Zero(n, m);
  res.measurement_association = Eigen::VectorXd::Zero(m);
  if (n == 0) return res;

  for (const Cluster& c : build_clusters(problem.detect)) {
    const std::size_t nt = c.tracks.size();
    const std::size_t nm = c.meas.size();

    if (nm == 0) {
      for (int i : c.tracks) {
        const double r = problem.r[i];
        const double denom = (1.0 - r) + r * problem.miss[i];
        if (!(denom > 0.0)) throw NumericalDegeneracy("track with certain existence and certain detection was missed");
        res.miss_weight[i] = r * problem.miss[i] / denom;
        res.r_post[i] = res.miss_weight[i];
      }
      continue;
    }

    ClusterScorer scorer(problem, c);
    std::vector<Hypothesis> hyps;
    if (static_cast<int>(nt) <= opts.exhaustive_max_tracks &&
        static_cast<int>(nm) <= opts.exhaustive_max_measurements) {
      Hypothesis h(nt, 0);
      std::vector<bool> used(nm, false);
      enumerate(scorer, nt, nm, h, used, 0, hyps);
    } else {
      hyps = gibbs_hypotheses(scorer, nt, nm, opts.gibbs_iterations, rng);
      res.used_gibbs = true;
    }

    std::vector<double> lw(hyps.size());
    double mx = kNegInf;
    for (std::size_t h = 0; h < hyps.size(); ++h) {
      lw[h] = scorer.log_weight(hyps[h]);
      mx = std::max(mx, lw[h]);
    }
    if (mx == kNegInf) throw NumericalDegeneracy("all association hypotheses have zero weight");
    double total = 0.0;
    for (double& w : lw) total += (w = std::exp(w - mx));

    std::vector<double> undetected(nt, 0.0);
    for (std::size_t h = 0; h < hyps.size(); ++h) {
      const double w = lw[h] / total;
      for (std::size_t t = 0; t < nt; ++t) {
        if (hyps[h][t] == 0) {
          undetected[t] += w;
        } else {
          res.detect_weight(c.tracks[t], c.meas[hyps[h][t] - 1]) += w;
        }
      }
    }
    for (std::size_t t = 0; t < nt; ++t) {
      const int i = c.tracks[t];
      const double r = problem.r[i];
      const double denom = (1.0 - r) + r * problem.miss[i];
      const double exists_given_undetected = denom > 0.0 ? r * problem.miss[i] / denom : 0.0;
      res.miss_weight[i] = undetected[t] * exists_given_undetected;
      res.r_post[i] = res.miss_weight[i] + res.detect_weight.row(i).sum();
    }
  }

  res.r_post = res.r_post.cwiseMax(0.0).cwiseMin(1.0);
  res.measurement_association = res.detect_weight.colwise().sum().transpose();
  return res;
}

}  // namespace dfsc
