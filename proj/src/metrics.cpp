#include "dfsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfsc {

// Shortest augmenting path with potentials, O(n^2 m).
std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  if (n > m) throw std::invalid_argument("hungarian: more rows than columns");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assign(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) assign[p[j] - 1] = j - 1;
  }
  return assign;
}

double ospa_from_distances(const Eigen::MatrixXd& d, double c, double p) {
  if (!(c > 0.0) || !(p >= 1.0)) throw std::invalid_argument("ospa requires c > 0 and p >= 1");
  const Eigen::Index n = d.rows(), m = d.cols();
  if (n == 0 && m == 0) return 0.0;
  if (n == 0 || m == 0) return c;
  const Eigen::MatrixXd cost = d.cwiseMin(c).array().pow(p).matrix();
  const bool flip = n > m;
  const Eigen::MatrixXd oriented = flip ? Eigen::MatrixXd(cost.transpose()) : cost;
  const auto assign = hungarian(oriented);
  double total = 0.0;
  for (std::size_t i = 0; i < assign.size(); ++i) total += oriented(static_cast<Eigen::Index>(i), assign[i]);
  const Eigen::Index small = std::min(n, m), big = std::max(n, m);
  total += std::pow(c, p) * static_cast<double>(big - small);
  return std::pow(total / static_cast<double>(big), 1.0 / p);
}

double ospa(const std::vector<Position>& X, const std::vector<Position>& Y, double c, double p) {
  Eigen::MatrixXd d(X.size(), Y.size());
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (std::size_t j = 0; j < Y.size(); ++j) d(i, j) = (X[i] - Y[j]).norm();
  }
  return ospa_from_distances(d, c, p);
}

namespace {

bool present_in(const TrackHistory& h, int lo, int hi) {
  auto it = h.lower_bound(lo);
  return it != h.end() && it->first <= hi;
}

}  // namespace

double ospa2(const std::vector<TrackHistory>& estimates, const std::vector<TrackHistory>& truth,
             int end, int window, double c, double p) {
  if (window < 1) throw std::invalid_argument("ospa2 window must be >= 1");
  const int lo = end - window + 1;
  std::vector<const TrackHistory*> X, Y;
  for (const auto& h : estimates) {
    if (present_in(h, lo, end)) X.push_back(&h);
  }
  for (const auto& h : truth) {
    if (present_in(h, lo, end)) Y.push_back(&h);
  }
  Eigen::MatrixXd d(X.size(), Y.size());
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (std::size_t j = 0; j < Y.size(); ++j) {
      double sum = 0.0;
      int count = 0;
      for (int k = lo; k <= end; ++k) {
        auto a = X[i]->find(k);
        auto b = Y[j]->find(k);
        const bool ha = a != X[i]->end(), hb = b != Y[j]->end();
        if (!ha && !hb) continue;
        sum += (ha && hb) ? std::min(c, (a->second - b->second).norm()) : c;
        ++count;
      }
      d(i, j) = sum / count;
    }
  }
  return ospa_from_distances(d, c, p);
}

}  // namespace dfsc
