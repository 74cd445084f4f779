#pragma once

// Optimal assignment, OSPA and windowed track-level OSPA.

#include "dfsc/types.hpp"

#include <Eigen/Core>

#include <map>
#include <vector>

namespace dfsc {

/// Minimum-cost assignment of every row of an n x m cost matrix with n <= m.
/// Returns the column chosen for each row.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

/// OSPA from pairwise base distances (rows: X, cols: Y), cutoff c, order p.
double ospa_from_distances(const Eigen::MatrixXd& d, double c, double p);

double ospa(const std::vector<Position>& X, const std::vector<Position>& Y, double c, double p);

/// step -> position, for one track or one true target.
using TrackHistory = std::map<int, Position>;

/// Track-level OSPA over steps [end - window + 1, end]. The base distance
/// between two tracks is the mean over steps where either exists of
/// min(c, |x - y|), or c when only one exists. Tracks absent from the whole
/// window are ignored.
double ospa2(const std::vector<TrackHistory>& estimates, const std::vector<TrackHistory>& truth,
             int end, int window, double c, double p);

}  // namespace dfsc
