#pragma once

// Marginal association probabilities for an LMB update. Tracks and
// measurements are split into independent clusters through the gated
// likelihood matrix; each cluster is enumerated exhaustively when small and
// Gibbs-sampled otherwise.

#include "dfsc/types.hpp"

#include <Eigen/Core>

namespace dfsc {

struct AssociationProblem {
  Eigen::VectorXd r;       // prior existence per track
  Eigen::VectorXd miss;    // sum_j w_j (1 - p_D(x_j))
  Eigen::MatrixXd detect;  // sum_j w_j p_D(x_j) g(z|x_j); 0 marks an ungated pairing
  double clutter = 0.0;    // clutter intensity kappa(z), uniform
};

struct AssociationResult {
  Eigen::VectorXd r_post;
  Eigen::VectorXd miss_weight;    // P(track exists and is missed)
  Eigen::MatrixXd detect_weight;  // P(track generated z)
  Eigen::VectorXd measurement_association;
  bool used_gibbs = false;
};

struct AssociationOptions {
  int exhaustive_max_tracks = 6;
  int exhaustive_max_measurements = 6;
  int gibbs_iterations = 1000;
};

/// Throws NumericalDegeneracy when every hypothesis of some cluster has zero weight.
/// `rng` is only consulted for clusters that exceed the exhaustive limits.
AssociationResult marginalize_associations(const AssociationProblem& problem,
                                           const AssociationOptions& opts, Rng& rng);

}  // namespace dfsc
