#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "taxon/common.hpp"

namespace taxon::cluster {

struct KMeansParams {
  int k = 2;
  int n_init = 10;
  int max_iter = 300;
  std::uint64_t seed = 42;
  double tol = 1e-4;  // max centroid shift, Euclidean
  // When false, unnormalized input only produces a warning on stderr.
  bool require_normalized = false;

  void validate(Eigen::Index n) const;
};

struct Partition {
  Eigen::VectorXi labels;     // per-row cluster index in [0, k)
  Eigen::MatrixXd centroids;  // k x d
  double inertia = 0.0;       // within-cluster sum of squared distances
  int k = 0;

  std::vector<int> labels_vec() const {
    return {labels.data(), labels.data() + labels.size()};
  }
};

// Best-of-n_init Lloyd k-means with k-means++ seeding. Restart r uses seed
// params.seed + r; the winner is the lowest (inertia, restart index).
Partition kmeans_fit(const Eigen::MatrixXd& X, const KMeansParams& params);

// As kmeans_fit, also returning the per-iteration inertia trace of the
// winning restart (non-increasing by construction).
Partition kmeans_fit_traced(const Eigen::MatrixXd& X, const KMeansParams& params,
                            std::vector<double>* inertia_trace);

// Nearest-centroid assignment, ties resolved to the lowest index.
Eigen::VectorXi predict_assign(const Eigen::MatrixXd& centroids,
                               const Eigen::MatrixXd& X);

std::string partition_to_json(const Partition& p);
Partition partition_from_json(const std::string& text);

namespace detail {
// k-means++ seeding: returns the chosen data-point indices. Exposed for the
// statistical seeding test.
std::vector<Eigen::Index> kmeanspp_indices(const Eigen::MatrixXd& X, int k,
                                           Rng& rng);
}  // namespace detail

}  // namespace taxon::cluster
