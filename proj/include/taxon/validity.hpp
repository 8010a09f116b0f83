#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "taxon/cluster.hpp"

namespace taxon::validity {

enum class Metric { cosine, euclidean };

std::string metric_name(Metric m);

struct SilhouetteProfile {
  Eigen::VectorXd samples;          // s(i) per row, in [-1, 1]
  std::vector<double> cluster_median;
  std::vector<double> cluster_iqr;
  double mean = 0.0;
  std::vector<Eigen::Index> negative_flags;  // rows with s(i) < 0
  Metric metric = Metric::cosine;
};

// Rousseeuw silhouette. Singleton-cluster members score 0 by convention.
SilhouetteProfile silhouette(const Eigen::MatrixXd& X,
                             const Eigen::VectorXi& labels,
                             Metric metric = Metric::cosine);

// Euclidean Davies-Bouldin index; coincident centroids are an error.
double davies_bouldin(const Eigen::MatrixXd& X, const Eigen::VectorXi& labels);

// Calinski-Harabasz ratio; returns +inf when within-dispersion is zero.
double calinski_harabasz(const Eigen::MatrixXd& X,
                         const Eigen::VectorXi& labels);

struct ValidityRow {
  int k;
  double inertia;
  double mean_silhouette;
  double dbi;
  double chi;
};

struct ValidityTable {
  std::vector<ValidityRow> rows;
  int selected_k = 0;
  int elbow_k = 0;           // max discrete second difference of inertia
  std::string rationale;     // "silhouette_max+elbow" or "silhouette_max"
  Metric silhouette_metric = Metric::cosine;
};

// One kmeans_fit per candidate K (shared base seed). selected_k maximizes
// mean silhouette, ties to the smaller K.
ValidityTable scan_k(const Eigen::MatrixXd& X, int k_min, int k_max,
                     const cluster::KMeansParams& base,
                     Metric sil_metric = Metric::cosine);

// Pairwise cosine similarity of centroids; unit diagonal.
Eigen::MatrixXd centroid_similarity(const cluster::Partition& p);

std::string validity_to_csv(const ValidityTable& t);
std::string validity_to_json(const ValidityTable& t);

}  // namespace taxon::validity
