#pragma once
// Brute-force reference implementations used only by tests. These share no
// code with the library under test: everything is computed directly from
// definitions, favoring clarity over speed. Fixtures must stay small.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace oracle {

// ---- pair-counting agreement ----

struct PairCounts {
  long long same_same = 0;   // pairs together in both partitions
  long long same_diff = 0;   // together in a, apart in b
  long long diff_same = 0;
  long long diff_diff = 0;
};

PairCounts count_pairs(const std::vector<int>& a, const std::vector<int>& b);

struct AriTrace {
  double index;      // sum over cells of C(n_ij, 2)
  double expected;
  double maximum;
  double value;
};

AriTrace adjusted_rand(const std::vector<int>& a, const std::vector<int>& b);

double nmi(const std::vector<int>& a, const std::vector<int>& b);

// exact hypergeometric expected mutual information (Vinh et al. 2010)
double expected_mi(const std::vector<int>& a, const std::vector<int>& b);
double ami(const std::vector<int>& a, const std::vector<int>& b);

double cohen_kappa(const std::vector<int>& a, const std::vector<int>& b);

double macro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// ---- clustering indices ----

struct SilhouetteRow {
  double a;  // mean dissimilarity to own cluster
  double b;  // min mean dissimilarity to another cluster
  double s;
};

// dissimilarity: "cosine" (1 - cos) or "euclidean"
std::vector<SilhouetteRow> silhouette_rows(const Eigen::MatrixXd& X,
                                           const std::vector<int>& labels,
                                           const std::string& metric);
double mean_silhouette(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                       const std::string& metric);

double davies_bouldin(const Eigen::MatrixXd& X, const std::vector<int>& labels);
double calinski_harabasz(const Eigen::MatrixXd& X,
                         const std::vector<int>& labels);

// ---- average linkage (UPGMA) ----

struct Merge {
  int left;   // cluster ids: leaves 0..n-1, merge i creates id n+i
  int right;
  double height;
  int size;
};

// naive UPGMA on the full dissimilarity matrix; ties merge the pair with the
// smallest (min id, max id)
std::vector<Merge> upgma(const Eigen::MatrixXd& D);

// ---- geometric median ----

double median_objective(const Eigen::MatrixXd& pts, double x, double y);

// coarse-to-fine grid search to ~1e-9 cell size; returns best objective
double grid_median_objective(const Eigen::MatrixXd& pts);

}  // namespace oracle
