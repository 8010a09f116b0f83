#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace taxon::agreement {

// r x c contingency table between two label vectors, plus margins.
struct Contingency {
  Eigen::MatrixXd table;    // counts n_ij
  Eigen::VectorXd row_sums; // a_i
  Eigen::VectorXd col_sums; // b_j
  double n = 0;
};

Contingency contingency(const std::vector<int>& a, const std::vector<int>& b);

// Hubert-Arabie adjusted Rand index. Degenerate case (Max == E[Index],
// both partitions trivial): 1.0 if the partitions are identical, else 0.0.
double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b);

enum class MiMode { nmi, ami };

// NMI with arithmetic-mean normalization; AMI with the exact hypergeometric
// expected mutual information. Both return 1.0 when both partitions are
// single-cluster (zero entropy on both sides).
double mutual_information(const std::vector<int>& a, const std::vector<int>& b,
                          MiMode mode);

// Cohen's kappa over a shared label alphabet. p_e == 1 (both raters constant
// and identical) returns 1.0 by convention.
double cohen_kappa(const std::vector<int>& r1, const std::vector<int>& r2);
double cohen_kappa(const std::vector<std::string>& r1,
                   const std::vector<std::string>& r2);

// Remaps arbitrary labels to dense ints in order of first appearance.
std::vector<int> densify_labels(const std::vector<std::string>& labels);

}  // namespace taxon::agreement
