#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace taxon::supervise {

// Per-index fold assignment: per-class seeded shuffle then round-robin, so
// fold sizes differ by at most 1 within every class.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds,
                                  std::uint64_t seed);

struct LinearClassifier {
  std::vector<int> classes;   // ordered label values
  Eigen::MatrixXd weights;    // classes x d
  Eigen::VectorXd bias;       // per class
  double reg_strength = 1.0;

  std::vector<int> predict(const Eigen::MatrixXd& X) const;
};

// One-vs-rest L2 logistic regression; zero init, full-batch gradient descent
// with backtracking, stop at gradient norm <= 1e-6 or 1000 epochs.
LinearClassifier train_classifier(const Eigen::MatrixXd& X,
                                  const std::vector<int>& y, double reg = 1.0);

// Unweighted mean of per-class F1 over classes present in y_true;
// F1 = 0 when precision + recall = 0.
double macro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred);

struct AlignmentConfig {
  int folds = 5;
  double reg = 1.0;
  std::uint64_t seed = 42;
};

struct AlignmentReport {
  double macro_f1_mean = 0.0;
  double macro_f1_sd = 0.0;           // sample sd, n-1 denominator
  std::vector<double> fold_scores;
  double nmi = 0.0;
  double ari = 0.0;
  Eigen::MatrixXi confusion;          // pooled out-of-fold, true x pred
  std::vector<std::string> class_names;
  AlignmentConfig config;
  // Leakage instrumentation: per-fold |train ∩ test| (must all be 0).
  std::vector<int> fold_overlap;
};

// Cross-validated Macro-F1 of expert labels from embeddings, plus NMI/ARI of
// the machine partition against the expert labels.
AlignmentReport evaluate_alignment(const Eigen::MatrixXd& X,
                                   const std::vector<std::string>& expert_labels,
                                   const std::vector<int>& machine_labels,
                                   const AlignmentConfig& cfg);

std::string alignment_to_json(const AlignmentReport& r,
                              const std::string& nmi_variant = "arithmetic");
std::string confusion_to_csv(const AlignmentReport& r);

}  // namespace taxon::supervise
