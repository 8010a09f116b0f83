#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "taxon/cluster.hpp"

namespace taxon::stability {

enum class Baseline { full_restricted, pairwise_runs };

struct ConsensusParams {
  int runs = 40;
  double fraction = 0.8;  // subsample share, without replacement
  int k = 3;
  std::uint64_t seed = 42;
  Baseline baseline = Baseline::full_restricted;
  cluster::KMeansParams kmeans;  // k field overridden per use

  void validate(Eigen::Index n) const;
};

struct MergeStep {
  int left;       // cluster ids: 0..n-1 leaves, n+i for step i
  int right;
  double height;
  int size;       // leaves in the merged cluster
};

struct DistSummary {
  double median;
  double iqr;
  double min;
  double max;
};

struct ConsensusResult {
  Eigen::MatrixXd C;           // co-association; -1 marks never-co-sampled pairs
  Eigen::MatrixXd co_sampled;  // co-sampling counts
  std::vector<MergeStep> dendrogram;
  Eigen::VectorXi flat_labels;     // consensus partition at k leaves
  std::vector<double> ari_samples;
  std::vector<double> ami_samples;
  DistSummary ari_summary;
  DistSummary ami_summary;
  std::vector<int> heatmap_order;  // row permutation grouping flat_labels
};

// Subsample -> recluster -> accumulate co-association; dendrogram is average
// linkage on 1-C (missing entries imputed as 1). Per-run ARI/AMI follow the
// configured baseline.
ConsensusResult run_consensus(const Eigen::MatrixXd& X,
                              const ConsensusParams& params);

// UPGMA on a symmetric zero-diagonal dissimilarity matrix. Tie rule: among
// equal-distance pairs, merge the one with the smallest (min id, max id).
std::vector<MergeStep> average_linkage(const Eigen::MatrixXd& D);

// Flat labels from cutting the merge sequence at exactly k clusters; clusters
// numbered by smallest member index.
Eigen::VectorXi cut_dendrogram(const std::vector<MergeStep>& merges,
                               Eigen::Index n, int k);

DistSummary summarize_distribution(std::vector<double> values);

std::string consensus_to_json(const ConsensusResult& r, Baseline baseline);

}  // namespace taxon::stability
