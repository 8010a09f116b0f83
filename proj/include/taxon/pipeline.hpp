#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taxon/cluster.hpp"
#include "taxon/corpus.hpp"
#include "taxon/geometry.hpp"
#include "taxon/stability.hpp"
#include "taxon/supervise.hpp"
#include "taxon/toml.hpp"
#include "taxon/topics.hpp"
#include "taxon/validity.hpp"

namespace taxon::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";

// All randomness flows from `seed` via fixed offsets:
//   k scan / final fit   seed
//   consensus            seed + 1000
//   topics, cluster c    seed + 2000 + 100*c
//   alignment folds      seed + 3000
//   2-D projection       seed + 4000
struct PipelineConfig {
  // paths
  std::string corpus_path;
  std::string embeddings_path;  // empty -> embeddings must ship with corpus
  std::string out_dir = "out";
  std::string stopwords_path;   // empty -> built-in default list

  std::uint64_t seed = 42;

  // clustering + k scan
  int n_init = 10;
  int max_iter = 300;
  double tol = 1e-4;
  int k_min = 2;
  int k_max = 10;
  validity::Metric sil_metric = validity::Metric::cosine;

  // consensus
  int consensus_runs = 40;
  double consensus_fraction = 0.8;
  stability::Baseline consensus_baseline = stability::Baseline::full_restricted;

  // topics
  int topic_k_min = 2;
  int topic_k_max = 5;
  int min_df = 2;
  int lda_iters = 1000;
  int lda_burn_in = 200;
  int lda_thinning = 10;
  int top_terms = 30;
  std::vector<double> lambda_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

  // alignment
  int folds = 5;
  double reg = 1.0;

  // projection
  int neighbors = 15;
  double min_dist = 0.1;
  int umap_epochs = 200;

  static PipelineConfig from_toml(const toml::Table& t);
  static PipelineConfig from_file(const std::filesystem::path& path);

  void validate() const;

  // Canonical parameter echo (analysis parameters only; paths excluded so
  // the hash identifies the analysis, not the machine it ran on).
  std::string params_json() const;
  std::string config_hash() const;  // sha256 of params_json()
};

struct ClusterTopics {
  int cluster = 0;
  topics::TopicKDiagnostics diagnostics;
  topics::TopicModel model;
  // top terms at each lambda in the config grid, [lambda][topic][rank]
  std::vector<std::vector<std::vector<topics::RankedTerm>>> ranked;
};

struct ReportBundle {
  std::vector<std::string> doc_ids;
  corpus::DescriptiveStats stats;
  validity::ValidityTable validity;
  cluster::Partition partition;
  std::string partition_hash;  // recorded before any Study-2 stage runs
  validity::SilhouetteProfile silhouette;
  Eigen::MatrixXd centroid_cosine;
  stability::ConsensusResult consensus;
  std::vector<ClusterTopics> cluster_topics;
  geometry::Layout2D layout;
  std::vector<Eigen::Vector2d> medians;            // per cluster
  std::vector<geometry::Ellipse> ellipses;         // per cluster
  std::optional<supervise::AlignmentReport> alignment;
  std::vector<std::string> expert_labels;  // empty unless Study 2 ran
  PipelineConfig config;
  std::string config_hash;
  // relative artifact path -> sha256, as written under config.out_dir
  std::map<std::string, std::string> manifest;
  std::vector<std::string> notes;
};

// Full Study-1 + Study-2 sequence. Writes artifacts and manifest.json under
// cfg.out_dir; any stage error aborts with the stage name after writing a
// partial manifest. The alignment stage runs only when every document
// carries an expert label, and never before the partition hash is recorded.
ReportBundle run_pipeline(const PipelineConfig& cfg);

// Figure-data emission (CSV/JSON) under out_dir/figures, with its own
// checksum manifest. Missing upstream artifacts skip the dependent figures
// with a manifest note.
std::vector<std::string> emit_figures(const ReportBundle& bundle,
                                      const std::filesystem::path& out_dir);

}  // namespace taxon::pipeline
