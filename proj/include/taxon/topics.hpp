#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace taxon::topics {

struct DtmConfig {
  std::set<std::string> stopwords;
  int min_df = 2;
  bool bigrams = true;
};

struct DocTermMatrix {
  std::vector<std::string> vocab;  // lexicographic
  // counts[d] = sorted (term index, count) pairs
  std::vector<std::vector<std::pair<int, int>>> counts;
  std::vector<std::string> doc_ids;
  long long total_tokens = 0;

  std::size_t n_docs() const { return counts.size(); }
  std::size_t n_terms() const { return vocab.size(); }
};

// Lowercase; tokens are maximal [a-z0-9] runs of length >= 2; stopwords are
// removed before bigram formation; bigrams joined with "_"; terms below
// min_df dropped.
DocTermMatrix build_dtm(const std::vector<std::string>& docs,
                        const DtmConfig& cfg,
                        const std::vector<std::string>& doc_ids = {});

std::vector<std::string> tokenize(const std::string& text);

// Default English stopword list shipped in data/stopwords_en.txt.
std::set<std::string> load_stopwords(const std::string& path);

struct LdaParams {
  double alpha = -1.0;  // < 0 means 50/k
  double beta = 0.01;
  int iters = 1000;
  int burn_in = 200;
  int thinning = 10;
  std::uint64_t seed = 42;
};

struct TopicModel {
  int k = 0;
  Eigen::MatrixXd phi;    // k x V, rows sum to 1
  Eigen::MatrixXd theta;  // D x k, rows sum to 1
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::string> vocab;
  Eigen::VectorXd term_marginal;  // p(w) under the model mixture
};

// Collapsed Gibbs LDA; phi/theta are post-burn-in thinned sample averages
// with Dirichlet smoothing. Deterministic given seed.
TopicModel lda_fit(const DocTermMatrix& dtm, int k, const LdaParams& params);

// Held-out perplexity with fold-in Gibbs (phi frozen). Out-of-vocabulary
// tokens are dropped; their count is reported through oov_dropped.
double perplexity(const TopicModel& model, const DocTermMatrix& heldout,
                  std::uint64_t seed = 42, long long* oov_dropped = nullptr);

// UMass coherence per topic over the top-M probability terms.
std::vector<double> umass_coherence(const TopicModel& model,
                                    const DocTermMatrix& dtm, int top_m = 10);

struct TopicKRow {
  int k;
  double perplexity;
  double umass_coherence;  // mean over topics
  double z_perplexity;
  double z_coherence;
  double composite;        // z_coherence - z_perplexity
};

struct TopicKDiagnostics {
  std::vector<TopicKRow> rows;
  int selected_k = 0;
  long long heldout_tokens = 0;
  bool leave_one_out = false;
};

// Fit on a deterministic 90% split, perplexity on the 10% held-out docs,
// coherence on the full dtm; z-scores across the candidate set. Clusters
// with < 10 documents fall back to leave-one-out perplexity.
TopicKDiagnostics select_topic_count(const DocTermMatrix& dtm,
                                     const std::vector<int>& k_range,
                                     const LdaParams& params);

struct RankedTerm {
  std::string term;
  int term_index;
  double weight;  // relevance score
};

// LDAvis relevance: lambda*log(phi) + (1-lambda)*log(phi / p(w)).
std::vector<std::vector<RankedTerm>> relevance(const TopicModel& model,
                                               double lambda, int top_n);

// Cosine similarity over the union vocabulary between all (model, topic)
// pairs, in model-then-topic order.
Eigen::MatrixXd topic_similarity(const std::vector<TopicModel>& models);

}  // namespace taxon::topics
