#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace taxon::corpus {

enum class DocType { journal, conference, preprint };

std::string doc_type_name(DocType t);
DocType parse_doc_type(const std::string& s);

struct Document {
  std::string id;
  std::string title;
  std::string abstract_;
  std::optional<int> year;
  std::string venue;
  std::optional<DocType> doc_type;
  std::optional<std::string> expert_label;  // Study-2 reference standard

  // Text used for embedding: title + " " + abstract; title alone when the
  // abstract is missing. Both missing is a hard error.
  std::string embed_text() const;
};

struct EmbeddingMatrix {
  Eigen::MatrixXd rows;  // n x d, row i aligned to document i
  bool normalized = false;

  Eigen::Index n() const { return rows.rows(); }
  Eigen::Index d() const { return rows.cols(); }
};

struct Corpus {
  std::vector<Document> documents;
  std::optional<EmbeddingMatrix> embeddings;

  std::size_t size() const { return documents.size(); }
  bool has_complete_expert_labels() const;
  std::vector<std::string> expert_labels_or_throw() const;
};

// JSONL metadata, optionally paired with an embedding file (binary "EMB1"
// or CSV with header id,dim0..dimD).
Corpus load_corpus(const std::filesystem::path& meta_path,
                   const std::optional<std::filesystem::path>& embeddings_path =
                       std::nullopt);

// Row-wise L2 normalization. ids, when given, name offending zero rows.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& X,
                               const std::vector<std::string>& ids = {});

struct DescriptiveStats {
  std::map<std::string, std::size_t> counts_by_type;
  std::map<int, std::size_t> counts_by_year;
  // Descending by count, ties lexicographic by venue; truncated at 20.
  std::vector<std::pair<std::string, std::size_t>> top_venues;
};

DescriptiveStats summarize_corpus(const Corpus& c);
std::string stats_to_json(const DescriptiveStats& s);

Eigen::MatrixXd read_embeddings_csv(const std::filesystem::path& path);

}  // namespace taxon::corpus
