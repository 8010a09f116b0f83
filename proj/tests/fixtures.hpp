#pragma once
// Synthetic corpus fixtures shared by the pipeline tests: three embedding
// blobs, each documented with text drawn from blob-specific vocabularies
// (two disjoint sub-vocabularies per blob, so per-cluster topic selection
// has planted structure), optional expert labels.

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "taxon/common.hpp"
#include "taxon/io.hpp"

namespace fixtures {

struct BlobCorpus {
  std::filesystem::path meta;       // JSONL
  std::filesystem::path embeddings; // EMB1
  std::vector<int> blob_of;         // ground truth per doc
  std::vector<std::vector<std::string>> subvocab;  // [blob*2+slot]
};

inline std::string blob_label(int b) {
  static const char* names[3] = {"social_minds", "societies",
                                 "human_interactions"};
  return names[b];
}

inline BlobCorpus write_blob_corpus(const std::filesystem::path& dir,
                                    int per_blob, double sigma,
                                    bool with_labels, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  BlobCorpus out;
  out.meta = dir / "corpus.jsonl";
  out.embeddings = dir / "embeddings.bin";

  // 6 disjoint vocabularies of 20 terms: blob b, slot s -> "b{b}s{s}w{i}"
  for (int b = 0; b < 3; ++b)
    for (int s = 0; s < 2; ++s) {
      std::vector<std::string> v;
      for (int i = 0; i < 20; ++i)
        v.push_back("b" + std::to_string(b) + "s" + std::to_string(s) + "w" +
                    std::to_string(i));
      out.subvocab.push_back(v);
    }

  taxon::Rng rng(seed);
  const int n = 3 * per_blob;
  Eigen::MatrixXd E(n, 8);
  std::ofstream meta(out.meta);
  int row = 0;
  for (int b = 0; b < 3; ++b) {
    for (int i = 0; i < per_blob; ++i, ++row) {
      out.blob_of.push_back(b);
      Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(8);
      v(b) = 1.0;
      for (int j = 0; j < 8; ++j) v(j) += sigma * rng.next_gaussian();
      E.row(row) = v / v.norm();

      const auto& vocab = out.subvocab[static_cast<std::size_t>(2 * b + i % 2)];
      std::string text;
      for (int w = 0; w < 25; ++w) {
        if (w) text += ' ';
        text += vocab[rng.next_index(vocab.size())];
      }
      meta << "{\"id\":\"doc" << row << "\",\"title\":\"paper " << row
           << "\",\"abstract\":\"" << text << "\",\"year\":"
           << (2018 + row % 6) << ",\"venue\":\"venue" << row % 7
           << "\",\"type\":\"" << (row % 3 == 0 ? "journal" : "preprint")
           << "\"";
      if (with_labels) meta << ",\"expert_label\":\"" << blob_label(b) << "\"";
      meta << "}\n";
    }
  }
  meta.close();
  taxon::io::write_matrix(out.embeddings, E, "EMB1");
  return out;
}

inline std::string fast_config_toml(const BlobCorpus& c,
                                    const std::filesystem::path& out_dir) {
  std::string t;
  t += "corpus = \"" + c.meta.string() + "\"\n";
  t += "embeddings = \"" + c.embeddings.string() + "\"\n";
  t += "out_dir = \"" + out_dir.string() + "\"\n";
  t += "seed = 42\n";
  t += "[cluster]\n";
  t += "k_min = 2\nk_max = 6\nn_init = 5\n";
  t += "[consensus]\nruns = 40\nfraction = 0.8\n";
  t += "[topics]\nk_min = 2\nk_max = 3\niters = 250\nburn_in = 100\n";
  t += "thinning = 5\nmin_df = 2\ntop_terms = 10\n";
  t += "[projection]\nneighbors = 10\nepochs = 100\n";
  return t;
}

}  // namespace fixtures
