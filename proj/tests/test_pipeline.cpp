#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "taxon/common.hpp"
#include "taxon/io.hpp"
#include "taxon/pipeline.hpp"

using namespace taxon;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("taxon_pipe_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

pipeline::PipelineConfig fixture_config(const fixtures::BlobCorpus& c,
                                        const fs::path& out) {
  return pipeline::PipelineConfig::from_toml(
      toml::parse(fixtures::fast_config_toml(c, out)));
}

}  // namespace

TEST_CASE("config: toml round trip, validation, unknown keys") {
  TempDir tmp("cfg");
  auto corpus = fixtures::write_blob_corpus(tmp.path / "in", 5, 0.05, false, 1);
  auto cfg = fixture_config(corpus, tmp.path / "out");
  CHECK(cfg.k_max == 6);
  CHECK(cfg.n_init == 5);
  CHECK(cfg.consensus_runs == 40);
  CHECK(cfg.lambda_grid.size() == 6);
  CHECK_NOTHROW(cfg.validate());

  auto bad = cfg;
  bad.corpus_path = (tmp.path / "nope.jsonl").string();
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = cfg;
  bad.k_min = 1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  CHECK_THROWS_AS(
      pipeline::PipelineConfig::from_toml(toml::parse("mystery = 3\n")),
      ValidationError);

  // config hash covers parameters, not paths
  auto moved = cfg;
  moved.out_dir = (tmp.path / "elsewhere").string();
  CHECK(moved.config_hash() == cfg.config_hash());
  auto changed = cfg;
  changed.k_max = 7;
  CHECK(changed.config_hash() != cfg.config_hash());
}

TEST_CASE("full pipeline on the blob fixture") {
  TempDir tmp("run");
  auto corpus =
      fixtures::write_blob_corpus(tmp.path / "in", 30, 0.05, true, 7);
  auto cfg = fixture_config(corpus, tmp.path / "out");
  auto bundle = pipeline::run_pipeline(cfg);

  CHECK(bundle.validity.selected_k == 3);
  CHECK(bundle.consensus.ari_summary.median >= 0.99);
  REQUIRE(bundle.cluster_topics.size() == 3);
  for (const auto& ct : bundle.cluster_topics) CHECK(ct.diagnostics.selected_k == 2);
  REQUIRE(bundle.alignment.has_value());
  CHECK(bundle.alignment->macro_f1_mean >= 0.95);
  CHECK(bundle.medians.size() == 3);
  CHECK(bundle.ellipses.size() == 3);
  CHECK_FALSE(bundle.partition_hash.empty());

  // manifest exists, is complete, and lists artifacts with real checksums
  auto manifest = nlohmann::json::parse(
      io::read_text(fs::path(cfg.out_dir) / "manifest.json"));
  CHECK(manifest["status"] == "complete");
  CHECK(manifest["study2"] == "completed");
  CHECK(manifest["tool_version"] == pipeline::kToolVersion);
  CHECK(manifest["config_hash"] == bundle.config_hash);
  CHECK(manifest["partition_hash"] == bundle.partition_hash);
  for (const auto& [rel, sum] : manifest["artifacts"].items()) {
    CHECK(io::sha256_file(fs::path(cfg.out_dir) / rel) ==
          sum.get<std::string>());
  }
  CHECK(manifest["artifacts"].contains("study2/alignment.json"));
}

TEST_CASE("pipeline without expert labels skips study 2") {
  TempDir tmp("nolabel");
  auto corpus =
      fixtures::write_blob_corpus(tmp.path / "in", 12, 0.05, false, 3);
  auto cfg = fixture_config(corpus, tmp.path / "out");
  auto bundle = pipeline::run_pipeline(cfg);
  CHECK_FALSE(bundle.alignment.has_value());
  auto manifest = nlohmann::json::parse(
      io::read_text(fs::path(cfg.out_dir) / "manifest.json"));
  CHECK(manifest["study2"] == "skipped");
  CHECK_FALSE(manifest["artifacts"].contains("study2/alignment.json"));
  bool noted = false;
  for (const auto& note : manifest["notes"])
    if (note.get<std::string>().find("study2: skipped") != std::string::npos)
      noted = true;
  CHECK(noted);
}

TEST_CASE("stage errors name the stage and leave a partial manifest") {
  TempDir tmp("fail");
  auto corpus =
      fixtures::write_blob_corpus(tmp.path / "in", 12, 0.05, false, 3);
  auto cfg = fixture_config(corpus, tmp.path / "out");
  cfg.k_min = 30;  // k close to n: scan will fail validation inside scan_k
  cfg.k_max = 40;
  try {
    pipeline::run_pipeline(cfg);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("stage scan_k") != std::string::npos);
  }
  auto manifest = nlohmann::json::parse(
      io::read_text(fs::path(cfg.out_dir) / "manifest.json"));
  CHECK(manifest["status"] == "failed");
  CHECK(manifest["failed_stage"] == "scan_k");
  CHECK(manifest["artifacts"].contains("corpus_stats.json"));
}

TEST_CASE("figure emission enumerates the full set") {
  TempDir tmp("figs");
  auto corpus =
      fixtures::write_blob_corpus(tmp.path / "in", 30, 0.05, true, 7);
  auto cfg = fixture_config(corpus, tmp.path / "out");
  auto bundle = pipeline::run_pipeline(cfg);
  auto files = pipeline::emit_figures(bundle, cfg.out_dir);

  int top_level = 0, wordclouds = 0;
  for (const auto& f : files) {
    if (f.rfind("wordclouds/", 0) == 0) ++wordclouds;
    else ++top_level;
  }
  CHECK(top_level == 12);
  // 6 lambdas x 3 clusters x 2 topics
  CHECK(wordclouds == 36);
  auto manifest = nlohmann::json::parse(
      io::read_text(fs::path(cfg.out_dir) / "figures" / "manifest.json"));
  for (const auto& f : files) CHECK(manifest["files"].contains(f));

  // figure data references bundle values: spot-check the validity table copy
  CHECK(io::read_text(fs::path(cfg.out_dir) / "figures" / "validity_table.csv") ==
        "# config_hash=" + bundle.config_hash + "\n" +
            validity::validity_to_csv(bundle.validity));
}
