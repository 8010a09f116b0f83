// Command-line front end for the corpus-taxonomy engine.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "taxon/cluster.hpp"
#include "taxon/corpus.hpp"
#include "taxon/embed.hpp"
#include "taxon/io.hpp"
#include "taxon/pipeline.hpp"
#include "taxon/stability.hpp"
#include "taxon/supervise.hpp"
#include "taxon/topics.hpp"
#include "taxon/validity.hpp"

namespace fs = std::filesystem;
using namespace taxon;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

pipeline::PipelineConfig load_config(const GlobalArgs& g) {
  if (g.config_path.empty())
    throw ValidationError("--config is required for this subcommand");
  if (!std::filesystem::exists(g.config_path))
    throw ValidationError("config file not found: " + g.config_path);
  auto cfg = pipeline::PipelineConfig::from_file(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.out_dir = *g.out;
  return cfg;
}

corpus::Corpus load_inputs(const pipeline::PipelineConfig& cfg) {
  cfg.validate();
  return corpus::load_corpus(
      cfg.corpus_path, cfg.embeddings_path.empty()
                           ? std::nullopt
                           : std::optional<fs::path>(cfg.embeddings_path));
}

corpus::EmbeddingMatrix normalized(const pipeline::PipelineConfig& cfg,
                                   const corpus::Corpus& corp) {
  if (!corp.embeddings)
    throw ValidationError("corpus has no embeddings; run `embed` first");
  std::vector<std::string> ids;
  for (const auto& d : corp.documents) ids.push_back(d.id);
  return corpus::normalize_rows(*corp.embeddings, ids);
}

cluster::KMeansParams kmeans_params(const pipeline::PipelineConfig& cfg) {
  cluster::KMeansParams p;
  p.n_init = cfg.n_init;
  p.max_iter = cfg.max_iter;
  p.tol = cfg.tol;
  p.seed = cfg.seed;
  return p;
}

int pick_k(const pipeline::PipelineConfig& cfg, const Eigen::MatrixXd& X,
           int requested) {
  if (requested >= 2) return requested;
  auto table = validity::scan_k(X, cfg.k_min, cfg.k_max, kmeans_params(cfg),
                                cfg.sil_metric);
  return table.selected_k;
}

void write_out(const pipeline::PipelineConfig& cfg, const std::string& rel,
               const std::string& content) {
  fs::path p = fs::path(cfg.out_dir) / rel;
  fs::create_directories(p.parent_path());
  io::write_text(p, content);
  std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpus taxonomy engine"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "TOML config file");
  std::uint64_t seed_arg = 0;
  auto* seed_opt =
      app.add_option("--seed", seed_arg, "override the global seed");
  std::string out_arg;
  auto* out_opt = app.add_option("--out", out_arg, "override the output dir");

  auto* c_ingest = app.add_subcommand("ingest", "validate corpus, emit stats");
  auto* c_embed =
      app.add_subcommand("embed", "fetch embeddings from the remote service");
  std::string embed_url, embed_model;
  int batch_size = 64, retries = 3;
  c_embed->add_option("--embed-url", embed_url, "embedding service base URL");
  c_embed->add_option("--embed-model", embed_model, "model identifier");
  c_embed->add_option("--batch-size", batch_size, "texts per request");
  c_embed->add_option("--retries", retries, "retry count per request");

  auto* c_scan = app.add_subcommand("scan-k", "k scan with validity indices");
  auto* c_cluster = app.add_subcommand("cluster", "fit k-means partition");
  auto* c_cons = app.add_subcommand("consensus", "resampled consensus run");
  auto* c_topics = app.add_subcommand("topics", "per-cluster topic models");
  auto* c_align =
      app.add_subcommand("align", "expert-label alignment (Study 2)");
  auto* c_project = app.add_subcommand("project", "2-D layout of embeddings");
  auto* c_report =
      app.add_subcommand("report", "full pipeline plus figure data");
  auto* c_run = app.add_subcommand("run", "full pipeline");
  int k_arg = 0;
  for (auto* sc : {c_cluster, c_cons, c_topics, c_align})
    sc->add_option("--k", k_arg, "cluster count (default: pick by k scan)");

  // Let the global --config/--seed/--out be written after the subcommand too.
  for (auto* sc : app.get_subcommands({})) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (seed_opt->count()) g.seed = seed_arg;
    if (out_opt->count()) g.out = out_arg;
    auto cfg = load_config(g);

    if (*c_ingest) {
      auto corp = load_inputs(cfg);
      auto stats = corpus::summarize_corpus(corp);
      write_out(cfg, "corpus_stats.json", corpus::stats_to_json(stats));
      std::cout << "documents: " << corp.size() << "\n";
    } else if (*c_embed) {
      cfg.validate();
      auto corp = corpus::load_corpus(cfg.corpus_path);
      embed::EmbedServiceConfig svc;
      svc.base_url = embed_url;
      svc.model = embed_model;
      svc.batch_size = batch_size;
      svc.retries = retries;
      std::vector<std::string> texts;
      for (const auto& d : corp.documents) texts.push_back(d.embed_text());
      auto E = embed::embed_remote(texts, svc);
      fs::create_directories(cfg.out_dir);
      fs::path p = fs::path(cfg.out_dir) / "embeddings.bin";
      io::write_matrix(p, E.rows, "EMB1");
      std::cout << "wrote " << p.string() << " (" << E.n() << " x " << E.d()
                << ")\n";
    } else if (*c_scan) {
      auto corp = load_inputs(cfg);
      auto X = normalized(cfg, corp);
      auto table = validity::scan_k(X.rows, cfg.k_min, cfg.k_max,
                                    kmeans_params(cfg), cfg.sil_metric);
      write_out(cfg, "validity.csv", validity::validity_to_csv(table));
      write_out(cfg, "validity.json", validity::validity_to_json(table));
      std::cout << "selected_k: " << table.selected_k << "\n";
    } else if (*c_cluster) {
      auto corp = load_inputs(cfg);
      auto X = normalized(cfg, corp);
      auto p = kmeans_params(cfg);
      p.k = pick_k(cfg, X.rows, k_arg);
      auto part = cluster::kmeans_fit(X.rows, p);
      write_out(cfg, "partition.json", cluster::partition_to_json(part));
      std::cout << "k: " << part.k << " inertia: " << part.inertia << "\n";
    } else if (*c_cons) {
      auto corp = load_inputs(cfg);
      auto X = normalized(cfg, corp);
      stability::ConsensusParams p;
      p.runs = cfg.consensus_runs;
      p.fraction = cfg.consensus_fraction;
      p.k = pick_k(cfg, X.rows, k_arg);
      p.seed = cfg.seed + 1000;
      p.baseline = cfg.consensus_baseline;
      p.kmeans = kmeans_params(cfg);
      auto res = stability::run_consensus(X.rows, p);
      write_out(cfg, "consensus.json",
                stability::consensus_to_json(res, p.baseline));
      fs::path m = fs::path(cfg.out_dir) / "consensus_matrix.bin";
      io::write_matrix(m, res.C, "CON1");
      std::cout << "median ari: " << res.ari_summary.median << "\n";
    } else if (*c_topics || *c_align || *c_project || *c_report || *c_run) {
      if (*c_project) {
        auto corp = load_inputs(cfg);
        auto X = normalized(cfg, corp);
        geometry::UmapParams up;
        up.neighbors = cfg.neighbors;
        up.min_dist = cfg.min_dist;
        up.epochs = cfg.umap_epochs;
        up.seed = cfg.seed + 4000;
        auto layout = geometry::project_2d(X.rows, up);
        std::ostringstream out;
        out << "id,dim1,dim2\n";
        for (Eigen::Index i = 0; i < layout.coords.rows(); ++i)
          out << corp.documents[static_cast<std::size_t>(i)].id << ','
              << layout.coords(i, 0) << ',' << layout.coords(i, 1) << '\n';
        write_out(cfg, "layout.csv", out.str());
      } else if (*c_align) {
        auto corp = load_inputs(cfg);
        auto X = normalized(cfg, corp);
        if (!corp.has_complete_expert_labels())
          throw ValidationError("align requires expert labels on every doc");
        auto p = kmeans_params(cfg);
        p.k = pick_k(cfg, X.rows, k_arg);
        auto part = cluster::kmeans_fit(X.rows, p);
        supervise::AlignmentConfig ac;
        ac.folds = cfg.folds;
        ac.reg = cfg.reg;
        ac.seed = cfg.seed + 3000;
        auto rep = supervise::evaluate_alignment(
            X.rows, corp.expert_labels_or_throw(), part.labels_vec(), ac);
        write_out(cfg, "study2/alignment.json",
                  supervise::alignment_to_json(rep));
        write_out(cfg, "study2/confusion.csv",
                  supervise::confusion_to_csv(rep));
        std::cout << "macro_f1: " << rep.macro_f1_mean << "\n";
      } else if (*c_topics) {
        // per-cluster topics need the partition; recompute deterministically
        auto bundle_cfg = cfg;
        if (k_arg >= 2) {
          bundle_cfg.k_min = k_arg;
          bundle_cfg.k_max = k_arg;
        }
        auto bundle = pipeline::run_pipeline(bundle_cfg);
        std::cout << "clusters: " << bundle.cluster_topics.size() << "\n";
      } else {
        auto bundle = pipeline::run_pipeline(cfg);
        if (*c_report) {
          auto files = pipeline::emit_figures(bundle, cfg.out_dir);
          std::cout << "figure files: " << files.size() << "\n";
        }
        std::cout << "selected_k: " << bundle.validity.selected_k << "\n"
                  << "manifest: "
                  << (fs::path(cfg.out_dir) / "manifest.json").string()
                  << "\n";
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
