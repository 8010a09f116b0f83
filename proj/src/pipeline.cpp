#include "taxon/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taxon/agreement.hpp"
#include "taxon/io.hpp"

namespace taxon::pipeline {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::set<std::string> kKnownKeys = {
    "corpus", "embeddings", "out_dir", "seed",
    "cluster.n_init", "cluster.max_iter", "cluster.tol",
    "cluster.k_min", "cluster.k_max", "cluster.metric",
    "consensus.runs", "consensus.fraction", "consensus.baseline",
    "topics.k_min", "topics.k_max", "topics.min_df", "topics.stopwords",
    "topics.iters", "topics.burn_in", "topics.thinning",
    "topics.top_terms", "topics.lambda_grid",
    "alignment.folds", "alignment.reg",
    "projection.neighbors", "projection.min_dist", "projection.epochs",
    // embed-service keys consumed by the CLI `embed` subcommand
    "embed.url", "embed.model", "embed.batch_size", "embed.retries",
    "embed.backoff_ms", "embed.timeout_s"};

}  // namespace

PipelineConfig PipelineConfig::from_toml(const toml::Table& t) {
  for (const auto& [key, value] : t.entries)
    if (!kKnownKeys.count(key))
      throw ValidationError("unknown config key '" + key + "'");

  PipelineConfig c;
  c.corpus_path = t.get_string("corpus", "");
  c.embeddings_path = t.get_string("embeddings", "");
  c.out_dir = t.get_string("out_dir", c.out_dir);
  c.stopwords_path = t.get_string("topics.stopwords", "");
  c.seed = static_cast<std::uint64_t>(t.get_int("seed", 42));

  c.n_init = static_cast<int>(t.get_int("cluster.n_init", c.n_init));
  c.max_iter = static_cast<int>(t.get_int("cluster.max_iter", c.max_iter));
  c.tol = t.get_float("cluster.tol", c.tol);
  c.k_min = static_cast<int>(t.get_int("cluster.k_min", c.k_min));
  c.k_max = static_cast<int>(t.get_int("cluster.k_max", c.k_max));
  const std::string metric = t.get_string("cluster.metric", "cosine");
  if (metric == "cosine") c.sil_metric = validity::Metric::cosine;
  else if (metric == "euclidean") c.sil_metric = validity::Metric::euclidean;
  else throw ValidationError("cluster.metric must be cosine or euclidean");

  c.consensus_runs =
      static_cast<int>(t.get_int("consensus.runs", c.consensus_runs));
  c.consensus_fraction =
      t.get_float("consensus.fraction", c.consensus_fraction);
  const std::string baseline =
      t.get_string("consensus.baseline", "full_restricted");
  if (baseline == "full_restricted")
    c.consensus_baseline = stability::Baseline::full_restricted;
  else if (baseline == "pairwise_runs")
    c.consensus_baseline = stability::Baseline::pairwise_runs;
  else
    throw ValidationError(
        "consensus.baseline must be full_restricted or pairwise_runs");

  c.topic_k_min = static_cast<int>(t.get_int("topics.k_min", c.topic_k_min));
  c.topic_k_max = static_cast<int>(t.get_int("topics.k_max", c.topic_k_max));
  c.min_df = static_cast<int>(t.get_int("topics.min_df", c.min_df));
  c.lda_iters = static_cast<int>(t.get_int("topics.iters", c.lda_iters));
  c.lda_burn_in = static_cast<int>(t.get_int("topics.burn_in", c.lda_burn_in));
  c.lda_thinning =
      static_cast<int>(t.get_int("topics.thinning", c.lda_thinning));
  c.top_terms = static_cast<int>(t.get_int("topics.top_terms", c.top_terms));
  if (t.has("topics.lambda_grid")) {
    c.lambda_grid.clear();
    for (const auto& v : t.at("topics.lambda_grid").as_array())
      c.lambda_grid.push_back(v.as_float());
  }

  c.folds = static_cast<int>(t.get_int("alignment.folds", c.folds));
  c.reg = t.get_float("alignment.reg", c.reg);

  c.neighbors =
      static_cast<int>(t.get_int("projection.neighbors", c.neighbors));
  c.min_dist = t.get_float("projection.min_dist", c.min_dist);
  c.umap_epochs =
      static_cast<int>(t.get_int("projection.epochs", c.umap_epochs));
  return c;
}

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
  return from_toml(toml::parse_file(path.string()));
}

void PipelineConfig::validate() const {
  if (corpus_path.empty()) throw ValidationError("config: corpus path missing");
  if (!fs::exists(corpus_path))
    throw ValidationError("config: corpus file not found: " + corpus_path);
  if (!embeddings_path.empty() && !fs::exists(embeddings_path))
    throw ValidationError("config: embeddings file not found: " +
                          embeddings_path);
  if (!stopwords_path.empty() && !fs::exists(stopwords_path))
    throw ValidationError("config: stopword file not found: " +
                          stopwords_path);
  if (k_min < 2 || k_max < k_min)
    throw ValidationError("config: need 2 <= k_min <= k_max");
  if (n_init < 1 || max_iter < 1 || tol <= 0)
    throw ValidationError("config: bad k-means parameters");
  if (consensus_runs < 1 || consensus_fraction <= 0 || consensus_fraction > 1)
    throw ValidationError("config: bad consensus parameters");
  if (topic_k_min < 2 || topic_k_max < topic_k_min)
    throw ValidationError("config: need 2 <= topics.k_min <= topics.k_max");
  if (min_df < 1 || lda_iters <= lda_burn_in || lda_thinning < 1 ||
      top_terms < 1)
    throw ValidationError("config: bad topic parameters");
  if (lambda_grid.empty())
    throw ValidationError("config: empty lambda grid");
  for (double l : lambda_grid)
    if (l < 0.0 || l > 1.0)
      throw ValidationError("config: lambda values must lie in [0, 1]");
  if (folds < 2) throw ValidationError("config: alignment.folds must be >= 2");
  if (reg <= 0) throw ValidationError("config: alignment.reg must be > 0");
  if (neighbors < 2 || min_dist <= 0 || umap_epochs < 1)
    throw ValidationError("config: bad projection parameters");
}

std::string PipelineConfig::params_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["cluster"] = {{"n_init", n_init},   {"max_iter", max_iter},
                  {"tol", tol},         {"k_min", k_min},
                  {"k_max", k_max},     {"metric", metric_name(sil_metric)}};
  j["consensus"] = {
      {"runs", consensus_runs},
      {"fraction", consensus_fraction},
      {"baseline", consensus_baseline == stability::Baseline::full_restricted
                       ? "full_restricted"
                       : "pairwise_runs"}};
  j["topics"] = {{"k_min", topic_k_min},   {"k_max", topic_k_max},
                 {"min_df", min_df},       {"iters", lda_iters},
                 {"burn_in", lda_burn_in}, {"thinning", lda_thinning},
                 {"top_terms", top_terms}, {"lambda_grid", lambda_grid}};
  j["alignment"] = {{"folds", folds}, {"reg", reg}};
  j["projection"] = {{"neighbors", neighbors},
                     {"min_dist", min_dist},
                     {"epochs", umap_epochs}};
  return j.dump(2) + "\n";
}

std::string PipelineConfig::config_hash() const {
  return io::sha256_hex(params_json());
}

namespace {

// Writes one artifact, records its checksum, and returns nothing useful;
// relative paths keep the manifest machine-independent.
class ArtifactWriter {
 public:
  ArtifactWriter(const fs::path& root, std::map<std::string, std::string>& m)
      : root_(root), manifest_(m) {}

  void text(const std::string& rel, const std::string& content) {
    fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    io::write_text(p, content);
    manifest_[rel] = io::sha256_hex(content);
  }

  void matrix(const std::string& rel, const Eigen::MatrixXd& m,
              const std::string& magic) {
    fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    io::write_matrix(p, m, magic);
    manifest_[rel] = io::sha256_file(p);
  }

 private:
  fs::path root_;
  std::map<std::string, std::string>& manifest_;
};

std::string stamp(ordered_json j, const std::string& config_hash) {
  j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

// CSV artifacts carry the hash as a leading comment line.
std::string stamp_csv(const std::string& body, const std::string& config_hash) {
  return "# config_hash=" + config_hash + "\n" + body;
}

std::string layout_csv(const ReportBundle& b) {
  std::ostringstream out;
  out << "id,dim1,dim2,cluster,silhouette,flag_negative\n";
  std::set<Eigen::Index> negatives(b.silhouette.negative_flags.begin(),
                                   b.silhouette.negative_flags.end());
  for (Eigen::Index i = 0; i < b.layout.coords.rows(); ++i) {
    out << b.doc_ids[static_cast<std::size_t>(i)] << ','
        << fmt(b.layout.coords(i, 0)) << ',' << fmt(b.layout.coords(i, 1))
        << ',' << b.partition.labels(i) << ',' << fmt(b.silhouette.samples(i))
        << ',' << (negatives.count(i) ? 1 : 0) << '\n';
  }
  return out.str();
}

ordered_json geometry_json(const ReportBundle& b) {
  ordered_json j;
  j["projection"] = {{"neighbors", b.layout.params.neighbors},
                     {"min_dist", b.layout.params.min_dist},
                     {"epochs", b.layout.params.epochs},
                     {"seed", b.layout.params.seed}};
  j["medians"] = ordered_json::array();
  for (std::size_t c = 0; c < b.medians.size(); ++c)
    j["medians"].push_back(
        {{"cluster", c}, {"x", b.medians[c].x()}, {"y", b.medians[c].y()}});
  j["ellipses"] = ordered_json::array();
  for (std::size_t c = 0; c < b.ellipses.size(); ++c) {
    const auto& e = b.ellipses[c];
    j["ellipses"].push_back({{"cluster", c},
                             {"center", {e.center.x(), e.center.y()}},
                             {"semi_major", e.semi_major},
                             {"semi_minor", e.semi_minor},
                             {"rotation", e.rotation},
                             {"coverage", e.coverage}});
  }
  return j;
}

ordered_json silhouette_json(const ReportBundle& b) {
  ordered_json j;
  j["metric"] = metric_name(b.silhouette.metric);
  j["mean"] = b.silhouette.mean;
  j["cluster_median"] = b.silhouette.cluster_median;
  j["cluster_iqr"] = b.silhouette.cluster_iqr;
  j["samples"] = ordered_json::array();
  for (Eigen::Index i = 0; i < b.silhouette.samples.size(); ++i)
    j["samples"].push_back(b.silhouette.samples(i));
  j["negative_ids"] = ordered_json::array();
  for (Eigen::Index i : b.silhouette.negative_flags)
    j["negative_ids"].push_back(b.doc_ids[static_cast<std::size_t>(i)]);
  return j;
}

ordered_json cluster_topics_json(const ClusterTopics& ct,
                                 const std::vector<double>& lambda_grid) {
  ordered_json j;
  j["cluster"] = ct.cluster;
  j["selected_k"] = ct.diagnostics.selected_k;
  j["leave_one_out"] = ct.diagnostics.leave_one_out;
  j["heldout_tokens"] = ct.diagnostics.heldout_tokens;
  j["scan"] = ordered_json::array();
  for (const auto& row : ct.diagnostics.rows)
    j["scan"].push_back({{"k", row.k},
                         {"perplexity", row.perplexity},
                         {"umass_coherence", row.umass_coherence},
                         {"z_perplexity", row.z_perplexity},
                         {"z_coherence", row.z_coherence},
                         {"composite", row.composite}});
  j["alpha"] = ct.model.alpha;
  j["beta"] = ct.model.beta;
  j["terms"] = ordered_json::array();
  for (std::size_t li = 0; li < ct.ranked.size(); ++li) {
    ordered_json per_lambda;
    per_lambda["lambda"] = lambda_grid[li];
    per_lambda["topics"] = ordered_json::array();
    for (const auto& topic : ct.ranked[li]) {
      ordered_json terms = ordered_json::array();
      for (const auto& rt : topic)
        terms.push_back({{"term", rt.term}, {"weight", rt.weight}});
      per_lambda["topics"].push_back(std::move(terms));
    }
    j["terms"].push_back(std::move(per_lambda));
  }
  return j;
}

}  // namespace

ReportBundle run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);

  ReportBundle b;
  b.config = cfg;
  b.config_hash = cfg.config_hash();
  ArtifactWriter writer(cfg.out_dir, b.manifest);

  ordered_json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["config_hash"] = b.config_hash;
  manifest["config"] = ordered_json::parse(cfg.params_json());
  manifest["inputs"] = ordered_json::object();
  manifest["inputs"]["corpus"] = {{"path", cfg.corpus_path},
                                  {"sha256", io::sha256_file(cfg.corpus_path)}};
  if (!cfg.embeddings_path.empty())
    manifest["inputs"]["embeddings"] = {
        {"path", cfg.embeddings_path},
        {"sha256", io::sha256_file(cfg.embeddings_path)}};

  std::string stage = "ingest";
  auto finalize_manifest = [&](bool failed, const std::string& why) {
    ordered_json arts = ordered_json::object();
    for (const auto& [rel, sum] : b.manifest) arts[rel] = sum;
    manifest["artifacts"] = std::move(arts);
    manifest["notes"] = b.notes;
    if (failed) {
      manifest["status"] = "failed";
      manifest["failed_stage"] = stage;
      manifest["error"] = why;
    } else {
      manifest["status"] = "complete";
    }
    std::string text = manifest.dump(2) + "\n";
    io::write_text(fs::path(cfg.out_dir) / "manifest.json", text);
  };

  try {
    // ---- ingest ----
    corpus::Corpus corp = corpus::load_corpus(
        cfg.corpus_path, cfg.embeddings_path.empty()
                             ? std::nullopt
                             : std::optional<fs::path>(cfg.embeddings_path));
    if (!corp.embeddings)
      throw ValidationError("no embeddings available; run the embed step or "
                            "point the config at an embedding file");
    for (const auto& d : corp.documents) b.doc_ids.push_back(d.id);
    b.stats = corpus::summarize_corpus(corp);
    {
      auto j = ordered_json::parse(corpus::stats_to_json(b.stats));
      writer.text("corpus_stats.json", stamp(j, b.config_hash));
    }

    // ---- normalize ----
    stage = "normalize";
    corpus::EmbeddingMatrix X = corpus::normalize_rows(*corp.embeddings,
                                                       b.doc_ids);

    // ---- scan_k ----
    stage = "scan_k";
    cluster::KMeansParams base;
    base.n_init = cfg.n_init;
    base.max_iter = cfg.max_iter;
    base.tol = cfg.tol;
    base.seed = cfg.seed;
    b.validity = validity::scan_k(X.rows, cfg.k_min, cfg.k_max, base,
                                  cfg.sil_metric);
    writer.text("validity.csv",
                stamp_csv(validity::validity_to_csv(b.validity),
                          b.config_hash));
    {
      auto j = ordered_json::parse(validity::validity_to_json(b.validity));
      writer.text("validity.json", stamp(j, b.config_hash));
    }

    // ---- fit at selected K ----
    stage = "cluster";
    cluster::KMeansParams fit = base;
    fit.k = b.validity.selected_k;
    b.partition = cluster::kmeans_fit(X.rows, fit);
    {
      std::string ptxt = cluster::partition_to_json(b.partition);
      b.partition_hash = io::sha256_hex(ptxt);
      writer.text("partition.json", ptxt);
    }

    // ---- validity diagnostics at selected K ----
    stage = "diagnostics";
    b.silhouette =
        validity::silhouette(X.rows, b.partition.labels, cfg.sil_metric);
    b.centroid_cosine = validity::centroid_similarity(b.partition);
    writer.text("silhouette.json", stamp(silhouette_json(b), b.config_hash));

    // ---- consensus ----
    stage = "consensus";
    stability::ConsensusParams cons;
    cons.runs = cfg.consensus_runs;
    cons.fraction = cfg.consensus_fraction;
    cons.k = b.validity.selected_k;
    cons.seed = cfg.seed + 1000;
    cons.baseline = cfg.consensus_baseline;
    cons.kmeans = base;
    b.consensus = stability::run_consensus(X.rows, cons);
    writer.text("consensus.json",
                stamp(ordered_json::parse(stability::consensus_to_json(
                          b.consensus, cons.baseline)),
                      b.config_hash));
    writer.matrix("consensus_matrix.bin", b.consensus.C, "CON1");

    // ---- per-cluster topics ----
    stage = "topics";
    {
      topics::DtmConfig dtm_cfg;
      dtm_cfg.min_df = cfg.min_df;
      dtm_cfg.stopwords = cfg.stopwords_path.empty()
                              ? std::set<std::string>{}
                              : topics::load_stopwords(cfg.stopwords_path);
      std::vector<int> k_range;
      for (int k = cfg.topic_k_min; k <= cfg.topic_k_max; ++k)
        k_range.push_back(k);
      for (int c = 0; c < b.partition.k; ++c) {
        std::vector<std::string> texts, ids;
        for (Eigen::Index i = 0; i < b.partition.labels.size(); ++i)
          if (b.partition.labels(i) == c) {
            texts.push_back(
                corp.documents[static_cast<std::size_t>(i)].embed_text());
            ids.push_back(b.doc_ids[static_cast<std::size_t>(i)]);
          }
        topics::DocTermMatrix dtm = topics::build_dtm(texts, dtm_cfg, ids);
        topics::LdaParams lp;
        lp.iters = cfg.lda_iters;
        lp.burn_in = cfg.lda_burn_in;
        lp.thinning = cfg.lda_thinning;
        lp.seed = cfg.seed + 2000 + 100 * static_cast<std::uint64_t>(c);
        ClusterTopics ct;
        ct.cluster = c;
        ct.diagnostics = topics::select_topic_count(dtm, k_range, lp);
        ct.model = topics::lda_fit(dtm, ct.diagnostics.selected_k, lp);
        for (double lambda : cfg.lambda_grid)
          ct.ranked.push_back(
              topics::relevance(ct.model, lambda, cfg.top_terms));
        writer.text("topics/cluster" + std::to_string(c) + ".json",
                    stamp(cluster_topics_json(ct, cfg.lambda_grid),
                          b.config_hash));
        b.cluster_topics.push_back(std::move(ct));
      }
    }

    // ---- projection + geometry ----
    stage = "projection";
    geometry::UmapParams up;
    up.neighbors = cfg.neighbors;
    up.min_dist = cfg.min_dist;
    up.epochs = cfg.umap_epochs;
    up.seed = cfg.seed + 4000;
    b.layout = geometry::project_2d(X.rows, up);
    for (int c = 0; c < b.partition.k; ++c) {
      std::vector<Eigen::Index> members;
      for (Eigen::Index i = 0; i < b.partition.labels.size(); ++i)
        if (b.partition.labels(i) == c) members.push_back(i);
      Eigen::MatrixXd pts(static_cast<Eigen::Index>(members.size()), 2);
      for (std::size_t r = 0; r < members.size(); ++r)
        pts.row(static_cast<Eigen::Index>(r)) = b.layout.coords.row(members[r]);
      b.medians.push_back(geometry::geometric_median(pts));
      try {
        b.ellipses.push_back(geometry::confidence_ellipse(pts));
      } catch (const Error& e) {
        throw Error("cluster " + std::to_string(c) + ": " + e.what());
      }
    }
    writer.text("layout.csv", stamp_csv(layout_csv(b), b.config_hash));
    writer.text("geometry.json", stamp(geometry_json(b), b.config_hash));

    // Study-1 surface is now frozen; everything below may see expert
    // labels. The partition hash above proves ordering.
    manifest["partition_hash"] = b.partition_hash;

    // ---- alignment (Study 2) ----
    stage = "alignment";
    if (corp.has_complete_expert_labels()) {
      supervise::AlignmentConfig ac;
      ac.folds = cfg.folds;
      ac.reg = cfg.reg;
      ac.seed = cfg.seed + 3000;
      b.expert_labels = corp.expert_labels_or_throw();
      b.alignment = supervise::evaluate_alignment(
          X.rows, b.expert_labels, b.partition.labels_vec(), ac);
      writer.text("study2/alignment.json",
                  stamp(ordered_json::parse(
                            supervise::alignment_to_json(*b.alignment)),
                        b.config_hash));
      writer.text("study2/confusion.csv",
                  stamp_csv(supervise::confusion_to_csv(*b.alignment),
                            b.config_hash));
      manifest["study2"] = "completed";
    } else {
      manifest["study2"] = "skipped";
      b.notes.push_back("study2: skipped (expert labels absent or partial)");
    }
  } catch (const std::exception& e) {
    finalize_manifest(true, e.what());
    throw Error("stage " + stage + ": " + e.what());
  }

  finalize_manifest(false, "");
  return b;
}

std::vector<std::string> emit_figures(const ReportBundle& b,
                                      const fs::path& out_dir) {
  fs::path figdir = out_dir / "figures";
  fs::create_directories(figdir);
  std::map<std::string, std::string> checksums;
  std::vector<std::string> written;
  std::vector<std::string> notes;

  auto put = [&](const std::string& name, const std::string& content) {
    io::write_text(figdir / name, content);
    checksums[name] = io::sha256_hex(content);
    written.push_back(name);
  };

  if (b.doc_ids.empty()) throw Error("emit_figures: empty bundle");

  // 1. cluster map (points + medians + ellipses + 2-D KDE + flags)
  put("cluster_map.csv", stamp_csv(layout_csv(b), b.config_hash));
  {
    ordered_json j = geometry_json(b);
    const auto& C = b.layout.coords;
    double xlo = C.col(0).minCoeff(), xhi = C.col(0).maxCoeff();
    double ylo = C.col(1).minCoeff(), yhi = C.col(1).maxCoeff();
    double mx = 0.05 * (xhi - xlo + 1e-12), my = 0.05 * (yhi - ylo + 1e-12);
    geometry::GridSpec gx{xlo - mx, xhi + mx, 50};
    geometry::GridSpec gy{ylo - my, yhi + my, 50};
    Eigen::MatrixXd dens = geometry::kde_grid_2d(C, gx, gy);
    j["kde"] = {{"x_lo", gx.lo}, {"x_hi", gx.hi}, {"y_lo", gy.lo},
                {"y_hi", gy.hi}, {"points", 50}};
    auto& vals = j["kde"]["values"] = ordered_json::array();
    for (Eigen::Index r = 0; r < dens.rows(); ++r) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index cc = 0; cc < dens.cols(); ++cc)
        row.push_back(dens(r, cc));
      vals.push_back(std::move(row));
    }
    put("cluster_geometry.json", stamp(j, b.config_hash));
  }

  // 2. elbow + silhouette selection curves, 3. validity table
  {
    std::ostringstream curves;
    curves << "k,inertia,mean_silhouette\n";
    for (const auto& row : b.validity.rows)
      curves << row.k << ',' << fmt(row.inertia) << ','
             << fmt(row.mean_silhouette) << '\n';
    put("selection_curves.csv", stamp_csv(curves.str(), b.config_hash));
    put("validity_table.csv",
        stamp_csv(validity::validity_to_csv(b.validity), b.config_hash));
  }

  // 5. KDE marginals of the layout
  {
    ordered_json j;
    for (int dim = 0; dim < 2; ++dim) {
      Eigen::VectorXd col = b.layout.coords.col(dim);
      double lo = col.minCoeff(), hi = col.maxCoeff();
      double pad = 0.25 * (hi - lo + 1e-12);
      geometry::GridSpec g{lo - pad, hi + pad, 200};
      Eigen::VectorXd dens = geometry::kde_grid_1d(col, g);
      ordered_json d;
      d["lo"] = g.lo;
      d["hi"] = g.hi;
      d["density"] = ordered_json::array();
      for (Eigen::Index i = 0; i < dens.size(); ++i)
        d["density"].push_back(dens(i));
      j[dim == 0 ? "dim1" : "dim2"] = std::move(d);
    }
    put("kde_marginals.json", stamp(j, b.config_hash));
  }

  // 6. centroid cosine heatmap
  {
    std::ostringstream out;
    out << "cluster";
    for (int c = 0; c < b.partition.k; ++c) out << ",c" << c;
    out << '\n';
    for (Eigen::Index r = 0; r < b.centroid_cosine.rows(); ++r) {
      out << 'c' << r;
      for (Eigen::Index c = 0; c < b.centroid_cosine.cols(); ++c)
        out << ',' << fmt(b.centroid_cosine(r, c));
      out << '\n';
    }
    put("centroid_heatmap.csv", stamp_csv(out.str(), b.config_hash));
  }

  // 7. silhouette violin data (per-point values by cluster)
  {
    std::ostringstream out;
    out << "cluster,silhouette\n";
    for (Eigen::Index i = 0; i < b.silhouette.samples.size(); ++i)
      out << b.partition.labels(i) << ',' << fmt(b.silhouette.samples(i))
          << '\n';
    put("silhouette_violin.csv", stamp_csv(out.str(), b.config_hash));
  }

  // 8-9. consensus heatmap ordering + dendrogram; ARI/AMI box data
  if (b.consensus.C.size() > 0) {
    ordered_json j;
    j["heatmap_order"] = b.consensus.heatmap_order;
    j["flat_labels"] = ordered_json::array();
    for (Eigen::Index i = 0; i < b.consensus.flat_labels.size(); ++i)
      j["flat_labels"].push_back(b.consensus.flat_labels(i));
    j["dendrogram"] = ordered_json::array();
    for (const auto& m : b.consensus.dendrogram)
      j["dendrogram"].push_back({{"left", m.left},
                                 {"right", m.right},
                                 {"height", m.height},
                                 {"size", m.size}});
    put("consensus_heatmap.json", stamp(j, b.config_hash));

    std::ostringstream out;
    out << "metric,value\n";
    for (double v : b.consensus.ari_samples) out << "ari," << fmt(v) << '\n';
    for (double v : b.consensus.ami_samples) out << "ami," << fmt(v) << '\n';
    put("ari_ami_box.csv", stamp_csv(out.str(), b.config_hash));
  } else {
    notes.push_back("consensus figures skipped: no consensus artifact");
  }

  // 10. topic k-selection curves + lambda-sweep word clouds
  if (!b.cluster_topics.empty()) {
    std::ostringstream out;
    out << "cluster,k,perplexity,umass_coherence,composite,selected\n";
    for (const auto& ct : b.cluster_topics)
      for (const auto& row : ct.diagnostics.rows)
        out << ct.cluster << ',' << row.k << ',' << fmt(row.perplexity) << ','
            << fmt(row.umass_coherence) << ',' << fmt(row.composite) << ','
            << (row.k == ct.diagnostics.selected_k ? 1 : 0) << '\n';
    put("topic_k_curves.csv", stamp_csv(out.str(), b.config_hash));

    fs::create_directories(figdir / "wordclouds");
    for (const auto& ct : b.cluster_topics) {
      for (std::size_t li = 0; li < ct.ranked.size(); ++li) {
        const double lambda = b.config.lambda_grid[li];
        char lbuf[16];
        std::snprintf(lbuf, sizeof(lbuf), "%.2f", lambda);
        for (std::size_t t = 0; t < ct.ranked[li].size(); ++t) {
          std::ostringstream wc;
          wc << "term,weight\n";
          for (const auto& rt : ct.ranked[li][t])
            wc << rt.term << ',' << fmt(rt.weight) << '\n';
          std::string name = "wordclouds/cluster" +
                             std::to_string(ct.cluster) + "_topic" +
                             std::to_string(t) + "_lambda" + lbuf + ".csv";
          put(name, stamp_csv(wc.str(), b.config_hash));
        }
      }
    }

    // 11. topic similarity heatmap across cluster models
    std::vector<topics::TopicModel> models;
    for (const auto& ct : b.cluster_topics) models.push_back(ct.model);
    Eigen::MatrixXd S = topics::topic_similarity(models);
    std::ostringstream sim;
    sim << "row,col,cosine\n";
    for (Eigen::Index r = 0; r < S.rows(); ++r)
      for (Eigen::Index c = 0; c < S.cols(); ++c)
        sim << r << ',' << c << ',' << fmt(S(r, c)) << '\n';
    put("topic_similarity.csv", stamp_csv(sim.str(), b.config_hash));
  } else {
    notes.push_back("topic figures skipped: no topic artifact");
  }

  // 12. expert-label map
  if (b.alignment) {
    std::ostringstream out;
    out << "id,dim1,dim2,cluster,expert_label\n";
    for (Eigen::Index i = 0; i < b.layout.coords.rows(); ++i)
      out << b.doc_ids[static_cast<std::size_t>(i)] << ','
          << fmt(b.layout.coords(i, 0)) << ',' << fmt(b.layout.coords(i, 1))
          << ',' << b.partition.labels(i) << ','
          << b.expert_labels[static_cast<std::size_t>(i)] << '\n';
    put("expert_label_map.csv", stamp_csv(out.str(), b.config_hash));
  } else {
    notes.push_back("expert-label map skipped: no alignment artifact");
  }

  ordered_json manifest;
  manifest["config_hash"] = b.config_hash;
  manifest["notes"] = notes;
  ordered_json files = ordered_json::object();
  for (const auto& [name, sum] : checksums) files[name] = sum;
  manifest["files"] = std::move(files);
  io::write_text(figdir / "manifest.json", manifest.dump(2) + "\n");

  return written;
}

}  // namespace taxon::pipeline
