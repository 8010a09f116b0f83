#include "taxon/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "taxon/agreement.hpp"

namespace taxon::stability {

namespace {

using Eigen::Index;

Eigen::MatrixXd subsample_rows(const Eigen::MatrixXd& X,
                               const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(idx.size(), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = X.row(idx[i]);
  return out;
}

}  // namespace

void ConsensusParams::validate(Eigen::Index n) const {
  if (runs < 2) throw ValidationError("consensus: runs must be >= 2");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ValidationError("consensus: fraction must be in (0, 1)");
  if (static_cast<Eigen::Index>(std::floor(fraction * n)) < k)
    throw ValidationError("consensus: subsample smaller than k");
}

ConsensusResult run_consensus(const Eigen::MatrixXd& X,
                              const ConsensusParams& params) {
  const Index n = X.rows();
  params.validate(n);
  const std::size_t m = static_cast<std::size_t>(std::floor(params.fraction * n));

  cluster::KMeansParams km = params.kmeans;
  km.k = params.k;

  // Full-data baseline partition for the full_restricted comparison.
  cluster::KMeansParams km_full = km;
  km_full.seed = params.seed;
  const cluster::Partition baseline = cluster::kmeans_fit(X, km_full);

  Eigen::MatrixXi co_clustered = Eigen::MatrixXi::Zero(n, n);
  Eigen::MatrixXi co_sampled = Eigen::MatrixXi::Zero(n, n);

  ConsensusResult res;
  for (int r = 0; r < params.runs; ++r) {
    std::uint64_t run_seed = params.seed + static_cast<std::uint64_t>(r);
    std::vector<std::size_t> idx;
    cluster::Partition part;
    // One retry with a far seed offset if the subsample cannot support k
    // distinct clusters; a second failure aborts.
    for (int attempt = 0;; ++attempt) {
      Rng rng(run_seed);
      idx = rng.sample_without_replacement(n, m);
      cluster::KMeansParams km_run = km;
      km_run.seed = run_seed;
      try {
        part = cluster::kmeans_fit(subsample_rows(X, idx), km_run);
        break;
      } catch (const Error&) {
        if (attempt >= 1) throw;
        run_seed += 1000000ULL;
      }
    }

    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a; b < idx.size(); ++b) {
        co_sampled(idx[a], idx[b]) += 1;
        if (part.labels[a] == part.labels[b]) co_clustered(idx[a], idx[b]) += 1;
      }
    }

    std::vector<int> run_labels = part.labels_vec();
    std::vector<int> ref;
    ref.reserve(idx.size());
    if (params.baseline == Baseline::full_restricted) {
      for (std::size_t a : idx) ref.push_back(baseline.labels[a]);
    } else {
      cluster::KMeansParams km_alt = km;
      km_alt.seed = run_seed + 500000ULL;
      ref = cluster::kmeans_fit(subsample_rows(X, idx), km_alt).labels_vec();
    }
    res.ari_samples.push_back(agreement::adjusted_rand(run_labels, ref));
    res.ami_samples.push_back(
        agreement::mutual_information(run_labels, ref, agreement::MiMode::ami));
  }

  res.C = Eigen::MatrixXd::Constant(n, n, -1.0);
  res.co_sampled = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const int cs = co_sampled(i, j);
      res.co_sampled(i, j) = res.co_sampled(j, i) = cs;
      if (cs > 0) {
        const double v = static_cast<double>(co_clustered(i, j)) / cs;
        res.C(i, j) = res.C(j, i) = v;
      }
    }
  }

  Eigen::MatrixXd D(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      D(i, j) = i == j ? 0.0 : (res.C(i, j) < 0.0 ? 1.0 : 1.0 - res.C(i, j));
  res.dendrogram = average_linkage(D);
  res.flat_labels = cut_dendrogram(res.dendrogram, n, params.k);

  res.heatmap_order.resize(n);
  std::iota(res.heatmap_order.begin(), res.heatmap_order.end(), 0);
  std::stable_sort(res.heatmap_order.begin(), res.heatmap_order.end(),
                   [&](int a, int b) {
                     return res.flat_labels[a] < res.flat_labels[b];
                   });

  res.ari_summary = summarize_distribution(res.ari_samples);
  res.ami_summary = summarize_distribution(res.ami_samples);
  return res;
}

std::vector<MergeStep> average_linkage(const Eigen::MatrixXd& D) {
  const Index n = D.rows();
  if (D.cols() != n) throw Error("average_linkage: matrix not square");
  if (!D.isApprox(D.transpose(), 1e-12))
    throw Error("average_linkage: matrix not symmetric");
  if (!D.allFinite()) throw Error("average_linkage: non-finite entries");

  struct Active {
    int id;       // dendrogram id
    int size;
  };
  std::vector<Active> act(n);
  for (Index i = 0; i < n; ++i) act[i] = {static_cast<int>(i), 1};
  Eigen::MatrixXd d = D;  // distances among active clusters (prefix of rows)
  std::vector<int> alive(n);
  std::iota(alive.begin(), alive.end(), 0);  // positions into act/d

  std::vector<MergeStep> merges;
  int next_id = static_cast<int>(n);
  while (alive.size() > 1) {
    // Pick the closest pair; ties by (min id, max id) of the cluster ids.
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t a = 0; a < alive.size(); ++a) {
      for (std::size_t b = a + 1; b < alive.size(); ++b) {
        const double v = d(alive[a], alive[b]);
        if (v < best - 1e-15) {
          best = v;
          bi = a;
          bj = b;
        } else if (std::abs(v - best) <= 1e-15) {
          auto key = [&](std::size_t x, std::size_t y) {
            int p = act[alive[x]].id, q = act[alive[y]].id;
            return std::pair(std::min(p, q), std::max(p, q));
          };
          if (key(a, b) < key(bi, bj)) {
            bi = a;
            bj = b;
          }
        }
      }
    }
    const int pi = alive[bi], pj = alive[bj];
    const int sa = act[pi].size, sb = act[pj].size;
    MergeStep step;
    step.left = std::min(act[pi].id, act[pj].id);
    step.right = std::max(act[pi].id, act[pj].id);
    step.height = d(pi, pj);
    step.size = sa + sb;
    merges.push_back(step);

    // Lance-Williams update for UPGMA into slot pi; drop pj.
    for (int p : alive) {
      if (p == pi || p == pj) continue;
      const double v = (sa * d(pi, p) + sb * d(pj, p)) / (sa + sb);
      d(pi, p) = d(p, pi) = v;
    }
    act[pi] = {next_id++, sa + sb};
    alive.erase(alive.begin() + bj);
  }
  return merges;
}

Eigen::VectorXi cut_dendrogram(const std::vector<MergeStep>& merges,
                               Eigen::Index n, int k) {
  if (k < 1 || k > n) throw Error("cut_dendrogram: bad k");
  // Union-find over the first n-k merges.
  std::vector<int> parent(n + merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<int> root_of_id(n + merges.size());
  std::iota(root_of_id.begin(), root_of_id.end(), 0);
  for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(n) - k; ++s) {
    const auto& mg = merges[s];
    const int ra = find(root_of_id[mg.left]);
    const int rb = find(root_of_id[mg.right]);
    parent[rb] = ra;
    root_of_id[n + s] = ra;
  }
  // Number components by smallest member index.
  Eigen::VectorXi labels(n);
  std::vector<int> comp_label(n + merges.size(), -1);
  int next = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int r = find(static_cast<int>(i));
    if (comp_label[r] < 0) comp_label[r] = next++;
    labels[i] = comp_label[r];
  }
  return labels;
}

DistSummary summarize_distribution(std::vector<double> v) {
  if (v.empty()) throw Error("summarize_distribution: empty");
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - lo;
    return lo + 1 < v.size() ? v[lo] * (1 - frac) + v[lo + 1] * frac : v[lo];
  };
  DistSummary s;
  s.median = quantile(0.5);
  s.iqr = quantile(0.75) - quantile(0.25);
  s.min = v.front();
  s.max = v.back();
  return s;
}

std::string consensus_to_json(const ConsensusResult& r, Baseline baseline) {
  nlohmann::ordered_json j;
  j["baseline"] =
      baseline == Baseline::full_restricted ? "full_restricted" : "pairwise_runs";
  auto dend = nlohmann::ordered_json::array();
  for (const auto& m : r.dendrogram)
    dend.push_back({{"left", m.left},
                    {"right", m.right},
                    {"height", m.height},
                    {"size", m.size}});
  j["dendrogram"] = std::move(dend);
  j["flat_labels"] = std::vector<int>(r.flat_labels.data(),
                                      r.flat_labels.data() + r.flat_labels.size());
  j["heatmap_order"] = r.heatmap_order;
  auto summary = [](const DistSummary& s) {
    return nlohmann::ordered_json{
        {"median", s.median}, {"iqr", s.iqr}, {"min", s.min}, {"max", s.max}};
  };
  j["ari"] = {{"samples", r.ari_samples}, {"summary", summary(r.ari_summary)}};
  j["ami"] = {{"samples", r.ami_samples}, {"summary", summary(r.ami_summary)}};
  return j.dump(2) + "\n";
}

}  // namespace taxon::stability
