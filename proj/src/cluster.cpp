#include "taxon/cluster.hpp"

#include <cmath>
#include <iostream>
#include <limits>

#include <nlohmann/json.hpp>

namespace taxon::cluster {

namespace {

using Eigen::Index;

// Squared Euclidean distances from every row of X to a single point.
Eigen::VectorXd sq_dist_to(const Eigen::MatrixXd& X,
                           const Eigen::RowVectorXd& p) {
  return (X.rowwise() - p).rowwise().squaredNorm();
}

Eigen::VectorXi assign_nearest(const Eigen::MatrixXd& X,
                               const Eigen::MatrixXd& centroids,
                               Eigen::VectorXd* best_sq = nullptr) {
  const Index n = X.rows();
  const Index k = centroids.rows();
  Eigen::VectorXi labels(n);
  if (best_sq) best_sq->resize(n);
  // d(x,c)^2 = |x|^2 - 2 x.c + |c|^2; scan clusters in index order so ties
  // resolve to the lowest index.
  Eigen::MatrixXd cross = X * centroids.transpose();
  Eigen::VectorXd cn = centroids.rowwise().squaredNorm();
  Eigen::VectorXd xn = X.rowwise().squaredNorm();
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    double best_d = xn[i] - 2.0 * cross(i, 0) + cn[0];
    for (Index c = 1; c < k; ++c) {
      const double d = xn[i] - 2.0 * cross(i, c) + cn[c];
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[i] = static_cast<int>(best);
    if (best_sq) (*best_sq)[i] = std::max(best_d, 0.0);
  }
  return labels;
}

struct SingleRun {
  Eigen::VectorXi labels;
  Eigen::MatrixXd centroids;
  double inertia;
  std::vector<double> trace;
};

SingleRun lloyd_once(const Eigen::MatrixXd& X, const KMeansParams& p,
                     std::uint64_t seed) {
  const Index n = X.rows();
  const Index d = X.cols();
  const Index k = p.k;
  Rng rng(seed);

  const auto seeds = detail::kmeanspp_indices(X, p.k, rng);
  Eigen::MatrixXd centroids(k, d);
  for (Index c = 0; c < k; ++c) centroids.row(c) = X.row(seeds[c]);

  SingleRun run;
  Eigen::VectorXd best_sq(n);
  for (int iter = 0; iter < p.max_iter; ++iter) {
    run.labels = assign_nearest(X, centroids, &best_sq);

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Index i = 0; i < n; ++i) {
      sums.row(run.labels[i]) += X.row(i);
      counts[run.labels[i]] += 1.0;
    }
    Eigen::MatrixXd next = centroids;
    for (Index c = 0; c < k; ++c)
      if (counts[c] > 0) next.row(c) = sums.row(c) / counts[c];

    // Empty-cluster repair: reseat at the point farthest from its current
    // centroid; each repaired cluster consumes a distinct point.
    for (Index c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      Index far = 0;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (counts[run.labels[i]] <= 1.0) continue;  // keep donors nonempty
        if (best_sq[i] > far_d) {
          far_d = best_sq[i];
          far = i;
        }
      }
      if (far_d < 0.0)
        throw Error("kmeans: cannot repair empty cluster (too few distinct points)");
      counts[run.labels[far]] -= 1.0;
      run.labels[far] = static_cast<int>(c);
      counts[c] = 1.0;
      next.row(c) = X.row(far);
      best_sq[far] = 0.0;
    }

    const double shift = (next - centroids).rowwise().norm().maxCoeff();
    centroids = next;
    double iter_inertia = 0.0;
    for (Index i = 0; i < n; ++i)
      iter_inertia += (X.row(i) - centroids.row(run.labels[i])).squaredNorm();
    run.trace.push_back(iter_inertia);
    if (shift < p.tol) break;
  }

  // Final assignment pass so every label names its nearest centroid.
  run.labels = assign_nearest(X, centroids, &best_sq);
  run.centroids = std::move(centroids);
  run.inertia = best_sq.sum();
  return run;
}

}  // namespace

void KMeansParams::validate(Eigen::Index n) const {
  if (k < 2) throw ValidationError("kmeans: k must be >= 2");
  if (k > n) throw ValidationError("kmeans: k exceeds number of points");
  if (n_init < 1) throw ValidationError("kmeans: n_init must be >= 1");
  if (max_iter < 1) throw ValidationError("kmeans: max_iter must be >= 1");
  if (!(tol > 0)) throw ValidationError("kmeans: tol must be > 0");
}

namespace detail {

std::vector<Eigen::Index> kmeanspp_indices(const Eigen::MatrixXd& X, int k,
                                           Rng& rng) {
  const Index n = X.rows();
  std::vector<Eigen::Index> chosen;
  chosen.reserve(k);
  chosen.push_back(static_cast<Index>(rng.next_index(n)));
  Eigen::VectorXd dmin = sq_dist_to(X, X.row(chosen[0]));
  for (int c = 1; c < k; ++c) {
    const double total = dmin.sum();
    Index pick;
    if (total <= 0.0) {
      pick = static_cast<Index>(rng.next_index(n));  // all points coincide
    } else {
      const double target = rng.next_double() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += dmin[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
    dmin = dmin.cwiseMin(sq_dist_to(X, X.row(pick)));
  }
  return chosen;
}

}  // namespace detail

Partition kmeans_fit_traced(const Eigen::MatrixXd& X, const KMeansParams& params,
                            std::vector<double>* inertia_trace) {
  params.validate(X.rows());
  const Eigen::VectorXd norms = X.rowwise().norm();
  const bool normalized = ((norms.array() - 1.0).abs() < 1e-6).all();
  if (!normalized) {
    if (params.require_normalized)
      throw ValidationError("kmeans: input rows are not L2-normalized");
    static bool warned = false;
    if (!warned) {
      std::cerr << "[taxon] warning: kmeans input is not L2-normalized\n";
      warned = true;
    }
  }

  SingleRun best;
  best.inertia = std::numeric_limits<double>::infinity();
  int best_restart = -1;
  for (int r = 0; r < params.n_init; ++r) {
    SingleRun run = lloyd_once(X, params, params.seed + r);
    if (run.inertia < best.inertia) {
      best = std::move(run);
      best_restart = r;
    }
  }
  (void)best_restart;
  if (inertia_trace) *inertia_trace = best.trace;

  Partition p;
  p.labels = std::move(best.labels);
  p.centroids = std::move(best.centroids);
  p.inertia = best.inertia;
  p.k = params.k;
  return p;
}

Partition kmeans_fit(const Eigen::MatrixXd& X, const KMeansParams& params) {
  return kmeans_fit_traced(X, params, nullptr);
}

Eigen::VectorXi predict_assign(const Eigen::MatrixXd& centroids,
                               const Eigen::MatrixXd& X) {
  if (centroids.cols() != X.cols())
    throw Error("predict_assign: dimension mismatch");
  return assign_nearest(X, centroids);
}

std::string partition_to_json(const Partition& p) {
  nlohmann::ordered_json j;
  j["k"] = p.k;
  j["labels"] = p.labels_vec();
  auto centroids = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < p.centroids.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < p.centroids.cols(); ++c)
      row.push_back(p.centroids(i, c));
    centroids.push_back(std::move(row));
  }
  j["centroids"] = std::move(centroids);
  j["inertia"] = p.inertia;
  return j.dump(2) + "\n";
}

Partition partition_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Partition p;
  p.k = j.at("k").get<int>();
  const auto labels = j.at("labels").get<std::vector<int>>();
  p.labels = Eigen::Map<const Eigen::VectorXi>(labels.data(), labels.size());
  const auto rows = j.at("centroids");
  p.centroids.resize(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c)
      p.centroids(i, c) = rows[i][c].get<double>();
  p.inertia = j.at("inertia").get<double>();
  return p;
}

}  // namespace taxon::cluster
