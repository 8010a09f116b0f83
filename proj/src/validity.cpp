#include "taxon/validity.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taxon/common.hpp"

namespace taxon::validity {

namespace {

using Eigen::Index;

int n_clusters(const Eigen::VectorXi& labels) {
  return labels.size() ? labels.maxCoeff() + 1 : 0;
}

std::vector<std::vector<Index>> members_by_cluster(const Eigen::VectorXi& labels,
                                                   int k) {
  std::vector<std::vector<Index>> m(k);
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k)
      throw Error("validity: label out of range");
    m[labels[i]].push_back(i);
  }
  for (int c = 0; c < k; ++c)
    if (m[c].empty()) throw Error("validity: empty cluster " + std::to_string(c));
  return m;
}

Eigen::MatrixXd pairwise_dissimilarity(const Eigen::MatrixXd& X, Metric metric) {
  const Index n = X.rows();
  Eigen::MatrixXd D(n, n);
  if (metric == Metric::euclidean) {
    const Eigen::VectorXd sq = X.rowwise().squaredNorm();
    D = (sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
         2.0 * X * X.transpose())
            .cwiseMax(0.0)
            .cwiseSqrt();
  } else {
    Eigen::MatrixXd U = X;
    for (Index i = 0; i < n; ++i) {
      const double nm = U.row(i).norm();
      if (nm <= 0.0)
        throw Error("validity: zero row " + std::to_string(i) +
                    " under cosine metric");
      U.row(i) /= nm;
    }
    D = (1.0 - (U * U.transpose()).array()).matrix();
  }
  D.diagonal().setZero();
  return D;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Interquartile range with linear interpolation between order statistics.
double iqr_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - lo;
    return lo + 1 < v.size() ? v[lo] * (1 - frac) + v[lo + 1] * frac : v[lo];
  };
  return quantile(0.75) - quantile(0.25);
}

}  // namespace

std::string metric_name(Metric m) {
  return m == Metric::cosine ? "cosine" : "euclidean";
}

SilhouetteProfile silhouette(const Eigen::MatrixXd& X,
                             const Eigen::VectorXi& labels, Metric metric) {
  const Index n = X.rows();
  if (labels.size() != n) throw Error("silhouette: labels/rows mismatch");
  const int k = n_clusters(labels);
  if (k < 2) throw Error("silhouette: need at least 2 clusters");
  const auto members = members_by_cluster(labels, k);
  const Eigen::MatrixXd D = pairwise_dissimilarity(X, metric);

  SilhouetteProfile out;
  out.metric = metric;
  out.samples.resize(n);
  for (Index i = 0; i < n; ++i) {
    const int own = labels[i];
    if (members[own].size() == 1) {
      out.samples[i] = 0.0;  // singleton convention
      continue;
    }
    // Mean dissimilarity to every cluster in one pass over rows of D.
    std::vector<double> sums(k, 0.0);
    for (Index j = 0; j < n; ++j) sums[labels[j]] += D(i, j);
    const double a =
        sums[own] / static_cast<double>(members[own].size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own) continue;
      b = std::min(b, sums[c] / static_cast<double>(members[c].size()));
    }
    const double denom = std::max(a, b);
    out.samples[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }

  out.mean = out.samples.mean();
  for (int c = 0; c < k; ++c) {
    std::vector<double> vals;
    vals.reserve(members[c].size());
    for (Index i : members[c]) vals.push_back(out.samples[i]);
    out.cluster_median.push_back(median_of(vals));
    out.cluster_iqr.push_back(iqr_of(std::move(vals)));
  }
  for (Index i = 0; i < n; ++i)
    if (out.samples[i] < 0.0) out.negative_flags.push_back(i);
  return out;
}

double davies_bouldin(const Eigen::MatrixXd& X, const Eigen::VectorXi& labels) {
  const int k = n_clusters(labels);
  if (k < 2) throw Error("davies_bouldin: need at least 2 clusters");
  const auto members = members_by_cluster(labels, k);

  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(k, X.cols());
  for (int c = 0; c < k; ++c) {
    for (Index i : members[c]) centroids.row(c) += X.row(i);
    centroids.row(c) /= static_cast<double>(members[c].size());
  }
  Eigen::VectorXd scatter(k);
  for (int c = 0; c < k; ++c) {
    double s = 0.0;
    for (Index i : members[c]) s += (X.row(i) - centroids.row(c)).norm();
    scatter[c] = s / static_cast<double>(members[c].size());
  }
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const double m = (centroids.row(i) - centroids.row(j)).norm();
      if (m <= 0.0)
        throw Error("davies_bouldin: coincident centroids " +
                    std::to_string(i) + " and " + std::to_string(j));
      worst = std::max(worst, (scatter[i] + scatter[j]) / m);
    }
    total += worst;
  }
  return total / k;
}

double calinski_harabasz(const Eigen::MatrixXd& X,
                         const Eigen::VectorXi& labels) {
  const Index n = X.rows();
  const int k = n_clusters(labels);
  if (k < 2) throw Error("calinski_harabasz: need at least 2 clusters");
  const auto members = members_by_cluster(labels, k);
  const Eigen::RowVectorXd global = X.colwise().mean();

  double between = 0.0, within = 0.0;
  for (int c = 0; c < k; ++c) {
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(X.cols());
    for (Index i : members[c]) mu += X.row(i);
    mu /= static_cast<double>(members[c].size());
    between += members[c].size() * (mu - global).squaredNorm();
    for (Index i : members[c]) within += (X.row(i) - mu).squaredNorm();
  }
  if (within <= 0.0) {
    std::cerr << "[taxon] warning: zero within-cluster dispersion, CHI = inf\n";
    return std::numeric_limits<double>::infinity();
  }
  return (between / (k - 1)) / (within / static_cast<double>(n - k));
}

ValidityTable scan_k(const Eigen::MatrixXd& X, int k_min, int k_max,
                     const cluster::KMeansParams& base, Metric sil_metric) {
  if (k_min < 2 || k_max >= X.rows() || k_min > k_max)
    throw ValidationError("scan_k: k range must lie in [2, n-1]");
  ValidityTable t;
  t.silhouette_metric = sil_metric;
  for (int k = k_min; k <= k_max; ++k) {
    cluster::KMeansParams p = base;
    p.k = k;
    const cluster::Partition part = cluster::kmeans_fit(X, p);
    ValidityRow row;
    row.k = k;
    row.inertia = part.inertia;
    row.mean_silhouette = silhouette(X, part.labels, sil_metric).mean;
    row.dbi = davies_bouldin(X, part.labels);
    row.chi = calinski_harabasz(X, part.labels);
    t.rows.push_back(row);
  }
  // argmax mean silhouette, ties to smaller K
  t.selected_k = t.rows.front().k;
  double best = t.rows.front().mean_silhouette;
  for (const auto& r : t.rows) {
    if (r.mean_silhouette > best + 1e-15) {
      best = r.mean_silhouette;
      t.selected_k = r.k;
    }
  }
  // elbow = max discrete second difference of inertia
  t.elbow_k = t.selected_k;
  if (t.rows.size() >= 3) {
    double best_dd = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < t.rows.size(); ++i) {
      const double dd = t.rows[i - 1].inertia - 2.0 * t.rows[i].inertia +
                        t.rows[i + 1].inertia;
      if (dd > best_dd) {
        best_dd = dd;
        t.elbow_k = t.rows[i].k;
      }
    }
  }
  t.rationale = (t.elbow_k == t.selected_k) ? "silhouette_max+elbow"
                                            : "silhouette_max";
  return t;
}

Eigen::MatrixXd centroid_similarity(const cluster::Partition& p) {
  const Index k = p.centroids.rows();
  Eigen::MatrixXd S(k, k);
  for (Index i = 0; i < k; ++i) {
    const double ni = p.centroids.row(i).norm();
    if (ni <= 0.0)
      throw Error("centroid_similarity: zero centroid " + std::to_string(i));
    for (Index j = 0; j < k; ++j) {
      const double nj = p.centroids.row(j).norm();
      S(i, j) = i == j ? 1.0
                       : p.centroids.row(i).dot(p.centroids.row(j)) / (ni * nj);
    }
  }
  return S;
}

std::string validity_to_csv(const ValidityTable& t) {
  std::ostringstream os;
  os.precision(17);
  os << "k,inertia,silhouette,dbi,chi\n";
  for (const auto& r : t.rows)
    os << r.k << ',' << r.inertia << ',' << r.mean_silhouette << ',' << r.dbi
       << ',' << r.chi << '\n';
  return os.str();
}

std::string validity_to_json(const ValidityTable& t) {
  nlohmann::ordered_json j;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"k", r.k},
                    {"inertia", r.inertia},
                    {"silhouette", r.mean_silhouette},
                    {"dbi", r.dbi},
                    {"chi", r.chi}});
  }
  j["rows"] = std::move(rows);
  j["selected_k"] = t.selected_k;
  j["elbow_k"] = t.elbow_k;
  j["rationale"] = t.rationale;
  j["silhouette_metric"] = metric_name(t.silhouette_metric);
  return j.dump(2) + "\n";
}

}  // namespace taxon::validity
