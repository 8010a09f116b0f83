#include "taxon/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "taxon/common.hpp"

namespace taxon::agreement {

namespace {

std::vector<int> dense(const std::vector<int>& labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

double entropy_nats(const Eigen::VectorXd& counts, double n) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) {
      const double p = counts[i] / n;
      h -= p * std::log(p);
    }
  }
  return h;
}

double mutual_info_nats(const Contingency& c) {
  double mi = 0.0;
  for (Eigen::Index i = 0; i < c.table.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.table.cols(); ++j) {
      const double nij = c.table(i, j);
      if (nij > 0) {
        mi += (nij / c.n) *
              std::log(c.n * nij / (c.row_sums[i] * c.col_sums[j]));
      }
    }
  }
  return std::max(mi, 0.0);
}

// E[I(a;b)] under the hypergeometric permutation model (Vinh et al.).
double expected_mutual_info(const Contingency& c) {
  const int n = static_cast<int>(c.n);
  std::vector<double> lfact(n + 1, 0.0);
  for (int i = 2; i <= n; ++i) lfact[i] = lfact[i - 1] + std::log(i);
  double emi = 0.0;
  for (Eigen::Index i = 0; i < c.row_sums.size(); ++i) {
    const int a = static_cast<int>(c.row_sums[i]);
    for (Eigen::Index j = 0; j < c.col_sums.size(); ++j) {
      const int b = static_cast<int>(c.col_sums[j]);
      const int lo = std::max(1, a + b - n);
      const int hi = std::min(a, b);
      for (int nij = lo; nij <= hi; ++nij) {
        const double log_p = lfact[a] + lfact[b] + lfact[n - a] + lfact[n - b] -
                             lfact[n] - lfact[nij] - lfact[a - nij] -
                             lfact[b - nij] - lfact[n - a - b + nij];
        emi += (static_cast<double>(nij) / n) *
               std::log(static_cast<double>(n) * nij /
                        (static_cast<double>(a) * b)) *
               std::exp(log_p);
      }
    }
  }
  return emi;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  return dense(a) == dense(b);
}

}  // namespace

Contingency contingency(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw Error("contingency: label vectors differ in length");
  if (a.empty()) throw Error("contingency: empty label vectors");
  const std::vector<int> da = dense(a), db = dense(b);
  const int r = *std::max_element(da.begin(), da.end()) + 1;
  const int c = *std::max_element(db.begin(), db.end()) + 1;
  Contingency out;
  out.table = Eigen::MatrixXd::Zero(r, c);
  for (std::size_t i = 0; i < da.size(); ++i) out.table(da[i], db[i]) += 1.0;
  out.row_sums = out.table.rowwise().sum();
  out.col_sums = out.table.colwise().sum();
  out.n = static_cast<double>(a.size());
  return out;
}

double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw Error("adjusted_rand: label vectors differ in length");
  if (a.size() < 2) throw Error("adjusted_rand: need at least 2 elements");
  const Contingency c = contingency(a, b);
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sum_ij = 0.0;
  for (Eigen::Index i = 0; i < c.table.rows(); ++i)
    for (Eigen::Index j = 0; j < c.table.cols(); ++j)
      sum_ij += choose2(c.table(i, j));
  double sum_a = 0.0, sum_b = 0.0;
  for (Eigen::Index i = 0; i < c.row_sums.size(); ++i)
    sum_a += choose2(c.row_sums[i]);
  for (Eigen::Index j = 0; j < c.col_sums.size(); ++j)
    sum_b += choose2(c.col_sums[j]);
  const double total = choose2(c.n);
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (std::abs(max_index - expected) < 1e-15)
    return same_partition(a, b) ? 1.0 : 0.0;
  return (sum_ij - expected) / (max_index - expected);
}

double mutual_information(const std::vector<int>& a, const std::vector<int>& b,
                          MiMode mode) {
  if (a.size() != b.size())
    throw Error("mutual_information: label vectors differ in length");
  const Contingency c = contingency(a, b);
  const double ha = entropy_nats(c.row_sums, c.n);
  const double hb = entropy_nats(c.col_sums, c.n);
  const double mean_h = 0.5 * (ha + hb);
  const double mi = mutual_info_nats(c);
  if (mode == MiMode::nmi) {
    if (mean_h < 1e-15) return 1.0;  // both single-cluster, by convention
    return mi / mean_h;
  }
  if (mean_h < 1e-15) return 1.0;
  const double emi = expected_mutual_info(c);
  const double denom = mean_h - emi;
  if (std::abs(denom) < 1e-15) return same_partition(a, b) ? 1.0 : 0.0;
  return (mi - emi) / denom;
}

double cohen_kappa(const std::vector<int>& r1, const std::vector<int>& r2) {
  if (r1.size() != r2.size())
    throw Error("cohen_kappa: rater vectors differ in length");
  if (r1.empty()) throw Error("cohen_kappa: empty input");
  // Shared alphabet across both raters.
  std::map<int, int> alphabet;
  for (int v : r1) alphabet.emplace(v, 0);
  for (int v : r2) alphabet.emplace(v, 0);
  int next = 0;
  for (auto& [k, v] : alphabet) v = next++;
  const int m = next;
  const double n = static_cast<double>(r1.size());
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < r1.size(); ++i)
    table(alphabet[r1[i]], alphabet[r2[i]]) += 1.0;
  const double po = table.trace() / n;
  double pe = 0.0;
  for (int k = 0; k < m; ++k)
    pe += (table.row(k).sum() / n) * (table.col(k).sum() / n);
  if (std::abs(1.0 - pe) < 1e-15) return 1.0;  // both raters constant, identical
  return (po - pe) / (1.0 - pe);
}

double cohen_kappa(const std::vector<std::string>& r1,
                   const std::vector<std::string>& r2) {
  std::map<std::string, int> alphabet;
  for (const auto& v : r1) alphabet.emplace(v, 0);
  for (const auto& v : r2) alphabet.emplace(v, 0);
  int next = 0;
  for (auto& [k, v] : alphabet) v = next++;
  std::vector<int> a, b;
  a.reserve(r1.size());
  b.reserve(r2.size());
  for (const auto& v : r1) a.push_back(alphabet[v]);
  for (const auto& v : r2) b.push_back(alphabet[v]);
  return cohen_kappa(a, b);
}

std::vector<int> densify_labels(const std::vector<std::string>& labels) {
  std::unordered_map<std::string, int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

}  // namespace taxon::agreement
