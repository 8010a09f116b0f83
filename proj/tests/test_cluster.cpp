#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "taxon/cluster.hpp"
#include "taxon/common.hpp"

using namespace taxon;

namespace {

cluster::KMeansParams quiet_params(int k) {
  cluster::KMeansParams p;
  p.k = k;
  return p;
}

}  // namespace

TEST_CASE("hand fixture: two tight pairs, k=2") {
  Eigen::MatrixXd X(4, 2);
  X << 0, 0, 0, 1, 10, 10, 10, 11;
  auto part = cluster::kmeans_fit(X, quiet_params(2));
  CHECK(part.inertia == doctest::Approx(1.0).epsilon(1e-12));
  // centroids are {(0,0.5),(10,10.5)} in some order
  std::map<double, Eigen::RowVector2d> by_x;
  for (int c = 0; c < 2; ++c) by_x[part.centroids(c, 0)] = part.centroids.row(c);
  auto it = by_x.begin();
  CHECK(it->second(0) == doctest::Approx(0.0));
  CHECK(it->second(1) == doctest::Approx(0.5));
  ++it;
  CHECK(it->second(0) == doctest::Approx(10.0));
  CHECK(it->second(1) == doctest::Approx(10.5));
  CHECK(part.labels(0) == part.labels(1));
  CHECK(part.labels(2) == part.labels(3));
  CHECK(part.labels(0) != part.labels(2));
}

TEST_CASE("k equal to n gives zero inertia") {
  Eigen::MatrixXd X(4, 2);
  X << 0, 0, 1, 0, 2, 0, 3, 0;
  auto part = cluster::kmeans_fit(X, quiet_params(4));
  CHECK(part.inertia == doctest::Approx(0.0));
  std::set<int> labels(part.labels.data(), part.labels.data() + 4);
  CHECK(labels.size() == 4);
}

TEST_CASE("k validation") {
  Eigen::MatrixXd X(4, 2);
  X << 0, 0, 1, 0, 2, 0, 3, 0;
  CHECK_THROWS_AS(cluster::kmeans_fit(X, quiet_params(1)), ValidationError);
  CHECK_THROWS_AS(cluster::kmeans_fit(X, quiet_params(5)), ValidationError);
}

TEST_CASE("predict_assign tie goes to the lowest index") {
  Eigen::MatrixXd C(2, 1);
  C << -1, 1;
  Eigen::MatrixXd X(1, 1);
  X << 0;  // equidistant
  auto labels = cluster::predict_assign(C, X);
  CHECK(labels(0) == 0);
}

TEST_CASE("predict_assign on centroids = X is identity") {
  Eigen::MatrixXd X(5, 3);
  Rng rng(4);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) X(i, j) = rng.next_gaussian();
  auto labels = cluster::predict_assign(X, X);
  for (int i = 0; i < 5; ++i) CHECK(labels(i) == i);
}

TEST_CASE("fit labels equal nearest-centroid assignment") {
  Rng rng(17);
  Eigen::MatrixXd X(40, 4);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 4; ++j) X(i, j) = rng.next_gaussian();
  for (int k : {2, 3, 5}) {
    auto part = cluster::kmeans_fit(X, quiet_params(k));
    auto re = cluster::predict_assign(part.centroids, X);
    for (int i = 0; i < 40; ++i) CHECK(re(i) == part.labels(i));
    // every cluster nonempty
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < 40; ++i) ++counts[static_cast<std::size_t>(part.labels(i))];
    for (int c : counts) CHECK(c > 0);
  }
}

TEST_CASE("lloyd inertia trace is non-increasing") {
  Rng rng(23);
  Eigen::MatrixXd X(60, 3);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 3; ++j) X(i, j) = rng.next_gaussian();
  std::vector<double> trace;
  auto part = cluster::kmeans_fit_traced(X, quiet_params(4), &trace);
  REQUIRE(trace.size() >= 1);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1] + 1e-9);
  CHECK(part.inertia == doctest::Approx(trace.back()).epsilon(1e-9));
}

TEST_CASE("determinism across runs") {
  Rng rng(5);
  Eigen::MatrixXd X(30, 2);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 2; ++j) X(i, j) = rng.next_gaussian();
  auto a = cluster::kmeans_fit(X, quiet_params(3));
  auto b = cluster::kmeans_fit(X, quiet_params(3));
  CHECK(a.labels == b.labels);
  CHECK(a.centroids == b.centroids);
  CHECK(a.inertia == b.inertia);
}

TEST_CASE("kmeans++ seeding matches reference distribution (chi-square)") {
  // 5 collinear points; first center uniform, second proportional to squared
  // distance from the first. Aggregate the chosen 2-subsets over many draws
  // and compare against exact probabilities with a chi-square test.
  Eigen::MatrixXd X(5, 1);
  X << 0, 1, 2, 3, 10;
  const int n = 5, draws = 100000;
  std::map<std::pair<int, int>, double> expected;
  for (int first = 0; first < n; ++first) {
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::pow(X(j, 0) - X(first, 0), 2);
    for (int second = 0; second < n; ++second) {
      if (second == first) continue;
      const double p =
          (1.0 / n) * std::pow(X(second, 0) - X(first, 0), 2) / z;
      auto key = std::minmax(first, second);
      expected[{key.first, key.second}] += p;
    }
  }
  std::map<std::pair<int, int>, int> observed;
  Rng rng(2024);
  for (int d = 0; d < draws; ++d) {
    auto idx = cluster::detail::kmeanspp_indices(X, 2, rng);
    const int a = static_cast<int>(idx[0]);
    const int b = static_cast<int>(idx[1]);
    ++observed[{std::min(a, b), std::max(a, b)}];
  }
  double chi2 = 0.0;
  int cells = 0;
  for (const auto& [pair, p] : expected) {
    const double exp_count = p * draws;
    const double obs = observed.count(pair) ? observed[pair] : 0;
    chi2 += (obs - exp_count) * (obs - exp_count) / exp_count;
    ++cells;
  }
  // dof = cells - 1 = 9; critical value at p=0.01 is 21.666
  CHECK(cells == 10);
  CHECK(chi2 < 21.666);
}

TEST_CASE("partition json round trip") {
  Eigen::MatrixXd X(6, 2);
  X << 0, 0, 0, 1, 5, 5, 5, 6, 9, 9, 9, 8;
  auto part = cluster::kmeans_fit(X, quiet_params(3));
  auto back = cluster::partition_from_json(cluster::partition_to_json(part));
  CHECK(back.k == part.k);
  CHECK(back.labels == part.labels);
  CHECK(back.inertia == doctest::Approx(part.inertia).epsilon(1e-15));
  CHECK(back.centroids.isApprox(part.centroids, 1e-15));
}
