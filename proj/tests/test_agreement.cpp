#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "taxon/agreement.hpp"
#include "taxon/common.hpp"

using namespace taxon;

TEST_CASE("ari hand values") {
  CHECK(agreement::adjusted_rand({0, 0, 1, 1}, {1, 1, 0, 0}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(agreement::adjusted_rand({0, 0, 1, 1}, {0, 1, 0, 1}) ==
        doctest::Approx(-0.5).epsilon(1e-12));
  CHECK_THROWS_AS(agreement::adjusted_rand({0, 1}, {0}), Error);
}

TEST_CASE("ari oracle trace on the -0.5 fixture") {
  auto t = oracle::adjusted_rand({0, 0, 1, 1}, {0, 1, 0, 1});
  CHECK(t.index == doctest::Approx(0.0));
  CHECK(t.expected == doctest::Approx(2.0 / 3.0));
  CHECK(t.maximum == doctest::Approx(2.0));
  CHECK(t.value == doctest::Approx(-0.5));
}

TEST_CASE("nmi/ami identities and refinement fixture") {
  std::vector<int> a{0, 0, 1, 1, 2, 2};
  CHECK(agreement::mutual_information(a, a, agreement::MiMode::nmi) ==
        doctest::Approx(1.0));
  CHECK(agreement::mutual_information(a, a, agreement::MiMode::ami) ==
        doctest::Approx(1.0));
  // balanced 2 classes vs full refinement (n=4): NMI = 1/mean(1,2) = 2/3
  std::vector<int> two{0, 0, 1, 1}, refine{0, 1, 2, 3};
  CHECK(agreement::mutual_information(two, refine, agreement::MiMode::nmi) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("degenerate single-cluster partitions") {
  std::vector<int> c{5, 5, 5, 5};
  CHECK(agreement::mutual_information(c, c, agreement::MiMode::nmi) == 1.0);
  CHECK(agreement::mutual_information(c, c, agreement::MiMode::ami) == 1.0);
  CHECK(agreement::adjusted_rand(c, c) == 1.0);
}

TEST_CASE("kappa hand fixture") {
  // r1=[y,y,n,n], r2=[y,n,n,n]: po=0.75, pe=0.5, kappa=0.5
  CHECK(agreement::cohen_kappa(std::vector<int>{1, 1, 0, 0},
                               std::vector<int>{1, 0, 0, 0}) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(agreement::cohen_kappa(
            std::vector<std::string>{"y", "y", "n", "n"},
            std::vector<std::string>{"y", "n", "n", "n"}) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(agreement::cohen_kappa(std::vector<int>{2, 3, 2},
                               std::vector<int>{2, 3, 2}) ==
        doctest::Approx(1.0));
}

TEST_CASE("kappa of independent random raters is near zero") {
  Rng rng(11);
  const int n = 100000;
  std::vector<int> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = static_cast<int>(rng.next_index(3));
    b[i] = static_cast<int>(rng.next_index(3));
  }
  CHECK(std::abs(agreement::cohen_kappa(a, b)) < 0.01);
}

TEST_CASE("agreement metrics vs oracles on random fixtures") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng.next_index(20);
    const int ka = 2 + static_cast<int>(rng.next_index(4));
    const int kb = 2 + static_cast<int>(rng.next_index(4));
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng.next_index(ka));
      b[i] = static_cast<int>(rng.next_index(kb));
    }
    CHECK(agreement::adjusted_rand(a, b) ==
          doctest::Approx(oracle::adjusted_rand(a, b).value).epsilon(1e-12));
    CHECK(agreement::mutual_information(a, b, agreement::MiMode::nmi) ==
          doctest::Approx(oracle::nmi(a, b)).epsilon(1e-9));
    CHECK(agreement::mutual_information(a, b, agreement::MiMode::ami) ==
          doctest::Approx(oracle::ami(a, b)).epsilon(1e-9));
    CHECK(agreement::cohen_kappa(a, b) ==
          doctest::Approx(oracle::cohen_kappa(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("relabel invariance and symmetry") {
  std::vector<int> a{0, 0, 1, 2, 1, 2, 0}, b{1, 1, 0, 0, 2, 2, 1};
  std::vector<int> a_perm{5, 5, 9, 7, 9, 7, 5};  // relabeled a
  CHECK(agreement::adjusted_rand(a, b) ==
        doctest::Approx(agreement::adjusted_rand(a_perm, b)));
  CHECK(agreement::adjusted_rand(a, b) ==
        doctest::Approx(agreement::adjusted_rand(b, a)));
  CHECK(agreement::mutual_information(a, b, agreement::MiMode::ami) ==
        doctest::Approx(
            agreement::mutual_information(b, a, agreement::MiMode::ami)));
}

TEST_CASE("contingency margins are consistent") {
  std::vector<int> a{0, 0, 1, 1, 2}, b{0, 1, 1, 1, 0};
  auto c = agreement::contingency(a, b);
  CHECK(c.table.sum() == doctest::Approx(c.n));
  CHECK(c.row_sums.sum() == doctest::Approx(c.n));
  CHECK(c.col_sums.sum() == doctest::Approx(c.n));
}
