#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <set>

#include "taxon/common.hpp"
#include "taxon/io.hpp"

using namespace taxon;
namespace fs = std::filesystem;

TEST_CASE("rng determinism and ranges") {
  Rng a(7), b(7);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double d = r.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
    CHECK(r.next_index(10) < 10);
  }
}

TEST_CASE("rng gaussian moments") {
  Rng r(42);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = r.next_gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("sample_without_replacement is distinct, sorted, in-range") {
  Rng r(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = r.sample_without_replacement(20, 8);
    REQUIRE(s.size() == 8);
    std::set<std::size_t> uniq(s.begin(), s.end());
    CHECK(uniq.size() == 8);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(s.back() < 20);
  }
}

TEST_CASE("matrix round trip preserves float32 payload") {
  fs::path p = fs::temp_directory_path() / "taxon_io_test.bin";
  Eigen::MatrixXd m(2, 3);
  m << 1.0, 2.5, -3.0, 0.0, 1e-8, 4096.0;
  io::write_matrix(p, m, "EMB1");
  CHECK(io::has_magic(p, "EMB1"));
  CHECK_FALSE(io::has_magic(p, "CON1"));
  Eigen::MatrixXd back = io::read_matrix(p, "EMB1");
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(back(i, j) == doctest::Approx(m(i, j)).epsilon(1e-7));
  CHECK_THROWS_AS(io::read_matrix(p, "CON1"), Error);
  fs::remove(p);
}

TEST_CASE("sha256 known vector") {
  // FIPS 180-2 test vector for "abc"
  CHECK(io::sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
