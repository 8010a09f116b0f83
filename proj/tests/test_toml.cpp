#include <doctest.h>

#include "taxon/common.hpp"
#include "taxon/toml.hpp"

using namespace taxon;

TEST_CASE("toml parser covers the config subset") {
  auto t = toml::parse(R"(# top comment
corpus = "data/meta.jsonl"   # trailing comment
seed = 42
ratio = 0.8
flag = true
negative = -7

[cluster]
k_min = 2
k_max = 10
metric = "cosine"

[topics]
lambda_grid = [0.0, 0.2, 1.0]
names = ["a", "b"]
)");
  CHECK(t.get_string("corpus", "") == "data/meta.jsonl");
  CHECK(t.get_int("seed", 0) == 42);
  CHECK(t.get_float("ratio", 0.0) == doctest::Approx(0.8));
  CHECK(t.get_bool("flag", false));
  CHECK(t.get_int("negative", 0) == -7);
  CHECK(t.get_int("cluster.k_min", 0) == 2);
  CHECK(t.get_string("cluster.metric", "") == "cosine");
  auto grid = t.at("topics.lambda_grid").as_array();
  REQUIRE(grid.size() == 3);
  CHECK(grid[1].as_float() == doctest::Approx(0.2));
  CHECK(t.at("topics.names").as_array()[1].as_string() == "b");
  // ints coerce to float, not the reverse
  CHECK(t.at("seed").as_float() == doctest::Approx(42.0));
  CHECK_THROWS_AS(t.at("ratio").as_int(), ValidationError);
  CHECK_THROWS_AS(t.at("missing.key"), ValidationError);
  CHECK(t.get_string("absent", "dflt") == "dflt");
}

TEST_CASE("string escapes and hash inside strings") {
  auto t = toml::parse(R"(path = "a#b\t\"c\"" # real comment)");
  CHECK(t.get_string("path", "") == "a#b\t\"c\"");
}

TEST_CASE("parse errors carry line numbers") {
  auto expect_error = [](const std::string& text, const std::string& frag) {
    try {
      toml::parse(text);
      FAIL("expected throw for: ", text);
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find(frag) != std::string::npos);
    }
  };
  expect_error("a = 1\nb 2\n", "line 2");
  expect_error("a = \"unterminated\n", "line 1");
  expect_error("a = [1, \"x\"]\n", "mixed-type");
  expect_error("a = 1\na = 2\n", "duplicate");
  expect_error("[bad section\n", "section");
  expect_error("a = zzz\n", "cannot parse");
}
