#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "taxon/common.hpp"
#include "taxon/topics.hpp"

using namespace taxon;

namespace {

// 2 disjoint vocabularies; docs draw terms from exactly one of them.
topics::DocTermMatrix planted_corpus(int docs_per_topic, int words_per_doc,
                                     std::uint64_t seed,
                                     std::vector<std::string>* vocab_a = nullptr,
                                     std::vector<std::string>* vocab_b = nullptr) {
  std::vector<std::string> va, vb;
  for (int i = 0; i < 20; ++i) {
    va.push_back("alpha" + std::to_string(i));
    vb.push_back("beta" + std::to_string(i));
  }
  Rng rng(seed);
  std::vector<std::string> docs;
  for (int d = 0; d < 2 * docs_per_topic; ++d) {
    const auto& vocab = d < docs_per_topic ? va : vb;
    std::string text;
    for (int w = 0; w < words_per_doc; ++w) {
      text += vocab[rng.next_index(vocab.size())];
      text += ' ';
    }
    docs.push_back(text);
  }
  if (vocab_a) *vocab_a = va;
  if (vocab_b) *vocab_b = vb;
  topics::DtmConfig cfg;
  cfg.min_df = 2;
  cfg.bigrams = false;
  return topics::build_dtm(docs, cfg);
}

topics::LdaParams fast_params(std::uint64_t seed = 42) {
  topics::LdaParams p;
  p.iters = 300;
  p.burn_in = 100;
  p.thinning = 5;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("tokenizer basics") {
  auto toks = topics::tokenize("Large-language MODELS, 42 ai x!");
  // maximal [a-z0-9] runs of length >= 2, lowercased; "x" dropped
  REQUIRE(toks.size() == 5);
  CHECK(toks[0] == "large");
  CHECK(toks[1] == "language");
  CHECK(toks[2] == "models");
  CHECK(toks[3] == "42");
  CHECK(toks[4] == "ai");
}

TEST_CASE("build_dtm hand trace") {
  std::vector<std::string> docs{"large language model", "large language"};
  topics::DtmConfig cfg;  // empty stopwords, min_df=2, bigrams on
  auto dtm = topics::build_dtm(docs, cfg);
  std::set<std::string> vocab(dtm.vocab.begin(), dtm.vocab.end());
  CHECK(vocab.count("large"));
  CHECK(vocab.count("language"));
  CHECK(vocab.count("large_language"));
  CHECK_FALSE(vocab.count("model"));           // df = 1
  CHECK_FALSE(vocab.count("language_model"));  // df = 1
  CHECK(std::is_sorted(dtm.vocab.begin(), dtm.vocab.end()));
}

TEST_CASE("build_dtm linearity under doc duplication") {
  std::vector<std::string> docs{"alpha beta gamma", "alpha beta", "gamma delta"};
  topics::DtmConfig cfg;
  cfg.min_df = 1;
  auto once = topics::build_dtm(docs, cfg);
  std::vector<std::string> doubled = docs;
  doubled.insert(doubled.end(), docs.begin(), docs.end());
  auto twice = topics::build_dtm(doubled, cfg);
  CHECK(twice.total_tokens == 2 * once.total_tokens);
  CHECK(twice.vocab == once.vocab);
  for (std::size_t d = 0; d < once.counts.size(); ++d) {
    CHECK(twice.counts[d] == once.counts[d]);
    CHECK(twice.counts[d + once.counts.size()] == once.counts[d]);
  }
}

TEST_CASE("stopwords removed before bigram formation") {
  topics::DtmConfig cfg;
  cfg.stopwords = {"of"};
  cfg.min_df = 1;
  auto dtm = topics::build_dtm({"theory of mind", "theory of mind"}, cfg);
  std::set<std::string> vocab(dtm.vocab.begin(), dtm.vocab.end());
  CHECK(vocab.count("theory_mind"));
  CHECK_FALSE(vocab.count("of"));
  CHECK_FALSE(vocab.count("theory_of"));
}

TEST_CASE("lda determinism and probability invariants") {
  auto dtm = planted_corpus(20, 30, 5);
  auto m1 = topics::lda_fit(dtm, 2, fast_params());
  auto m2 = topics::lda_fit(dtm, 2, fast_params());
  CHECK(m1.phi == m2.phi);
  CHECK(m1.theta == m2.theta);
  for (int t = 0; t < m1.k; ++t) {
    CHECK(m1.phi.row(t).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m1.phi.row(t).minCoeff() > 0.0);
  }
  for (Eigen::Index d = 0; d < m1.theta.rows(); ++d)
    CHECK(m1.theta.row(d).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lda recovers planted vocabularies") {
  std::vector<std::string> va, vb;
  auto dtm = planted_corpus(50, 40, 9, &va, &vb);
  auto model = topics::lda_fit(dtm, 2, fast_params(1));
  std::set<std::string> sa(va.begin(), va.end());
  for (int t = 0; t < 2; ++t) {
    double mass_a = 0.0;
    for (std::size_t w = 0; w < dtm.vocab.size(); ++w)
      if (sa.count(dtm.vocab[w])) mass_a += model.phi(t, static_cast<Eigen::Index>(w));
    CHECK((mass_a >= 0.95 || mass_a <= 0.05));
  }
}

TEST_CASE("single-term corpus forces phi = (1.0)") {
  topics::DtmConfig cfg;
  cfg.min_df = 1;
  cfg.bigrams = false;
  auto dtm = topics::build_dtm({"word word word"}, cfg);
  auto model = topics::lda_fit(dtm, 2, fast_params());
  for (int t = 0; t < 2; ++t)
    CHECK(model.phi(t, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("perplexity of uniform phi equals V") {
  topics::DtmConfig cfg;
  cfg.min_df = 1;
  cfg.bigrams = false;
  auto dtm = topics::build_dtm(
      {"aa bb cc dd", "aa bb cc dd", "dd cc bb aa"}, cfg);
  const int V = static_cast<int>(dtm.vocab.size());
  topics::TopicModel m;
  m.k = 2;
  m.vocab = dtm.vocab;
  m.phi = Eigen::MatrixXd::Constant(2, V, 1.0 / V);
  m.alpha = 25.0;
  m.beta = 0.01;
  m.term_marginal = Eigen::VectorXd::Constant(V, 1.0 / V);
  CHECK(topics::perplexity(m, dtm) == doctest::Approx(double(V)).epsilon(1e-6));
}

TEST_CASE("perplexity approaches 1 for a deterministic topic") {
  topics::DtmConfig cfg;
  cfg.min_df = 1;
  cfg.bigrams = false;
  auto heldout = topics::build_dtm({"ww ww ww ww ww ww ww ww"}, cfg);
  topics::TopicModel m;
  m.k = 2;
  m.vocab = {"ww"};
  m.phi = Eigen::MatrixXd::Ones(2, 1);
  m.alpha = 25.0;
  m.beta = 0.01;
  m.term_marginal = Eigen::VectorXd::Ones(1);
  CHECK(topics::perplexity(m, heldout) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("perplexity errors on empty heldout and reports oov") {
  topics::DtmConfig cfg;
  cfg.min_df = 1;
  auto heldout = topics::build_dtm({"zz zz"}, cfg);
  topics::TopicModel m;
  m.k = 2;
  m.vocab = {"other"};
  m.phi = Eigen::MatrixXd::Ones(2, 1);
  m.alpha = 25.0;
  m.beta = 0.01;
  m.term_marginal = Eigen::VectorXd::Ones(1);
  long long oov = 0;
  CHECK_THROWS_AS(topics::perplexity(m, heldout, 42, &oov), Error);
}

TEST_CASE("umass coherence hand fixture log(2/3)") {
  topics::DtmConfig cfg;
  cfg.min_df = 1;
  cfg.bigrams = false;
  auto dtm = topics::build_dtm({"aa bb", "aa cc", "aa"}, cfg);
  topics::TopicModel m;
  m.k = 1;
  m.vocab = dtm.vocab;  // lexicographic: aa, bb, cc
  m.phi = Eigen::MatrixXd(1, 3);
  m.phi << 0.6, 0.3, 0.1;  // top-2 = aa, bb
  auto c = topics::umass_coherence(m, dtm, 2);
  REQUIRE(c.size() == 1);
  // ordered pair (w2=bb, w1=aa): log((D(bb,aa)+1)/D(aa)) = log(2/3)
  CHECK(c[0] == doctest::Approx(std::log(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("coherence of always co-occurring terms is near zero from above") {
  topics::DtmConfig cfg;
  cfg.min_df = 1;
  cfg.bigrams = false;
  std::vector<std::string> docs(40, "xx yy");
  auto dtm = topics::build_dtm(docs, cfg);
  topics::TopicModel m;
  m.k = 1;
  m.vocab = dtm.vocab;
  m.phi = Eigen::MatrixXd(1, 2);
  m.phi << 0.7, 0.3;
  auto c = topics::umass_coherence(m, dtm, 2);
  CHECK(c[0] == doctest::Approx(std::log(41.0 / 40.0)).epsilon(1e-12));
  CHECK(c[0] > 0.0);
}

TEST_CASE("select_topic_count picks 2 on planted corpus; [3,3] picks 3") {
  auto dtm = planted_corpus(100, 25, 4);
  auto diag = topics::select_topic_count(dtm, {2, 3, 4, 5}, fast_params(2));
  CHECK(diag.selected_k == 2);
  // z-score property: composite column has mean ~0 when variance > 0
  double mean_c = 0.0;
  for (const auto& r : diag.rows) mean_c += r.composite;
  mean_c /= static_cast<double>(diag.rows.size());
  CHECK(std::abs(mean_c) < 1e-9);

  auto single = topics::select_topic_count(dtm, {3}, fast_params(2));
  CHECK(single.selected_k == 3);
}

TEST_CASE("relevance arithmetic and reductions") {
  topics::TopicModel m;
  m.k = 2;
  m.vocab = {"w0", "w1", "w2"};
  m.phi = Eigen::MatrixXd(2, 3);
  m.phi << 0.2, 0.5, 0.3, 0.1, 0.2, 0.7;
  m.term_marginal = Eigen::VectorXd(3);
  m.term_marginal << 0.1, 0.35, 0.55;

  // phi=0.2, p(w)=0.1: lambda=0 -> log 2; lambda=1 -> log 0.2; 0.5 -> -0.458
  auto r0 = topics::relevance(m, 0.0, 3);
  auto r1 = topics::relevance(m, 1.0, 3);
  auto rh = topics::relevance(m, 0.5, 3);
  auto find_w0 = [](const std::vector<topics::RankedTerm>& terms) {
    for (const auto& t : terms)
      if (t.term == "w0") return t.weight;
    return 1e300;
  };
  CHECK(find_w0(r0[0]) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(find_w0(r1[0]) == doctest::Approx(std::log(0.2)).epsilon(1e-12));
  CHECK(find_w0(rh[0]) ==
        doctest::Approx(0.5 * std::log(0.2) + 0.5 * std::log(2.0))
            .epsilon(1e-12));

  // lambda=1 ordering equals phi ordering; lambda=0 equals lift ordering
  for (int t = 0; t < 2; ++t) {
    std::vector<int> by_phi{0, 1, 2};
    std::stable_sort(by_phi.begin(), by_phi.end(), [&](int a, int b) {
      return m.phi(t, a) > m.phi(t, b);
    });
    std::vector<int> by_lift{0, 1, 2};
    std::stable_sort(by_lift.begin(), by_lift.end(), [&](int a, int b) {
      return m.phi(t, a) / m.term_marginal(a) >
             m.phi(t, b) / m.term_marginal(b);
    });
    for (int i = 0; i < 3; ++i) {
      CHECK(r1[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)].term_index == by_phi[static_cast<std::size_t>(i)]);
      CHECK(r0[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)].term_index == by_lift[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("topic similarity identities") {
  topics::TopicModel a;
  a.k = 1;
  a.vocab = {"x", "y"};
  a.phi = Eigen::MatrixXd(1, 2);
  a.phi << 0.5, 0.5;
  topics::TopicModel b = a;          // identical topic
  topics::TopicModel c;
  c.k = 1;
  c.vocab = {"z", "w"};              // disjoint support
  c.phi = Eigen::MatrixXd(1, 2);
  c.phi << 0.9, 0.1;
  auto S = topics::topic_similarity({a, b, c});
  REQUIRE(S.rows() == 3);
  CHECK(S(0, 0) == doctest::Approx(1.0));
  CHECK(S(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(S(0, 2) == doctest::Approx(0.0));
  CHECK(S.isApprox(S.transpose(), 1e-12));
}
