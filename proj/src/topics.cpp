#include "taxon/topics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "taxon/common.hpp"

namespace taxon::topics {

namespace {

// Token-level corpus view used by the Gibbs sampler.
struct FlatCorpus {
  std::vector<std::vector<int>> tokens;  // per doc, term index per token
  long long total = 0;
};

FlatCorpus flatten(const DocTermMatrix& dtm) {
  FlatCorpus fc;
  fc.tokens.resize(dtm.n_docs());
  for (std::size_t d = 0; d < dtm.n_docs(); ++d) {
    for (const auto& [w, c] : dtm.counts[d])
      for (int r = 0; r < c; ++r) fc.tokens[d].push_back(w);
    fc.total += static_cast<long long>(fc.tokens[d].size());
  }
  return fc;
}

// One collapsed Gibbs chain over token-topic assignments.
class GibbsChain {
 public:
  GibbsChain(const FlatCorpus& fc, int k, int vocab, double alpha, double beta,
             std::uint64_t seed)
      : fc_(fc),
        k_(k),
        v_(vocab),
        alpha_(alpha),
        beta_(beta),
        rng_(seed),
        n_dk_(Eigen::MatrixXd::Zero(fc.tokens.size(), k)),
        n_kw_(Eigen::MatrixXd::Zero(k, vocab)),
        n_k_(Eigen::VectorXd::Zero(k)) {
    z_.resize(fc.tokens.size());
    for (std::size_t d = 0; d < fc.tokens.size(); ++d) {
      z_[d].resize(fc.tokens[d].size());
      for (std::size_t t = 0; t < fc.tokens[d].size(); ++t) {
        const int topic = static_cast<int>(rng_.next_index(k));
        z_[d][t] = topic;
        n_dk_(d, topic) += 1.0;
        n_kw_(topic, fc.tokens[d][t]) += 1.0;
        n_k_[topic] += 1.0;
      }
    }
  }

  void sweep() {
    std::vector<double> p(k_);
    for (std::size_t d = 0; d < fc_.tokens.size(); ++d) {
      for (std::size_t t = 0; t < fc_.tokens[d].size(); ++t) {
        const int w = fc_.tokens[d][t];
        const int old = z_[d][t];
        n_dk_(d, old) -= 1.0;
        n_kw_(old, w) -= 1.0;
        n_k_[old] -= 1.0;
        double total = 0.0;
        for (int topic = 0; topic < k_; ++topic) {
          p[topic] = (n_dk_(d, topic) + alpha_) * (n_kw_(topic, w) + beta_) /
                     (n_k_[topic] + v_ * beta_);
          total += p[topic];
        }
        const double target = rng_.next_double() * total;
        double acc = 0.0;
        int picked = k_ - 1;
        for (int topic = 0; topic < k_; ++topic) {
          acc += p[topic];
          if (acc > target) {
            picked = topic;
            break;
          }
        }
        z_[d][t] = picked;
        n_dk_(d, picked) += 1.0;
        n_kw_(picked, w) += 1.0;
        n_k_[picked] += 1.0;
      }
    }
  }

  Eigen::MatrixXd phi_sample() const {
    Eigen::MatrixXd phi(k_, v_);
    for (int topic = 0; topic < k_; ++topic)
      phi.row(topic) = (n_kw_.row(topic).array() + beta_) /
                       (n_k_[topic] + v_ * beta_);
    return phi;
  }

  Eigen::MatrixXd theta_sample() const {
    Eigen::MatrixXd theta(n_dk_.rows(), k_);
    for (Eigen::Index d = 0; d < n_dk_.rows(); ++d) {
      const double nd = n_dk_.row(d).sum();
      theta.row(d) = (n_dk_.row(d).array() + alpha_) / (nd + k_ * alpha_);
    }
    return theta;
  }

  double token_total() const { return n_k_.sum(); }

 private:
  const FlatCorpus& fc_;
  int k_, v_;
  double alpha_, beta_;
  Rng rng_;
  std::vector<std::vector<int>> z_;
  Eigen::MatrixXd n_dk_, n_kw_;
  Eigen::VectorXd n_k_;
};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char ch : text) {
    const char c = static_cast<char>(std::tolower(ch));
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      if (cur.size() >= 2) out.push_back(cur);
      cur.clear();
    }
  }
  if (cur.size() >= 2) out.push_back(cur);
  return out;
}

std::set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stopword list: " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (!line.empty() && line[0] != '#') out.insert(line);
  }
  return out;
}

DocTermMatrix build_dtm(const std::vector<std::string>& docs,
                        const DtmConfig& cfg,
                        const std::vector<std::string>& doc_ids) {
  if (docs.empty()) throw Error("build_dtm: empty document list");
  // Per-document term streams (unigrams of the filtered token stream, plus
  // bigrams of adjacent filtered tokens).
  std::vector<std::vector<std::string>> streams(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::vector<std::string> kept;
    for (auto& tok : tokenize(docs[d]))
      if (!cfg.stopwords.count(tok)) kept.push_back(std::move(tok));
    auto& s = streams[d];
    s = kept;
    if (cfg.bigrams)
      for (std::size_t i = 0; i + 1 < kept.size(); ++i)
        s.push_back(kept[i] + "_" + kept[i + 1]);
    if (s.empty())
      std::cerr << "[taxon] warning: document " << d
                << " has no terms after filtering\n";
  }

  std::map<std::string, int> df;
  for (const auto& s : streams) {
    std::set<std::string> uniq(s.begin(), s.end());
    for (const auto& t : uniq) ++df[t];
  }
  DocTermMatrix dtm;
  std::map<std::string, int> index;  // lexicographic by map order
  for (const auto& [term, d] : df) {
    if (d >= cfg.min_df) {
      index.emplace(term, static_cast<int>(dtm.vocab.size()));
      dtm.vocab.push_back(term);
    }
  }
  if (dtm.vocab.empty()) throw Error("build_dtm: empty vocabulary after filtering");

  dtm.counts.resize(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::map<int, int> row;
    for (const auto& t : streams[d]) {
      auto it = index.find(t);
      if (it != index.end()) ++row[it->second];
    }
    dtm.counts[d].assign(row.begin(), row.end());
    for (const auto& [w, c] : row) dtm.total_tokens += c;
  }
  if (!doc_ids.empty()) {
    if (doc_ids.size() != docs.size())
      throw Error("build_dtm: doc_ids/docs size mismatch");
    dtm.doc_ids = doc_ids;
  } else {
    for (std::size_t d = 0; d < docs.size(); ++d)
      dtm.doc_ids.push_back("doc" + std::to_string(d));
  }
  return dtm;
}

TopicModel lda_fit(const DocTermMatrix& dtm, int k, const LdaParams& params) {
  if (k < 2) throw Error("lda_fit: k must be >= 2");
  if (dtm.n_docs() == 0 || dtm.total_tokens == 0)
    throw Error("lda_fit: empty document-term matrix");
  const double alpha = params.alpha > 0 ? params.alpha : 50.0 / k;

  const FlatCorpus fc = flatten(dtm);
  GibbsChain chain(fc, k, static_cast<int>(dtm.n_terms()), alpha, params.beta,
                   params.seed);

  Eigen::MatrixXd phi_acc = Eigen::MatrixXd::Zero(k, dtm.n_terms());
  Eigen::MatrixXd theta_acc = Eigen::MatrixXd::Zero(dtm.n_docs(), k);
  int samples = 0;
  for (int it = 1; it <= params.iters; ++it) {
    chain.sweep();
    if (it > params.burn_in && (it - params.burn_in) % params.thinning == 0) {
      phi_acc += chain.phi_sample();
      theta_acc += chain.theta_sample();
      ++samples;
    }
  }
  if (samples == 0) {  // short chains: use the final state
    phi_acc = chain.phi_sample();
    theta_acc = chain.theta_sample();
    samples = 1;
  }
  if (std::llround(chain.token_total()) != fc.total)
    throw Error("lda_fit: token count not conserved across sweeps");

  TopicModel m;
  m.k = k;
  m.alpha = alpha;
  m.beta = params.beta;
  m.vocab = dtm.vocab;
  m.phi = phi_acc / samples;
  m.theta = theta_acc / samples;

  // Corpus-wide topic proportions weighted by document length.
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(k);
  for (std::size_t d = 0; d < dtm.n_docs(); ++d) {
    double len = 0.0;
    for (const auto& [w, c] : dtm.counts[d]) len += c;
    weight += len * m.theta.row(d).transpose();
  }
  weight /= weight.sum();
  m.term_marginal = m.phi.transpose() * weight;
  return m;
}

double perplexity(const TopicModel& model, const DocTermMatrix& heldout,
                  std::uint64_t seed, long long* oov_dropped) {
  // Map held-out terms onto the model vocabulary, dropping OOV tokens.
  std::map<std::string, int> index;
  for (std::size_t w = 0; w < model.vocab.size(); ++w)
    index.emplace(model.vocab[w], static_cast<int>(w));

  long long dropped = 0;
  double log_lik = 0.0;
  long long total = 0;
  Rng rng(seed);
  const int fold_burn = 50, fold_samples = 50;

  for (std::size_t d = 0; d < heldout.n_docs(); ++d) {
    std::vector<int> tokens;
    for (const auto& [w, c] : heldout.counts[d]) {
      auto it = index.find(heldout.vocab[w]);
      if (it == index.end()) {
        dropped += c;
        continue;
      }
      for (int r = 0; r < c; ++r) tokens.push_back(it->second);
    }
    if (tokens.empty()) continue;

    // Fold-in Gibbs with phi frozen.
    const int k = model.k;
    Eigen::VectorXd n_t = Eigen::VectorXd::Zero(k);
    std::vector<int> z(tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      z[t] = static_cast<int>(rng.next_index(k));
      n_t[z[t]] += 1.0;
    }
    Eigen::VectorXd theta_acc = Eigen::VectorXd::Zero(k);
    std::vector<double> p(k);
    for (int it = 1; it <= fold_burn + fold_samples; ++it) {
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        const int w = tokens[t];
        n_t[z[t]] -= 1.0;
        double tot = 0.0;
        for (int topic = 0; topic < k; ++topic) {
          p[topic] = (n_t[topic] + model.alpha) * model.phi(topic, w);
          tot += p[topic];
        }
        const double target = rng.next_double() * tot;
        double acc = 0.0;
        int picked = k - 1;
        for (int topic = 0; topic < k; ++topic) {
          acc += p[topic];
          if (acc > target) {
            picked = topic;
            break;
          }
        }
        z[t] = picked;
        n_t[picked] += 1.0;
      }
      if (it > fold_burn)
        theta_acc += (n_t.array() + model.alpha).matrix() /
                     (static_cast<double>(tokens.size()) + k * model.alpha);
    }
    const Eigen::VectorXd theta_hat = theta_acc / fold_samples;
    for (int w : tokens) {
      const double pw = theta_hat.dot(model.phi.col(w));
      log_lik += std::log(std::max(pw, 1e-300));
      ++total;
    }
  }
  if (oov_dropped) *oov_dropped = dropped;
  if (total == 0) throw Error("perplexity: zero held-out tokens");
  return std::exp(-log_lik / static_cast<double>(total));
}

std::vector<double> umass_coherence(const TopicModel& model,
                                    const DocTermMatrix& dtm, int top_m) {
  if (top_m < 2) throw Error("umass_coherence: M must be >= 2");
  // Document occurrence sets per model term (terms absent from dtm get D=0
  // and are skipped from top lists since phi top terms come from the fit dtm).
  std::map<std::string, int> dtm_index;
  for (std::size_t w = 0; w < dtm.vocab.size(); ++w)
    dtm_index.emplace(dtm.vocab[w], static_cast<int>(w));
  std::vector<std::vector<int>> docs_with(dtm.vocab.size());
  for (std::size_t d = 0; d < dtm.n_docs(); ++d)
    for (const auto& [w, c] : dtm.counts[d])
      docs_with[w].push_back(static_cast<int>(d));

  auto co_docs = [&](int a, int b) {
    const auto& da = docs_with[a];
    const auto& db = docs_with[b];
    std::size_t i = 0, j = 0;
    int count = 0;
    while (i < da.size() && j < db.size()) {
      if (da[i] == db[j]) ++count, ++i, ++j;
      else if (da[i] < db[j]) ++i;
      else ++j;
    }
    return count;
  };

  std::vector<double> out;
  for (int topic = 0; topic < model.k; ++topic) {
    // Top-M terms by phi that exist in the dtm vocabulary.
    std::vector<int> order(model.vocab.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return model.phi(topic, a) > model.phi(topic, b);
    });
    std::vector<int> top;  // dtm indices
    for (int w : order) {
      auto it = dtm_index.find(model.vocab[w]);
      if (it != dtm_index.end() && !docs_with[it->second].empty())
        top.push_back(it->second);
      if (static_cast<int>(top.size()) == top_m) break;
    }
    double c = 0.0;
    for (std::size_t m2 = 1; m2 < top.size(); ++m2)
      for (std::size_t l = 0; l < m2; ++l)
        c += std::log((co_docs(top[m2], top[l]) + 1.0) /
                      static_cast<double>(docs_with[top[l]].size()));
    out.push_back(c);
  }
  return out;
}

TopicKDiagnostics select_topic_count(const DocTermMatrix& dtm,
                                     const std::vector<int>& k_range,
                                     const LdaParams& params) {
  if (k_range.empty()) throw Error("select_topic_count: empty k range");
  TopicKDiagnostics diag;
  diag.leave_one_out = dtm.n_docs() < 10;

  // Deterministic 90/10 split by document-index hash of the seed.
  std::vector<std::size_t> train_idx, held_idx;
  if (!diag.leave_one_out) {
    for (std::size_t d = 0; d < dtm.n_docs(); ++d) {
      if (splitmix64(params.seed + d) % 10 == 0) held_idx.push_back(d);
      else train_idx.push_back(d);
    }
    if (held_idx.empty() || train_idx.empty()) diag.leave_one_out = true;
  }

  auto subset = [&](const std::vector<std::size_t>& idx) {
    DocTermMatrix out;
    out.vocab = dtm.vocab;
    for (std::size_t d : idx) {
      out.counts.push_back(dtm.counts[d]);
      out.doc_ids.push_back(dtm.doc_ids[d]);
      for (const auto& [w, c] : dtm.counts[d]) out.total_tokens += c;
    }
    return out;
  };

  for (int k : k_range) {
    TopicKRow row{};
    row.k = k;
    if (diag.leave_one_out) {
      double log_sum = 0.0;
      long long tok_sum = 0;
      for (std::size_t d = 0; d < dtm.n_docs(); ++d) {
        std::vector<std::size_t> rest;
        for (std::size_t o = 0; o < dtm.n_docs(); ++o)
          if (o != d) rest.push_back(o);
        const TopicModel m = lda_fit(subset(rest), k, params);
        const DocTermMatrix one = subset({d});
        if (one.total_tokens == 0) continue;
        const double px = perplexity(m, one, params.seed + d);
        log_sum += std::log(px) * one.total_tokens;
        tok_sum += one.total_tokens;
      }
      if (tok_sum == 0) throw Error("select_topic_count: no held-out tokens");
      row.perplexity = std::exp(log_sum / tok_sum);
      diag.heldout_tokens = tok_sum;
      const TopicModel full = lda_fit(dtm, k, params);
      row.umass_coherence = mean_of(umass_coherence(full, dtm));
    } else {
      const TopicModel m = lda_fit(subset(train_idx), k, params);
      const DocTermMatrix held = subset(held_idx);
      diag.heldout_tokens = held.total_tokens;
      row.perplexity = perplexity(m, held, params.seed);
      row.umass_coherence = mean_of(umass_coherence(m, dtm));
    }
    diag.rows.push_back(row);
  }

  // z-scores across the candidate set; zero-variance columns contribute 0.
  auto zscore = [&](auto get, auto set) {
    std::vector<double> vals;
    for (const auto& r : diag.rows) vals.push_back(get(r));
    const double mu = mean_of(vals);
    double var = 0.0;
    for (double v : vals) var += (v - mu) * (v - mu);
    const double sd = std::sqrt(var / vals.size());
    for (auto& r : diag.rows) set(r, sd > 1e-12 ? (get(r) - mu) / sd : 0.0);
  };
  zscore([](const TopicKRow& r) { return r.perplexity; },
         [](TopicKRow& r, double z) { r.z_perplexity = z; });
  zscore([](const TopicKRow& r) { return r.umass_coherence; },
         [](TopicKRow& r, double z) { r.z_coherence = z; });
  for (auto& r : diag.rows) r.composite = r.z_coherence - r.z_perplexity;

  diag.selected_k = diag.rows.front().k;
  double best = diag.rows.front().composite;
  for (const auto& r : diag.rows) {
    if (r.composite > best + 1e-12) {
      best = r.composite;
      diag.selected_k = r.k;
    }
  }
  return diag;
}

std::vector<std::vector<RankedTerm>> relevance(const TopicModel& model,
                                               double lambda, int top_n) {
  if (lambda < 0.0 || lambda > 1.0)
    throw Error("relevance: lambda must be in [0, 1]");
  std::vector<std::vector<RankedTerm>> out(model.k);
  const int v = static_cast<int>(model.vocab.size());
  for (int topic = 0; topic < model.k; ++topic) {
    std::vector<RankedTerm> terms(v);
    for (int w = 0; w < v; ++w) {
      const double lp = std::log(model.phi(topic, w));
      const double lift = lp - std::log(model.term_marginal[w]);
      terms[w] = {model.vocab[w], w, lambda * lp + (1.0 - lambda) * lift};
    }
    std::stable_sort(terms.begin(), terms.end(),
                     [](const RankedTerm& a, const RankedTerm& b) {
                       return a.weight > b.weight;
                     });
    if (top_n > 0 && top_n < v) terms.resize(top_n);
    out[topic] = std::move(terms);
  }
  return out;
}

Eigen::MatrixXd topic_similarity(const std::vector<TopicModel>& models) {
  // Union vocabulary, lexicographic.
  std::map<std::string, int> uni;
  for (const auto& m : models)
    for (const auto& t : m.vocab) uni.emplace(t, 0);
  int next = 0;
  for (auto& [t, i] : uni) i = next++;

  std::vector<Eigen::VectorXd> rows;
  for (const auto& m : models) {
    for (int topic = 0; topic < m.k; ++topic) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(next);
      for (std::size_t w = 0; w < m.vocab.size(); ++w)
        r[uni[m.vocab[w]]] = m.phi(topic, w);
      rows.push_back(std::move(r));
    }
  }
  const int t = static_cast<int>(rows.size());
  if (t < 2) throw Error("topic_similarity: need at least 2 topics");
  Eigen::MatrixXd S(t, t);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      if (i == j) {
        S(i, j) = 1.0;
        continue;
      }
      const double denom = rows[i].norm() * rows[j].norm();
      S(i, j) = denom > 0.0 ? rows[i].dot(rows[j]) / denom : 0.0;
    }
  }
  return S;
}

}  // namespace taxon::topics
