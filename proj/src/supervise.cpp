#include "taxon/supervise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taxon/agreement.hpp"
#include "taxon/common.hpp"

namespace taxon::supervise {

namespace {

// Numerically stable log(1 + exp(x)).
double log1pexp(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds,
                                  std::uint64_t seed) {
  if (folds < 2) throw Error("stratified_folds: folds must be >= 2");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i]].push_back(i);

  std::vector<int> fold(labels.size(), -1);
  std::size_t class_index = 0;
  for (auto& [cls, idx] : by_class) {
    if (static_cast<int>(idx.size()) < folds)
      throw ValidationError("stratified_folds: class " + std::to_string(cls) +
                  " has fewer members than folds");
    Rng rng(seed + class_index++);
    rng.shuffle(idx);
    for (std::size_t p = 0; p < idx.size(); ++p)
      fold[idx[p]] = static_cast<int>(p % folds);
  }
  return fold;
}

std::vector<int> LinearClassifier::predict(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd scores =
      (X * weights.transpose()).rowwise() + bias.transpose();
  std::vector<int> out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);  // ties resolve to the lowest index
    out[i] = classes[best];
  }
  return out;
}

LinearClassifier train_classifier(const Eigen::MatrixXd& X,
                                  const std::vector<int>& y, double reg) {
  if (!X.allFinite()) throw Error("train_classifier: non-finite features");
  if (static_cast<Eigen::Index>(y.size()) != X.rows())
    throw Error("train_classifier: labels/rows mismatch");
  std::set<int> classes(y.begin(), y.end());
  if (classes.size() < 2) throw ValidationError("train_classifier: need >= 2 classes");

  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  LinearClassifier clf;
  clf.classes.assign(classes.begin(), classes.end());
  clf.weights = Eigen::MatrixXd::Zero(clf.classes.size(), d);
  clf.bias = Eigen::VectorXd::Zero(clf.classes.size());
  clf.reg_strength = reg;

  for (std::size_t c = 0; c < clf.classes.size(); ++c) {
    Eigen::VectorXd target(n);  // +-1 encoding
    for (Eigen::Index i = 0; i < n; ++i)
      target[i] = y[i] == clf.classes[c] ? 1.0 : -1.0;

    // Parameters: [w; b], both L2-penalized.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    auto objective = [&](const Eigen::VectorXd& wv, double bv) {
      const Eigen::VectorXd margins =
          -(target.array() * ((X * wv).array() + bv)).matrix();
      double loss = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) loss += log1pexp(margins[i]);
      return loss + 0.5 * reg * (wv.squaredNorm() + bv * bv);
    };

    double step = 1.0;
    for (int epoch = 0; epoch < 1000; ++epoch) {
      const Eigen::VectorXd scores = (X * w).array() + b;
      Eigen::VectorXd coef(n);
      for (Eigen::Index i = 0; i < n; ++i)
        coef[i] = -target[i] * sigmoid(-target[i] * scores[i]);
      Eigen::VectorXd gw = X.transpose() * coef + reg * w;
      double gb = coef.sum() + reg * b;
      const double gnorm = std::sqrt(gw.squaredNorm() + gb * gb);
      if (gnorm <= 1e-6) break;

      // Backtracking (Armijo) from the last accepted step.
      const double f0 = objective(w, b);
      double t = std::min(step * 2.0, 1e4);
      while (t > 1e-16) {
        const Eigen::VectorXd w_try = w - t * gw;
        const double b_try = b - t * gb;
        if (objective(w_try, b_try) <= f0 - 0.5 * t * gnorm * gnorm) {
          w = w_try;
          b = b_try;
          step = t;
          break;
        }
        t *= 0.5;
      }
      if (t <= 1e-16) break;  // no descent step found
    }
    clf.weights.row(c) = w.transpose();
    clf.bias[c] = b;
  }
  return clf;
}

double macro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size())
    throw Error("macro_f1: length mismatch");
  if (y_true.empty()) throw Error("macro_f1: empty input");
  std::set<int> classes(y_true.begin(), y_true.end());
  double sum = 0.0;
  for (int c : classes) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      const bool t = y_true[i] == c, p = y_pred[i] == c;
      tp += t && p;
      fp += !t && p;
      fn += t && !p;
    }
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    sum += prec + rec > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
  }
  return sum / static_cast<double>(classes.size());
}

AlignmentReport evaluate_alignment(const Eigen::MatrixXd& X,
                                   const std::vector<std::string>& expert_labels,
                                   const std::vector<int>& machine_labels,
                                   const AlignmentConfig& cfg) {
  if (static_cast<Eigen::Index>(expert_labels.size()) != X.rows() ||
      expert_labels.size() != machine_labels.size())
    throw Error("evaluate_alignment: size mismatch");
  for (const auto& l : expert_labels)
    if (l.empty()) throw Error("evaluate_alignment: incomplete expert labels");

  AlignmentReport rep;
  rep.config = cfg;
  std::map<std::string, int> name_to_id;
  for (const auto& l : expert_labels) name_to_id.emplace(l, 0);
  int next = 0;
  for (auto& [name, id] : name_to_id) {
    id = next++;
    rep.class_names.push_back(name);
  }
  std::vector<int> y;
  y.reserve(expert_labels.size());
  for (const auto& l : expert_labels) y.push_back(name_to_id[l]);

  const std::vector<int> fold = stratified_folds(y, cfg.folds, cfg.seed);
  const int m = next;
  rep.confusion = Eigen::MatrixXi::Zero(m, m);
  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < fold.size(); ++i)
      (fold[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));

    int overlap = 0;
    {
      std::set<Eigen::Index> tr(train.begin(), train.end());
      for (Eigen::Index i : test) overlap += tr.count(i);
    }
    rep.fold_overlap.push_back(overlap);

    Eigen::MatrixXd Xtr(train.size(), X.cols()), Xte(test.size(), X.cols());
    std::vector<int> ytr, yte;
    for (std::size_t i = 0; i < train.size(); ++i) {
      Xtr.row(i) = X.row(train[i]);
      ytr.push_back(y[train[i]]);
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      Xte.row(i) = X.row(test[i]);
      yte.push_back(y[test[i]]);
    }
    const LinearClassifier clf = train_classifier(Xtr, ytr, cfg.reg);
    const std::vector<int> pred = clf.predict(Xte);
    rep.fold_scores.push_back(macro_f1(yte, pred));
    for (std::size_t i = 0; i < yte.size(); ++i)
      rep.confusion(yte[i], pred[i]) += 1;
  }

  rep.macro_f1_mean =
      std::accumulate(rep.fold_scores.begin(), rep.fold_scores.end(), 0.0) /
      rep.fold_scores.size();
  double var = 0.0;
  for (double s : rep.fold_scores)
    var += (s - rep.macro_f1_mean) * (s - rep.macro_f1_mean);
  rep.macro_f1_sd = rep.fold_scores.size() > 1
                        ? std::sqrt(var / (rep.fold_scores.size() - 1))
                        : 0.0;

  rep.nmi = agreement::mutual_information(machine_labels, y,
                                          agreement::MiMode::nmi);
  rep.ari = agreement::adjusted_rand(machine_labels, y);
  return rep;
}

std::string alignment_to_json(const AlignmentReport& r,
                              const std::string& nmi_variant) {
  nlohmann::ordered_json j;
  j["macro_f1_mean"] = r.macro_f1_mean;
  j["macro_f1_sd"] = r.macro_f1_sd;
  j["fold_scores"] = r.fold_scores;
  j["nmi"] = r.nmi;
  j["nmi_normalization"] = nmi_variant;
  j["ari"] = r.ari;
  j["classes"] = r.class_names;
  auto conf = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < r.confusion.cols(); ++c)
      row.push_back(r.confusion(i, c));
    conf.push_back(std::move(row));
  }
  j["confusion"] = std::move(conf);
  j["fold_overlap"] = r.fold_overlap;
  j["config"] = {{"folds", r.config.folds},
                 {"reg", r.config.reg},
                 {"seed", r.config.seed},
                 {"feature_scaling", "none"}};
  return j.dump(2) + "\n";
}

std::string confusion_to_csv(const AlignmentReport& r) {
  std::ostringstream os;
  os << "true\\pred";
  for (const auto& c : r.class_names) os << ',' << c;
  os << '\n';
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    os << r.class_names[i];
    for (Eigen::Index c = 0; c < r.confusion.cols(); ++c)
      os << ',' << r.confusion(i, c);
    os << '\n';
  }
  return os.str();
}

}  // namespace taxon::supervise
