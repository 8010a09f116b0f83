#include "taxon/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taxon/common.hpp"
#include "taxon/io.hpp"

namespace taxon::corpus {

std::string doc_type_name(DocType t) {
  switch (t) {
    case DocType::journal: return "journal";
    case DocType::conference: return "conference";
    case DocType::preprint: return "preprint";
  }
  throw Error("doc_type_name: bad enum");
}

DocType parse_doc_type(const std::string& s) {
  if (s == "journal") return DocType::journal;
  if (s == "conference") return DocType::conference;
  if (s == "preprint") return DocType::preprint;
  throw Error("unknown document type: " + s);
}

std::string Document::embed_text() const {
  if (title.empty() && abstract_.empty())
    throw Error("document " + id + " has neither title nor abstract");
  if (abstract_.empty()) return title;
  if (title.empty()) return abstract_;
  return title + " " + abstract_;
}

bool Corpus::has_complete_expert_labels() const {
  return !documents.empty() &&
         std::all_of(documents.begin(), documents.end(), [](const Document& d) {
           return d.expert_label.has_value();
         });
}

std::vector<std::string> Corpus::expert_labels_or_throw() const {
  std::vector<std::string> out;
  out.reserve(documents.size());
  for (const auto& d : documents) {
    if (!d.expert_label)
      throw Error("document " + d.id + " lacks an expert label");
    out.push_back(*d.expert_label);
  }
  return out;
}

namespace {

const std::set<std::string> kExpertLabels = {"social_minds", "societies",
                                             "human_interactions"};

Document parse_record(const nlohmann::json& j, int line_no) {
  auto fail = [line_no](const std::string& msg) -> Error {
    return Error("line " + std::to_string(line_no) + ": " + msg);
  };
  Document d;
  if (!j.contains("id") || !j["id"].is_string() ||
      j["id"].get<std::string>().empty())
    throw fail("missing or empty id");
  d.id = j["id"].get<std::string>();
  if (j.contains("title") && !j["title"].is_null())
    d.title = j["title"].get<std::string>();
  if (j.contains("abstract") && !j["abstract"].is_null())
    d.abstract_ = j["abstract"].get<std::string>();
  if (j.contains("year") && !j["year"].is_null()) {
    if (!j["year"].is_number_integer()) throw fail("year must be an integer");
    const int y = j["year"].get<int>();
    if (y < 1990 || y > 2100)
      throw fail("year " + std::to_string(y) + " outside [1990, 2100]");
    d.year = y;
  }
  if (j.contains("venue") && !j["venue"].is_null())
    d.venue = j["venue"].get<std::string>();
  if (j.contains("type") && !j["type"].is_null())
    d.doc_type = parse_doc_type(j["type"].get<std::string>());
  if (j.contains("expert_label") && !j["expert_label"].is_null()) {
    const std::string l = j["expert_label"].get<std::string>();
    if (!kExpertLabels.count(l)) throw fail("unknown expert_label: " + l);
    d.expert_label = l;
  }
  return d;
}

}  // namespace

Eigen::MatrixXd read_embeddings_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("empty embedding CSV");
  // Header id,dim0..dimD
  int dims = -1;  // count of dim columns
  {
    std::stringstream ss(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ss, cell, ',')) ++cols;
    dims = cols - 1;
  }
  if (dims < 1) throw Error("embedding CSV must have id plus dim columns");
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // id column, unused for alignment
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error("embedding CSV line " + std::to_string(line_no) +
                    ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != dims)
      throw Error("embedding CSV line " + std::to_string(line_no) +
                  ": expected " + std::to_string(dims) + " values");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(rows.size(), dims);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < dims; ++j) m(i, j) = rows[i][j];
  return m;
}

Corpus load_corpus(const std::filesystem::path& meta_path,
                   const std::optional<std::filesystem::path>& embeddings_path) {
  std::ifstream in(meta_path);
  if (!in) throw Error("cannot open: " + meta_path.string());
  Corpus c;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
    Document d = parse_record(j, line_no);
    if (!seen.insert(d.id).second)
      throw Error("line " + std::to_string(line_no) + ": duplicate id " + d.id);
    c.documents.push_back(std::move(d));
  }

  if (embeddings_path) {
    EmbeddingMatrix e;
    e.rows = io::has_magic(*embeddings_path, "EMB1")
                 ? io::read_matrix(*embeddings_path, "EMB1")
                 : read_embeddings_csv(*embeddings_path);
    if (static_cast<std::size_t>(e.rows.rows()) != c.documents.size())
      throw Error("embedding rows (" + std::to_string(e.rows.rows()) +
                  ") do not match record count (" +
                  std::to_string(c.documents.size()) + ")");
    if (!e.rows.allFinite())
      throw Error("embedding file contains non-finite values");
    e.normalized = false;
    c.embeddings = std::move(e);
  }
  return c;
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& X,
                               const std::vector<std::string>& ids) {
  EmbeddingMatrix out = X;
  for (Eigen::Index i = 0; i < out.rows.rows(); ++i) {
    const double nm = out.rows.row(i).norm();
    if (nm <= 0.0) {
      const std::string who = static_cast<std::size_t>(i) < ids.size()
                                  ? ids[i]
                                  : "row " + std::to_string(i);
      throw Error("cannot normalize zero embedding for " + who);
    }
    out.rows.row(i) /= nm;
  }
  out.normalized = true;
  return out;
}

DescriptiveStats summarize_corpus(const Corpus& c) {
  DescriptiveStats s;
  std::map<std::string, std::size_t> venue_counts;
  for (const auto& d : c.documents) {
    if (d.doc_type) ++s.counts_by_type[doc_type_name(*d.doc_type)];
    if (d.year) ++s.counts_by_year[*d.year];
    if (!d.venue.empty()) ++venue_counts[d.venue];
  }
  std::vector<std::pair<std::string, std::size_t>> venues(venue_counts.begin(),
                                                          venue_counts.end());
  std::sort(venues.begin(), venues.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (venues.size() > 20) venues.resize(20);
  s.top_venues = std::move(venues);
  return s;
}

std::string stats_to_json(const DescriptiveStats& s) {
  nlohmann::ordered_json j;
  j["counts_by_type"] = nlohmann::ordered_json::object();
  for (const auto& [t, n] : s.counts_by_type) j["counts_by_type"][t] = n;
  j["counts_by_year"] = nlohmann::ordered_json::object();
  for (const auto& [y, n] : s.counts_by_year)
    j["counts_by_year"][std::to_string(y)] = n;
  auto venues = nlohmann::ordered_json::array();
  for (const auto& [v, n] : s.top_venues)
    venues.push_back({{"venue", v}, {"count", n}});
  j["top_venues"] = std::move(venues);
  return j.dump(2) + "\n";
}

}  // namespace taxon::corpus
