#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace juris {

// A candidate case. charges/elements are the silver-standard structured
// labels; both are kept sorted and duplicate-free. elements may be empty
// for documents that have not been distilled yet.
struct Document {
  std::string id;
  std::string text;
  std::vector<std::string> charges;
  std::vector<std::string> elements;

  bool operator==(const Document&) const = default;
};

// A query case with its candidate pool (order preserved from the input file;
// an empty pool means "fill from retrieval at ranking time").
struct Query {
  std::string id;
  std::string text;
  std::vector<std::string> pool;

  bool operator==(const Query&) const = default;
};

// Graded relevance judgments, binarized by positive_threshold.
class QrelSet {
 public:
  QrelSet() = default;
  QrelSet(std::map<std::pair<std::string, std::string>, int> entries,
          int positive_threshold);

  bool is_positive(const std::string& qid, const std::string& doc_id) const;
  // 0 when the pair is unjudged.
  int label(const std::string& qid, const std::string& doc_id) const;
  const std::set<std::string>& positives(const std::string& qid) const;
  std::map<std::string, int> graded(const std::string& qid) const;

  const std::map<std::pair<std::string, std::string>, int>& entries() const {
    return entries_;
  }
  int positive_threshold() const { return positive_threshold_; }
  std::vector<std::string> query_ids() const;

 private:
  std::map<std::pair<std::string, std::string>, int> entries_;
  std::map<std::string, std::set<std::string>> positives_by_query_;
  int positive_threshold_ = 1;
};

std::vector<Document> load_corpus(const std::string& path);
std::vector<Query> load_queries(const std::string& path);
QrelSet load_qrels(const std::string& path, int positive_threshold);

void save_corpus(const std::vector<Document>& docs, const std::string& path);
void save_queries(const std::vector<Query>& queries, const std::string& path);

std::string document_to_json_line(const Document& doc);

// id -> document view used by the ranking pipeline.
std::map<std::string, const Document*> index_by_id(const std::vector<Document>& docs);

// Sort + dedup in place; the canonical representation for label sets.
std::vector<std::string> sorted_unique(std::vector<std::string> values);

}  // namespace juris
