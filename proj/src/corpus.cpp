#include "juris/corpus.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "juris/io.hpp"
#include "juris/text.hpp"

namespace juris {

using nlohmann::json;

namespace {

std::string require_string(const json& j, const char* key,
                           const std::string& path, size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw DataError(path, line_no,
                    std::string("missing or non-string field \"") + key + "\"");
  }
  return it->get<std::string>();
}

std::vector<std::string> optional_string_array(const json& j, const char* key,
                                               const std::string& path,
                                               size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_array()) {
    throw DataError(path, line_no,
                    std::string("field \"") + key + "\" must be an array");
  }
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw DataError(path, line_no,
                      std::string("field \"") + key + "\" must contain strings");
    }
    out.push_back(canonical_term(v.get<std::string>()));
  }
  return out;
}

}  // namespace

std::vector<std::string> sorted_unique(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

std::vector<Document> load_corpus(const std::string& path) {
  std::vector<Document> docs;
  std::set<std::string> seen_ids;
  for_each_line(path, [&](size_t line_no, const std::string& line) {
    json j = parse_json_line(path, line_no, line);
    Document doc;
    doc.id = require_string(j, "id", path, line_no);
    if (doc.id.empty()) throw DataError(path, line_no, "empty document id");
    if (!seen_ids.insert(doc.id).second) {
      throw DataError(path, line_no, "duplicate document id \"" + doc.id + "\"");
    }
    doc.text = require_string(j, "text", path, line_no);
    doc.charges = sorted_unique(optional_string_array(j, "charges", path, line_no));
    doc.elements = sorted_unique(optional_string_array(j, "elements", path, line_no));
    docs.push_back(std::move(doc));
  });
  return docs;
}

std::vector<Query> load_queries(const std::string& path) {
  std::vector<Query> queries;
  std::set<std::string> seen_ids;
  for_each_line(path, [&](size_t line_no, const std::string& line) {
    json j = parse_json_line(path, line_no, line);
    Query q;
    q.id = require_string(j, "id", path, line_no);
    if (q.id.empty()) throw DataError(path, line_no, "empty query id");
    if (!seen_ids.insert(q.id).second) {
      throw DataError(path, line_no, "duplicate query id \"" + q.id + "\"");
    }
    q.text = require_string(j, "text", path, line_no);
    auto it = j.find("pool");
    if (it != j.end() && !it->is_null()) {
      if (!it->is_array()) throw DataError(path, line_no, "field \"pool\" must be an array");
      std::set<std::string> seen_pool;
      for (const auto& v : *it) {
        if (!v.is_string()) throw DataError(path, line_no, "field \"pool\" must contain strings");
        std::string doc_id = v.get<std::string>();
        if (!seen_pool.insert(doc_id).second) {
          throw DataError(path, line_no,
                          "duplicate candidate \"" + doc_id + "\" in pool of query \"" + q.id + "\"");
        }
        q.pool.push_back(std::move(doc_id));
      }
    }
    queries.push_back(std::move(q));
  });
  return queries;
}

QrelSet load_qrels(const std::string& path, int positive_threshold) {
  std::map<std::pair<std::string, std::string>, int> entries;
  for_each_line(path, [&](size_t line_no, const std::string& line) {
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw DataError(path, line_no, "expected qid<TAB>docid<TAB>label");
    }
    int label = 0;
    size_t consumed = 0;
    try {
      label = std::stoi(fields[2], &consumed);
    } catch (const std::exception&) {
      throw DataError(path, line_no, "non-integer label \"" + fields[2] + "\"");
    }
    if (consumed != fields[2].size()) {
      throw DataError(path, line_no, "non-integer label \"" + fields[2] + "\"");
    }
    if (label < 0) throw DataError(path, line_no, "negative relevance label");
    auto key = std::make_pair(fields[0], fields[1]);
    if (!entries.emplace(key, label).second) {
      throw DataError(path, line_no,
                      "duplicate judgment for (" + fields[0] + ", " + fields[1] + ")");
    }
  });
  return QrelSet(std::move(entries), positive_threshold);
}

QrelSet::QrelSet(std::map<std::pair<std::string, std::string>, int> entries,
                 int positive_threshold)
    : entries_(std::move(entries)), positive_threshold_(positive_threshold) {
  for (const auto& [key, label] : entries_) {
    if (label >= positive_threshold_) positives_by_query_[key.first].insert(key.second);
  }
}

bool QrelSet::is_positive(const std::string& qid, const std::string& doc_id) const {
  return label(qid, doc_id) >= positive_threshold_;
}

int QrelSet::label(const std::string& qid, const std::string& doc_id) const {
  auto it = entries_.find({qid, doc_id});
  return it == entries_.end() ? 0 : it->second;
}

const std::set<std::string>& QrelSet::positives(const std::string& qid) const {
  static const std::set<std::string> kEmpty;
  auto it = positives_by_query_.find(qid);
  return it == positives_by_query_.end() ? kEmpty : it->second;
}

std::map<std::string, int> QrelSet::graded(const std::string& qid) const {
  std::map<std::string, int> out;
  for (auto it = entries_.lower_bound({qid, ""});
       it != entries_.end() && it->first.first == qid; ++it) {
    out[it->first.second] = it->second;
  }
  return out;
}

std::vector<std::string> QrelSet::query_ids() const {
  std::vector<std::string> out;
  for (const auto& [key, label] : entries_) {
    (void)label;
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

std::string document_to_json_line(const Document& doc) {
  json j;
  j["id"] = doc.id;
  j["text"] = doc.text;
  j["charges"] = doc.charges;
  j["elements"] = doc.elements;
  return j.dump();
}

void save_corpus(const std::vector<Document>& docs, const std::string& path) {
  std::ostringstream out;
  for (const auto& doc : docs) out << document_to_json_line(doc) << "\n";
  write_file_atomic(path, out.str());
}

void save_queries(const std::vector<Query>& queries, const std::string& path) {
  std::ostringstream out;
  for (const auto& q : queries) {
    json j;
    j["id"] = q.id;
    j["text"] = q.text;
    j["pool"] = q.pool;
    out << j.dump() << "\n";
  }
  write_file_atomic(path, out.str());
}

std::map<std::string, const Document*> index_by_id(const std::vector<Document>& docs) {
  std::map<std::string, const Document*> out;
  for (const auto& doc : docs) out[doc.id] = &doc;
  return out;
}

}  // namespace juris
