#include "juris/lexical.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "juris/io.hpp"
#include "juris/text.hpp"

namespace juris {

using nlohmann::json;

TokenizerMode tokenizer_mode_from_string(const std::string& name) {
  if (name == "words" || name == "unicode-words") return TokenizerMode::kUnicodeWords;
  if (name == "cjk" || name == "cjk-bigram-hybrid") return TokenizerMode::kCjkBigramHybrid;
  throw DataError("unknown tokenizer mode \"" + name + "\" (expected words|cjk)");
}

std::string to_string(TokenizerMode mode) {
  return mode == TokenizerMode::kUnicodeWords ? "unicode-words" : "cjk-bigram-hybrid";
}

namespace {

bool is_word_cp(uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  }
  if (is_unicode_space(cp)) return false;
  // General punctuation, CJK symbols/punctuation, fullwidth punctuation.
  if (cp >= 0x2000 && cp <= 0x206F) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
      (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65)) {
    return false;
  }
  return true;
}

void flush_run(std::vector<std::string>& out, std::vector<uint32_t>& run, bool cjk_run,
               const TokenizerConfig& cfg) {
  if (run.empty()) return;
  if (cjk_run && cfg.mode == TokenizerMode::kCjkBigramHybrid) {
    if (run.size() == 1) {
      std::string tok;
      utf8_append(tok, run[0]);
      out.push_back(std::move(tok));
    } else {
      for (size_t i = 0; i + 1 < run.size(); ++i) {
        std::string tok;
        utf8_append(tok, run[i]);
        utf8_append(tok, run[i + 1]);
        out.push_back(std::move(tok));
      }
    }
  } else {
    std::string tok;
    for (uint32_t cp : run) utf8_append(tok, cp);
    if (cfg.lowercase) tok = to_lower_ascii(tok);
    out.push_back(std::move(tok));
  }
  run.clear();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg) {
  std::vector<std::string> out;
  std::vector<uint32_t> run;
  bool run_is_cjk = false;
  const bool split_cjk = cfg.mode == TokenizerMode::kCjkBigramHybrid;

  size_t pos = 0;
  while (pos < text.size()) {
    uint32_t cp = utf8_decode(text, pos);
    if (!is_word_cp(cp)) {
      flush_run(out, run, run_is_cjk, cfg);
      continue;
    }
    bool cp_cjk = split_cjk && is_cjk(cp);
    if (!run.empty() && cp_cjk != run_is_cjk) flush_run(out, run, run_is_cjk, cfg);
    run_is_cjk = cp_cjk;
    run.push_back(cp);
  }
  flush_run(out, run, run_is_cjk, cfg);
  return out;
}

InvertedIndex build_index(const std::vector<Document>& docs, const TokenizerConfig& cfg,
                          double k1, double b) {
  if (docs.empty()) throw DataError("cannot build index over an empty corpus");
  InvertedIndex index;
  index.k1_ = k1;
  index.b_ = b;
  index.tokenizer_ = cfg;

  // term -> doc id -> tf; std::map keeps postings canonical so the index is
  // identical for any permutation of the input corpus.
  std::map<std::string, std::map<std::string, int>> counts;
  long long total_len = 0;
  for (const auto& doc : docs) {
    if (index.doc_lengths_.count(doc.id)) {
      throw DataError("duplicate document id \"" + doc.id + "\" at index build");
    }
    auto tokens = tokenize(doc.text, cfg);
    index.doc_lengths_[doc.id] = static_cast<int>(tokens.size());
    total_len += static_cast<long long>(tokens.size());
    for (const auto& t : tokens) counts[t][doc.id] += 1;
  }
  index.num_docs_ = static_cast<int>(docs.size());
  index.avg_doc_length_ = static_cast<double>(total_len) / index.num_docs_;
  for (auto& [term, by_doc] : counts) {
    auto& plist = index.postings_[term];
    plist.reserve(by_doc.size());
    for (auto& [doc_id, tf] : by_doc) plist.push_back({doc_id, tf});
  }
  return index;
}

double InvertedIndex::idf(const std::string& term) const {
  auto it = postings_.find(term);
  const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
  return std::log(1.0 + (num_docs_ - df + 0.5) / (df + 0.5));
}

double bm25_score(const InvertedIndex& index, const std::vector<std::string>& query_terms,
                  const std::string& doc_id) {
  auto len_it = index.doc_lengths_.find(doc_id);
  if (len_it == index.doc_lengths_.end()) {
    throw DataError("bm25_score: unknown document id \"" + doc_id + "\"");
  }
  const double dl = static_cast<double>(len_it->second);
  const double avgdl = index.avg_doc_length_;
  const double len_norm = avgdl > 0.0 ? dl / avgdl : 0.0;
  const double k1 = index.k1_;
  const double b = index.b_;

  auto unique_terms = sorted_unique(query_terms);
  double score = 0.0;
  for (const auto& term : unique_terms) {
    auto it = index.postings_.find(term);
    if (it == index.postings_.end()) continue;
    const auto& plist = it->second;
    auto pit = std::lower_bound(plist.begin(), plist.end(), doc_id,
                                [](const Posting& p, const std::string& id) {
                                  return p.doc_id < id;
                                });
    if (pit == plist.end() || pit->doc_id != doc_id) continue;
    const double tf = static_cast<double>(pit->tf);
    const double denom = tf + k1 * (1.0 - b + b * len_norm);
    score += index.idf(term) * tf * (k1 + 1.0) / denom;
  }
  return score;
}

std::vector<std::pair<std::string, double>> InvertedIndex::top_k(
    const std::vector<std::string>& query_terms, size_t k) const {
  auto unique_terms = sorted_unique(query_terms);
  std::map<std::string, double> acc;
  for (const auto& term : unique_terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double term_idf = idf(term);
    for (const auto& posting : it->second) {
      const double dl = static_cast<double>(doc_lengths_.at(posting.doc_id));
      const double len_norm = avg_doc_length_ > 0.0 ? dl / avg_doc_length_ : 0.0;
      const double tf = static_cast<double>(posting.tf);
      const double denom = tf + k1_ * (1.0 - b_ + b_ * len_norm);
      acc[posting.doc_id] += term_idf * tf * (k1_ + 1.0) / denom;
    }
  }
  std::vector<std::pair<std::string, double>> scored(acc.begin(), acc.end());
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

std::map<std::string, double> normalize_per_query(const std::map<std::string, double>& scores) {
  if (scores.empty()) throw DataError("normalize_per_query: empty score map");
  double max_score = 0.0;
  for (const auto& [doc_id, score] : scores) max_score = std::max(max_score, score);
  std::map<std::string, double> out;
  for (const auto& [doc_id, score] : scores) {
    out[doc_id] = max_score > 0.0 ? score / max_score : 0.0;
  }
  return out;
}

std::string InvertedIndex::to_json_string() const {
  json j;
  j["k1"] = k1_;
  j["b"] = b_;
  j["tokenizer"] = {{"mode", to_string(tokenizer_.mode)}, {"lowercase", tokenizer_.lowercase}};
  j["num_docs"] = num_docs_;
  j["avg_doc_length"] = avg_doc_length_;
  j["doc_lengths"] = doc_lengths_;
  json postings = json::object();
  for (const auto& [term, plist] : postings_) {
    json arr = json::array();
    for (const auto& p : plist) arr.push_back({p.doc_id, p.tf});
    postings[term] = std::move(arr);
  }
  j["postings"] = std::move(postings);
  return j.dump();
}

InvertedIndex InvertedIndex::from_json_string(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("malformed index JSON");
  InvertedIndex index;
  index.k1_ = j.at("k1").get<double>();
  index.b_ = j.at("b").get<double>();
  index.tokenizer_.mode = tokenizer_mode_from_string(j.at("tokenizer").at("mode").get<std::string>());
  index.tokenizer_.lowercase = j.at("tokenizer").at("lowercase").get<bool>();
  index.num_docs_ = j.at("num_docs").get<int>();
  index.avg_doc_length_ = j.at("avg_doc_length").get<double>();
  index.doc_lengths_ = j.at("doc_lengths").get<std::map<std::string, int>>();
  for (const auto& [term, arr] : j.at("postings").items()) {
    auto& plist = index.postings_[term];
    for (const auto& entry : arr) {
      plist.push_back({entry.at(0).get<std::string>(), entry.at(1).get<int>()});
    }
  }
  if (static_cast<size_t>(index.num_docs_) != index.doc_lengths_.size()) {
    throw DataError("index JSON inconsistent: num_docs != |doc_lengths|");
  }
  return index;
}

void InvertedIndex::save(const std::string& path) const {
  write_file_atomic(path, to_json_string());
}

InvertedIndex InvertedIndex::load(const std::string& path) {
  return from_json_string(read_file(path));
}

}  // namespace juris
