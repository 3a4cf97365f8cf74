#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "juris/corpus.hpp"

namespace juris {

enum class TokenizerMode { kUnicodeWords, kCjkBigramHybrid };

struct TokenizerConfig {
  TokenizerMode mode = TokenizerMode::kUnicodeWords;
  bool lowercase = true;

  bool operator==(const TokenizerConfig&) const = default;
};

TokenizerMode tokenizer_mode_from_string(const std::string& name);
std::string to_string(TokenizerMode mode);

// Deterministic token stream. kUnicodeWords emits maximal runs of word
// codepoints. kCjkBigramHybrid additionally breaks Han runs into
// overlapping character bigrams (a length-1 run emits the character).
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg);

struct Posting {
  std::string doc_id;
  int tf = 0;

  bool operator==(const Posting&) const = default;
};

// Okapi BM25 index. Immutable after build; scoring is pure.
class InvertedIndex {
 public:
  double k1() const { return k1_; }
  double b() const { return b_; }
  int num_docs() const { return num_docs_; }
  double avg_doc_length() const { return avg_doc_length_; }
  const TokenizerConfig& tokenizer() const { return tokenizer_; }
  const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
  const std::map<std::string, int>& doc_lengths() const { return doc_lengths_; }
  bool contains(const std::string& doc_id) const { return doc_lengths_.count(doc_id) > 0; }

  // idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)); never negative.
  double idf(const std::string& term) const;

  // Score every document containing at least one query term, descending,
  // ties broken by ascending doc id. Used to build fallback pools.
  std::vector<std::pair<std::string, double>> top_k(
      const std::vector<std::string>& query_terms, size_t k) const;

  std::string to_json_string() const;
  static InvertedIndex from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static InvertedIndex load(const std::string& path);

  bool operator==(const InvertedIndex&) const = default;

 private:
  friend InvertedIndex build_index(const std::vector<Document>&, const TokenizerConfig&,
                                   double, double);
  friend double bm25_score(const InvertedIndex&, const std::vector<std::string>&,
                           const std::string&);

  std::map<std::string, std::vector<Posting>> postings_;
  std::map<std::string, int> doc_lengths_;
  double avg_doc_length_ = 0.0;
  int num_docs_ = 0;
  double k1_ = 1.2;
  double b_ = 0.75;
  TokenizerConfig tokenizer_;
};

InvertedIndex build_index(const std::vector<Document>& docs, const TokenizerConfig& cfg,
                          double k1 = 1.2, double b = 0.75);

// Okapi BM25 with query terms deduplicated (bag-of-unique-terms, query
// tf = 1). doc_id must exist in the index.
double bm25_score(const InvertedIndex& index, const std::vector<std::string>& query_terms,
                  const std::string& doc_id);

// v5: divide by the pool max. An all-zero pool stays all-zero rather than
// becoming NaN. Empty input is an error.
std::map<std::string, double> normalize_per_query(const std::map<std::string, double>& scores);

}  // namespace juris
