#include "juris/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "juris/corpus.hpp"
#include "juris/distill.hpp"
#include "juris/eval.hpp"
#include "juris/experiments.hpp"
#include "juris/explain.hpp"
#include "juris/features.hpp"
#include "juris/inference.hpp"
#include "juris/io.hpp"
#include "juris/lexical.hpp"
#include "juris/pipeline.hpp"
#include "juris/scorer.hpp"
#include "juris/taxonomy.hpp"

namespace juris {

namespace {

using nlohmann::json;

// Settings resolution order: explicit flag > config file (per-command
// section, then top level) > built-in default. The env var JURIS_SEED is a
// last fallback for --seed only.
struct ConfigView {
  json root = json::object();
  std::string section;

  const json* find(const std::string& key) const {
    if (!root.is_object()) return nullptr;
    if (auto sit = root.find(section); sit != root.end() && sit->is_object()) {
      if (auto kit = sit->find(key); kit != sit->end()) return &*kit;
    }
    if (auto kit = root.find(key); kit != root.end() && !kit->is_object()) return &*kit;
    return nullptr;
  }

  template <typename T>
  void resolve(const CLI::Option* opt, const std::string& key, T& value) const {
    if (opt != nullptr && opt->count() > 0) return;
    const json* v = find(key);
    if (v == nullptr) return;
    try {
      value = v->get<T>();
    } catch (const json::exception&) {
      throw DataError("config: bad type for key \"" + key + "\"");
    }
  }
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DataError("config file is not a JSON object: " + path);
  }
  return j;
}

uint64_t resolve_seed(const CLI::Option* opt, uint64_t flag_value, const ConfigView& cfg) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  if (const json* v = cfg.find("seed"); v != nullptr) return v->get<uint64_t>();
  if (const char* env = std::getenv("JURIS_SEED"); env != nullptr && *env != '\0') {
    return std::strtoull(env, nullptr, 10);
  }
  return flag_value;
}

std::vector<double> parse_ratio_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw DataError("empty ratio list");
  return out;
}

void require_filename_safe(const std::string& doc_id) {
  for (char c : doc_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) {
      throw DataError("document id \"" + doc_id +
                      "\" is not filename-safe (allowed: [A-Za-z0-9._-])");
    }
  }
}

InvertedIndex load_or_build_index(const std::string& index_path,
                                  const std::vector<Document>& docs, double k1, double b,
                                  const TokenizerConfig& tok) {
  if (!index_path.empty()) return InvertedIndex::load(index_path);
  return build_index(docs, tok, k1, b);
}

json report_summary_json(const MetricsReport& report) {
  json j = report.to_json();
  return j;
}

void print_mean_metrics(const std::string& tag, const QueryMetrics& m) {
  std::cout << tag << "  MAP=" << format_fixed(m.ap, 4) << "  P@3=" << format_fixed(m.p3, 4)
            << "  R@3=" << format_fixed(m.r3, 4) << "  R@5=" << format_fixed(m.r5, 4)
            << "  Hits@3=" << format_fixed(m.hits3, 4)
            << "  Hits@5=" << format_fixed(m.hits5, 4)
            << "  MRR@5=" << format_fixed(m.mrr5, 4) << "\n";
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"juris: legal-case retrieval with latent-indicator inference and "
               "multi-view evidence fusion"};
  app.require_subcommand(1);
  app.fallthrough(true);

  std::string config_path;
  uint64_t seed = 42;
  int threads = 1;
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  auto* seed_opt = app.add_option("--seed", seed, "global RNG seed (env JURIS_SEED fallback)");
  auto* threads_opt = app.add_option("--threads", threads, "worker cap for per-query stages");

  int exit_code = 0;

  // ---- index ----
  auto* cmd_index = app.add_subcommand("index", "build and save the BM25 inverted index");
  struct {
    std::string corpus, out, tokenizer = "words";
    double k1 = 1.2, b = 0.75;
    bool lowercase = true;
  } ix;
  auto* ix_corpus = cmd_index->add_option("--corpus", ix.corpus, "corpus.jsonl");
  auto* ix_out = cmd_index->add_option("--out", ix.out, "output index path");
  auto* ix_k1 = cmd_index->add_option("--k1", ix.k1, "BM25 k1");
  auto* ix_b = cmd_index->add_option("--b", ix.b, "BM25 b");
  auto* ix_tok = cmd_index->add_option("--tokenizer", ix.tokenizer, "words|cjk");
  auto* ix_lc = cmd_index->add_option("--lowercase", ix.lowercase, "lowercase tokens");
  cmd_index->callback([&] {
    ConfigView cfg{load_config_file(config_path), "index"};
    cfg.resolve(ix_corpus, "corpus", ix.corpus);
    cfg.resolve(ix_out, "out", ix.out);
    cfg.resolve(ix_k1, "k1", ix.k1);
    cfg.resolve(ix_b, "b", ix.b);
    cfg.resolve(ix_tok, "tokenizer", ix.tokenizer);
    cfg.resolve(ix_lc, "lowercase", ix.lowercase);
    if (ix.corpus.empty() || ix.out.empty()) {
      throw CLI::RequiredError("index: --corpus and --out");
    }
    auto docs = load_corpus(ix.corpus);
    TokenizerConfig tok{tokenizer_mode_from_string(ix.tokenizer), ix.lowercase};
    InvertedIndex index = build_index(docs, tok, ix.k1, ix.b);
    index.save(ix.out);
    std::cout << "indexed " << index.num_docs() << " documents, "
              << index.postings().size() << " terms, avg doc length "
              << format_fixed(index.avg_doc_length(), 2) << "\n";
  });

  // ---- distill ----
  auto* cmd_distill = app.add_subcommand("distill", "offline teacher round-trip");
  cmd_distill->require_subcommand(1);

  auto* cmd_render = cmd_distill->add_subcommand("render", "write one prompt file per document");
  struct {
    std::string corpus, out;
    int max_chars = 2000;
  } dr;
  auto* dr_corpus = cmd_render->add_option("--corpus", dr.corpus, "corpus.jsonl");
  auto* dr_out = cmd_render->add_option("--out", dr.out, "prompt output directory");
  auto* dr_max = cmd_render->add_option("--max-chars", dr.max_chars, "text truncation length");
  cmd_render->callback([&] {
    ConfigView cfg{load_config_file(config_path), "distill-render"};
    cfg.resolve(dr_corpus, "corpus", dr.corpus);
    cfg.resolve(dr_out, "out", dr.out);
    cfg.resolve(dr_max, "max-chars", dr.max_chars);
    if (dr.corpus.empty() || dr.out.empty()) {
      throw CLI::RequiredError("distill render: --corpus and --out");
    }
    auto docs = load_corpus(dr.corpus);
    size_t rendered = 0, skipped = 0;
    for (const auto& doc : docs) {
      if (doc.charges.empty()) {
        ++skipped;
        continue;
      }
      require_filename_safe(doc.id);
      ++rendered;
    }
    std::filesystem::create_directories(dr.out);
    for (const auto& doc : docs) {
      if (doc.charges.empty()) continue;
      const std::string prompt = render_prompt(doc, doc.charges.front(), dr.max_chars);
      write_file_atomic((std::filesystem::path(dr.out) / (doc.id + ".txt")).string(), prompt);
    }
    std::cout << "rendered " << rendered << " prompts";
    if (skipped > 0) std::cout << " (skipped " << skipped << " documents without charges)";
    std::cout << "\n";
  });

  auto* cmd_ingest = cmd_distill->add_subcommand("ingest", "parse + clean teacher responses");
  struct {
    std::string corpus, responses, taxonomy, out, rejects, forbidden;
    int min_elements = 2, max_elements = 10;
  } di;
  auto* di_corpus = cmd_ingest->add_option("--corpus", di.corpus, "corpus.jsonl");
  auto* di_resp = cmd_ingest->add_option("--responses", di.responses, "response directory");
  auto* di_tax = cmd_ingest->add_option("--taxonomy", di.taxonomy, "taxonomy.json");
  auto* di_out = cmd_ingest->add_option("--out", di.out, "silver corpus output (jsonl)");
  auto* di_rej = cmd_ingest->add_option("--rejects", di.rejects, "rejected records (jsonl)");
  auto* di_forb = cmd_ingest->add_option("--forbidden", di.forbidden, "forbidden-term list file");
  auto* di_min = cmd_ingest->add_option("--min-elements", di.min_elements, "");
  auto* di_max = cmd_ingest->add_option("--max-elements", di.max_elements, "");
  cmd_ingest->callback([&] {
    ConfigView cfg{load_config_file(config_path), "distill-ingest"};
    cfg.resolve(di_corpus, "corpus", di.corpus);
    cfg.resolve(di_resp, "responses", di.responses);
    cfg.resolve(di_tax, "taxonomy", di.taxonomy);
    cfg.resolve(di_out, "out", di.out);
    cfg.resolve(di_rej, "rejects", di.rejects);
    cfg.resolve(di_forb, "forbidden", di.forbidden);
    cfg.resolve(di_min, "min-elements", di.min_elements);
    cfg.resolve(di_max, "max-elements", di.max_elements);
    if (di.corpus.empty() || di.responses.empty() || di.taxonomy.empty() || di.out.empty()) {
      throw CLI::RequiredError("distill ingest: --corpus/--responses/--taxonomy/--out");
    }
    auto docs = load_corpus(di.corpus);
    Taxonomy tax = load_taxonomy(di.taxonomy);

    CleanConfig clean_cfg;
    clean_cfg.min_elements = di.min_elements;
    clean_cfg.max_elements = di.max_elements;
    if (!di.forbidden.empty()) clean_cfg.forbidden_terms = load_forbidden_terms(di.forbidden);

    std::vector<DistillRecord> records;
    std::map<std::string, const Document*> by_id;
    for (const auto& doc : docs) {
      if (doc.charges.empty()) continue;
      by_id[doc.id] = &doc;
      DistillRecord rec;
      rec.doc_id = doc.id;
      rec.grounded_charge = doc.charges.front();
      const auto path = std::filesystem::path(di.responses) / (doc.id + ".txt");
      if (!file_exists(path.string())) {
        rec.status = DistillStatus::kParseError;
        rec.rejection_reason = "missing-response";
        records.push_back(std::move(rec));
        continue;
      }
      rec.raw_response = read_file(path.string());
      ParsedResponse parsed = parse_response(rec.raw_response);
      if (!parsed.ok) {
        rec.status = DistillStatus::kParseError;
        rec.rejection_reason = parsed.reason;
      } else {
        rec.parsed_elements = std::move(parsed.elements);
      }
      records.push_back(std::move(rec));
    }

    CleanResult cleaned = clean_records(std::move(records), tax, clean_cfg);

    std::ostringstream silver;
    for (const auto& rec : cleaned.kept) {
      const Document* src = by_id.at(rec.doc_id);
      Document out_doc;
      out_doc.id = src->id;
      out_doc.text = src->text;
      out_doc.charges = src->charges;
      out_doc.elements = sorted_unique(rec.parsed_elements);
      silver << document_to_json_line(out_doc) << "\n";
    }
    write_file_atomic(di.out, silver.str());

    if (!di.rejects.empty()) {
      std::ostringstream rejects;
      for (const auto& rec : cleaned.rejected) {
        json j;
        j["doc_id"] = rec.doc_id;
        j["grounded_charge"] = rec.grounded_charge;
        j["status"] = to_string(rec.status);
        j["reason"] = rec.rejection_reason;
        j["elements"] = rec.parsed_elements;
        rejects << j.dump() << "\n";
      }
      write_file_atomic(di.rejects, rejects.str());
    }
    std::cout << "kept " << cleaned.kept.size() << ", rejected " << cleaned.rejected.size()
              << "\n";
  });

  // ---- train-gen ----
  auto* cmd_train_gen = app.add_subcommand("train-gen", "fit the built-in generator");
  struct {
    std::string corpus, taxonomy, out, mode = "hierarchical", tokenizer = "words";
    double alpha = 1.0;
    int top_k = 6;
    bool lowercase = true;
  } tg;
  auto* tg_corpus = cmd_train_gen->add_option("--corpus", tg.corpus, "labeled corpus.jsonl");
  auto* tg_tax = cmd_train_gen->add_option("--taxonomy", tg.taxonomy, "taxonomy.json");
  auto* tg_out = cmd_train_gen->add_option("--out", tg.out, "model output (json)");
  auto* tg_mode = cmd_train_gen->add_option("--mode", tg.mode, "hierarchical|independent");
  auto* tg_alpha = cmd_train_gen->add_option("--alpha", tg.alpha, "additive smoothing");
  auto* tg_topk = cmd_train_gen->add_option("--top-k", tg.top_k, "elements per inference");
  auto* tg_tok = cmd_train_gen->add_option("--tokenizer", tg.tokenizer, "words|cjk");
  auto* tg_lc = cmd_train_gen->add_option("--lowercase", tg.lowercase, "lowercase tokens");
  cmd_train_gen->callback([&] {
    ConfigView cfg{load_config_file(config_path), "train-gen"};
    cfg.resolve(tg_corpus, "corpus", tg.corpus);
    cfg.resolve(tg_tax, "taxonomy", tg.taxonomy);
    cfg.resolve(tg_out, "out", tg.out);
    cfg.resolve(tg_mode, "mode", tg.mode);
    cfg.resolve(tg_alpha, "alpha", tg.alpha);
    cfg.resolve(tg_topk, "top-k", tg.top_k);
    cfg.resolve(tg_tok, "tokenizer", tg.tokenizer);
    cfg.resolve(tg_lc, "lowercase", tg.lowercase);
    if (tg.corpus.empty() || tg.taxonomy.empty() || tg.out.empty()) {
      throw CLI::RequiredError("train-gen: --corpus/--taxonomy/--out");
    }
    auto docs = load_corpus(tg.corpus);
    Taxonomy tax = load_taxonomy(tg.taxonomy);
    TokenizerConfig tok{tokenizer_mode_from_string(tg.tokenizer), tg.lowercase};
    GeneratorModel model = fit_generator(docs, tax, generator_mode_from_string(tg.mode),
                                         tg.alpha, tg.top_k, tok);
    model.save(tg.out);
    std::cout << "fitted " << to_string(model.mode) << " generator over "
              << model.charge_log_prior.size() << " charges, vocab " << model.vocab.size()
              << "\n";
  });

  // ---- infer ----
  auto* cmd_infer = app.add_subcommand("infer", "infer latent indicators for queries");
  struct {
    std::string gen, queries, taxonomy, out;
  } in_;
  auto* in_gen = cmd_infer->add_option("--gen", in_.gen, "generator model json");
  auto* in_q = cmd_infer->add_option("--queries", in_.queries, "queries.jsonl");
  auto* in_tax = cmd_infer->add_option("--taxonomy", in_.taxonomy, "taxonomy.json");
  auto* in_out = cmd_infer->add_option("--out", in_.out, "indicators.jsonl output");
  cmd_infer->callback([&] {
    ConfigView cfg{load_config_file(config_path), "infer"};
    cfg.resolve(in_gen, "gen", in_.gen);
    cfg.resolve(in_q, "queries", in_.queries);
    cfg.resolve(in_tax, "taxonomy", in_.taxonomy);
    cfg.resolve(in_out, "out", in_.out);
    cfg.resolve(threads_opt, "threads", threads);
    if (in_.gen.empty() || in_.queries.empty() || in_.taxonomy.empty() || in_.out.empty()) {
      throw CLI::RequiredError("infer: --gen/--queries/--taxonomy/--out");
    }
    GeneratorModel model = GeneratorModel::load(in_.gen);
    auto queries = load_queries(in_.queries);
    Taxonomy tax = load_taxonomy(in_.taxonomy);
    auto indicators = infer_all(model, queries, tax, threads);
    save_indicators(indicators, in_.out);
    std::cout << "inferred indicators for " << indicators.size() << " queries\n";
  });

  // ---- train-scorer ----
  auto* cmd_train_scorer = app.add_subcommand("train-scorer", "train the fusion MLP");
  struct {
    std::string features, qrels, out;
    int positive_threshold = 1;
    double lr = 1e-4, dropout = 0.1;
    int batch = 64, epochs = 50, neg_ratio = 3;
  } ts;
  auto* ts_feat = cmd_train_scorer->add_option("--features", ts.features, "features.tsv");
  auto* ts_qrels = cmd_train_scorer->add_option("--qrels", ts.qrels,
                                                "re-derive labels from qrels (optional)");
  auto* ts_thresh = cmd_train_scorer->add_option("--positive-threshold", ts.positive_threshold, "");
  auto* ts_out = cmd_train_scorer->add_option("--out", ts.out, "scorer.json output");
  auto* ts_lr = cmd_train_scorer->add_option("--lr", ts.lr, "learning rate");
  auto* ts_batch = cmd_train_scorer->add_option("--batch", ts.batch, "batch size");
  auto* ts_epochs = cmd_train_scorer->add_option("--epochs", ts.epochs, "epochs");
  auto* ts_ratio = cmd_train_scorer->add_option("--neg-ratio", ts.neg_ratio, "hard negatives per positive");
  auto* ts_drop = cmd_train_scorer->add_option("--dropout", ts.dropout, "dropout rate");
  cmd_train_scorer->callback([&] {
    ConfigView cfg{load_config_file(config_path), "train-scorer"};
    cfg.resolve(ts_feat, "features", ts.features);
    cfg.resolve(ts_qrels, "qrels", ts.qrels);
    cfg.resolve(ts_thresh, "positive-threshold", ts.positive_threshold);
    cfg.resolve(ts_out, "out", ts.out);
    cfg.resolve(ts_lr, "lr", ts.lr);
    cfg.resolve(ts_batch, "batch", ts.batch);
    cfg.resolve(ts_epochs, "epochs", ts.epochs);
    cfg.resolve(ts_ratio, "neg-ratio", ts.neg_ratio);
    cfg.resolve(ts_drop, "dropout", ts.dropout);
    if (ts.features.empty() || ts.out.empty()) {
      throw CLI::RequiredError("train-scorer: --features and --out");
    }
    auto rows = load_features(ts.features);
    if (!ts.qrels.empty()) {
      QrelSet qrels = load_qrels(ts.qrels, ts.positive_threshold);
      for (auto& row : rows) row.label = qrels.is_positive(row.qid, row.doc_id) ? 1 : 0;
    }
    TrainConfig tc;
    tc.learning_rate = ts.lr;
    tc.batch_size = ts.batch;
    tc.epochs = ts.epochs;
    tc.neg_ratio = ts.neg_ratio;
    tc.dropout = ts.dropout;
    tc.seed = resolve_seed(seed_opt, seed, cfg);
    auto pairs = build_training_pairs(rows, tc.neg_ratio);
    TrainResult trained = train_scorer(pairs, tc);
    trained.model.save(ts.out);
    std::cout << "trained on " << pairs.size() << " pairs; loss "
              << format_fixed(trained.loss_curve.front(), 6) << " -> "
              << format_fixed(trained.loss_curve.back(), 6) << " over "
              << trained.loss_curve.size() << " epochs\n";
  });

  // ---- rank ----
  auto* cmd_rank = app.add_subcommand("rank", "rank candidate pools");
  struct {
    std::string corpus, queries, index, taxonomy, indicators, gen, scorer, out;
    std::string dump_features, qrels, tokenizer = "words";
    bool rule = false, lowercase = true;
    double k1 = 1.2, b = 0.75, epsilon = kDefaultEpsilon;
    int positive_threshold = 1, pool_top_k = 0;
  } rk;
  auto* rk_corpus = cmd_rank->add_option("--corpus", rk.corpus, "corpus.jsonl");
  auto* rk_queries = cmd_rank->add_option("--queries", rk.queries, "queries.jsonl");
  auto* rk_index = cmd_rank->add_option("--index", rk.index, "prebuilt index (else built on the fly)");
  auto* rk_tax = cmd_rank->add_option("--taxonomy", rk.taxonomy, "taxonomy.json (with --gen)");
  auto* rk_ind = cmd_rank->add_option("--indicators", rk.indicators, "indicators.jsonl");
  auto* rk_gen = cmd_rank->add_option("--gen", rk.gen, "generator model json");
  auto* rk_scorer = cmd_rank->add_option("--scorer", rk.scorer, "scorer.json");
  auto* rk_rule = cmd_rank->add_flag("--rule", rk.rule, "score with the unweighted rule");
  auto* rk_out = cmd_rank->add_option("--out", rk.out, "run.tsv output");
  auto* rk_dump = cmd_rank->add_option("--dump-features", rk.dump_features, "features.tsv output");
  auto* rk_qrels = cmd_rank->add_option("--qrels", rk.qrels, "labels for the feature dump");
  auto* rk_thresh = cmd_rank->add_option("--positive-threshold", rk.positive_threshold, "");
  auto* rk_k1 = cmd_rank->add_option("--k1", rk.k1, "BM25 k1 (on-the-fly index)");
  auto* rk_b = cmd_rank->add_option("--b", rk.b, "BM25 b (on-the-fly index)");
  auto* rk_tok = cmd_rank->add_option("--tokenizer", rk.tokenizer, "words|cjk (on-the-fly index)");
  auto* rk_lc = cmd_rank->add_option("--lowercase", rk.lowercase, "");
  auto* rk_eps = cmd_rank->add_option("--epsilon", rk.epsilon, "element-support epsilon");
  auto* rk_topk = cmd_rank->add_option("--pool-top-k", rk.pool_top_k,
                                       "BM25 fallback pool size for empty pools");
  rk_scorer->excludes(rk_rule);
  rk_ind->excludes(rk_gen);
  cmd_rank->callback([&] {
    ConfigView cfg{load_config_file(config_path), "rank"};
    cfg.resolve(rk_corpus, "corpus", rk.corpus);
    cfg.resolve(rk_queries, "queries", rk.queries);
    cfg.resolve(rk_index, "index", rk.index);
    cfg.resolve(rk_tax, "taxonomy", rk.taxonomy);
    cfg.resolve(rk_ind, "indicators", rk.indicators);
    cfg.resolve(rk_gen, "gen", rk.gen);
    cfg.resolve(rk_scorer, "scorer", rk.scorer);
    cfg.resolve(rk_out, "out", rk.out);
    cfg.resolve(rk_dump, "dump-features", rk.dump_features);
    cfg.resolve(rk_qrels, "qrels", rk.qrels);
    cfg.resolve(rk_thresh, "positive-threshold", rk.positive_threshold);
    cfg.resolve(rk_k1, "k1", rk.k1);
    cfg.resolve(rk_b, "b", rk.b);
    cfg.resolve(rk_tok, "tokenizer", rk.tokenizer);
    cfg.resolve(rk_lc, "lowercase", rk.lowercase);
    cfg.resolve(rk_eps, "epsilon", rk.epsilon);
    cfg.resolve(rk_topk, "pool-top-k", rk.pool_top_k);
    cfg.resolve(threads_opt, "threads", threads);
    if (rk.corpus.empty() || rk.queries.empty() || rk.out.empty()) {
      throw CLI::RequiredError("rank: --corpus/--queries/--out");
    }
    if (rk.indicators.empty() && rk.gen.empty()) {
      throw CLI::RequiredError("rank: one of --indicators or --gen");
    }

    auto docs = load_corpus(rk.corpus);
    auto docs_by_id = index_by_id(docs);
    auto queries = load_queries(rk.queries);
    TokenizerConfig tok{tokenizer_mode_from_string(rk.tokenizer), rk.lowercase};
    InvertedIndex index = load_or_build_index(rk.index, docs, rk.k1, rk.b, tok);

    std::map<std::string, IndicatorResult> indicators;
    if (!rk.indicators.empty()) {
      if (rk.taxonomy.empty()) throw CLI::RequiredError("rank --indicators: --taxonomy");
      Taxonomy tax = load_taxonomy(rk.taxonomy);
      IndicatorFile file = load_indicators(rk.indicators, tax);
      if (file.skipped > 0) {
        std::cerr << "warning: skipped " << file.skipped << " indicator lines without qid\n";
      }
      indicators = std::move(file.by_query);
    } else {
      if (rk.taxonomy.empty()) throw CLI::RequiredError("rank --gen: --taxonomy");
      Taxonomy tax = load_taxonomy(rk.taxonomy);
      GeneratorModel model = GeneratorModel::load(rk.gen);
      indicators = infer_all(model, queries, tax, threads);
    }

    std::optional<ScorerModel> scorer;
    if (!rk.scorer.empty()) scorer = ScorerModel::load(rk.scorer);

    RankContext ctx;
    ctx.index = &index;
    ctx.docs = &docs_by_id;
    ctx.indicators = &indicators;
    ctx.scorer = scorer.has_value() ? &*scorer : nullptr;
    ctx.epsilon = rk.epsilon;
    ctx.fallback_top_k = rk.pool_top_k;

    auto rankings = rank_all(queries, ctx, threads);
    save_run(rankings, rk.out);
    if (!rk.dump_features.empty()) {
      std::optional<QrelSet> qrels;
      if (!rk.qrels.empty()) qrels = load_qrels(rk.qrels, rk.positive_threshold);
      auto rows = collect_feature_rows(queries, ctx, qrels.has_value() ? &*qrels : nullptr);
      save_features(rows, rk.dump_features);
    }
    std::cout << "ranked " << rankings.size() << " queries\n";
  });

  // ---- eval ----
  auto* cmd_eval = app.add_subcommand("eval", "score a run file against qrels");
  struct {
    std::string run, qrels, out;
    int positive_threshold = 1;
  } ev;
  auto* ev_run = cmd_eval->add_option("--run", ev.run, "run.tsv");
  auto* ev_qrels = cmd_eval->add_option("--qrels", ev.qrels, "qrels.tsv");
  auto* ev_out = cmd_eval->add_option("--out", ev.out, "report.json output");
  auto* ev_thresh = cmd_eval->add_option("--positive-threshold", ev.positive_threshold, "");
  cmd_eval->callback([&] {
    ConfigView cfg{load_config_file(config_path), "eval"};
    cfg.resolve(ev_run, "run", ev.run);
    cfg.resolve(ev_qrels, "qrels", ev.qrels);
    cfg.resolve(ev_out, "out", ev.out);
    cfg.resolve(ev_thresh, "positive-threshold", ev.positive_threshold);
    if (ev.run.empty() || ev.qrels.empty()) {
      throw CLI::RequiredError("eval: --run and --qrels");
    }
    auto rankings = load_run(ev.run);
    QrelSet qrels = load_qrels(ev.qrels, ev.positive_threshold);
    MetricsReport report = metrics_suite(rankings, qrels);
    print_mean_metrics("mean", report.mean);
    std::cout << "evaluated " << report.evaluated << " queries, excluded "
              << report.excluded_no_positives << " with no positives\n";
    if (!ev.out.empty()) {
      write_file_atomic(ev.out, report_summary_json(report).dump(2) + "\n");
    }
  });

  // ---- shapley ----
  auto* cmd_shap = app.add_subcommand("shapley", "exact Shapley attribution of the scorer");
  struct {
    std::string model, features, out, summary, instances = "all";
  } sh;
  auto* sh_model = cmd_shap->add_option("--model", sh.model, "scorer.json");
  auto* sh_feat = cmd_shap->add_option("--features", sh.features, "features.tsv");
  auto* sh_out = cmd_shap->add_option("--out", sh.out, "shap.tsv output");
  auto* sh_sum = cmd_shap->add_option("--summary", sh.summary, "global importance CSV");
  auto* sh_inst = cmd_shap->add_option("--instances", sh.instances, "all|positives");
  cmd_shap->callback([&] {
    ConfigView cfg{load_config_file(config_path), "shapley"};
    cfg.resolve(sh_model, "model", sh.model);
    cfg.resolve(sh_feat, "features", sh.features);
    cfg.resolve(sh_out, "out", sh.out);
    cfg.resolve(sh_sum, "summary", sh.summary);
    cfg.resolve(sh_inst, "instances", sh.instances);
    if (sh.model.empty() || sh.features.empty() || sh.out.empty()) {
      throw CLI::RequiredError("shapley: --model/--features/--out");
    }
    if (sh.instances != "all" && sh.instances != "positives") {
      throw DataError("shapley: --instances must be all|positives");
    }
    ScorerModel model = ScorerModel::load(sh.model);
    auto rows = load_features(sh.features);
    if (rows.empty()) throw DataError("shapley: empty features file");

    // Baseline: mean feature vector over the whole file (the training pairs).
    std::vector<FeatureVector> all_vectors;
    all_vectors.reserve(rows.size());
    for (const auto& row : rows) all_vectors.push_back(row.v);
    const FeatureVector baseline = mean_feature_vector(all_vectors);

    std::ostringstream os;
    os << "qid\tdocid\tphi_v1\tphi_v2\tphi_v3\tphi_v4\tphi_v5\tbase\tvalue\n";
    std::vector<FeatureVector> attributed;
    for (const auto& row : rows) {
      if (sh.instances == "positives" && row.label <= 0) continue;
      Attribution attr = exact_shapley(model, row.v, baseline);
      os << row.qid << "\t" << row.doc_id;
      for (double phi : attr.phi) os << "\t" << format_double(phi);
      os << "\t" << format_double(attr.base_value) << "\t"
         << format_double(attr.instance_value) << "\n";
      attributed.push_back(row.v);
    }
    if (attributed.empty()) throw DataError("shapley: no instances selected");
    write_file_atomic(sh.out, os.str());

    if (!sh.summary.empty()) {
      auto importance = global_importance(model, attributed, baseline);
      std::ostringstream csv;
      csv << "feature,mean_abs_shap\n";
      for (int i = 0; i < FeatureVector::kDim; ++i) {
        csv << FeatureVector::names()[i] << "," << format_double(importance[i]) << "\n";
      }
      write_file_atomic(sh.summary, csv.str());
    }
    std::cout << "attributed " << attributed.size() << " instances\n";
  });

  // ---- ablate ----
  auto* cmd_ablate = app.add_subcommand("ablate", "feature / architecture ablation matrix");
  struct {
    std::string corpus, queries, qrels, taxonomy, index, indicators, out;
    std::string variants = "all", tokenizer = "words";
    bool lowercase = true;
    double k1 = 1.2, b = 0.75, alpha = 1.0, split = 0.8, epsilon = kDefaultEpsilon;
    double lr = 1e-4, dropout = 0.1;
    int top_k = 6, positive_threshold = 1, pool_top_k = 0;
    int batch = 64, epochs = 50, neg_ratio = 3;
  } ab;
  auto* ab_corpus = cmd_ablate->add_option("--corpus", ab.corpus, "");
  auto* ab_queries = cmd_ablate->add_option("--queries", ab.queries, "");
  auto* ab_qrels = cmd_ablate->add_option("--qrels", ab.qrels, "");
  auto* ab_tax = cmd_ablate->add_option("--taxonomy", ab.taxonomy, "");
  auto* ab_index = cmd_ablate->add_option("--index", ab.index, "");
  auto* ab_ind = cmd_ablate->add_option("--indicators", ab.indicators,
                                        "file-backed indicators for the full model");
  auto* ab_out = cmd_ablate->add_option("--out", ab.out, "ablation report json");
  auto* ab_var = cmd_ablate->add_option("--variants", ab.variants, "comma list or 'all'");
  auto* ab_tok = cmd_ablate->add_option("--tokenizer", ab.tokenizer, "");
  auto* ab_lc = cmd_ablate->add_option("--lowercase", ab.lowercase, "");
  auto* ab_k1 = cmd_ablate->add_option("--k1", ab.k1, "");
  auto* ab_b = cmd_ablate->add_option("--b", ab.b, "");
  auto* ab_alpha = cmd_ablate->add_option("--alpha", ab.alpha, "");
  auto* ab_topk = cmd_ablate->add_option("--top-k", ab.top_k, "");
  auto* ab_split = cmd_ablate->add_option("--split", ab.split, "train fraction of queries");
  auto* ab_thresh = cmd_ablate->add_option("--positive-threshold", ab.positive_threshold, "");
  auto* ab_pool = cmd_ablate->add_option("--pool-top-k", ab.pool_top_k, "");
  auto* ab_eps = cmd_ablate->add_option("--epsilon", ab.epsilon, "");
  auto* ab_lr = cmd_ablate->add_option("--lr", ab.lr, "");
  auto* ab_batch = cmd_ablate->add_option("--batch", ab.batch, "");
  auto* ab_epochs = cmd_ablate->add_option("--epochs", ab.epochs, "");
  auto* ab_ratio = cmd_ablate->add_option("--neg-ratio", ab.neg_ratio, "");
  auto* ab_drop = cmd_ablate->add_option("--dropout", ab.dropout, "");
  cmd_ablate->callback([&] {
    ConfigView cfg{load_config_file(config_path), "ablate"};
    cfg.resolve(ab_corpus, "corpus", ab.corpus);
    cfg.resolve(ab_queries, "queries", ab.queries);
    cfg.resolve(ab_qrels, "qrels", ab.qrels);
    cfg.resolve(ab_tax, "taxonomy", ab.taxonomy);
    cfg.resolve(ab_index, "index", ab.index);
    cfg.resolve(ab_ind, "indicators", ab.indicators);
    cfg.resolve(ab_out, "out", ab.out);
    cfg.resolve(ab_var, "variants", ab.variants);
    cfg.resolve(ab_tok, "tokenizer", ab.tokenizer);
    cfg.resolve(ab_lc, "lowercase", ab.lowercase);
    cfg.resolve(ab_k1, "k1", ab.k1);
    cfg.resolve(ab_b, "b", ab.b);
    cfg.resolve(ab_alpha, "alpha", ab.alpha);
    cfg.resolve(ab_topk, "top-k", ab.top_k);
    cfg.resolve(ab_split, "split", ab.split);
    cfg.resolve(ab_thresh, "positive-threshold", ab.positive_threshold);
    cfg.resolve(ab_pool, "pool-top-k", ab.pool_top_k);
    cfg.resolve(ab_eps, "epsilon", ab.epsilon);
    cfg.resolve(ab_lr, "lr", ab.lr);
    cfg.resolve(ab_batch, "batch", ab.batch);
    cfg.resolve(ab_epochs, "epochs", ab.epochs);
    cfg.resolve(ab_ratio, "neg-ratio", ab.neg_ratio);
    cfg.resolve(ab_drop, "dropout", ab.dropout);
    cfg.resolve(threads_opt, "threads", threads);
    const uint64_t run_seed = resolve_seed(seed_opt, seed, cfg);
    if (ab.corpus.empty() || ab.queries.empty() || ab.qrels.empty() || ab.taxonomy.empty() ||
        ab.out.empty()) {
      throw CLI::RequiredError("ablate: --corpus/--queries/--qrels/--taxonomy/--out");
    }

    auto docs = load_corpus(ab.corpus);
    auto docs_by_id = index_by_id(docs);
    auto queries = load_queries(ab.queries);
    QrelSet qrels = load_qrels(ab.qrels, ab.positive_threshold);
    Taxonomy tax = load_taxonomy(ab.taxonomy);
    TokenizerConfig tok{tokenizer_mode_from_string(ab.tokenizer), ab.lowercase};
    InvertedIndex index = load_or_build_index(ab.index, docs, ab.k1, ab.b, tok);

    auto [train_queries, eval_queries] = split_queries(queries, ab.split, run_seed);

    GeneratorModel gen_hier = fit_generator(docs, tax, GeneratorMode::kHierarchical,
                                            ab.alpha, ab.top_k, tok);
    GeneratorModel gen_indep = fit_generator(docs, tax, GeneratorMode::kIndependent,
                                             ab.alpha, ab.top_k, tok);
    auto builtin = infer_all(gen_hier, queries, tax, threads);
    auto independent = infer_all(gen_indep, queries, tax, threads);

    std::map<std::string, IndicatorResult> file_backed;
    if (!ab.indicators.empty()) {
      IndicatorFile file = load_indicators(ab.indicators, tax);
      file_backed = std::move(file.by_query);
    }

    TrainConfig tc;
    tc.learning_rate = ab.lr;
    tc.batch_size = ab.batch;
    tc.epochs = ab.epochs;
    tc.neg_ratio = ab.neg_ratio;
    tc.dropout = ab.dropout;
    tc.seed = run_seed;

    AblationInputs inputs;
    inputs.train_queries = &train_queries;
    inputs.eval_queries = &eval_queries;
    inputs.qrels = &qrels;
    inputs.index = &index;
    inputs.docs = &docs_by_id;
    inputs.indicators_primary = file_backed.empty() ? &builtin : &file_backed;
    inputs.indicators_builtin = &builtin;
    inputs.indicators_independent = &independent;
    inputs.train = tc;
    inputs.epsilon = ab.epsilon;
    inputs.fallback_top_k = ab.pool_top_k;
    inputs.threads = threads;

    std::vector<AblationVariant> variants;
    if (ab.variants == "all") {
      variants = all_ablation_variants();
    } else {
      std::stringstream ss(ab.variants);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) variants.push_back(ablation_variant_from_string(item));
      }
      if (variants.empty()) throw DataError("ablate: empty variant list");
    }

    json out = json::object();
    for (AblationVariant variant : variants) {
      MetricsReport report = run_ablation(variant, inputs);
      out[to_string(variant)] = report_summary_json(report);
      print_mean_metrics(to_string(variant), report.mean);
    }
    write_file_atomic(ab.out, out.dump(2) + "\n");
  });

  // ---- sweep ----
  auto* cmd_sweep = app.add_subcommand("sweep", "stratified data-efficiency sweep");
  struct {
    std::string corpus, queries, qrels, taxonomy, index, out;
    std::string ratios = "0.1,0.3,0.5,0.7,1.0", mode = "hierarchical", tokenizer = "words";
    bool lowercase = true;
    double k1 = 1.2, b = 0.75, alpha = 1.0, split = 0.8, epsilon = kDefaultEpsilon;
    double lr = 1e-4, dropout = 0.1;
    int top_k = 6, positive_threshold = 1, pool_top_k = 0;
    int batch = 64, epochs = 50, neg_ratio = 3;
  } sw;
  auto* sw_corpus = cmd_sweep->add_option("--corpus", sw.corpus, "");
  auto* sw_queries = cmd_sweep->add_option("--queries", sw.queries, "");
  auto* sw_qrels = cmd_sweep->add_option("--qrels", sw.qrels, "");
  auto* sw_tax = cmd_sweep->add_option("--taxonomy", sw.taxonomy, "");
  auto* sw_index = cmd_sweep->add_option("--index", sw.index, "");
  auto* sw_out = cmd_sweep->add_option("--out", sw.out, "sweep table (tsv)");
  auto* sw_ratios = cmd_sweep->add_option("--ratios", sw.ratios, "comma list in (0,1]");
  auto* sw_mode = cmd_sweep->add_option("--mode", sw.mode, "hierarchical|independent");
  auto* sw_tok = cmd_sweep->add_option("--tokenizer", sw.tokenizer, "");
  auto* sw_lc = cmd_sweep->add_option("--lowercase", sw.lowercase, "");
  auto* sw_k1 = cmd_sweep->add_option("--k1", sw.k1, "");
  auto* sw_b = cmd_sweep->add_option("--b", sw.b, "");
  auto* sw_alpha = cmd_sweep->add_option("--alpha", sw.alpha, "");
  auto* sw_topk = cmd_sweep->add_option("--top-k", sw.top_k, "");
  auto* sw_split = cmd_sweep->add_option("--split", sw.split, "train fraction of queries");
  auto* sw_thresh = cmd_sweep->add_option("--positive-threshold", sw.positive_threshold, "");
  auto* sw_pool = cmd_sweep->add_option("--pool-top-k", sw.pool_top_k, "");
  auto* sw_eps = cmd_sweep->add_option("--epsilon", sw.epsilon, "");
  auto* sw_lr = cmd_sweep->add_option("--lr", sw.lr, "");
  auto* sw_batch = cmd_sweep->add_option("--batch", sw.batch, "");
  auto* sw_epochs = cmd_sweep->add_option("--epochs", sw.epochs, "");
  auto* sw_ratio = cmd_sweep->add_option("--neg-ratio", sw.neg_ratio, "");
  auto* sw_drop = cmd_sweep->add_option("--dropout", sw.dropout, "");
  cmd_sweep->callback([&] {
    ConfigView cfg{load_config_file(config_path), "sweep"};
    cfg.resolve(sw_corpus, "corpus", sw.corpus);
    cfg.resolve(sw_queries, "queries", sw.queries);
    cfg.resolve(sw_qrels, "qrels", sw.qrels);
    cfg.resolve(sw_tax, "taxonomy", sw.taxonomy);
    cfg.resolve(sw_index, "index", sw.index);
    cfg.resolve(sw_out, "out", sw.out);
    cfg.resolve(sw_ratios, "ratios", sw.ratios);
    cfg.resolve(sw_mode, "mode", sw.mode);
    cfg.resolve(sw_tok, "tokenizer", sw.tokenizer);
    cfg.resolve(sw_lc, "lowercase", sw.lowercase);
    cfg.resolve(sw_k1, "k1", sw.k1);
    cfg.resolve(sw_b, "b", sw.b);
    cfg.resolve(sw_alpha, "alpha", sw.alpha);
    cfg.resolve(sw_topk, "top-k", sw.top_k);
    cfg.resolve(sw_split, "split", sw.split);
    cfg.resolve(sw_thresh, "positive-threshold", sw.positive_threshold);
    cfg.resolve(sw_pool, "pool-top-k", sw.pool_top_k);
    cfg.resolve(sw_eps, "epsilon", sw.epsilon);
    cfg.resolve(sw_lr, "lr", sw.lr);
    cfg.resolve(sw_batch, "batch", sw.batch);
    cfg.resolve(sw_epochs, "epochs", sw.epochs);
    cfg.resolve(sw_ratio, "neg-ratio", sw.neg_ratio);
    cfg.resolve(sw_drop, "dropout", sw.dropout);
    cfg.resolve(threads_opt, "threads", threads);
    const uint64_t run_seed = resolve_seed(seed_opt, seed, cfg);
    if (sw.corpus.empty() || sw.queries.empty() || sw.qrels.empty() || sw.taxonomy.empty() ||
        sw.out.empty()) {
      throw CLI::RequiredError("sweep: --corpus/--queries/--qrels/--taxonomy/--out");
    }

    auto docs = load_corpus(sw.corpus);
    auto docs_by_id = index_by_id(docs);
    auto queries = load_queries(sw.queries);
    QrelSet qrels = load_qrels(sw.qrels, sw.positive_threshold);
    Taxonomy tax = load_taxonomy(sw.taxonomy);
    TokenizerConfig tok{tokenizer_mode_from_string(sw.tokenizer), sw.lowercase};
    InvertedIndex index = load_or_build_index(sw.index, docs, sw.k1, sw.b, tok);

    auto [train_queries, eval_queries] = split_queries(queries, sw.split, run_seed);

    TrainConfig tc;
    tc.learning_rate = sw.lr;
    tc.batch_size = sw.batch;
    tc.epochs = sw.epochs;
    tc.neg_ratio = sw.neg_ratio;
    tc.dropout = sw.dropout;
    tc.seed = run_seed;

    SweepInputs inputs;
    inputs.corpus = &docs;
    inputs.docs = &docs_by_id;
    inputs.train_queries = &train_queries;
    inputs.eval_queries = &eval_queries;
    inputs.qrels = &qrels;
    inputs.taxonomy = &tax;
    inputs.index = &index;
    inputs.mode = generator_mode_from_string(sw.mode);
    inputs.smoothing_alpha = sw.alpha;
    inputs.top_k_elements = sw.top_k;
    inputs.tokenizer = tok;
    inputs.train = tc;
    inputs.epsilon = sw.epsilon;
    inputs.fallback_top_k = sw.pool_top_k;
    inputs.threads = threads;
    inputs.seed = run_seed;

    auto rows = run_sweep(parse_ratio_list(sw.ratios), inputs);
    write_file_atomic(sw.out, sweep_table(rows));
    std::cout << sweep_table(rows);
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}

}  // namespace juris
