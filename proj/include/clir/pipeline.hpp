#pragma once

// Command layer behind the CLI. Each subcommand is a function over a
// validated Config; artifacts land under cfg.out_dir together with a
// manifest recording the config hash, the seed and a fingerprint of every
// input that was read. Nothing here depends on wall-clock time, so a rerun
// with identical inputs reproduces every artifact byte for byte.

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "clir/cbow.hpp"
#include "clir/config.hpp"
#include "clir/embedding.hpp"
#include "clir/error.hpp"
#include "clir/evaluation.hpp"
#include "clir/hybrid.hpp"
#include "clir/projection.hpp"
#include "clir/retrieval.hpp"
#include "clir/text.hpp"
#include "clir/translation.hpp"
#include "clir/transliteration.hpp"

namespace clir {

inline void require_configured(const std::string& value, const char* what) {
  if (value.empty())
    throw config_error(std::string("config: '") + what +
                       "' is required for this command");
}

inline void require_file(const std::string& value, const char* what) {
  require_configured(value, what);
  if (!std::filesystem::exists(value))
    throw config_error(std::string("config: ") + what + " not found: " +
                       value);
}

/// Content fingerprint for the manifest: FNV-1a of the bytes for a file,
/// or of the sorted (name, file hash) sequence for a directory.
inline std::string fingerprint(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) {
      acc += f.filename().string();
      acc += ':';
      acc += to_hex(fnv1a64(read_file(f)));
      acc += '\n';
    }
    return to_hex(fnv1a64(acc));
  }
  return to_hex(fnv1a64(read_file(path)));
}

/// Written to <out_dir>/manifest.json after a successful command. Contains
/// no timestamps, so identical runs produce identical manifests.
class Manifest {
 public:
  Manifest(const Config& cfg, std::string command)
      : out_dir_(cfg.out_dir), command_(std::move(command)) {
    j_["command"] = command_;
    j_["config_hash"] = cfg.config_hash();
    j_["seed"] = cfg.seed;
    j_["inputs"] = nlohmann::json::object();
    j_["outputs"] = nlohmann::json::array();
  }

  void add_input(const std::filesystem::path& path) {
    j_["inputs"][path.string()] = fingerprint(path);
  }

  void add_output(const std::filesystem::path& path) {
    j_["outputs"].push_back(path.string());
  }

  void write() const {
    auto path = std::filesystem::path(out_dir_) / "manifest.json";
    write_file(path, j_.dump(2) + "\n");
  }

 private:
  std::string out_dir_;
  std::string command_;
  nlohmann::json j_;
};

struct Topic {
  std::string id;
  std::string title;
};

/// "qid<TAB>title" lines; blank lines are skipped, ids must be unique.
inline std::vector<Topic> load_topics(const std::filesystem::path& path) {
  std::vector<Topic> topics;
  std::unordered_set<std::string> seen;
  std::size_t lineno = 0;
  for (const auto& raw : read_lines(path)) {
    ++lineno;
    if (trim(raw).empty()) continue;
    auto tab = raw.find('\t');
    if (tab == std::string::npos)
      throw format_error("topics: expected 'qid<TAB>title'", lineno);
    Topic t{std::string(trim(raw.substr(0, tab))),
            std::string(trim(raw.substr(tab + 1)))};
    if (t.id.empty() || t.title.empty())
      throw format_error("topics: empty query id or title", lineno);
    if (!seen.insert(t.id).second)
      throw data_error("topics: duplicate query id '" + t.id + "'");
    topics.push_back(std::move(t));
  }
  return topics;
}

/// Greedy longest-match token rewriting, for mapping a romanization scheme
/// onto the one the embeddings were trained with. Rules are "from<TAB>to"
/// lines; unmatched bytes pass through.
class ScriptMap {
 public:
  static ScriptMap load(const std::filesystem::path& path) {
    ScriptMap sm;
    std::size_t lineno = 0;
    for (const auto& raw : read_lines(path)) {
      ++lineno;
      auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw format_error("script map: expected 'from<TAB>to'", lineno);
      std::string from(trim(line.substr(0, tab)));
      std::string to(trim(line.substr(tab + 1)));
      if (from.empty())
        throw format_error("script map: empty source sequence", lineno);
      sm.rules_.emplace_back(std::move(from), std::move(to));
    }
    std::sort(sm.rules_.begin(), sm.rules_.end(),
              [](const auto& a, const auto& b) {
                if (a.first.size() != b.first.size())
                  return a.first.size() > b.first.size();
                return a.first < b.first;
              });
    return sm;
  }

  bool empty() const { return rules_.empty(); }

  std::string apply(std::string_view token) const {
    std::string out;
    std::size_t pos = 0;
    while (pos < token.size()) {
      bool hit = false;
      for (const auto& [from, to] : rules_) {
        if (token.compare(pos, from.size(), from) == 0) {
          out += to;
          pos += from.size();
          hit = true;
          break;
        }
      }
      if (!hit) out.push_back(token[pos++]);
    }
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> rules_;  // longest first
};

struct TranslatedQuery {
  std::string qid;
  WeightedQuery query;
};

/// Tab-separated "qid<TAB>term^weight term^weight ..." with '#' header
/// lines recording method, seed and config hash.
inline void save_translations(const std::filesystem::path& path,
                              const std::vector<TranslatedQuery>& queries,
                              TranslationMethod method,
                              std::uint64_t seed,
                              const std::string& config_hash) {
  std::string out;
  out += "# method ";
  out += to_string(method);
  out += "\n# seed " + std::to_string(seed);
  out += "\n# config " + config_hash + "\n";
  for (const auto& tq : queries) {
    out += tq.qid;
    out += '\t';
    out += tq.query.to_string();
    out += '\n';
  }
  write_file(path, out);
}

inline std::vector<TranslatedQuery> load_translations(
    const std::filesystem::path& path) {
  std::vector<TranslatedQuery> queries;
  std::unordered_set<std::string> seen;
  std::size_t lineno = 0;
  for (const auto& raw : read_lines(path)) {
    ++lineno;
    if (raw.empty() || raw.front() == '#') continue;
    auto tab = raw.find('\t');
    if (tab == std::string::npos)
      throw format_error("translations: expected 'qid<TAB>term^weight ...'",
                         lineno);
    std::string qid(trim(raw.substr(0, tab)));
    if (qid.empty())
      throw format_error("translations: empty query id", lineno);
    if (!seen.insert(qid).second)
      throw data_error("translations: duplicate query id '" + qid + "'");
    WeightedQuery wq(TranslationMethod::we);
    int g = wq.add_group("", false);
    for (const auto& tok : split_ws(raw.substr(tab + 1))) {
      auto caret = tok.rfind('^');
      if (caret == std::string::npos || caret == 0)
        throw format_error("translations: expected 'term^weight', got '" +
                               tok + "'",
                           lineno);
      auto weight = parse_number<double>(tok.substr(caret + 1));
      if (!weight || !std::isfinite(*weight) || *weight <= 0.0)
        throw format_error("translations: bad weight in '" + tok + "'",
                           lineno);
      wq.add(tok.substr(0, caret), *weight, g);
    }
    queries.push_back({std::move(qid), std::move(wq)});
  }
  return queries;
}

/// Lazily loaded shared state for one command invocation. Every loader
/// registers its file with the manifest, so the manifest lists exactly the
/// inputs that were actually read.
class PipelineContext {
 public:
  PipelineContext(const Config& cfg, std::ostream& log, std::string command)
      : cfg(cfg), log(log), manifest(cfg, std::move(command)) {
    std::filesystem::create_directories(cfg.out_dir);
  }

  const Config& cfg;
  std::ostream& log;
  Manifest manifest;

  const EmbeddingStore& source_store() {
    return resolve_store(src_store_, cfg.source_embeddings, cfg.source_corpus,
                         false, "source");
  }

  const EmbeddingStore& target_store() {
    return resolve_store(tgt_store_, cfg.target_embeddings, cfg.target_corpus,
                         true, "target");
  }

  /// Projection for translating: a cached one (trained this invocation),
  /// else the configured file.
  const ProjectionMatrix& projection() {
    if (!projection_) {
      auto path = cfg.projection_path();
      if (!std::filesystem::exists(path))
        throw config_error("config: projection not found: " + path.string() +
                           " (run the train-projection command first)");
      manifest.add_input(path);
      projection_ = ProjectionMatrix::load_file(path);
      log << "projection: loaded " << projection_->output_dim() << " x "
          << projection_->input_dim() << " from " << path.string() << "\n";
    }
    return *projection_;
  }

  void cache_projection(ProjectionMatrix pm) { projection_ = std::move(pm); }
  bool has_projection_file() const {
    return std::filesystem::exists(cfg.projection_path());
  }

  const DictionaryTranslations& dictionary() {
    if (!dict_) {
      if (cfg.dictionary.empty()) {
        dict_ = DictionaryTranslations{};
      } else {
        require_file(cfg.dictionary, "dictionary");
        manifest.add_input(cfg.dictionary);
        dict_ = DictionaryTranslations::load(cfg.dictionary);
        log << "dictionary: " << dict_->map.size() << " source terms ("
            << dict_->skipped << " lines skipped)\n";
      }
    }
    return *dict_;
  }

  const ExternalTranslations& external() {
    if (!ext_) {
      require_file(cfg.external_translations, "external_translations");
      manifest.add_input(cfg.external_translations);
      ext_ = ExternalTranslations::load(cfg.external_translations);
      log << "external translations: " << ext_->map.size() << " queries\n";
    }
    return *ext_;
  }

  /// Null when no entity list is configured; out-of-vocabulary terms then
  /// raise a config error at translation time.
  NamedEntityResolver ne_resolver() {
    if (cfg.ne_list.empty()) return {};
    if (!entities_) {
      require_file(cfg.ne_list, "ne_list");
      manifest.add_input(cfg.ne_list);
      entities_ = NamedEntityList::load(cfg.ne_list);
      if (cfg.translit_table.empty()) {
        table_ = TransliterationTable::default_itrans();
      } else {
        require_file(cfg.translit_table, "translit_table");
        manifest.add_input(cfg.translit_table);
        table_ = TransliterationTable::load(cfg.translit_table);
      }
      log << "named entities: " << entities_->size() << " entries\n";
    }
    return make_ne_resolver(*table_, *entities_, cfg.theta,
                            cfg.candidate_cap);
  }

  const std::unordered_set<std::string>& source_stopwords() {
    return resolve_stopwords(src_stop_, cfg.source_stopwords, false,
                             "source_stopwords");
  }

  const std::unordered_set<std::string>& target_stopwords() {
    return resolve_stopwords(tgt_stop_, cfg.target_stopwords, true,
                             "target_stopwords");
  }

  const ScriptMap& script_map() {
    if (!script_map_) {
      if (cfg.script_map.empty()) {
        script_map_ = ScriptMap{};
      } else {
        require_file(cfg.script_map, "script_map");
        manifest.add_input(cfg.script_map);
        script_map_ = ScriptMap::load(cfg.script_map);
      }
    }
    return *script_map_;
  }

 private:
  const EmbeddingStore& resolve_store(std::optional<EmbeddingStore>& slot,
                                      const std::string& embeddings,
                                      const std::string& corpus,
                                      bool fold_case, const char* side) {
    if (slot) return *slot;
    if (!embeddings.empty()) {
      if (!std::filesystem::exists(embeddings))
        throw config_error(std::string("config: ") + side +
                           " embeddings not found: " + embeddings);
      manifest.add_input(embeddings);
      slot = EmbeddingStore::load_text_file(embeddings, fold_case);
      log << side << " embeddings: " << slot->size() << " words, dim "
          << slot->dim() << "\n";
      return *slot;
    }
    if (!corpus.empty()) {
      if (!std::filesystem::exists(corpus))
        throw config_error(std::string("config: ") + side +
                           " corpus not found: " + corpus);
      manifest.add_input(corpus);
      auto cbow = cfg.cbow;
      cbow.seed = cfg.seed;
      log << side << " embeddings: training on " << corpus << " (dim "
          << cbow.dim << ", seed " << cbow.seed << ")\n";
      slot = train_cbow_file(corpus, cbow, fold_case);
      auto out = std::filesystem::path(cfg.out_dir) /
                 (std::string("embeddings.") + (fold_case ? "tgt" : "src") +
                  ".vec");
      slot->save_text_file(out);
      manifest.add_output(out);
      log << side << " embeddings: " << slot->size() << " words -> "
          << out.string() << "\n";
      return *slot;
    }
    throw config_error(std::string("config: '") + side + "_embeddings' or '" +
                       side + "_corpus' is required for this command");
  }

  const std::unordered_set<std::string>& resolve_stopwords(
      std::optional<std::unordered_set<std::string>>& slot,
      const std::string& path, bool fold_case, const char* what) {
    if (!slot) {
      if (path.empty()) {
        slot = std::unordered_set<std::string>{};
      } else {
        require_file(path, what);
        manifest.add_input(path);
        slot = load_stopwords(path, fold_case);
      }
    }
    return *slot;
  }

  std::optional<EmbeddingStore> src_store_, tgt_store_;
  std::optional<ProjectionMatrix> projection_;
  std::optional<DictionaryTranslations> dict_;
  std::optional<ExternalTranslations> ext_;
  std::optional<TransliterationTable> table_;
  std::optional<NamedEntityList> entities_;
  std::optional<std::unordered_set<std::string>> src_stop_, tgt_stop_;
  std::optional<ScriptMap> script_map_;
};

namespace detail {

/// Reraises with the stage name prefixed, preserving the error category
/// (and with it the process exit code).
template <typename F>
auto stage(const char* name, F&& f) {
  auto prefix = [&](const std::exception& e) {
    return std::string("stage ") + name + ": " + e.what();
  };
  try {
    return f();
  } catch (const config_error& e) {
    throw config_error(prefix(e));
  } catch (const internal_error& e) {
    throw internal_error(prefix(e));
  } catch (const data_error& e) {
    throw data_error(prefix(e));
  }
}

}  // namespace detail

inline InvertedIndex build_index(PipelineContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_configured(cfg.corpus, "corpus");
  if (!std::filesystem::exists(cfg.corpus))
    throw config_error("config: corpus not found: " + cfg.corpus);
  ctx.manifest.add_input(cfg.corpus);

  std::vector<Document> docs;
  if (cfg.corpus_mode == "dir") {
    docs = load_directory_corpus(cfg.corpus);
  } else {
    if (std::filesystem::is_directory(cfg.corpus))
      throw config_error("config: corpus is a directory; set corpus_mode to "
                         "'dir'");
    docs = load_sgml_corpus(cfg.corpus);
  }
  ctx.log << "corpus: " << docs.size() << " documents from " << cfg.corpus
          << "\n";

  auto idx = index_corpus(docs, ctx.target_stopwords());
  idx.set_meta({"seed " + std::to_string(cfg.seed),
                "config " + cfg.config_hash()});
  auto path = cfg.index_path();
  idx.save_file(path);
  ctx.manifest.add_output(path);
  ctx.log << "index: " << idx.doc_count() << " documents, "
          << idx.vocab_size() << " terms -> " << path.string() << "\n";
  return idx;
}

inline const ProjectionMatrix& train_projection(PipelineContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_file(cfg.lexicon, "lexicon");
  ctx.manifest.add_input(cfg.lexicon);
  auto lex = load_lexicon(cfg.lexicon);
  ctx.log << "lexicon: " << lex.pairs.size() << " pairs ("
          << lex.skipped_multiword << " multi-word and "
          << lex.skipped_malformed << " malformed lines skipped)\n";

  const auto& src = ctx.source_store();
  const auto& tgt = ctx.target_store();
  auto ts = build_training_set(lex, src, tgt, cfg.normalize_before_projection);
  if (ts.skipped_missing)
    ctx.log << "projection: " << ts.skipped_missing
            << " pairs skipped (missing from a store)\n";

  auto pm = learn_projection(ts, cfg.lambda);
  double rmse = projection_rmse(pm, ts);
  ctx.log << "projection: " << pm.output_dim() << " x " << pm.input_dim()
          << " from " << ts.pairs << " pairs, lambda "
          << format_number(cfg.lambda) << ", rmse " << format_number(rmse)
          << "\n";

  auto path = cfg.projection_path();
  pm.save_file(path);
  ctx.manifest.add_output(path);
  ctx.log << "projection: saved to " << path.string() << "\n";
  ctx.cache_projection(std::move(pm));
  return ctx.projection();
}

inline std::vector<TranslatedQuery> translate_topics(PipelineContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_file(cfg.topics, "topics");
  ctx.manifest.add_input(cfg.topics);
  auto topics = load_topics(cfg.topics);
  ctx.log << "topics: " << topics.size() << " queries from " << cfg.topics
          << "\n";
  if (topics.empty()) ctx.log << "topics: warning: no queries to translate\n";

  auto method = *parse_method(cfg.method);
  const auto& stoplist = ctx.source_stopwords();
  const auto& smap = ctx.script_map();
  auto resolve = ctx.ne_resolver();

  const bool needs_embeddings = method != TranslationMethod::dict;
  const bool needs_dictionary = method == TranslationMethod::dict ||
                                method == TranslationMethod::we_dt ||
                                method == TranslationMethod::weighted_dt;
  if (needs_dictionary) require_file(cfg.dictionary, "dictionary");

  auto make = [&](const Topic& t) {
    auto tokens = tokenize(t.title, false);
    if (!smap.empty())
      for (auto& tok : tokens) tok = smap.apply(tok);
    if (needs_embeddings)
      return make_query(t.id, tokens, stoplist, ctx.source_store());
    Query q;
    q.id = t.id;
    q.raw_terms = tokens;
    auto kept = remove_stopwords(tokens, stoplist);
    q.empty_after_stopwords = kept.empty();
    for (auto& tok : kept) q.terms.push_back({tok, TermClass::in_vocab});
    return q;
  };

  std::vector<TranslatedQuery> out;
  out.reserve(topics.size());
  for (const auto& topic : topics) {
    Query q = make(topic);
    if (q.empty_after_stopwords)
      ctx.log << "translate [" << q.id
              << "]: warning: empty after stopword removal\n";
    WeightedQuery wq = [&] {
      switch (method) {
        case TranslationMethod::we:
          return translate_we(q, ctx.projection(), ctx.source_store(),
                              ctx.target_store(), cfg.k, resolve);
        case TranslationMethod::we_weighted:
          return translate_we_weighted(q, ctx.projection(),
                                       ctx.source_store(), ctx.target_store(),
                                       cfg.k, resolve);
        case TranslationMethod::simvec_sum:
        case TranslationMethod::simvec_max:
          return sim_vec_translate(q, ctx.projection(), ctx.source_store(),
                                   ctx.target_store(), cfg.k,
                                   method == TranslationMethod::simvec_sum
                                       ? SimVecMode::sum
                                       : SimVecMode::max,
                                   resolve);
        case TranslationMethod::source_agg_sum:
        case TranslationMethod::source_agg_max:
        case TranslationMethod::source_agg_min:
          return translate_aggregated_source(
              q, ctx.projection(), ctx.source_store(), ctx.target_store(),
              cfg.k,
              method == TranslationMethod::source_agg_sum
                  ? SourceAggMode::sum
                  : method == TranslationMethod::source_agg_max
                        ? SourceAggMode::max
                        : SourceAggMode::min,
              resolve);
        case TranslationMethod::dict:
          return translate_dict(q, ctx.dictionary());
        case TranslationMethod::we_dt:
          return combine_we_dt(
              q, ctx.dictionary(),
              embedding_term_translations(q, ctx.projection(),
                                          ctx.source_store(),
                                          ctx.target_store(), cfg.k),
              resolve);
        case TranslationMethod::weighted_dt:
          return combine_weighted(
              q, ctx.dictionary(),
              embedding_term_translations(q, ctx.projection(),
                                          ctx.source_store(),
                                          ctx.target_store(), cfg.k),
              cfg.dict_weight, resolve);
        case TranslationMethod::external:
          return combine_external(
              q, ctx.external(),
              embedding_term_translations(q, ctx.projection(),
                                          ctx.source_store(),
                                          ctx.target_store(), cfg.k),
              ctx.dictionary(), cfg.external_weight, cfg.external_dict_weight,
              ctx.target_stopwords(), resolve);
      }
      throw internal_error("translate: unhandled method");
    }();
    for (const auto& note : wq.notes())
      ctx.log << "translate [" << q.id << "]: " << note << "\n";
    out.push_back({topic.id, std::move(wq)});
  }

  auto path = cfg.translations_path();
  save_translations(path, out, method, cfg.seed, cfg.config_hash());
  ctx.manifest.add_output(path);
  ctx.log << "translate: " << out.size() << " queries -> " << path.string()
          << "\n";
  return out;
}

inline Run search_queries(PipelineContext& ctx, const InvertedIndex& idx,
                          const std::vector<TranslatedQuery>& queries) {
  const auto& cfg = ctx.cfg;
  Run run;
  std::size_t empty_queries = 0;
  for (const auto& tq : queries) {
    if (tq.query.empty()) {
      ++empty_queries;
      ctx.log << "search [" << tq.qid
              << "]: warning: empty query, no results\n";
    }
    auto results = search(idx, tq.query, cfg.top_n);
    std::vector<RunEntry> entries;
    entries.reserve(results.size());
    for (auto& r : results) entries.push_back({std::move(r.doc_id), r.score});
    run.add_query(tq.qid, std::move(entries));
  }
  auto path = cfg.run_path();
  std::string tag = cfg.run_tag + "-s" + std::to_string(cfg.seed);
  run.save_file(path, tag);
  ctx.manifest.add_output(path);
  ctx.log << "search: " << queries.size() << " queries ("
          << empty_queries << " empty) -> " << path.string() << "\n";
  return run;
}

inline EvalReport evaluate_and_report(PipelineContext& ctx, const Run& run,
                                      std::ostream& out) {
  const auto& cfg = ctx.cfg;
  require_file(cfg.qrels, "qrels");
  ctx.manifest.add_input(cfg.qrels);
  auto qrels = Qrels::load(cfg.qrels);
  auto report = evaluate_run(run, qrels, cfg.evaluate_all_topics);
  for (const auto& s : report.skipped) ctx.log << "evaluate: " << s << "\n";

  auto text = render_report(report);
  out << text;
  auto path = std::filesystem::path(cfg.out_dir) / "metrics.txt";
  write_file(path, "# seed " + std::to_string(cfg.seed) + "\n# config " +
                       cfg.config_hash() + "\n" + text);
  ctx.manifest.add_output(path);
  ctx.log << "evaluate: " << report.evaluated << " queries -> "
          << path.string() << "\n";
  return report;
}

inline void cmd_index(const Config& cfg, std::ostream&, std::ostream& log) {
  PipelineContext ctx(cfg, log, "index");
  build_index(ctx);
  ctx.manifest.write();
}

inline void cmd_train_projection(const Config& cfg, std::ostream&,
                                 std::ostream& log) {
  PipelineContext ctx(cfg, log, "train-projection");
  train_projection(ctx);
  ctx.manifest.write();
}

inline void cmd_translate(const Config& cfg, std::ostream&,
                          std::ostream& log) {
  PipelineContext ctx(cfg, log, "translate");
  translate_topics(ctx);
  ctx.manifest.write();
}

inline void cmd_search(const Config& cfg, std::ostream&, std::ostream& log) {
  PipelineContext ctx(cfg, log, "search");
  auto index_path = cfg.index_path();
  if (!std::filesystem::exists(index_path))
    throw config_error("config: index not found: " + index_path.string() +
                       " (run the index command first)");
  ctx.manifest.add_input(index_path);
  auto idx = InvertedIndex::load_file(index_path);
  ctx.log << "index: " << idx.doc_count() << " documents, "
          << idx.vocab_size() << " terms\n";

  auto tr_path = cfg.translations_path();
  if (!std::filesystem::exists(tr_path))
    throw config_error("config: translations not found: " + tr_path.string() +
                       " (run the translate command first)");
  ctx.manifest.add_input(tr_path);
  auto queries = load_translations(tr_path);
  search_queries(ctx, idx, queries);
  ctx.manifest.write();
}

inline void cmd_evaluate(const Config& cfg, std::ostream& out,
                         std::ostream& log) {
  PipelineContext ctx(cfg, log, "evaluate");
  auto run_path = cfg.run_path();
  if (!std::filesystem::exists(run_path))
    throw config_error("config: run not found: " + run_path.string() +
                       " (run the search command first)");
  ctx.manifest.add_input(run_path);
  auto run = Run::load(run_path);
  for (const auto& qid : run.resort_warnings())
    ctx.log << "run [" << qid
            << "]: stored rank order disagrees with scores, re-sorted\n";
  evaluate_and_report(ctx, run, out);
  ctx.manifest.write();
}

/// End-to-end: index, embeddings + projection, translate, search, evaluate.
/// Each stage logs under its name; a failure halts the pipeline with the
/// stage name in the error message.
inline void cmd_pipeline(const Config& cfg, std::ostream& out,
                         std::ostream& log) {
  PipelineContext ctx(cfg, log, "pipeline");
  auto idx = detail::stage("index", [&] { return build_index(ctx); });

  auto method = *parse_method(cfg.method);
  if (method == TranslationMethod::dict) {
    log << "stage projection: skipped (dictionary-only method)\n";
  } else if (!cfg.lexicon.empty()) {
    detail::stage("projection", [&] { return train_projection(ctx); });
  } else if (ctx.has_projection_file()) {
    log << "stage projection: using existing "
        << cfg.projection_path().string() << "\n";
  } else {
    throw config_error(
        "stage projection: config: 'lexicon' (to train) or an existing "
        "projection file is required");
  }

  auto queries =
      detail::stage("translate", [&] { return translate_topics(ctx); });
  auto run = detail::stage(
      "search", [&] { return search_queries(ctx, idx, queries); });
  detail::stage("evaluate",
                [&] { return evaluate_and_report(ctx, run, out); });
  ctx.manifest.write();
}

}  // namespace clir
