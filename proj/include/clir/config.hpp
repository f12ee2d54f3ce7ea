#pragma once

// Declarative run configuration: one JSON file, optionally overridden
// per-flag by the CLI. Unknown keys are rejected so typos fail fast.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "clir/cbow.hpp"
#include "clir/error.hpp"
#include "clir/text.hpp"
#include "clir/translation.hpp"

namespace clir {

struct Config {
  // input paths (empty = not configured)
  std::string corpus;
  std::string corpus_mode = "sgml";  // sgml | dir
  std::string topics;
  std::string qrels;
  std::string lexicon;
  std::string dictionary;
  std::string external_translations;
  std::string ne_list;
  std::string translit_table;  // built-in ITrans table when empty
  std::string script_map;
  std::string source_embeddings;
  std::string target_embeddings;
  std::string source_corpus;  // CBOW training input when embeddings absent
  std::string target_corpus;
  std::string source_stopwords;
  std::string target_stopwords;
  // artifact paths; when empty, resolved inside out_dir
  std::string projection;
  std::string index;
  std::string translations;
  std::string run;

  std::string out_dir = "out";
  std::string method = "we";
  std::string run_tag = "clir";
  std::size_t k = 5;
  std::size_t top_n = 1000;
  std::size_t candidate_cap = 256;
  double lambda = 1e-3;
  double theta = 0.5;
  double dict_weight = 0.2;
  double external_weight = 0.6;
  double external_dict_weight = 0.1;
  bool normalize_before_projection = false;
  bool evaluate_all_topics = false;
  std::uint64_t seed = 42;
  CbowConfig cbow;

  static Config from_json(const nlohmann::json& j) {
    Config c;
    if (!j.is_object()) throw config_error("config: expected a JSON object");
    auto get_string = [](const nlohmann::json& v, const char* key) {
      if (!v.is_string())
        throw config_error(std::string("config: '") + key +
                           "' must be a string");
      return v.get<std::string>();
    };
    auto get_size = [](const nlohmann::json& v, const char* key) {
      if (!v.is_number_unsigned())
        throw config_error(std::string("config: '") + key +
                           "' must be a non-negative integer");
      return v.get<std::uint64_t>();
    };
    auto get_double = [](const nlohmann::json& v, const char* key) {
      if (!v.is_number())
        throw config_error(std::string("config: '") + key +
                           "' must be a number");
      return v.get<double>();
    };
    auto get_bool = [](const nlohmann::json& v, const char* key) {
      if (!v.is_boolean())
        throw config_error(std::string("config: '") + key +
                           "' must be a boolean");
      return v.get<bool>();
    };
    for (const auto& [key, value] : j.items()) {
      if (key == "corpus") c.corpus = get_string(value, "corpus");
      else if (key == "corpus_mode") c.corpus_mode = get_string(value, "corpus_mode");
      else if (key == "topics") c.topics = get_string(value, "topics");
      else if (key == "qrels") c.qrels = get_string(value, "qrels");
      else if (key == "lexicon") c.lexicon = get_string(value, "lexicon");
      else if (key == "dictionary") c.dictionary = get_string(value, "dictionary");
      else if (key == "external_translations")
        c.external_translations = get_string(value, "external_translations");
      else if (key == "ne_list") c.ne_list = get_string(value, "ne_list");
      else if (key == "translit_table")
        c.translit_table = get_string(value, "translit_table");
      else if (key == "script_map") c.script_map = get_string(value, "script_map");
      else if (key == "source_embeddings")
        c.source_embeddings = get_string(value, "source_embeddings");
      else if (key == "target_embeddings")
        c.target_embeddings = get_string(value, "target_embeddings");
      else if (key == "source_corpus")
        c.source_corpus = get_string(value, "source_corpus");
      else if (key == "target_corpus")
        c.target_corpus = get_string(value, "target_corpus");
      else if (key == "source_stopwords")
        c.source_stopwords = get_string(value, "source_stopwords");
      else if (key == "target_stopwords")
        c.target_stopwords = get_string(value, "target_stopwords");
      else if (key == "projection") c.projection = get_string(value, "projection");
      else if (key == "index") c.index = get_string(value, "index");
      else if (key == "translations")
        c.translations = get_string(value, "translations");
      else if (key == "run") c.run = get_string(value, "run");
      else if (key == "out_dir") c.out_dir = get_string(value, "out_dir");
      else if (key == "method") c.method = get_string(value, "method");
      else if (key == "run_tag") c.run_tag = get_string(value, "run_tag");
      else if (key == "k") c.k = get_size(value, "k");
      else if (key == "top_n") c.top_n = get_size(value, "top_n");
      else if (key == "candidate_cap")
        c.candidate_cap = get_size(value, "candidate_cap");
      else if (key == "lambda") c.lambda = get_double(value, "lambda");
      else if (key == "theta") c.theta = get_double(value, "theta");
      else if (key == "dict_weight")
        c.dict_weight = get_double(value, "dict_weight");
      else if (key == "external_weight")
        c.external_weight = get_double(value, "external_weight");
      else if (key == "external_dict_weight")
        c.external_dict_weight = get_double(value, "external_dict_weight");
      else if (key == "normalize_before_projection")
        c.normalize_before_projection =
            get_bool(value, "normalize_before_projection");
      else if (key == "evaluate_all_topics")
        c.evaluate_all_topics = get_bool(value, "evaluate_all_topics");
      else if (key == "seed") c.seed = get_size(value, "seed");
      else if (key == "cbow") {
        if (!value.is_object())
          throw config_error("config: 'cbow' must be an object");
        for (const auto& [ck, cv] : value.items()) {
          if (ck == "dim") c.cbow.dim = get_size(cv, "cbow.dim");
          else if (ck == "window") c.cbow.window = get_size(cv, "cbow.window");
          else if (ck == "negative")
            c.cbow.negative = get_size(cv, "cbow.negative");
          else if (ck == "epochs") c.cbow.epochs = get_size(cv, "cbow.epochs");
          else if (ck == "min_count")
            c.cbow.min_count = get_size(cv, "cbow.min_count");
          else if (ck == "learning_rate")
            c.cbow.learning_rate = get_double(cv, "cbow.learning_rate");
          else if (ck == "lr_floor_factor")
            c.cbow.lr_floor_factor = get_double(cv, "cbow.lr_floor_factor");
          else
            throw config_error("config: unknown key 'cbow." + ck + "'");
        }
      } else {
        throw config_error("config: unknown key '" + key + "'");
      }
    }
    c.validate_common();
    return c;
  }

  static Config load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
      throw config_error("config: file not found: " + path.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw config_error("config: " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }

  void validate_common() const {
    if (!parse_method(method))
      throw config_error("config: unknown method '" + method + "'");
    if (corpus_mode != "sgml" && corpus_mode != "dir")
      throw config_error("config: corpus_mode must be 'sgml' or 'dir'");
    if (k < 1) throw config_error("config: k must be >= 1");
    if (top_n < 1) throw config_error("config: top_n must be >= 1");
    if (candidate_cap < 1)
      throw config_error("config: candidate_cap must be >= 1");
    if (lambda < 0) throw config_error("config: lambda must be >= 0");
    if (theta < 0) throw config_error("config: theta must be >= 0");
    if (!(dict_weight >= 0 && dict_weight <= 1))
      throw config_error("config: dict_weight must be in [0, 1]");
    if (!(external_weight >= 0 && external_dict_weight >= 0 &&
          external_weight + external_dict_weight <= 1))
      throw config_error(
          "config: need external_weight >= 0, external_dict_weight >= 0 and "
          "their sum <= 1");
    if (out_dir.empty()) throw config_error("config: out_dir must be set");
    cbow.validate();
  }

  /// Canonical JSON with every default materialized; key order is sorted by
  /// nlohmann, so the dump is stable and hashable.
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["corpus"] = corpus;
    j["corpus_mode"] = corpus_mode;
    j["topics"] = topics;
    j["qrels"] = qrels;
    j["lexicon"] = lexicon;
    j["dictionary"] = dictionary;
    j["external_translations"] = external_translations;
    j["ne_list"] = ne_list;
    j["translit_table"] = translit_table;
    j["script_map"] = script_map;
    j["source_embeddings"] = source_embeddings;
    j["target_embeddings"] = target_embeddings;
    j["source_corpus"] = source_corpus;
    j["target_corpus"] = target_corpus;
    j["source_stopwords"] = source_stopwords;
    j["target_stopwords"] = target_stopwords;
    j["projection"] = projection;
    j["index"] = index;
    j["translations"] = translations;
    j["run"] = run;
    j["out_dir"] = out_dir;
    j["method"] = method;
    j["run_tag"] = run_tag;
    j["k"] = k;
    j["top_n"] = top_n;
    j["candidate_cap"] = candidate_cap;
    j["lambda"] = lambda;
    j["theta"] = theta;
    j["dict_weight"] = dict_weight;
    j["external_weight"] = external_weight;
    j["external_dict_weight"] = external_dict_weight;
    j["normalize_before_projection"] = normalize_before_projection;
    j["evaluate_all_topics"] = evaluate_all_topics;
    j["seed"] = seed;
    j["cbow"] = {{"dim", cbow.dim},
                 {"window", cbow.window},
                 {"negative", cbow.negative},
                 {"epochs", cbow.epochs},
                 {"min_count", cbow.min_count},
                 {"learning_rate", cbow.learning_rate},
                 {"lr_floor_factor", cbow.lr_floor_factor}};
    return j;
  }

  std::string config_hash() const { return to_hex(fnv1a64(to_json().dump())); }

  // artifact locations, defaulting into out_dir
  std::filesystem::path projection_path() const {
    return projection.empty()
               ? std::filesystem::path(out_dir) / "projection.txt"
               : std::filesystem::path(projection);
  }
  std::filesystem::path index_path() const {
    return index.empty() ? std::filesystem::path(out_dir) / "index.txt"
                         : std::filesystem::path(index);
  }
  std::filesystem::path translations_path() const {
    return translations.empty()
               ? std::filesystem::path(out_dir) / "translations.tsv"
               : std::filesystem::path(translations);
  }
  std::filesystem::path run_path() const {
    return run.empty() ? std::filesystem::path(out_dir) / "run.txt"
                       : std::filesystem::path(run);
  }
};

/// Optional per-flag overrides applied on top of the config file.
struct ConfigOverrides {
  std::optional<std::string> corpus, corpus_mode, topics, qrels, lexicon,
      dictionary, external_translations, ne_list, translit_table, script_map,
      source_embeddings, target_embeddings, source_corpus, target_corpus,
      source_stopwords, target_stopwords, projection, index, translations,
      run, out_dir, method, run_tag;
  std::optional<std::size_t> k, top_n, candidate_cap;
  std::optional<double> lambda, theta, dict_weight, external_weight,
      external_dict_weight;
  std::optional<std::uint64_t> seed;
  std::optional<bool> normalize_before_projection, evaluate_all_topics;

  void apply(Config& c) const {
    auto set = [](auto& field, const auto& opt) {
      if (opt) field = *opt;
    };
    set(c.corpus, corpus);
    set(c.corpus_mode, corpus_mode);
    set(c.topics, topics);
    set(c.qrels, qrels);
    set(c.lexicon, lexicon);
    set(c.dictionary, dictionary);
    set(c.external_translations, external_translations);
    set(c.ne_list, ne_list);
    set(c.translit_table, translit_table);
    set(c.script_map, script_map);
    set(c.source_embeddings, source_embeddings);
    set(c.target_embeddings, target_embeddings);
    set(c.source_corpus, source_corpus);
    set(c.target_corpus, target_corpus);
    set(c.source_stopwords, source_stopwords);
    set(c.target_stopwords, target_stopwords);
    set(c.projection, projection);
    set(c.index, index);
    set(c.translations, translations);
    set(c.run, run);
    set(c.out_dir, out_dir);
    set(c.method, method);
    set(c.run_tag, run_tag);
    set(c.k, k);
    set(c.top_n, top_n);
    set(c.candidate_cap, candidate_cap);
    set(c.lambda, lambda);
    set(c.theta, theta);
    set(c.dict_weight, dict_weight);
    set(c.external_weight, external_weight);
    set(c.external_dict_weight, external_dict_weight);
    set(c.seed, seed);
    set(c.normalize_before_projection, normalize_before_projection);
    set(c.evaluate_all_topics, evaluate_all_topics);
    c.validate_common();
  }
};

}  // namespace clir
