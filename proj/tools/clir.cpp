// clir: Hindi-to-English cross-language retrieval from the command line.
//
// Subcommands cover the full pipeline: corpus indexing, bilingual
// projection training, query translation, ranked retrieval and trec-style
// evaluation. A JSON config file drives everything; any option can be
// overridden per flag. Exit codes: 0 success, 1 usage or configuration
// error, 2 bad input data, 3 internal fault.

#include <cstdint>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clir/config.hpp"
#include "clir/error.hpp"
#include "clir/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cross-language information retrieval toolkit"};
  app.set_version_flag("--version", "clir 1.0.0");
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  clir::ConfigOverrides ov;
  std::vector<std::function<void()>> sync;

  auto opt_str = [&](const char* flag, std::optional<std::string>& dst,
                     const char* help) {
    auto stor = std::make_shared<std::string>();
    CLI::Option* o = app.add_option(flag, *stor, help);
    sync.push_back([o, stor, &dst] {
      if (o->count()) dst = *stor;
    });
  };
  auto opt_size = [&](const char* flag, std::optional<std::size_t>& dst,
                      const char* help) {
    auto stor = std::make_shared<std::size_t>();
    CLI::Option* o = app.add_option(flag, *stor, help);
    sync.push_back([o, stor, &dst] {
      if (o->count()) dst = *stor;
    });
  };
  auto opt_u64 = [&](const char* flag, std::optional<std::uint64_t>& dst,
                     const char* help) {
    auto stor = std::make_shared<std::uint64_t>();
    CLI::Option* o = app.add_option(flag, *stor, help);
    sync.push_back([o, stor, &dst] {
      if (o->count()) dst = *stor;
    });
  };
  auto opt_dbl = [&](const char* flag, std::optional<double>& dst,
                     const char* help) {
    auto stor = std::make_shared<double>();
    CLI::Option* o = app.add_option(flag, *stor, help);
    sync.push_back([o, stor, &dst] {
      if (o->count()) dst = *stor;
    });
  };
  auto opt_flag = [&](const char* flag, std::optional<bool>& dst,
                      const char* help) {
    CLI::Option* o = app.add_flag(flag);
    o->description(help);
    sync.push_back([o, &dst] {
      if (o->count()) dst = true;
    });
  };

  opt_str("--corpus", ov.corpus, "document corpus (SGML file or directory)");
  opt_str("--corpus-mode", ov.corpus_mode, "corpus layout: sgml or dir");
  opt_str("--topics", ov.topics, "topic file, qid<TAB>title per line");
  opt_str("--qrels", ov.qrels, "relevance judgments, trec qrels format");
  opt_str("--lexicon", ov.lexicon,
          "projection training lexicon, source<TAB>target per line");
  opt_str("--dictionary", ov.dictionary,
          "bilingual dictionary for hybrid methods");
  opt_str("--external", ov.external_translations,
          "external translator output, qid<TAB>text per line");
  opt_str("--ne-list", ov.ne_list, "named-entity list, one per line");
  opt_str("--translit-table", ov.translit_table,
          "transliteration table (built-in ITrans rules when omitted)");
  opt_str("--script-map", ov.script_map,
          "romanization rewrite rules, from<TAB>to per line");
  opt_str("--source-embeddings", ov.source_embeddings,
          "source-language word vectors, word2vec text format");
  opt_str("--target-embeddings", ov.target_embeddings,
          "target-language word vectors, word2vec text format");
  opt_str("--source-corpus", ov.source_corpus,
          "monolingual source text to train vectors on");
  opt_str("--target-corpus", ov.target_corpus,
          "monolingual target text to train vectors on");
  opt_str("--source-stopwords", ov.source_stopwords,
          "source-language stopword list");
  opt_str("--target-stopwords", ov.target_stopwords,
          "target-language stopword list");
  opt_str("--projection", ov.projection, "projection matrix file");
  opt_str("--index", ov.index, "inverted index file");
  opt_str("--translations", ov.translations, "translated queries file");
  opt_str("--run", ov.run, "retrieval run file");
  opt_str("--out-dir", ov.out_dir, "artifact output directory");
  opt_str("--method", ov.method,
          "translation method: we, we-weighted, simvec-sum, simvec-max, "
          "source-agg-sum, source-agg-max, source-agg-min, dict, we-dt, "
          "weighted-dt, external");
  opt_str("--tag", ov.run_tag, "run tag prefix for the run file");
  opt_size("--k", ov.k, "translations kept per term (or per query)");
  opt_size("--top-n", ov.top_n, "results kept per query");
  opt_size("--cap", ov.candidate_cap,
           "transliteration candidates generated per word");
  opt_dbl("--lambda", ov.lambda, "ridge regularizer for the projection");
  opt_dbl("--theta", ov.theta,
          "named-entity match threshold, edit distance over length");
  opt_dbl("--dict-weight", ov.dict_weight,
          "dictionary mass per term for weighted-dt");
  opt_dbl("--external-weight", ov.external_weight,
          "external-translation mass for the external method");
  opt_dbl("--external-dict-weight", ov.external_dict_weight,
          "dictionary mass for the external method");
  opt_u64("--seed", ov.seed, "seed for embedding training and run tags");
  opt_flag("--normalize-projection", ov.normalize_before_projection,
           "unit-normalize vectors before learning the projection");
  opt_flag("--evaluate-all-topics", ov.evaluate_all_topics,
           "count every qrels topic, scoring missing ones as zero");

  auto* c_index = app.add_subcommand(
      "index", "build an inverted index from a document corpus");
  auto* c_train = app.add_subcommand(
      "train-projection", "learn the bilingual projection from a lexicon");
  auto* c_translate = app.add_subcommand(
      "translate", "translate topics into weighted target-language queries");
  auto* c_search =
      app.add_subcommand("search", "run translated queries against an index");
  auto* c_evaluate = app.add_subcommand(
      "evaluate", "score a run against relevance judgments");
  auto* c_pipeline = app.add_subcommand(
      "pipeline", "index, train, translate, search and evaluate end to end");
  for (auto* c : {c_index, c_train, c_translate, c_search, c_evaluate,
                  c_pipeline})
    c->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (auto& f : sync) f();

  try {
    clir::Config cfg = config_path.empty() ? clir::Config{}
                                           : clir::Config::load(config_path);
    ov.apply(cfg);

    std::ostream& out = std::cout;
    std::ostream& log = std::cerr;
    if (c_index->parsed()) clir::cmd_index(cfg, out, log);
    else if (c_train->parsed()) clir::cmd_train_projection(cfg, out, log);
    else if (c_translate->parsed()) clir::cmd_translate(cfg, out, log);
    else if (c_search->parsed()) clir::cmd_search(cfg, out, log);
    else if (c_evaluate->parsed()) clir::cmd_evaluate(cfg, out, log);
    else if (c_pipeline->parsed()) clir::cmd_pipeline(cfg, out, log);
  } catch (const clir::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const clir::internal_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const clir::data_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
