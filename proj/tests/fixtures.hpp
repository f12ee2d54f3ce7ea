#pragma once

// Shared test fixtures: scratch directories, small hand-built embedding
// stores and the generators behind the synthetic retrieval testbed.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "clir/embedding.hpp"
#include "clir/linalg.hpp"
#include "clir/projection.hpp"
#include "clir/text.hpp"

namespace fixtures {

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    dir_ = std::filesystem::temp_directory_path() /
           ("clir-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return dir_; }

  std::filesystem::path file(const std::string& name,
                             const std::string& content) const {
    auto p = dir_ / name;
    clir::write_file(p, content);
    return p;
  }

 private:
  std::filesystem::path dir_;
};

inline clir::EmbeddingStore make_store(
    const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
  std::vector<std::string> vocab;
  std::vector<float> data;
  std::size_t dim = rows.empty() ? 0 : rows.front().second.size();
  for (const auto& [word, vec] : rows) {
    vocab.push_back(word);
    data.insert(data.end(), vec.begin(), vec.end());
  }
  return clir::EmbeddingStore(std::move(vocab), dim, std::move(data));
}

/// Five English words on the unit circle; the first component is the cosine
/// against (1, 0), so similarities are read straight off the fixture.
inline clir::EmbeddingStore sports_target_store() {
  auto row = [](float c) {
    return std::vector<float>{c, std::sqrt(1.0f - c * c)};
  };
  return make_store({{"cricket", row(0.64f)},
                     {"football", row(0.69f)},
                     {"game", row(0.8f)},
                     {"laptop", row(0.32f)},
                     {"computer", row(0.25f)}});
}

inline clir::EmbeddingStore sports_source_store() {
  return make_store({{"khela", {1.0f, 0.0f}}});
}

inline clir::ProjectionMatrix identity_projection(std::size_t d) {
  return clir::ProjectionMatrix(clir::Matrix::identity(d), 0.0, 1);
}

inline clir::EmbeddingStore random_store(std::mt19937_64& rng, std::size_t n,
                                         std::size_t dim,
                                         const std::string& prefix) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<std::pair<std::string, std::vector<float>>> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> v(dim);
    for (auto& x : v) x = u(rng);
    rows.emplace_back(prefix + std::to_string(i), std::move(v));
  }
  return make_store(rows);
}

/// Runs the CLI binary and captures exit code, stdout and stderr.
struct CliResult {
  int code;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::string& args,
                         const std::filesystem::path& scratch) {
  auto out_f = scratch / "cli-stdout.txt";
  auto err_f = scratch / "cli-stderr.txt";
  std::string cmd = std::string(CLIR_CLI_PATH) + " " + args + " >" +
                    out_f.string() + " 2>" + err_f.string();
  int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = clir::read_file(out_f);
  r.err = clir::read_file(err_f);
  return r;
}

// ---------------------------------------------------------------------------
// Synthetic bilingual testbed.
//
// A fixed set of topics, each owning a block of word ids; both languages
// realize the same topic model with independent random streams. Source
// word i is "s<i>", target word i is "t<i>", so "s<i> -> t<i>" is the
// ground-truth translation of every content word. Sentences draw most
// tokens from their topic's block and the rest from a shared pool of
// common words, which gives each topic a tight cooccurrence cluster that
// embedding training can recover.

struct Testbed {
  std::size_t topics = 20;
  std::size_t words_per_topic = 15;
  std::size_t common_words = 30;

  std::size_t content_words() const { return topics * words_per_topic; }
  std::size_t first_common() const { return content_words(); }
  std::size_t vocab_size() const { return content_words() + common_words; }

  std::size_t topic_of(std::size_t word) const {
    return word / words_per_topic;  // content words only
  }

  std::string source_word(std::size_t i) const {
    return "s" + std::to_string(i);
  }
  std::string target_word(std::size_t i) const {
    return "t" + std::to_string(i);
  }

  /// One sentence per line. Every sentence belongs to one topic; 80% of its
  /// tokens come from the topic block, the rest from the common pool.
  std::string corpus(std::uint64_t seed, bool target_side,
                     std::size_t sentences, std::size_t sentence_len) const {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_topic(0, topics - 1);
    std::uniform_int_distribution<std::size_t> pick_in_topic(
        0, words_per_topic - 1);
    std::uniform_int_distribution<std::size_t> pick_common(
        first_common(), vocab_size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::string text;
    for (std::size_t s = 0; s < sentences; ++s) {
      std::size_t topic = pick_topic(rng);
      for (std::size_t i = 0; i < sentence_len; ++i) {
        std::size_t word = u(rng) < 0.8
                               ? topic * words_per_topic + pick_in_topic(rng)
                               : pick_common(rng);
        if (i) text += ' ';
        text += target_side ? target_word(word) : source_word(word);
      }
      text += '\n';
    }
    return text;
  }

  /// Target-language documents, a fixed number per topic, each labeled
  /// dt<topic>x<j>. Document text comes from the target topic model.
  std::string sgml_corpus(std::uint64_t seed, std::size_t docs_per_topic,
                          std::size_t doc_len) const {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_in_topic(
        0, words_per_topic - 1);
    std::uniform_int_distribution<std::size_t> pick_common(
        first_common(), vocab_size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::string text;
    for (std::size_t topic = 0; topic < topics; ++topic) {
      for (std::size_t j = 0; j < docs_per_topic; ++j) {
        text += "<DOC>\n<DOCNO>dt" + std::to_string(topic) + "x" +
                std::to_string(j) + "</DOCNO>\n<TEXT>\n";
        for (std::size_t i = 0; i < doc_len; ++i) {
          std::size_t word = u(rng) < 0.8
                                 ? topic * words_per_topic + pick_in_topic(rng)
                                 : pick_common(rng);
          if (i) text += ' ';
          text += target_word(word);
        }
        text += "\n</TEXT>\n</DOC>\n";
      }
    }
    return text;
  }

  /// Relevance judgments: every document of a query's topic is relevant.
  std::string qrels(const std::vector<std::size_t>& query_topics,
                    std::size_t docs_per_topic) const {
    std::string text;
    for (std::size_t qi = 0; qi < query_topics.size(); ++qi) {
      for (std::size_t j = 0; j < docs_per_topic; ++j)
        text += "q" + std::to_string(qi + 1) + " 0 dt" +
                std::to_string(query_topics[qi]) + "x" + std::to_string(j) +
                " 1\n";
    }
    return text;
  }
};

}  // namespace fixtures
