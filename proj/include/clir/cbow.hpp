#pragma once

// Deterministic single-threaded CBOW trainer with negative sampling.
// Follows the original word2vec recipe: context averaging, unigram^0.75
// noise distribution, random window shrink, linear learning-rate decay with
// a floor. All randomness comes from one seeded engine, so a rerun with the
// same corpus, config and seed reproduces the store bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "clir/embedding.hpp"
#include "clir/error.hpp"
#include "clir/text.hpp"

namespace clir {

struct CbowConfig {
  std::size_t dim = 200;
  std::size_t window = 5;
  std::size_t negative = 5;
  std::size_t epochs = 5;
  std::size_t min_count = 5;
  double learning_rate = 0.05;
  double lr_floor_factor = 1e-4;  // floor = learning_rate * lr_floor_factor
  std::uint64_t seed = 1;

  void validate() const {
    if (dim < 1) throw config_error("cbow: dim must be >= 1");
    if (window < 1) throw config_error("cbow: window must be >= 1");
    if (negative < 1) throw config_error("cbow: negative must be >= 1");
    if (epochs < 1) throw config_error("cbow: epochs must be >= 1");
    if (min_count < 1) throw config_error("cbow: min_count must be >= 1");
    if (!(learning_rate > 0.0))
      throw config_error("cbow: learning_rate must be > 0");
    if (!(lr_floor_factor > 0.0) || lr_floor_factor > 1.0)
      throw config_error("cbow: lr_floor_factor must be in (0, 1]");
  }
};

namespace detail {

// Uniform double in [0, 1) from the raw engine stream; independent of any
// distribution implementation so results stay stable everywhere.
inline double next_double(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double sigmoid_clipped(double f) {
  if (f > 6.0) return 1.0;
  if (f < -6.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-f));
}

}  // namespace detail

inline EmbeddingStore train_cbow(
    const std::vector<std::vector<std::string>>& sentences,
    const CbowConfig& cfg) {
  cfg.validate();

  std::unordered_map<std::string, std::size_t> counts;
  std::size_t total_tokens = 0;
  for (const auto& s : sentences)
    for (const auto& t : s) {
      ++counts[t];
      ++total_tokens;
    }

  std::vector<std::pair<std::string, std::size_t>> vocab_counts;
  for (auto& [w, c] : counts)
    if (c >= cfg.min_count) vocab_counts.emplace_back(w, c);
  if (vocab_counts.empty())
    throw data_error("cbow: vocabulary empty after min_count filtering");
  std::sort(vocab_counts.begin(), vocab_counts.end(), [](auto& a, auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> vocab(vocab_counts.size());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocab_counts.size(); ++i) {
    vocab[i] = vocab_counts[i].first;
    index.emplace(vocab[i], i);
  }
  std::size_t v = vocab.size(), dim = cfg.dim;

  // Noise distribution: cumulative unigram counts raised to 0.75, sampled by
  // binary search over the cumulative table.
  std::vector<double> noise_cdf(v);
  double acc = 0.0;
  for (std::size_t i = 0; i < v; ++i) {
    acc += std::pow(static_cast<double>(vocab_counts[i].second), 0.75);
    noise_cdf[i] = acc;
  }

  std::mt19937_64 eng(cfg.seed);
  std::vector<float> syn0(v * dim);
  std::vector<float> syn1(v * dim, 0.0f);
  for (auto& w : syn0)
    w = static_cast<float>((detail::next_double(eng) - 0.5) / dim);

  // Sentences as word indexes, tokens below min_count dropped.
  std::vector<std::vector<std::size_t>> encoded;
  encoded.reserve(sentences.size());
  std::size_t train_words = 0;
  for (const auto& s : sentences) {
    std::vector<std::size_t> ids;
    ids.reserve(s.size());
    for (const auto& t : s) {
      auto it = index.find(t);
      if (it != index.end()) ids.push_back(it->second);
    }
    train_words += ids.size();
    if (!ids.empty()) encoded.push_back(std::move(ids));
  }
  if (train_words == 0)
    throw data_error("cbow: no trainable tokens after filtering");

  const double lr0 = cfg.learning_rate;
  const double lr_floor = lr0 * cfg.lr_floor_factor;
  const double total_steps =
      static_cast<double>(cfg.epochs) * static_cast<double>(train_words);
  std::size_t words_done = 0;
  std::vector<float> neu1(dim), neu1e(dim);

  auto sample_noise = [&](double u) {
    double x = u * noise_cdf.back();
    auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), x);
    return static_cast<std::size_t>(it - noise_cdf.begin());
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& sent : encoded) {
      double lr = std::max(
          lr_floor, lr0 * (1.0 - static_cast<double>(words_done) / total_steps));
      for (std::size_t pos = 0; pos < sent.size(); ++pos) {
        std::size_t word = sent[pos];
        std::size_t shrink = eng() % cfg.window;
        std::size_t lo = pos > cfg.window - shrink ? pos - (cfg.window - shrink) : 0;
        std::size_t hi = std::min(sent.size() - 1, pos + cfg.window - shrink);

        std::fill(neu1.begin(), neu1.end(), 0.0f);
        std::fill(neu1e.begin(), neu1e.end(), 0.0f);
        std::size_t cw = 0;
        for (std::size_t p = lo; p <= hi; ++p) {
          if (p == pos) continue;
          const float* ctx = syn0.data() + sent[p] * dim;
          for (std::size_t j = 0; j < dim; ++j) neu1[j] += ctx[j];
          ++cw;
        }
        if (cw == 0) continue;
        for (std::size_t j = 0; j < dim; ++j)
          neu1[j] /= static_cast<float>(cw);

        for (std::size_t d = 0; d <= cfg.negative; ++d) {
          std::size_t target;
          double label;
          if (d == 0) {
            target = word;
            label = 1.0;
          } else {
            target = sample_noise(detail::next_double(eng));
            if (target == word) continue;
            label = 0.0;
          }
          float* out = syn1.data() + target * dim;
          double f = 0.0;
          for (std::size_t j = 0; j < dim; ++j)
            f += static_cast<double>(neu1[j]) * out[j];
          float g =
              static_cast<float>((label - detail::sigmoid_clipped(f)) * lr);
          for (std::size_t j = 0; j < dim; ++j) {
            neu1e[j] += g * out[j];
            out[j] += g * neu1[j];
          }
        }
        for (std::size_t p = lo; p <= hi; ++p) {
          if (p == pos) continue;
          float* ctx = syn0.data() + sent[p] * dim;
          for (std::size_t j = 0; j < dim; ++j) ctx[j] += neu1e[j];
        }
      }
      words_done += sent.size();
    }
  }

  return EmbeddingStore(std::move(vocab), dim, std::move(syn0));
}

/// Trains on a text file, one sentence per line, tokens split on
/// non-letter/non-digit characters. With `fold_case`, tokens are
/// ASCII-lowercased before counting.
inline EmbeddingStore train_cbow_file(const std::filesystem::path& corpus,
                                      const CbowConfig& cfg, bool fold_case) {
  std::vector<std::vector<std::string>> sentences;
  for (const auto& line : read_lines(corpus)) {
    auto toks = tokenize(line, fold_case);
    if (!toks.empty()) sentences.push_back(std::move(toks));
  }
  if (sentences.empty())
    throw data_error("cbow: corpus is empty: " + corpus.string());
  return train_cbow(sentences, cfg);
}

}  // namespace clir
