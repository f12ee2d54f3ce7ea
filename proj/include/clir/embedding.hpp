#pragma once

// Word-embedding store with word2vec-compatible text serialization, cosine
// similarity and exhaustive k-nearest-neighbor lookup. Vectors are kept as
// float32; all similarity arithmetic accumulates in float64. Stores are
// immutable after construction and safe to share across threads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clir/error.hpp"
#include "clir/text.hpp"

namespace clir {

namespace detail {

template <typename A, typename B>
double cosine_impl(std::span<const A> a, std::span<const B> b) {
  if (a.size() != b.size())
    throw internal_error("cosine: dimension mismatch " +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double x = static_cast<double>(a[i]);
    double y = static_cast<double>(b[i]);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0)
    throw degenerate_input_error("cosine: zero vector has no direction");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

template <typename T>
double dot_product(std::span<const T> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

}  // namespace detail

inline double cosine(std::span<const float> a, std::span<const float> b) {
  return detail::cosine_impl(a, b);
}
inline double cosine(std::span<const double> a, std::span<const double> b) {
  return detail::cosine_impl(a, b);
}
inline double cosine(std::span<const double> a, std::span<const float> b) {
  return detail::cosine_impl(a, b);
}
inline double cosine(std::span<const float> a, std::span<const double> b) {
  return detail::cosine_impl(a, b);
}

class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  EmbeddingStore(std::vector<std::string> vocab, std::size_t dim,
                 std::vector<float> data, bool normalized = false)
      : vocab_(std::move(vocab)),
        dim_(dim),
        data_(std::move(data)),
        normalized_(normalized) {
    if (data_.size() != vocab_.size() * dim_)
      throw internal_error("embedding store: data size does not match vocab");
    index_.reserve(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      auto [it, inserted] = index_.emplace(vocab_[i], i);
      if (!inserted)
        throw data_error("embedding store: duplicate word '" + vocab_[i] + "'");
    }
    mark_degenerate();
  }

  /// Parses the word2vec text format: a "<count> <dim>" header line, then one
  /// "<word> <v1> ... <v_dim>" line per word. A single trailing space per row
  /// is tolerated (the reference tool emits one); anything else is rejected
  /// with its line number. With `fold_case`, words are ASCII-lowercased on
  /// load.
  static EmbeddingStore load_text(std::istream& in, bool fold_case = false) {
    std::string line;
    if (!std::getline(in, line))
      throw format_error("embedding file: missing header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto head = split_ws(line);
    std::optional<std::size_t> count, dim;
    if (head.size() == 2) {
      count = parse_size(head[0]);
      dim = parse_size(head[1]);
    }
    if (!count || !dim || *dim == 0)
      throw format_error("embedding file: header must be '<count> <dim>'", 1);

    std::vector<std::string> vocab;
    std::vector<float> data;
    vocab.reserve(*count);
    data.reserve(*count * *dim);
    std::size_t lineno = 1;
    while (vocab.size() < *count) {
      if (!std::getline(in, line))
        throw format_error("embedding file: expected " +
                               std::to_string(*count) + " rows, got " +
                               std::to_string(vocab.size()),
                           lineno);
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line.back() == ' ') line.pop_back();
      auto fields = split_on(line, ' ');
      if (fields.size() != *dim + 1)
        throw format_error("embedding file: expected word + " +
                               std::to_string(*dim) + " values, got " +
                               std::to_string(fields.size()) + " fields",
                           lineno);
      std::string word = fold_case ? fold_ascii(fields[0]) : fields[0];
      if (word.empty())
        throw format_error("embedding file: empty word", lineno);
      for (std::size_t i = 1; i < fields.size(); ++i) {
        auto v = parse_number<float>(fields[i]);
        if (!v || !std::isfinite(*v))
          throw format_error(
              "embedding file: non-finite or unparsable value '" + fields[i] +
                  "'",
              lineno);
        data.push_back(*v);
      }
      vocab.push_back(std::move(word));
    }
    while (std::getline(in, line)) {
      ++lineno;
      if (!trim(line).empty())
        throw format_error("embedding file: trailing content after " +
                               std::to_string(*count) + " rows",
                           lineno);
    }
    try {
      return EmbeddingStore(std::move(vocab), *dim, std::move(data));
    } catch (const data_error& e) {
      throw format_error(std::string("embedding file: ") + e.what(), 0);
    }
  }

  static EmbeddingStore load_text_file(const std::filesystem::path& path,
                                       bool fold_case = false) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open embeddings: " + path.string());
    return load_text(in, fold_case);
  }

  /// Writes the word2vec text format with shortest round-trip float
  /// formatting, single-space separators, no trailing spaces.
  void save_text(std::ostream& out) const {
    out << vocab_.size() << ' ' << dim_ << '\n';
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      out << vocab_[i];
      const float* row = data_.data() + i * dim_;
      for (std::size_t j = 0; j < dim_; ++j)
        out << ' ' << format_number(row[j]);
      out << '\n';
    }
  }

  void save_text_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write embeddings: " + path.string());
    save_text(out);
    if (!out) throw data_error("short write: " + path.string());
  }

  std::size_t size() const { return vocab_.size(); }
  std::size_t dim() const { return dim_; }
  bool is_normalized() const { return normalized_; }

  bool contains(std::string_view word) const {
    return index_.find(std::string(word)) != index_.end();
  }

  std::optional<std::size_t> index_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return {};
    return it->second;
  }

  const std::string& word_at(std::size_t i) const { return vocab_[i]; }

  std::span<const float> vector_at(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  std::span<const float> vector_of(std::string_view word) const {
    auto i = index_of(word);
    if (!i) throw data_error("embedding store: unknown word '" +
                             std::string(word) + "'");
    return vector_at(*i);
  }

  /// True for rows with zero norm; such rows cannot participate in cosine
  /// similarity and are skipped by nearest_neighbors.
  bool is_degenerate(std::size_t i) const { return degenerate_[i]; }

  /// Returns a copy with every non-degenerate row scaled to unit L2 norm.
  /// Degenerate (all-zero) rows are kept as-is and stay flagged.
  EmbeddingStore normalized() const {
    std::vector<float> data(data_);
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      double n = 0.0;
      float* row = data.data() + i * dim_;
      for (std::size_t j = 0; j < dim_; ++j)
        n += static_cast<double>(row[j]) * row[j];
      if (n == 0.0) continue;
      double inv = 1.0 / std::sqrt(n);
      for (std::size_t j = 0; j < dim_; ++j)
        row[j] = static_cast<float>(row[j] * inv);
    }
    return EmbeddingStore(vocab_, dim_, std::move(data), true);
  }

 private:
  void mark_degenerate() {
    degenerate_.assign(vocab_.size(), false);
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      const float* row = data_.data() + i * dim_;
      bool zero = true;
      for (std::size_t j = 0; j < dim_ && zero; ++j) zero = (row[j] == 0.0f);
      degenerate_[i] = zero;
    }
  }

  std::vector<std::string> vocab_;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<bool> degenerate_;
  bool normalized_ = false;
};

struct Neighbor {
  std::string word;
  std::size_t index;
  double score;
};

namespace detail {

template <typename T>
std::vector<Neighbor> nearest_neighbors_impl(
    const EmbeddingStore& store, std::span<const T> query, std::size_t k,
    const std::unordered_set<std::string>& exclude) {
  if (k < 1) throw config_error("nearest_neighbors: k must be >= 1");
  if (query.size() != store.dim())
    throw data_error("nearest_neighbors: query dimension " +
                     std::to_string(query.size()) + " does not match store " +
                     std::to_string(store.dim()));
  double qn = 0.0;
  for (T v : query) qn += static_cast<double>(v) * static_cast<double>(v);
  if (qn == 0.0)
    throw degenerate_input_error("nearest_neighbors: zero query vector");
  double qinv = 1.0 / std::sqrt(qn);

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store.is_degenerate(i)) continue;
    if (!exclude.empty() && exclude.count(store.word_at(i))) continue;
    auto row = store.vector_at(i);
    double dot = dot_product(query, row);
    double rn = dot_product(row, row);
    scored.emplace_back(dot * qinv / std::sqrt(rn), i);
  }
  auto better = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                    better);
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    out.push_back({store.word_at(scored[i].second), scored[i].second,
                   scored[i].first});
  return out;
}

}  // namespace detail

/// Exhaustive scan for the k most cosine-similar words. Ties break toward
/// the lower vocabulary index. Degenerate rows and excluded words are
/// skipped; fewer than k results only when the remaining vocabulary is
/// exhausted.
inline std::vector<Neighbor> nearest_neighbors(
    const EmbeddingStore& store, std::span<const double> query, std::size_t k,
    const std::unordered_set<std::string>& exclude = {}) {
  return detail::nearest_neighbors_impl(store, query, k, exclude);
}

inline std::vector<Neighbor> nearest_neighbors(
    const EmbeddingStore& store, std::span<const float> query, std::size_t k,
    const std::unordered_set<std::string>& exclude = {}) {
  return detail::nearest_neighbors_impl(store, query, k, exclude);
}

}  // namespace clir
