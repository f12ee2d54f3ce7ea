#pragma once

// Linear projection from the source embedding space into the target space,
// learned from a bilingual lexicon by ridge regression:
//
//   W = argmin sum_i ||W x_i - y_i||^2 + lambda ||W||_F^2
//
// solved in closed form via Cholesky on the normal equations:
//   (X X^T + lambda I) W^T = X Y^T.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clir/embedding.hpp"
#include "clir/error.hpp"
#include "clir/linalg.hpp"
#include "clir/text.hpp"

namespace clir {

struct TranslationLexicon {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t skipped_multiword = 0;
  std::size_t skipped_malformed = 0;
};

/// Parses "source<TAB>target" lines. Entries whose target contains internal
/// whitespace (multi-word translations) are skipped and counted, as are
/// blank or tab-less lines.
inline TranslationLexicon load_lexicon(const std::filesystem::path& path) {
  TranslationLexicon lex;
  std::size_t lineno = 0;
  for (const auto& raw : read_lines(path)) {
    ++lineno;
    if (trim(raw).empty()) continue;
    auto tab = raw.find('\t');
    if (tab == std::string::npos) {
      ++lex.skipped_malformed;
      continue;
    }
    std::string src(trim(raw.substr(0, tab)));
    std::string tgt(trim(raw.substr(tab + 1)));
    if (src.empty() || tgt.empty()) {
      ++lex.skipped_malformed;
      continue;
    }
    if (tgt.find_first_of(" \t") != std::string::npos) {
      ++lex.skipped_multiword;
      continue;
    }
    lex.pairs.emplace_back(std::move(src), std::move(tgt));
  }
  return lex;
}

/// Paired training vectors as column matrices: X is d1 x n, Y is d2 x n.
struct TrainingSet {
  Matrix x;
  Matrix y;
  std::size_t pairs = 0;
  std::size_t skipped_missing = 0;
};

/// Collects (x, y) vector pairs for every lexicon entry found in both
/// stores; a source word with several translations contributes one pair per
/// translation. With `pre_normalize`, vectors are scaled to unit norm first
/// (zero vectors are skipped and counted as missing).
inline TrainingSet build_training_set(const TranslationLexicon& lex,
                                      const EmbeddingStore& src,
                                      const EmbeddingStore& tgt,
                                      bool pre_normalize = false) {
  std::vector<std::pair<std::size_t, std::size_t>> hits;
  for (const auto& [s, t] : lex.pairs) {
    auto si = src.index_of(s);
    auto ti = tgt.index_of(t);
    if (si && ti && (!pre_normalize ||
                     (!src.is_degenerate(*si) && !tgt.is_degenerate(*ti))))
      hits.emplace_back(*si, *ti);
  }
  TrainingSet ts;
  ts.skipped_missing = lex.pairs.size() - hits.size();
  ts.pairs = hits.size();
  if (hits.empty())
    throw data_error(
        "projection: no usable training pairs (every lexicon entry missing "
        "from the embedding stores)");
  ts.x = Matrix(src.dim(), hits.size());
  ts.y = Matrix(tgt.dim(), hits.size());
  for (std::size_t c = 0; c < hits.size(); ++c) {
    auto xv = src.vector_at(hits[c].first);
    auto yv = tgt.vector_at(hits[c].second);
    double xn = 1.0, yn = 1.0;
    if (pre_normalize) {
      double sx = 0.0, sy = 0.0;
      for (float v : xv) sx += static_cast<double>(v) * v;
      for (float v : yv) sy += static_cast<double>(v) * v;
      xn = 1.0 / std::sqrt(sx);
      yn = 1.0 / std::sqrt(sy);
    }
    for (std::size_t r = 0; r < xv.size(); ++r) ts.x(r, c) = xv[r] * xn;
    for (std::size_t r = 0; r < yv.size(); ++r) ts.y(r, c) = yv[r] * yn;
  }
  return ts;
}

class ProjectionMatrix {
 public:
  ProjectionMatrix() = default;
  ProjectionMatrix(Matrix w, double lambda, std::size_t training_pairs)
      : w_(std::move(w)), lambda_(lambda), pairs_(training_pairs) {}

  std::size_t input_dim() const { return w_.cols(); }
  std::size_t output_dim() const { return w_.rows(); }
  double lambda() const { return lambda_; }
  std::size_t training_pairs() const { return pairs_; }
  const Matrix& matrix() const { return w_; }

  template <typename T>
  std::vector<double> project(std::span<const T> x) const {
    if (x.size() != w_.cols())
      throw data_error("projection: vector dimension " +
                       std::to_string(x.size()) + " does not match matrix " +
                       std::to_string(w_.cols()));
    std::vector<double> out(w_.rows(), 0.0);
    for (std::size_t i = 0; i < w_.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < w_.cols(); ++j)
        s += w_(i, j) * static_cast<double>(x[j]);
      out[i] = s;
    }
    return out;
  }

  std::vector<double> project(std::span<const float> x) const {
    return project<float>(x);
  }
  std::vector<double> project(const std::vector<double>& x) const {
    return project<double>(std::span<const double>(x));
  }

  /// Header "d2 d1 lambda n", then d2 rows of d1 values, shortest
  /// round-trip formatting, single spaces.
  void save(std::ostream& out) const {
    out << w_.rows() << ' ' << w_.cols() << ' ' << format_number(lambda_)
        << ' ' << pairs_ << '\n';
    for (std::size_t i = 0; i < w_.rows(); ++i) {
      for (std::size_t j = 0; j < w_.cols(); ++j) {
        if (j) out << ' ';
        out << format_number(w_(i, j));
      }
      out << '\n';
    }
  }

  void save_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write projection: " + path.string());
    save(out);
    if (!out) throw data_error("short write: " + path.string());
  }

  static ProjectionMatrix load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
      throw format_error("projection file: missing header", 1);
    auto head = split_ws(line);
    if (head.size() != 4)
      throw format_error("projection file: header must be 'd2 d1 lambda n'",
                         1);
    auto d2 = parse_size(head[0]);
    auto d1 = parse_size(head[1]);
    auto lambda = parse_number<double>(head[2]);
    auto n = parse_size(head[3]);
    if (!d2 || !d1 || !lambda || !n || *d2 == 0 || *d1 == 0)
      throw format_error("projection file: bad header values", 1);
    Matrix w(*d2, *d1);
    for (std::size_t i = 0; i < *d2; ++i) {
      if (!std::getline(in, line))
        throw format_error("projection file: expected " + std::to_string(*d2) +
                               " rows",
                           i + 1);
      auto fields = split_ws(line);
      if (fields.size() != *d1)
        throw format_error("projection file: expected " + std::to_string(*d1) +
                               " values",
                           i + 2);
      for (std::size_t j = 0; j < *d1; ++j) {
        auto v = parse_number<double>(fields[j]);
        if (!v || !std::isfinite(*v))
          throw format_error("projection file: bad value '" + fields[j] + "'",
                             i + 2);
        w(i, j) = *v;
      }
    }
    return ProjectionMatrix(std::move(w), *lambda, *n);
  }

  static ProjectionMatrix load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open projection: " + path.string());
    return load(in);
  }

 private:
  Matrix w_;
  double lambda_ = 0.0;
  std::size_t pairs_ = 0;
};

/// Closed-form ridge solve. lambda = 0 is permitted but raises
/// singular_matrix_error when X X^T is rank deficient (the message suggests
/// a positive lambda).
inline ProjectionMatrix learn_projection(const TrainingSet& ts,
                                         double lambda) {
  if (lambda < 0.0) throw config_error("projection: lambda must be >= 0");
  if (ts.x.cols() == 0 || ts.x.cols() != ts.y.cols())
    throw internal_error("projection: malformed training set");
  std::size_t d1 = ts.x.rows();
  Matrix a(d1, d1);
  // A = X X^T + lambda I
  for (std::size_t i = 0; i < d1; ++i)
    for (std::size_t j = i; j < d1; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < ts.x.cols(); ++c)
        s += ts.x(i, c) * ts.x(j, c);
      a(i, j) = s;
      a(j, i) = s;
    }
  for (std::size_t i = 0; i < d1; ++i) a(i, i) += lambda;
  Matrix b = matmul(ts.x, ts.y.transposed());  // d1 x d2
  Matrix wt = solve_spd(a, b);
  return ProjectionMatrix(wt.transposed(), lambda, ts.x.cols());
}

/// Root mean square of per-component residuals W x_i - y_i over the whole
/// training set: sqrt(sum ||W x_i - y_i||^2 / (n * d2)).
inline double projection_rmse(const ProjectionMatrix& w,
                              const TrainingSet& ts) {
  const Matrix& m = w.matrix();
  double sq = 0.0;
  for (std::size_t c = 0; c < ts.x.cols(); ++c) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * ts.x(j, c);
      double r = s - ts.y(i, c);
      sq += r * r;
    }
  }
  return std::sqrt(sq / (static_cast<double>(ts.x.cols()) *
                         static_cast<double>(m.rows())));
}

}  // namespace clir
