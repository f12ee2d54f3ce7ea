#pragma once

// Query translation strategies over projected embeddings:
//
//   - translate_we:            top-k nearest neighbors per term, uniform
//   - translate_we_weighted:   per-term weights proportional to similarity
//   - sim_vec_translate:       per-term similarity vectors over the target
//                              vocabulary, aggregated componentwise (sum or
//                              max), top-k of the aggregate
//   - translate_aggregated_source: aggregate projected source vectors first
//                              (sum/max/min), then one nearest-neighbor
//                              lookup; kept for comparison, tends to perform
//                              poorly
//
// Out-of-vocabulary terms are treated as named entities and handed to the
// transliteration matcher; they always enter the result with weight 1,
// outside any normalized weight group.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clir/embedding.hpp"
#include "clir/error.hpp"
#include "clir/projection.hpp"
#include "clir/text.hpp"
#include "clir/transliteration.hpp"

namespace clir {

enum class TermClass { in_vocab, oov_named };

struct QueryTerm {
  std::string text;
  TermClass cls;
};

struct Query {
  std::string id;
  std::vector<std::string> raw_terms;  // before stopword removal
  std::vector<QueryTerm> terms;        // content terms, classified
  bool empty_after_stopwords = false;
};

inline std::unordered_set<std::string> load_stopwords(
    const std::filesystem::path& path, bool fold_case) {
  std::unordered_set<std::string> out;
  for (const auto& raw : read_lines(path)) {
    auto line = trim(raw);
    if (line.empty()) continue;
    out.insert(fold_case ? fold_ascii(line) : std::string(line));
  }
  return out;
}

/// Order-preserving stopword filter. An empty result is legal; callers see
/// it via Query::empty_after_stopwords.
inline std::vector<std::string> remove_stopwords(
    const std::vector<std::string>& tokens,
    const std::unordered_set<std::string>& stoplist) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!stoplist.count(t)) out.push_back(t);
  return out;
}

/// Builds a classified query: tokens surviving the stoplist are IN_VOCAB
/// when the source store knows them, otherwise OOV_NAMED (named-entity
/// route).
inline Query make_query(std::string id,
                        const std::vector<std::string>& raw_tokens,
                        const std::unordered_set<std::string>& stoplist,
                        const EmbeddingStore& src) {
  Query q;
  q.id = std::move(id);
  q.raw_terms = raw_tokens;
  auto kept = remove_stopwords(raw_tokens, stoplist);
  q.empty_after_stopwords = kept.empty();
  q.terms.reserve(kept.size());
  for (auto& t : kept)
    q.terms.push_back(
        {t, src.contains(t) ? TermClass::in_vocab : TermClass::oov_named});
  return q;
}

enum class TranslationMethod {
  we,
  we_weighted,
  simvec_sum,
  simvec_max,
  source_agg_sum,
  source_agg_max,
  source_agg_min,
  dict,
  we_dt,
  weighted_dt,
  external,
};

inline const char* to_string(TranslationMethod m) {
  switch (m) {
    case TranslationMethod::we: return "we";
    case TranslationMethod::we_weighted: return "we-weighted";
    case TranslationMethod::simvec_sum: return "simvec-sum";
    case TranslationMethod::simvec_max: return "simvec-max";
    case TranslationMethod::source_agg_sum: return "source-agg-sum";
    case TranslationMethod::source_agg_max: return "source-agg-max";
    case TranslationMethod::source_agg_min: return "source-agg-min";
    case TranslationMethod::dict: return "dict";
    case TranslationMethod::we_dt: return "we-dt";
    case TranslationMethod::weighted_dt: return "weighted-dt";
    case TranslationMethod::external: return "external";
  }
  return "?";
}

inline std::optional<TranslationMethod> parse_method(std::string_view s) {
  static const std::unordered_map<std::string, TranslationMethod> names = {
      {"we", TranslationMethod::we},
      {"we-weighted", TranslationMethod::we_weighted},
      {"simvec-sum", TranslationMethod::simvec_sum},
      {"simvec-max", TranslationMethod::simvec_max},
      {"source-agg-sum", TranslationMethod::source_agg_sum},
      {"source-agg-max", TranslationMethod::source_agg_max},
      {"source-agg-min", TranslationMethod::source_agg_min},
      {"dict", TranslationMethod::dict},
      {"we-dt", TranslationMethod::we_dt},
      {"weighted-dt", TranslationMethod::weighted_dt},
      {"external", TranslationMethod::external},
  };
  auto it = names.find(std::string(s));
  if (it == names.end()) return {};
  return it->second;
}

/// Weight rendering used by the "term^weight" notation: up to five
/// significant digits, so 1 prints as "1" and 0.375586... as "0.37559".
inline std::string format_weight(double w) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.5g", w);
  return buf;
}

inline constexpr int kNamedEntityGroup = -1;

/// Translated query: unique target terms with positive weights. Terms are
/// grouped by the source-side unit that produced them (one group per source
/// term, or one group for a whole-query similarity vector); groups whose
/// contract says "normalized" must carry total mass 1. Named-entity terms
/// sit outside every group with weight exactly 1. Duplicate target terms
/// merge by weight summation.
class WeightedQuery {
 public:
  struct Entry {
    std::string term;
    double weight;
  };
  struct Group {
    std::string label;  // source term, or "" for a whole-query group
    double mass;
    bool normalized;  // contract: mass must equal 1
  };

  explicit WeightedQuery(TranslationMethod method) : method_(method) {}

  TranslationMethod method() const { return method_; }

  int add_group(std::string label, bool normalized) {
    groups_.push_back({std::move(label), 0.0, normalized});
    return static_cast<int>(groups_.size()) - 1;
  }

  void add(const std::string& term, double weight, int group) {
    if (!std::isfinite(weight) || weight <= 0.0)
      throw internal_error("weighted query: non-positive weight for term '" +
                           term + "'");
    if (group != kNamedEntityGroup) {
      if (group < 0 || static_cast<std::size_t>(group) >= groups_.size())
        throw internal_error("weighted query: unknown group");
      groups_[static_cast<std::size_t>(group)].mass += weight;
    }
    auto it = index_.find(term);
    if (it != index_.end()) {
      entries_[it->second].weight += weight;
    } else {
      index_.emplace(term, entries_.size());
      entries_.push_back({term, weight});
    }
  }

  void add_named_entity(const std::string& term) {
    add(term, 1.0, kNamedEntityGroup);
  }

  const std::vector<Entry>& entries() const { return entries_; }
  const std::vector<Group>& groups() const { return groups_; }
  bool empty() const { return entries_.empty(); }

  const std::vector<std::string>& notes() const { return notes_; }
  void note(std::string msg) { notes_.push_back(std::move(msg)); }

  /// "term^weight" tokens, space separated, insertion order.
  std::string to_string() const {
    std::string out;
    for (const auto& e : entries_) {
      if (!out.empty()) out.push_back(' ');
      out += e.term;
      out.push_back('^');
      out += format_weight(e.weight);
    }
    return out;
  }

 private:
  TranslationMethod method_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Group> groups_;
  std::vector<std::string> notes_;
};

/// Maps an out-of-vocabulary word to the query terms it contributes:
/// the matched entity's tokens, or the top transliteration candidate when
/// nothing in the entity list is close enough.
using NamedEntityResolver =
    std::function<std::vector<std::string>(const std::string&)>;

inline NamedEntityResolver make_ne_resolver(const TransliterationTable& table,
                                            const NamedEntityList& entities,
                                            double theta = 0.5,
                                            std::size_t cap = 256) {
  return [&table, &entities, theta, cap](const std::string& word) {
    auto m = match_named_entity(word, table, entities, theta, cap);
    if (m.matched) return split_ws(m.entity);
    return std::vector<std::string>{m.candidate};
  };
}

namespace detail {

inline void add_named_terms(WeightedQuery& wq, const std::string& word,
                            const NamedEntityResolver& resolve) {
  if (!resolve)
    throw config_error(
        "translation: query term '" + word +
        "' is out of vocabulary but transliteration is not configured");
  for (const auto& t : resolve(word)) wq.add_named_entity(t);
}

inline std::vector<double> project_term(const Query& q, const QueryTerm& term,
                                        const ProjectionMatrix& w,
                                        const EmbeddingStore& src) {
  auto idx = src.index_of(term.text);
  if (!idx)
    throw internal_error("translation: term '" + term.text +
                         "' classified IN_VOCAB but missing from the source "
                         "store (query " +
                         q.id + ")");
  return w.project(src.vector_at(*idx));
}

}  // namespace detail

/// Top-k neighbor translation: every returned translation enters with
/// weight 1 (no normalization), one group per source term.
inline WeightedQuery translate_we(const Query& q, const ProjectionMatrix& w,
                                  const EmbeddingStore& src,
                                  const EmbeddingStore& tgt, std::size_t k,
                                  const NamedEntityResolver& resolve = {}) {
  if (k < 1) throw config_error("translate: k must be >= 1");
  WeightedQuery wq(TranslationMethod::we);
  for (const auto& term : q.terms) {
    if (term.cls == TermClass::oov_named) {
      detail::add_named_terms(wq, term.text, resolve);
      continue;
    }
    auto proj = detail::project_term(q, term, w, src);
    int g = wq.add_group(term.text, false);
    for (const auto& nb : nearest_neighbors(tgt, proj, k))
      wq.add(nb.word, 1.0, g);
  }
  return wq;
}

/// Like translate_we, but each term's translations are weighted by
/// similarity, normalized to sum 1 per source term. Negative similarities
/// are clamped to 0 for weighting (a clamped translation is dropped); when
/// the whole group clamps to nothing, weights fall back to uniform and the
/// event is noted.
inline WeightedQuery translate_we_weighted(
    const Query& q, const ProjectionMatrix& w, const EmbeddingStore& src,
    const EmbeddingStore& tgt, std::size_t k,
    const NamedEntityResolver& resolve = {}) {
  if (k < 1) throw config_error("translate: k must be >= 1");
  WeightedQuery wq(TranslationMethod::we_weighted);
  for (const auto& term : q.terms) {
    if (term.cls == TermClass::oov_named) {
      detail::add_named_terms(wq, term.text, resolve);
      continue;
    }
    auto proj = detail::project_term(q, term, w, src);
    auto neighbors = nearest_neighbors(tgt, proj, k);
    if (neighbors.empty()) continue;
    double sum = 0.0;
    for (const auto& nb : neighbors) sum += std::max(0.0, nb.score);
    int g = wq.add_group(term.text, true);
    if (sum > 0.0) {
      for (const auto& nb : neighbors) {
        double clamped = std::max(0.0, nb.score);
        if (clamped > 0.0) wq.add(nb.word, clamped / sum, g);
      }
    } else {
      wq.note("term '" + term.text +
              "': non-positive similarity sum, uniform weights");
      double u = 1.0 / static_cast<double>(neighbors.size());
      for (const auto& nb : neighbors) wq.add(nb.word, u, g);
    }
  }
  return wq;
}

/// Cosine of a projected source term against every target vocabulary row.
/// Degenerate (zero) target rows score 0.
struct SimilarityVector {
  std::string term;
  std::vector<double> values;  // indexed by target vocabulary position
};

inline SimilarityVector similarity_vector(const std::string& term,
                                          const ProjectionMatrix& w,
                                          const EmbeddingStore& src,
                                          const EmbeddingStore& tgt) {
  auto idx = src.index_of(term);
  if (!idx)
    throw data_error("similarity_vector: term '" + term +
                     "' not in the source store");
  auto proj = w.project(src.vector_at(*idx));
  double qn = 0.0;
  for (double v : proj) qn += v * v;
  if (qn == 0.0)
    throw degenerate_input_error(
        "similarity_vector: projected vector is zero for term '" + term + "'");
  SimilarityVector sv{term, std::vector<double>(tgt.size(), 0.0)};
  for (std::size_t i = 0; i < tgt.size(); ++i) {
    if (tgt.is_degenerate(i)) continue;
    double c = cosine(std::span<const double>(proj), tgt.vector_at(i));
    sv.values[i] = std::clamp(c, -1.0, 1.0);
  }
  return sv;
}

enum class SimVecMode { sum, max };

/// Componentwise aggregation of per-term similarity vectors.
inline std::vector<double> sim_vec_aggregate(
    const std::vector<SimilarityVector>& vectors, SimVecMode mode) {
  if (vectors.empty())
    throw data_error("sim_vec_aggregate: no similarity vectors");
  std::size_t n = vectors.front().values.size();
  for (const auto& v : vectors)
    if (v.values.size() != n)
      throw internal_error("sim_vec_aggregate: length mismatch");
  std::vector<double> out(vectors.front().values);
  for (std::size_t vi = 1; vi < vectors.size(); ++vi) {
    const auto& vals = vectors[vi].values;
    for (std::size_t i = 0; i < n; ++i)
      out[i] = mode == SimVecMode::sum ? out[i] + vals[i]
                                       : std::max(out[i], vals[i]);
  }
  return out;
}

/// Whole-query translation from the aggregated similarity vector: top-k
/// components (ties toward the lower vocabulary index), weighted by
/// score / sum of selected scores so the group carries mass 1. Negative
/// selected scores clamp to 0 (dropped); an all-clamped selection falls
/// back to uniform weights with a note. Named-entity terms are appended
/// with weight 1.
inline WeightedQuery sim_vec_translate(const Query& q,
                                       const ProjectionMatrix& w,
                                       const EmbeddingStore& src,
                                       const EmbeddingStore& tgt,
                                       std::size_t k, SimVecMode mode,
                                       const NamedEntityResolver& resolve = {}) {
  if (k < 1) throw config_error("translate: k must be >= 1");
  WeightedQuery wq(mode == SimVecMode::sum ? TranslationMethod::simvec_sum
                                           : TranslationMethod::simvec_max);
  std::vector<SimilarityVector> vectors;
  for (const auto& term : q.terms)
    if (term.cls == TermClass::in_vocab)
      vectors.push_back(similarity_vector(term.text, w, src, tgt));

  if (!vectors.empty()) {
    auto agg = sim_vec_aggregate(vectors, mode);
    std::vector<std::size_t> order(agg.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (agg[a] != agg[b]) return agg[a] > agg[b];
                        return a < b;
                      });
    order.resize(take);
    double sum = 0.0;
    for (std::size_t i : order) sum += std::max(0.0, agg[i]);
    int g = wq.add_group("", true);
    if (sum > 0.0) {
      for (std::size_t i : order) {
        double clamped = std::max(0.0, agg[i]);
        if (clamped > 0.0) wq.add(tgt.word_at(i), clamped / sum, g);
      }
    } else {
      wq.note("query " + q.id +
              ": non-positive aggregate scores, uniform weights");
      double u = 1.0 / static_cast<double>(take);
      for (std::size_t i : order) wq.add(tgt.word_at(i), u, g);
    }
  } else if (!q.terms.empty()) {
    wq.note("query " + q.id + ": no in-vocabulary terms, named entities only");
  }

  for (const auto& term : q.terms)
    if (term.cls == TermClass::oov_named)
      detail::add_named_terms(wq, term.text, resolve);
  return wq;
}

enum class SourceAggMode { sum, max, min };

/// Aggregates the projected source-side vectors componentwise, then runs a
/// single nearest-neighbor lookup on the result (uniform weights). With one
/// term this reduces to translate_we. An aggregate of all zeros surfaces as
/// a degenerate-input error.
inline WeightedQuery translate_aggregated_source(
    const Query& q, const ProjectionMatrix& w, const EmbeddingStore& src,
    const EmbeddingStore& tgt, std::size_t k, SourceAggMode mode,
    const NamedEntityResolver& resolve = {}) {
  if (k < 1) throw config_error("translate: k must be >= 1");
  TranslationMethod m = mode == SourceAggMode::sum
                            ? TranslationMethod::source_agg_sum
                            : mode == SourceAggMode::max
                                  ? TranslationMethod::source_agg_max
                                  : TranslationMethod::source_agg_min;
  WeightedQuery wq(m);
  std::vector<double> agg;
  bool first = true;
  for (const auto& term : q.terms) {
    if (term.cls != TermClass::in_vocab) continue;
    auto proj = detail::project_term(q, term, w, src);
    if (first) {
      agg = std::move(proj);
      first = false;
      continue;
    }
    for (std::size_t i = 0; i < agg.size(); ++i) {
      switch (mode) {
        case SourceAggMode::sum: agg[i] += proj[i]; break;
        case SourceAggMode::max: agg[i] = std::max(agg[i], proj[i]); break;
        case SourceAggMode::min: agg[i] = std::min(agg[i], proj[i]); break;
      }
    }
  }
  if (first)
    throw data_error("translate: query " + q.id +
                     " has no in-vocabulary terms to aggregate");
  int g = wq.add_group("", false);
  for (const auto& nb : nearest_neighbors(tgt, std::span<const double>(agg), k))
    wq.add(nb.word, 1.0, g);
  for (const auto& term : q.terms)
    if (term.cls == TermClass::oov_named)
      detail::add_named_terms(wq, term.text, resolve);
  return wq;
}

}  // namespace clir
