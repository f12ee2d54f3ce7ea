#pragma once

// Hybrid query translation: blending bilingual-dictionary lookups,
// embedding-based translations and (optionally) an external translator's
// output into one weighted query. Named-entity terms always ride along with
// weight 1, outside any normalized mass.

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "clir/error.hpp"
#include "clir/text.hpp"
#include "clir/translation.hpp"

namespace clir {

struct DictionaryTranslations {
  // source term -> target translations, file order
  std::unordered_map<std::string, std::vector<std::string>> map;
  std::size_t skipped = 0;

  /// Same "source<TAB>target" format as the projection lexicon; multi-word
  /// targets and malformed lines are skipped and counted.
  static DictionaryTranslations load(const std::filesystem::path& path) {
    auto lex = load_lexicon(path);
    DictionaryTranslations dict;
    dict.skipped = lex.skipped_malformed + lex.skipped_multiword;
    for (auto& [s, t] : lex.pairs) dict.map[s].push_back(t);
    return dict;
  }

  const std::vector<std::string>* find(const std::string& term) const {
    auto it = map.find(term);
    return it == map.end() ? nullptr : &it->second;
  }

  bool empty() const { return map.empty(); }
};

/// Per-query output of an external translator, "qid<TAB>translated text".
struct ExternalTranslations {
  std::unordered_map<std::string, std::string> map;

  static ExternalTranslations load(const std::filesystem::path& path) {
    ExternalTranslations ext;
    std::size_t lineno = 0;
    for (const auto& raw : read_lines(path)) {
      ++lineno;
      if (trim(raw).empty()) continue;
      auto tab = raw.find('\t');
      if (tab == std::string::npos)
        throw format_error("external translations: expected qid<TAB>text",
                           lineno);
      std::string qid(trim(raw.substr(0, tab)));
      if (qid.empty())
        throw format_error("external translations: empty query id", lineno);
      ext.map[qid] = std::string(trim(raw.substr(tab + 1)));
    }
    return ext;
  }

  const std::string* find(const std::string& qid) const {
    auto it = map.find(qid);
    return it == map.end() ? nullptr : &it->second;
  }
};

/// Embedding translations for one source-side unit: a single query term, or
/// the whole query (source_term empty) for similarity-vector output.
struct TermTranslations {
  std::string source_term;
  std::vector<std::pair<std::string, double>> scored;  // (translation, sim)
};

/// Per-term top-k neighbor lists with similarities, the embedding-side input
/// for the hybrid combiners.
inline std::vector<TermTranslations> embedding_term_translations(
    const Query& q, const ProjectionMatrix& w, const EmbeddingStore& src,
    const EmbeddingStore& tgt, std::size_t k) {
  if (k < 1) throw config_error("translate: k must be >= 1");
  std::vector<TermTranslations> out;
  for (const auto& term : q.terms) {
    if (term.cls != TermClass::in_vocab) continue;
    auto proj = detail::project_term(q, term, w, src);
    TermTranslations tt{term.text, {}};
    for (const auto& nb : nearest_neighbors(tgt, proj, k))
      tt.scored.emplace_back(nb.word, nb.score);
    out.push_back(std::move(tt));
  }
  return out;
}

/// One whole-query group holding the top-k components of the aggregated
/// similarity vector, as scored (translation, similarity) pairs.
inline std::vector<TermTranslations> simvec_group(
    const Query& q, const ProjectionMatrix& w, const EmbeddingStore& src,
    const EmbeddingStore& tgt, std::size_t k, SimVecMode mode) {
  if (k < 1) throw config_error("translate: k must be >= 1");
  std::vector<SimilarityVector> vectors;
  for (const auto& term : q.terms)
    if (term.cls == TermClass::in_vocab)
      vectors.push_back(similarity_vector(term.text, w, src, tgt));
  if (vectors.empty()) return {};
  auto agg = sim_vec_aggregate(vectors, mode);
  std::vector<std::size_t> order(agg.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (agg[a] != agg[b]) return agg[a] > agg[b];
                      return a < b;
                    });
  TermTranslations tt{"", {}};
  for (std::size_t i = 0; i < take; ++i)
    tt.scored.emplace_back(tgt.word_at(order[i]), agg[order[i]]);
  return {std::move(tt)};
}

/// Dictionary-only translation baseline: every dictionary translation of a
/// query term enters with weight 1; terms the dictionary misses are dropped
/// with a note (warning, not an error).
inline WeightedQuery translate_dict(const Query& q,
                                    const DictionaryTranslations& dict) {
  WeightedQuery wq(TranslationMethod::dict);
  for (const auto& term : q.terms) {
    const auto* tr = dict.find(term.text);
    if (!tr) {
      wq.note("term '" + term.text + "' not in dictionary, dropped");
      continue;
    }
    int g = wq.add_group(term.text, false);
    for (const auto& t : *tr) wq.add(t, 1.0, g);
  }
  return wq;
}

/// Dictionary-priority combination: a term found in the dictionary
/// contributes its dictionary translations (weight 1 each); only terms the
/// dictionary misses fall back to their embedding translations (weight 1
/// each). With an empty dictionary this equals translate_we.
inline WeightedQuery combine_we_dt(const Query& q,
                                   const DictionaryTranslations& dict,
                                   const std::vector<TermTranslations>& emb,
                                   const NamedEntityResolver& resolve = {}) {
  std::unordered_map<std::string, const TermTranslations*> by_term;
  for (const auto& tt : emb) by_term.emplace(tt.source_term, &tt);

  WeightedQuery wq(TranslationMethod::we_dt);
  for (const auto& term : q.terms) {
    if (term.cls == TermClass::oov_named) {
      detail::add_named_terms(wq, term.text, resolve);
      continue;
    }
    if (const auto* tr = dict.find(term.text)) {
      int g = wq.add_group(term.text, false);
      for (const auto& t : *tr) wq.add(t, 1.0, g);
      continue;
    }
    auto it = by_term.find(term.text);
    if (it == by_term.end() || it->second->scored.empty()) {
      wq.note("term '" + term.text +
              "' has neither dictionary nor embedding translations, dropped");
      continue;
    }
    int g = wq.add_group(term.text, false);
    for (const auto& [t, s] : it->second->scored) wq.add(t, 1.0, g);
  }
  return wq;
}

namespace detail {

// Distributes `mass` over scored translations proportionally to their
// similarity (clamped at 0). Falls back to uniform when everything clamps.
inline void add_scored_mass(WeightedQuery& wq, int group,
                            const std::vector<std::pair<std::string, double>>&
                                scored,
                            double mass, const std::string& what) {
  if (scored.empty() || mass <= 0.0) return;
  double sum = 0.0;
  for (const auto& [t, s] : scored) sum += std::max(0.0, s);
  if (sum > 0.0) {
    for (const auto& [t, s] : scored) {
      double clamped = std::max(0.0, s);
      if (clamped > 0.0) wq.add(t, mass * clamped / sum, group);
    }
  } else {
    wq.note(what + ": non-positive similarity sum, uniform weights");
    double u = mass / static_cast<double>(scored.size());
    for (const auto& [t, s] : scored) wq.add(t, u, group);
  }
}

}  // namespace detail

/// Weighted per-term blend: a term with both dictionary and embedding
/// translations gives the dictionary side mass `dict_mass` (split
/// uniformly) and the embedding side 1 - dict_mass (split proportionally to
/// similarity), so the term's group carries mass 1. A single-source term's
/// translations are normalized to 1 on their own. A mass of 0 removes that
/// side's terms entirely.
inline WeightedQuery combine_weighted(const Query& q,
                                      const DictionaryTranslations& dict,
                                      const std::vector<TermTranslations>& emb,
                                      double dict_mass = 0.2,
                                      const NamedEntityResolver& resolve = {}) {
  if (!(dict_mass >= 0.0 && dict_mass <= 1.0))
    throw config_error("combine_weighted: dictionary mass must be in [0, 1]");

  std::unordered_map<std::string, const TermTranslations*> by_term;
  std::vector<const TermTranslations*> whole_query;
  for (const auto& tt : emb) {
    if (tt.source_term.empty())
      whole_query.push_back(&tt);
    else
      by_term.emplace(tt.source_term, &tt);
  }

  WeightedQuery wq(TranslationMethod::weighted_dt);
  for (const auto& term : q.terms) {
    if (term.cls == TermClass::oov_named) {
      detail::add_named_terms(wq, term.text, resolve);
      continue;
    }
    const auto* tr = dict.find(term.text);
    auto it = by_term.find(term.text);
    const TermTranslations* tt =
        (it != by_term.end() && !it->second->scored.empty()) ? it->second
                                                             : nullptr;
    if (tr && tt) {
      int g = wq.add_group(term.text, true);
      double per = dict_mass / static_cast<double>(tr->size());
      if (dict_mass > 0.0)
        for (const auto& t : *tr) wq.add(t, per, g);
      detail::add_scored_mass(wq, g, tt->scored, 1.0 - dict_mass,
                              "term '" + term.text + "'");
    } else if (tr) {
      int g = wq.add_group(term.text, true);
      double per = 1.0 / static_cast<double>(tr->size());
      for (const auto& t : *tr) wq.add(t, per, g);
    } else if (tt) {
      int g = wq.add_group(term.text, true);
      detail::add_scored_mass(wq, g, tt->scored, 1.0,
                              "term '" + term.text + "'");
    } else {
      wq.note("term '" + term.text +
              "' has neither dictionary nor embedding translations, dropped");
    }
  }
  // whole-query embedding groups (similarity-vector output) have no
  // dictionary counterpart; each is normalized to 1 on its own
  for (const auto* tt : whole_query) {
    if (tt->scored.empty()) continue;
    int g = wq.add_group("", true);
    detail::add_scored_mass(wq, g, tt->scored, 1.0, "whole-query group");
  }
  return wq;
}

/// Three-way blend for one query: external-translation tokens (stopword
/// filtered) share w_ext uniformly, dictionary translations of the query
/// terms share w_dict uniformly, embedding translations share the remainder
/// proportionally to similarity. Absent sources give their mass up and the
/// present ones are rescaled, so the combined (non named-entity) mass is
/// exactly 1. A query with no external entry falls back to
/// combine_weighted with dict_mass = w_dict / (w_dict + remainder).
inline WeightedQuery combine_external(
    const Query& q, const ExternalTranslations& ext,
    const std::vector<TermTranslations>& emb,
    const DictionaryTranslations& dict, double w_ext = 0.6,
    double w_dict = 0.1,
    const std::unordered_set<std::string>& target_stopwords = {},
    const NamedEntityResolver& resolve = {}) {
  if (!(w_ext >= 0.0 && w_dict >= 0.0 && w_ext + w_dict <= 1.0))
    throw config_error(
        "combine_external: need w_ext >= 0, w_dict >= 0, w_ext + w_dict <= 1");
  double remainder = 1.0 - w_ext - w_dict;

  const std::string* text = ext.find(q.id);
  if (!text) {
    double denom = w_dict + remainder;
    double fallback = denom > 0.0 ? w_dict / denom : 0.2;
    auto wq = combine_weighted(q, dict, emb, fallback, resolve);
    wq.note("query " + q.id +
            ": no external translation, fell back to weighted combination");
    return wq;
  }

  // external tokens, analyzed like target text, first occurrence kept
  std::vector<std::string> ext_terms;
  {
    std::unordered_set<std::string> seen;
    for (auto& t : tokenize(*text, true))
      if (!target_stopwords.count(t) && seen.insert(t).second)
        ext_terms.push_back(t);
  }

  // dictionary translations pooled over the query terms, first occurrence
  std::vector<std::string> dict_terms;
  {
    std::unordered_set<std::string> seen;
    for (const auto& term : q.terms)
      if (const auto* tr = dict.find(term.text))
        for (const auto& t : *tr)
          if (seen.insert(t).second) dict_terms.push_back(t);
  }

  // embedding translations pooled across groups; duplicate translations
  // merge by score summation
  std::vector<std::pair<std::string, double>> emb_scored;
  {
    std::unordered_map<std::string, std::size_t> at;
    for (const auto& tt : emb)
      for (const auto& [t, s] : tt.scored) {
        double clamped = std::max(0.0, s);
        auto [it, inserted] = at.emplace(t, emb_scored.size());
        if (inserted)
          emb_scored.emplace_back(t, clamped);
        else
          emb_scored[it->second].second += clamped;
      }
  }

  double m_ext = ext_terms.empty() ? 0.0 : w_ext;
  double m_dict = dict_terms.empty() ? 0.0 : w_dict;
  double m_emb = emb_scored.empty() ? 0.0 : remainder;
  double total = m_ext + m_dict + m_emb;

  WeightedQuery wq(TranslationMethod::external);
  if (total > 0.0) {
    int g = wq.add_group("", true);
    if (m_ext > 0.0) {
      double per = (m_ext / total) / static_cast<double>(ext_terms.size());
      for (const auto& t : ext_terms) wq.add(t, per, g);
    }
    if (m_dict > 0.0) {
      double per = (m_dict / total) / static_cast<double>(dict_terms.size());
      for (const auto& t : dict_terms) wq.add(t, per, g);
    }
    if (m_emb > 0.0)
      detail::add_scored_mass(wq, g, emb_scored, m_emb / total,
                              "query " + q.id + " embedding pool");
  } else {
    wq.note("query " + q.id + ": no translation sources, named entities only");
  }

  for (const auto& term : q.terms)
    if (term.cls == TermClass::oov_named)
      detail::add_named_terms(wq, term.text, resolve);
  return wq;
}

}  // namespace clir
