#pragma once

// Transliteration of romanized (ITrans) Hindi words into Latin candidate
// spellings, plus named-entity matching by edit distance.
//
// A word is segmented into romanization units by longest match against the
// table, then candidates are the cross-product of each unit's ordered
// alternatives. Two inherent-vowel rules apply at the word end: a final
// consonant yields both its bare and schwa ("...a") form, and an explicit
// final 'a' after a consonant may be dropped.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clir/error.hpp"
#include "clir/text.hpp"

namespace clir {

enum class CharClass { consonant, vowel, other };

class TransliterationTable {
 public:
  struct Entry {
    CharClass cls;
    std::vector<std::string> alternatives;  // ordered by priority
  };

  void add(std::string unit, CharClass cls,
           std::vector<std::string> alternatives) {
    if (unit.empty())
      throw format_error("transliteration table: empty unit");
    if (alternatives.empty())
      throw format_error("transliteration table: unit '" + unit +
                         "' has no alternatives");
    for (const auto& a : alternatives)
      if (a.empty())
        throw format_error("transliteration table: unit '" + unit +
                           "' has an empty alternative");
    auto [it, inserted] =
        entries_.emplace(std::move(unit), Entry{cls, std::move(alternatives)});
    if (!inserted)
      throw format_error("transliteration table: duplicate unit '" +
                         it->first + "'");
    max_unit_len_ = std::max(max_unit_len_, it->first.size());
  }

  const Entry* find(std::string_view unit) const {
    auto it = entries_.find(std::string(unit));
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t max_unit_len() const { return max_unit_len_; }
  std::size_t size() const { return entries_.size(); }

  /// Parses "unit<TAB>class<TAB>alt1,alt2,..." lines; class is one of
  /// consonant | vowel | other. Blank lines and lines starting with '#'
  /// are ignored.
  static TransliterationTable load(const std::filesystem::path& path) {
    TransliterationTable table;
    std::size_t lineno = 0;
    for (const auto& raw : read_lines(path)) {
      ++lineno;
      auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto fields = split_on(std::string(line), '\t');
      if (fields.size() != 3)
        throw format_error(
            "transliteration table: expected unit<TAB>class<TAB>alts", lineno);
      CharClass cls;
      if (fields[1] == "consonant")
        cls = CharClass::consonant;
      else if (fields[1] == "vowel")
        cls = CharClass::vowel;
      else if (fields[1] == "other")
        cls = CharClass::other;
      else
        throw format_error("transliteration table: unknown class '" +
                               fields[1] + "'",
                           lineno);
      std::vector<std::string> alts;
      for (auto& a : split_on(fields[2], ','))
        alts.emplace_back(trim(a));
      try {
        table.add(fields[0], cls, std::move(alts));
      } catch (const format_error& e) {
        throw format_error(e.what(), lineno);
      }
    }
    return table;
  }

  /// Built-in ITrans inventory for Hindi. Alternative order encodes
  /// priority; e.g. k -> {k, q, c}, v -> {v, w}.
  static TransliterationTable default_itrans() {
    TransliterationTable t;
    auto C = CharClass::consonant;
    auto V = CharClass::vowel;
    auto O = CharClass::other;
    // consonants (bare forms; the schwa form is derived by rule)
    t.add("k", C, {"k", "q", "c"});
    t.add("kh", C, {"kh", "q"});
    t.add("g", C, {"g"});
    t.add("gh", C, {"gh"});
    t.add("~N", C, {"n"});
    t.add("ch", C, {"ch", "c"});
    t.add("Ch", C, {"chh", "ch"});
    t.add("chh", C, {"chh", "ch"});
    t.add("j", C, {"j", "z"});
    t.add("jh", C, {"jh"});
    t.add("~n", C, {"n"});
    t.add("T", C, {"t"});
    t.add("Th", C, {"th"});
    t.add("D", C, {"d"});
    t.add("Dh", C, {"dh"});
    t.add("N", C, {"n"});
    t.add("t", C, {"t"});
    t.add("th", C, {"th"});
    t.add("d", C, {"d"});
    t.add("dh", C, {"dh"});
    t.add("n", C, {"n"});
    t.add("p", C, {"p"});
    t.add("ph", C, {"ph", "f"});
    t.add("b", C, {"b"});
    t.add("bh", C, {"bh"});
    t.add("m", C, {"m"});
    t.add("y", C, {"y"});
    t.add("r", C, {"r"});
    t.add("l", C, {"l"});
    t.add("L", C, {"l"});
    t.add("v", C, {"v", "w"});
    t.add("w", C, {"w", "v"});
    t.add("sh", C, {"sh"});
    t.add("Sh", C, {"sh"});
    t.add("s", C, {"s"});
    t.add("h", C, {"h"});
    t.add("x", C, {"x", "ksh"});
    t.add("q", C, {"q", "k"});
    t.add("z", C, {"z", "j"});
    t.add("f", C, {"f", "ph"});
    // vowels
    t.add("a", V, {"a"});
    t.add("aa", V, {"a", "aa"});
    t.add("A", V, {"a", "aa"});
    t.add("i", V, {"i"});
    t.add("ii", V, {"i", "ee", "ii"});
    t.add("I", V, {"i", "ee"});
    t.add("u", V, {"u"});
    t.add("uu", V, {"u", "oo"});
    t.add("U", V, {"u", "oo"});
    t.add("e", V, {"e"});
    t.add("ai", V, {"ai", "ei"});
    t.add("o", V, {"o"});
    t.add("au", V, {"au", "ou"});
    t.add("RRi", V, {"ri"});
    // nasalization and aspiration marks
    t.add("M", O, {"n", "m"});
    t.add(".n", O, {"n", "m"});
    t.add("H", O, {"h"});
    return t;
  }

 private:
  std::unordered_map<std::string, Entry> entries_;
  std::size_t max_unit_len_ = 0;
};

struct CandidateSet {
  std::vector<std::string> candidates;  // priority order, deduplicated
  bool unsegmentable = false;
};

namespace detail {

struct SegmentedUnit {
  std::string text;
  const TransliterationTable::Entry* entry;
};

inline std::optional<std::vector<SegmentedUnit>> segment_word(
    std::string_view word, const TransliterationTable& table) {
  std::vector<SegmentedUnit> units;
  std::size_t pos = 0;
  while (pos < word.size()) {
    std::size_t max_len = std::min(table.max_unit_len(), word.size() - pos);
    const TransliterationTable::Entry* hit = nullptr;
    std::size_t hit_len = 0;
    for (std::size_t len = max_len; len >= 1; --len) {
      if (auto* e = table.find(word.substr(pos, len))) {
        hit = e;
        hit_len = len;
        break;
      }
    }
    if (!hit) return std::nullopt;
    units.push_back({std::string(word.substr(pos, hit_len)), hit});
    pos += hit_len;
  }
  return units;
}

}  // namespace detail

/// Generates Latin candidate spellings. Candidates are enumerated in
/// priority order (earlier alternatives first, leftmost unit most
/// significant), deduplicated, and truncated at `cap`. A word the table
/// cannot segment comes back as its own sole candidate with the
/// unsegmentable flag set. Output is independent of table insertion order.
inline CandidateSet generate_candidates(const std::string& word,
                                        const TransliterationTable& table,
                                        std::size_t cap = 256) {
  if (word.empty())
    throw data_error("transliteration: empty word");
  if (cap < 1) throw config_error("transliteration: cap must be >= 1");

  auto units = detail::segment_word(word, table);
  if (!units) return {{word}, true};

  // Per-position alternatives after applying the word-final vowel rules.
  std::vector<std::vector<std::string>> alts(units->size());
  for (std::size_t i = 0; i < units->size(); ++i) {
    const auto& u = (*units)[i];
    bool final_unit = (i + 1 == units->size());
    bool after_consonant =
        i > 0 && (*units)[i - 1].entry->cls == CharClass::consonant;
    if (final_unit && u.text == "a" && after_consonant) {
      // explicit final inherent vowel: may be silent
      alts[i].push_back("");
      for (const auto& a : u.entry->alternatives) alts[i].push_back(a);
    } else if (final_unit && u.entry->cls == CharClass::consonant) {
      // final consonant: bare form and schwa form
      for (const auto& a : u.entry->alternatives) {
        alts[i].push_back(a);
        alts[i].push_back(a + "a");
      }
    } else {
      alts[i] = u.entry->alternatives;
    }
  }

  CandidateSet out;
  std::unordered_set<std::string> seen;
  std::string cur;
  // DFS with earlier alternatives first; stops once cap unique candidates
  // are collected.
  auto dfs = [&](auto&& self, std::size_t i) -> bool {
    if (out.candidates.size() >= cap) return true;
    if (i == alts.size()) {
      if (!cur.empty() && seen.insert(cur).second)
        out.candidates.push_back(cur);
      return out.candidates.size() >= cap;
    }
    for (const auto& a : alts[i]) {
      std::size_t mark = cur.size();
      cur += a;
      bool full = self(self, i + 1);
      cur.resize(mark);
      if (full) return true;
    }
    return false;
  };
  dfs(dfs, 0);
  if (out.candidates.empty()) out.candidates.push_back(word);
  return out;
}

/// Levenshtein distance with unit costs, computed over UTF-8 codepoints.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::u32string ua, ub;
  for (std::size_t pos = 0; pos < a.size();) ua.push_back(utf8_next(a, pos));
  for (std::size_t pos = 0; pos < b.size();) ub.push_back(utf8_next(b, pos));
  if (ua.size() < ub.size()) std::swap(ua, ub);
  std::vector<std::size_t> prev(ub.size() + 1), cur(ub.size() + 1);
  for (std::size_t j = 0; j <= ub.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ua.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= ub.size(); ++j) {
      std::size_t sub = prev[j - 1] + (ua[i - 1] == ub[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[ub.size()];
}

inline std::size_t codepoint_length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size(); ++n) utf8_next(s, pos);
  return n;
}

class NamedEntityList {
 public:
  NamedEntityList() = default;
  explicit NamedEntityList(std::vector<std::string> entities)
      : entities_(std::move(entities)) {
    folded_.reserve(entities_.size());
    for (const auto& e : entities_) folded_.push_back(fold_ascii(e));
  }

  /// One entity per line, original casing preserved; blank lines skipped.
  static NamedEntityList load(const std::filesystem::path& path) {
    std::vector<std::string> entities;
    for (const auto& raw : read_lines(path)) {
      auto line = trim(raw);
      if (!line.empty()) entities.emplace_back(line);
    }
    return NamedEntityList(std::move(entities));
  }

  bool empty() const { return entities_.empty(); }
  std::size_t size() const { return entities_.size(); }
  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& folded() const { return folded_; }

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> folded_;
};

struct NamedEntityMatch {
  bool matched = false;
  std::string entity;     // original casing from the list when matched
  std::size_t distance = 0;
  std::string candidate;  // the candidate behind the match, or the
                          // highest-priority candidate when nothing matched
  bool unsegmentable = false;
};

/// Scores every (candidate, entity) pair case-insensitively by edit
/// distance and returns the minimum; ties break toward the
/// lexicographically smaller entity, then the earlier-generated candidate.
/// No match when best distance / max(length) exceeds theta.
inline NamedEntityMatch match_named_entity(const std::string& word,
                                           const TransliterationTable& table,
                                           const NamedEntityList& entities,
                                           double theta = 0.5,
                                           std::size_t cap = 256) {
  if (entities.empty())
    throw config_error("transliteration: named-entity list is empty");
  if (theta < 0.0) throw config_error("transliteration: theta must be >= 0");

  auto cands = generate_candidates(word, table, cap);
  NamedEntityMatch best;
  best.unsegmentable = cands.unsegmentable;
  best.candidate = cands.candidates.front();
  bool have = false;
  std::size_t best_i = 0;
  for (const auto& cand : cands.candidates) {
    std::string folded_cand = fold_ascii(cand);
    for (std::size_t i = 0; i < entities.size(); ++i) {
      std::size_t d = edit_distance(folded_cand, entities.folded()[i]);
      bool wins = !have || d < best.distance ||
                  (d == best.distance &&
                   entities.entities()[i] < entities.entities()[best_i]);
      if (wins) {
        have = true;
        best.distance = d;
        best_i = i;
        best.candidate = cand;
      }
    }
  }
  const std::string& entity = entities.entities()[best_i];
  std::size_t denom = std::max(codepoint_length(best.candidate),
                               codepoint_length(entity));
  if (denom > 0 &&
      static_cast<double>(best.distance) / static_cast<double>(denom) >
          theta) {
    best.matched = false;
    best.candidate = cands.candidates.front();
    return best;
  }
  best.matched = true;
  best.entity = entity;
  return best;
}

}  // namespace clir
