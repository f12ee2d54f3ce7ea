#pragma once

// Ranked retrieval over an inverted index with the classic TF-IDF scoring
// used by Lucene-era engines:
//
//   score(q, d) = coord(q, d) * sum_t w_t * sqrt(tf) * (1 + ln(N/(df+1)))^2
//                 * 1/sqrt(doclen)
//
// coord(q, d) = matched query terms / total query terms; the per-query
// normalization constant is omitted (it does not change ranking). Ties
// break toward the lexicographically smaller document id.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clir/error.hpp"
#include "clir/text.hpp"
#include "clir/translation.hpp"

namespace clir {

struct Document {
  std::string id;
  std::string title;
  std::string body;
};

/// Tokenize (splitting on non-letter/non-digit), fold case, drop stopwords.
inline std::vector<std::string> analyze(
    std::string_view text, const std::unordered_set<std::string>& stopwords) {
  auto tokens = tokenize(text, true);
  if (stopwords.empty()) return tokens;
  return remove_stopwords(tokens, stopwords);
}

class InvertedIndex {
 public:
  using PostingList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

  std::size_t doc_count() const { return doc_ids_.size(); }
  std::size_t vocab_size() const { return postings_.size(); }
  const std::string& doc_id(std::size_t ord) const { return doc_ids_[ord]; }
  std::uint32_t doc_length(std::size_t ord) const { return doc_len_[ord]; }

  std::size_t df(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
  }

  const PostingList* postings(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
  }

  void add_document(const std::string& id,
                    const std::vector<std::string>& tokens) {
    if (id.empty() || id.find_first_of("\t\n\r") != std::string::npos)
      throw data_error("index: invalid document id '" + id + "'");
    auto [it, inserted] = doc_index_.emplace(id, doc_ids_.size());
    if (!inserted) throw data_error("index: duplicate document id '" + id + "'");
    std::uint32_t ord = static_cast<std::uint32_t>(doc_ids_.size());
    doc_ids_.push_back(id);
    doc_len_.push_back(static_cast<std::uint32_t>(tokens.size()));
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf)
      postings_[term].emplace_back(ord, count);
  }

  bool contains_doc(const std::string& id) const {
    return doc_index_.count(id) != 0;
  }

  /// Line-based versioned format; '#' meta lines after the version header
  /// are preserved verbatim, so serialize(load(s)) == s.
  void save(std::ostream& out) const {
    out << "clir-index 1\n";
    for (const auto& m : meta_) out << "# " << m << '\n';
    out << "docs " << doc_ids_.size() << '\n';
    for (std::size_t i = 0; i < doc_ids_.size(); ++i)
      out << doc_ids_[i] << '\t' << doc_len_[i] << '\n';
    out << "terms " << postings_.size() << '\n';
    for (const auto& [term, plist] : postings_) {
      out << term << '\t' << plist.size() << '\t';
      for (std::size_t i = 0; i < plist.size(); ++i) {
        if (i) out << ' ';
        out << plist[i].first << ':' << plist[i].second;
      }
      out << '\n';
    }
    out << "end\n";
  }

  void save_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write index: " + path.string());
    save(out);
    if (!out) throw data_error("short write: " + path.string());
  }

  static InvertedIndex load(std::istream& in) {
    InvertedIndex idx;
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line) || line != "clir-index 1")
      throw format_error("index file: bad or missing version header", 1);
    while (in.peek() == '#') {
      std::getline(in, line);
      ++lineno;
      idx.meta_.push_back(line.size() > 2 ? line.substr(2) : "");
    }
    auto expect_section = [&](const char* name) -> std::size_t {
      if (!std::getline(in, line))
        throw format_error(std::string("index file: missing '") + name +
                               "' section",
                           lineno + 1);
      ++lineno;
      auto fields = split_ws(line);
      std::optional<std::size_t> n;
      if (fields.size() == 2 && fields[0] == name) n = parse_size(fields[1]);
      if (!n)
        throw format_error(std::string("index file: expected '") + name +
                               " <count>'",
                           lineno);
      return *n;
    };
    std::size_t ndocs = expect_section("docs");
    for (std::size_t i = 0; i < ndocs; ++i) {
      if (!std::getline(in, line))
        throw format_error("index file: truncated docs section", lineno + 1);
      ++lineno;
      auto tab = line.find('\t');
      std::optional<std::size_t> len;
      if (tab != std::string::npos) len = parse_size(line.substr(tab + 1));
      if (tab == std::string::npos || !len)
        throw format_error("index file: expected '<docid>\\t<len>'", lineno);
      std::string id = line.substr(0, tab);
      auto [it, inserted] = idx.doc_index_.emplace(id, idx.doc_ids_.size());
      if (!inserted)
        throw format_error("index file: duplicate document id '" + id + "'",
                           lineno);
      idx.doc_ids_.push_back(std::move(id));
      idx.doc_len_.push_back(static_cast<std::uint32_t>(*len));
    }
    std::size_t nterms = expect_section("terms");
    for (std::size_t i = 0; i < nterms; ++i) {
      if (!std::getline(in, line))
        throw format_error("index file: truncated terms section", lineno + 1);
      ++lineno;
      auto fields = split_on(line, '\t');
      if (fields.size() != 3)
        throw format_error("index file: expected '<term>\\t<df>\\t<postings>'",
                           lineno);
      auto df = parse_size(fields[1]);
      if (!df || *df == 0)
        throw format_error("index file: bad df for term '" + fields[0] + "'",
                           lineno);
      PostingList plist;
      plist.reserve(*df);
      std::int64_t prev = -1;
      for (const auto& p : split_on(fields[2], ' ')) {
        auto colon = p.find(':');
        std::optional<std::size_t> ord, tf;
        if (colon != std::string::npos) {
          ord = parse_size(p.substr(0, colon));
          tf = parse_size(p.substr(colon + 1));
        }
        if (!ord || !tf || *tf == 0 || *ord >= ndocs ||
            static_cast<std::int64_t>(*ord) <= prev)
          throw format_error("index file: bad posting '" + p + "'", lineno);
        prev = static_cast<std::int64_t>(*ord);
        plist.emplace_back(static_cast<std::uint32_t>(*ord),
                           static_cast<std::uint32_t>(*tf));
      }
      if (plist.size() != *df)
        throw format_error("index file: df mismatch for term '" + fields[0] +
                               "'",
                           lineno);
      if (!idx.postings_.emplace(fields[0], std::move(plist)).second)
        throw format_error("index file: duplicate term '" + fields[0] + "'",
                           lineno);
    }
    if (!std::getline(in, line) || line != "end")
      throw format_error("index file: missing 'end' marker", lineno + 1);
    return idx;
  }

  static InvertedIndex load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open index: " + path.string());
    return load(in);
  }

  const std::vector<std::string>& meta() const { return meta_; }
  void set_meta(std::vector<std::string> meta) { meta_ = std::move(meta); }

 private:
  std::vector<std::string> doc_ids_;
  std::vector<std::uint32_t> doc_len_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::map<std::string, PostingList> postings_;
  std::vector<std::string> meta_;
};

/// Indexes title + body through the analyzer. Duplicate ids are a data
/// error naming the id; an empty corpus yields a valid empty index.
inline InvertedIndex index_corpus(
    const std::vector<Document>& docs,
    const std::unordered_set<std::string>& stopwords) {
  InvertedIndex idx;
  for (const auto& d : docs) {
    std::string text = d.title;
    if (!text.empty() && !d.body.empty()) text += '\n';
    text += d.body;
    idx.add_document(d.id, analyze(text, stopwords));
  }
  return idx;
}

namespace detail {

inline std::optional<std::pair<std::string, std::size_t>> sgml_block(
    std::string_view text, std::string_view tag, std::size_t from) {
  std::string open = "<" + std::string(tag) + ">";
  std::string close = "</" + std::string(tag) + ">";
  auto start = text.find(open, from);
  if (start == std::string_view::npos) return {};
  auto end = text.find(close, start + open.size());
  if (end == std::string_view::npos)
    throw format_error("corpus: unterminated <" + std::string(tag) + ">");
  return {{std::string(text.substr(start + open.size(),
                                   end - start - open.size())),
           end + close.size()}};
}

}  // namespace detail

/// TREC/FIRE-style SGML: <DOC> blocks with <DOCNO>, optional <TITLE>, and
/// one or more <TEXT> sections. Content outside <DOC> blocks is ignored.
inline std::vector<Document> parse_sgml_corpus(std::string_view text) {
  std::vector<Document> docs;
  std::size_t pos = 0;
  while (true) {
    auto doc = detail::sgml_block(text, "DOC", pos);
    if (!doc) break;
    pos = doc->second;
    std::string_view block = doc->first;
    auto docno = detail::sgml_block(block, "DOCNO", 0);
    if (!docno)
      throw format_error("corpus: <DOC> block without <DOCNO>");
    Document d;
    d.id = std::string(trim(docno->first));
    if (d.id.empty()) throw format_error("corpus: empty <DOCNO>");
    if (auto title = detail::sgml_block(block, "TITLE", 0))
      d.title = std::string(trim(title->first));
    std::size_t tpos = 0;
    while (auto t = detail::sgml_block(block, "TEXT", tpos)) {
      if (!d.body.empty()) d.body += '\n';
      d.body += std::string(trim(t->first));
      tpos = t->second;
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

inline std::vector<Document> load_sgml_corpus(
    const std::filesystem::path& path) {
  return parse_sgml_corpus(read_file(path));
}

/// Plain-directory corpus: every regular file is one document, its filename
/// the id, its content the body. Files are taken in sorted filename order.
inline std::vector<Document> load_directory_corpus(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw data_error("corpus: not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Document> docs;
  docs.reserve(files.size());
  for (const auto& f : files)
    docs.push_back({f.filename().string(), "", read_file(f)});
  return docs;
}

struct SearchResult {
  std::string doc_id;
  double score;
};

/// Ranked retrieval with the classic TF-IDF formula above. Results sorted
/// by (score desc, doc id asc) and truncated to top_n. An empty query or an
/// empty index yields no results.
inline std::vector<SearchResult> search(const InvertedIndex& idx,
                                        const WeightedQuery& query,
                                        std::size_t top_n = 1000) {
  if (top_n < 1) throw config_error("search: top_n must be >= 1");
  std::size_t n_docs = idx.doc_count();
  const auto& entries = query.entries();
  if (n_docs == 0 || entries.empty()) return {};

  std::vector<double> acc(n_docs, 0.0);
  std::vector<std::uint32_t> matched(n_docs, 0);
  double n = static_cast<double>(n_docs);
  for (const auto& e : entries) {
    const auto* plist = idx.postings(e.term);
    if (!plist) continue;
    double idf = 1.0 + std::log(n / (static_cast<double>(plist->size()) + 1.0));
    double widf2 = e.weight * idf * idf;
    for (const auto& [ord, tf] : *plist) {
      acc[ord] += widf2 * std::sqrt(static_cast<double>(tf));
      ++matched[ord];
    }
  }

  double total_terms = static_cast<double>(entries.size());
  std::vector<SearchResult> results;
  for (std::size_t ord = 0; ord < n_docs; ++ord) {
    if (matched[ord] == 0) continue;
    double coord = static_cast<double>(matched[ord]) / total_terms;
    double norm = 1.0 / std::sqrt(static_cast<double>(idx.doc_length(ord)));
    results.push_back({idx.doc_id(ord), acc[ord] * coord * norm});
  }
  std::sort(results.begin(), results.end(),
            [](const SearchResult& a, const SearchResult& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.doc_id < b.doc_id;
            });
  if (results.size() > top_n) results.resize(top_n);
  return results;
}

}  // namespace clir
