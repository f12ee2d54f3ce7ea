#pragma once

// Ranked-retrieval evaluation following the reference trec evaluation
// tool's conventions: P@k always divides by k, average precision divides by
// the number of relevant documents in the qrels, and aggregates average
// over queries that have at least one relevant document. Loaded runs are
// re-sorted by (score desc, doc id asc).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clir/error.hpp"
#include "clir/text.hpp"

namespace clir {

class Qrels {
 public:
  /// "qid 0 docid rel" lines, whitespace separated; rel > 0 means relevant.
  static Qrels load(const std::filesystem::path& path) {
    Qrels q;
    std::size_t lineno = 0;
    for (const auto& raw : read_lines(path)) {
      ++lineno;
      if (trim(raw).empty()) continue;
      auto fields = split_ws(raw);
      if (fields.size() != 4)
        throw format_error("qrels: expected 'qid 0 docid rel'", lineno);
      auto rel = parse_number<double>(fields[3]);
      if (!rel)
        throw format_error("qrels: bad relevance '" + fields[3] + "'", lineno);
      q.queries_.insert(fields[0]);
      if (*rel > 0) q.relevant_[fields[0]].insert(fields[2]);
    }
    return q;
  }

  void add(const std::string& qid, const std::string& doc_id, int rel) {
    queries_.insert(qid);
    if (rel > 0) relevant_[qid].insert(doc_id);
  }

  bool has_query(const std::string& qid) const {
    return queries_.count(qid) != 0;
  }

  std::size_t num_relevant(const std::string& qid) const {
    auto it = relevant_.find(qid);
    return it == relevant_.end() ? 0 : it->second.size();
  }

  /// Relevant doc ids for a query; empty set when none are relevant.
  const std::unordered_set<std::string>& relevant(const std::string& qid) const {
    static const std::unordered_set<std::string> empty;
    auto it = relevant_.find(qid);
    return it == relevant_.end() ? empty : it->second;
  }

  /// Query ids with at least one relevant document, sorted.
  std::vector<std::string> queries_with_relevant() const {
    std::vector<std::string> out;
    out.reserve(relevant_.size());
    for (const auto& [qid, docs] : relevant_)
      if (!docs.empty()) out.push_back(qid);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::unordered_set<std::string> queries_;
  std::unordered_map<std::string, std::unordered_set<std::string>> relevant_;
};

struct RunEntry {
  std::string doc_id;
  double score;
};

class Run {
 public:
  /// "qid Q0 docid rank score tag" lines. Rankings are re-sorted by
  /// (score desc, doc id asc); when that disagrees with the stored rank
  /// field's order, the query is noted in resort_warnings.
  static Run load(const std::filesystem::path& path) {
    Run run;
    struct Row {
      std::string doc_id;
      std::size_t rank;
      double score;
    };
    std::unordered_map<std::string, std::vector<Row>> rows;
    std::size_t lineno = 0;
    for (const auto& raw : read_lines(path)) {
      ++lineno;
      if (trim(raw).empty()) continue;
      auto fields = split_ws(raw);
      if (fields.size() != 6)
        throw format_error("run: expected 'qid Q0 docid rank score tag'",
                           lineno);
      auto rank = parse_size(fields[3]);
      auto score = parse_number<double>(fields[4]);
      if (!rank || !score || !std::isfinite(*score))
        throw format_error("run: bad rank or score", lineno);
      if (rows.find(fields[0]) == rows.end())
        run.query_order_.push_back(fields[0]);
      rows[fields[0]].push_back({fields[2], *rank, *score});
    }
    for (const auto& qid : run.query_order_) {
      auto& list = rows[qid];
      std::unordered_set<std::string> seen;
      for (const auto& r : list)
        if (!seen.insert(r.doc_id).second)
          throw data_error("run: duplicate document '" + r.doc_id +
                           "' for query " + qid);
      std::vector<Row> by_rank(list);
      std::stable_sort(by_rank.begin(), by_rank.end(),
                       [](const Row& a, const Row& b) { return a.rank < b.rank; });
      std::sort(list.begin(), list.end(), [](const Row& a, const Row& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
      });
      bool agree = true;
      for (std::size_t i = 0; i < list.size() && agree; ++i)
        agree = by_rank[i].doc_id == list[i].doc_id;
      if (!agree)
        run.resort_warnings_.push_back(qid);
      auto& out = run.ranked_[qid];
      out.reserve(list.size());
      for (auto& r : list) out.push_back({std::move(r.doc_id), r.score});
    }
    return run;
  }

  void add_query(const std::string& qid, std::vector<RunEntry> ranked) {
    if (ranked_.count(qid))
      throw data_error("run: duplicate query " + qid);
    query_order_.push_back(qid);
    ranked_.emplace(qid, std::move(ranked));
  }

  /// Writes "qid Q0 docid rank score tag" with 1-based ranks and shortest
  /// round-trip scores.
  void save(std::ostream& out, const std::string& tag) const {
    for (const auto& qid : query_order_) {
      const auto& list = ranked_.at(qid);
      for (std::size_t i = 0; i < list.size(); ++i)
        out << qid << " Q0 " << list[i].doc_id << ' ' << i + 1 << ' '
            << format_number(list[i].score) << ' ' << tag << '\n';
    }
  }

  void save_file(const std::filesystem::path& path,
                 const std::string& tag) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write run: " + path.string());
    save(out, tag);
    if (!out) throw data_error("short write: " + path.string());
  }

  const std::vector<std::string>& query_order() const { return query_order_; }
  const std::vector<std::string>& resort_warnings() const {
    return resort_warnings_;
  }

  bool has_query(const std::string& qid) const {
    return ranked_.count(qid) != 0;
  }

  const std::vector<RunEntry>& ranked(const std::string& qid) const {
    static const std::vector<RunEntry> empty;
    auto it = ranked_.find(qid);
    return it == ranked_.end() ? empty : it->second;
  }

 private:
  std::vector<std::string> query_order_;
  std::unordered_map<std::string, std::vector<RunEntry>> ranked_;
  std::vector<std::string> resort_warnings_;
};

/// Fraction of the top k that is relevant; the divisor is always k, even
/// when fewer than k documents were retrieved.
inline double precision_at_k(const std::vector<RunEntry>& ranked,
                             const std::unordered_set<std::string>& relevant,
                             std::size_t k) {
  if (k < 1) throw config_error("precision_at_k: k must be >= 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
    if (relevant.count(ranked[i].doc_id)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

/// Mean of precision at each relevant document's rank, divided by the total
/// number of relevant documents in the qrels (retrieved or not).
inline double average_precision(
    const std::vector<RunEntry>& ranked,
    const std::unordered_set<std::string>& relevant) {
  if (relevant.empty())
    throw data_error("average_precision: query has no relevant documents");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (relevant.count(ranked[i].doc_id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

struct EvalReport {
  struct Row {
    std::string qid;
    double p5, p10, ap;
  };
  std::vector<Row> per_query;  // evaluable queries
  double mean_p5 = 0.0, mean_p10 = 0.0, map = 0.0;
  std::size_t evaluated = 0;
  std::vector<std::string> skipped;  // "qid: reason"
};

/// Evaluates a run against qrels. By default only queries present in both
/// the run and the qrels count, and queries without relevant documents are
/// skipped (and listed). With `all_qrels_queries`, every qrels query with a
/// relevant document counts; those missing from the run contribute zeros.
inline EvalReport evaluate_run(const Run& run, const Qrels& qrels,
                               bool all_qrels_queries = false) {
  EvalReport report;
  std::vector<std::string> qids;
  if (all_qrels_queries) {
    qids = qrels.queries_with_relevant();
    for (const auto& qid : qids)
      if (!run.has_query(qid))
        report.skipped.push_back(qid + ": not in run, counted as zero");
  } else {
    for (const auto& qid : run.query_order()) {
      if (!qrels.has_query(qid)) {
        report.skipped.push_back(qid + ": not in qrels, excluded");
        continue;
      }
      if (qrels.num_relevant(qid) == 0) {
        report.skipped.push_back(qid + ": no relevant documents, excluded");
        continue;
      }
      qids.push_back(qid);
    }
  }
  if (qids.empty())
    throw data_error(
        "evaluate: no evaluable queries (no query with relevant documents)");
  for (const auto& qid : qids) {
    const auto& ranked = run.ranked(qid);
    const auto& rel = qrels.relevant(qid);
    EvalReport::Row row{qid, precision_at_k(ranked, rel, 5),
                        precision_at_k(ranked, rel, 10),
                        average_precision(ranked, rel)};
    report.mean_p5 += row.p5;
    report.mean_p10 += row.p10;
    report.map += row.ap;
    report.per_query.push_back(std::move(row));
  }
  report.evaluated = report.per_query.size();
  double n = static_cast<double>(report.evaluated);
  report.mean_p5 /= n;
  report.mean_p10 /= n;
  report.map /= n;
  return report;
}

/// Aligned per-query table followed by machine-readable
/// "<metric> <qid|all> <value>" lines.
inline std::string render_report(const EvalReport& report) {
  std::size_t width = 5;  // "query"
  for (const auto& row : report.per_query)
    width = std::max(width, row.qid.size());
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-*s  %6s  %6s  %6s\n",
                static_cast<int>(width), "query", "P@5", "P@10", "AP");
  out += buf;
  for (const auto& row : report.per_query) {
    std::snprintf(buf, sizeof buf, "%-*s  %6.4f  %6.4f  %6.4f\n",
                  static_cast<int>(width), row.qid.c_str(), row.p5, row.p10,
                  row.ap);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-*s  %6.4f  %6.4f  %6.4f\n",
                static_cast<int>(width), "all", report.mean_p5,
                report.mean_p10, report.map);
  out += buf;
  out += '\n';
  for (const auto& row : report.per_query) {
    std::snprintf(buf, sizeof buf,
                  "p5 %s %.6f\np10 %s %.6f\nap %s %.6f\n", row.qid.c_str(),
                  row.p5, row.qid.c_str(), row.p10, row.qid.c_str(), row.ap);
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "num_q all %zu\np5 all %.6f\np10 all %.6f\nmap all %.6f\n",
                report.evaluated, report.mean_p5, report.mean_p10, report.map);
  out += buf;
  return out;
}

}  // namespace clir
