#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "clir/retrieval.hpp"

#include "fixtures.hpp"

using namespace clir;

namespace {

WeightedQuery one_term(const std::string& term, double weight = 1.0) {
  WeightedQuery wq(TranslationMethod::we);
  int g = wq.add_group("", false);
  wq.add(term, weight, g);
  return wq;
}

InvertedIndex small_index() {
  InvertedIndex idx;
  idx.add_document("d1", {"apple", "banana", "cherry"});
  idx.add_document("d2", {"dog"});
  return idx;
}

}  // namespace

TEST_CASE("the analyzer folds, splits and filters") {
  auto tokens = analyze("The Cat, sat!", {"the"});
  CHECK(tokens == std::vector<std::string>{"cat", "sat"});
  CHECK(analyze("", {}).empty());
}

TEST_CASE("a unit-idf match scores one over root doc length") {
  auto idx = small_index();
  // N = 2, df = 1, so 1 + ln(N / (df+1)) = 1 exactly
  auto results = search(idx, one_term("apple"));
  REQUIRE(results.size() == 1);
  CHECK(results[0].doc_id == "d1");
  CHECK_THAT(results[0].score,
             Catch::Matchers::WithinAbs(1.0 / std::sqrt(3.0), 1e-12));
}

TEST_CASE("coord rewards documents matching more of the query") {
  auto idx = small_index();
  WeightedQuery wq(TranslationMethod::we);
  int g = wq.add_group("", false);
  wq.add("apple", 1.0, g);
  wq.add("dog", 1.0, g);

  auto results = search(idx, wq);
  REQUIRE(results.size() == 2);
  // d2: coord 1/2, len 1 -> 0.5; d1: coord 1/2, len 3 -> 0.5 / sqrt(3)
  CHECK(results[0].doc_id == "d2");
  CHECK_THAT(results[0].score, Catch::Matchers::WithinAbs(0.5, 1e-12));
  CHECK(results[1].doc_id == "d1");
  CHECK_THAT(results[1].score,
             Catch::Matchers::WithinAbs(0.5 / std::sqrt(3.0), 1e-12));

  // an unmatched extra term halves the coord factor
  auto solo = search(idx, one_term("apple"));
  WeightedQuery with_miss(TranslationMethod::we);
  g = with_miss.add_group("", false);
  with_miss.add("apple", 1.0, g);
  with_miss.add("nowhere", 1.0, g);
  auto halved = search(idx, with_miss);
  REQUIRE(halved.size() == 1);
  CHECK_THAT(halved[0].score,
             Catch::Matchers::WithinAbs(0.5 * solo[0].score, 1e-12));
}

TEST_CASE("term frequency enters under a square root") {
  InvertedIndex idx;
  idx.add_document("da", {"x", "x", "x", "x"});
  idx.add_document("db", {"x", "y", "y", "z"});
  auto results = search(idx, one_term("x"));
  REQUIRE(results.size() == 2);
  CHECK(results[0].doc_id == "da");
  CHECK_THAT(results[0].score / results[1].score,
             Catch::Matchers::WithinAbs(2.0, 1e-12));
}

TEST_CASE("longer documents are normalized down") {
  InvertedIndex idx;
  idx.add_document("da", {"x", "f1"});
  idx.add_document("db", {"x", "f2", "f3", "f4", "f5", "f6", "f7", "f8"});
  auto results = search(idx, one_term("x"));
  REQUIRE(results.size() == 2);
  CHECK(results[0].doc_id == "da");
  CHECK_THAT(results[0].score / results[1].score,
             Catch::Matchers::WithinAbs(2.0, 1e-12));
}

TEST_CASE("query weights scale scores linearly") {
  auto idx = small_index();
  auto base = search(idx, one_term("apple", 1.0));
  auto doubled = search(idx, one_term("apple", 2.0));
  REQUIRE(base.size() == 1);
  REQUIRE(doubled.size() == 1);
  CHECK_THAT(doubled[0].score,
             Catch::Matchers::WithinAbs(2.0 * base[0].score, 1e-12));
}

TEST_CASE("score ties break toward the smaller document id") {
  InvertedIndex idx;
  idx.add_document("b", {"x"});
  idx.add_document("a", {"x"});
  auto results = search(idx, one_term("x"));
  REQUIRE(results.size() == 2);
  CHECK(results[0].doc_id == "a");
  CHECK(results[1].doc_id == "b");
  CHECK(results[0].score == results[1].score);
}

TEST_CASE("results truncate to top_n") {
  InvertedIndex idx;
  for (int i = 0; i < 5; ++i) {
    std::vector<std::string> tokens(static_cast<std::size_t>(i + 1), "pad");
    tokens[0] = "x";
    idx.add_document("d" + std::to_string(i), tokens);
  }
  auto all = search(idx, one_term("x"), 1000);
  REQUIRE(all.size() == 5);
  auto top3 = search(idx, one_term("x"), 3);
  REQUIRE(top3.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(top3[i].doc_id == all[i].doc_id);
  CHECK_THROWS_AS(search(idx, one_term("x"), 0), config_error);
}

TEST_CASE("empty queries and empty indexes return nothing") {
  auto idx = small_index();
  CHECK(search(idx, WeightedQuery(TranslationMethod::we)).empty());
  InvertedIndex empty;
  CHECK(search(empty, one_term("x")).empty());
  CHECK(search(idx, one_term("nowhere")).empty());
}

TEST_CASE("documents validate their ids") {
  InvertedIndex idx;
  CHECK_THROWS_AS(idx.add_document("", {"x"}), data_error);
  CHECK_THROWS_AS(idx.add_document("a\tb", {"x"}), data_error);
  idx.add_document("d1", {"x"});
  CHECK_THROWS_AS(idx.add_document("d1", {"y"}), data_error);
  CHECK_THROWS_WITH(idx.add_document("d1", {"y"}),
                    Catch::Matchers::ContainsSubstring("d1"));
}

TEST_CASE("corpus indexing joins title and body") {
  std::vector<Document> docs = {{"d1", "Alpha Beta", "gamma delta"},
                                {"d2", "", "epsilon"}};
  auto idx = index_corpus(docs, {});
  CHECK(idx.doc_count() == 2);
  CHECK(idx.doc_length(0) == 4);
  CHECK(idx.df("alpha") == 1);
  CHECK(idx.df("gamma") == 1);
  CHECK(idx.contains_doc("d2"));

  std::vector<Document> dupes = {{"d1", "", "x"}, {"d1", "", "y"}};
  CHECK_THROWS_AS(index_corpus(dupes, {}), data_error);
}

TEST_CASE("index files round-trip byte for byte") {
  InvertedIndex idx;
  idx.add_document("d1", {"apple", "banana", "apple"});
  idx.add_document("d2", {"banana"});
  idx.set_meta({"seed 42", "config abc"});

  std::ostringstream first;
  idx.save(first);
  std::istringstream in(first.str());
  auto loaded = InvertedIndex::load(in);
  std::ostringstream second;
  loaded.save(second);
  CHECK(first.str() == second.str());

  CHECK(loaded.doc_count() == 2);
  CHECK(loaded.meta() == std::vector<std::string>{"seed 42", "config abc"});
  CHECK(loaded.df("apple") == 1);
  CHECK(loaded.df("banana") == 2);
  REQUIRE(loaded.postings("apple"));
  CHECK((*loaded.postings("apple"))[0].second == 2);

  fixtures::TempDir tmp;
  auto p = tmp.path() / "corpus.idx";
  idx.save_file(p);
  auto from_disk = InvertedIndex::load_file(p);
  std::ostringstream third;
  from_disk.save(third);
  CHECK(third.str() == first.str());

  CHECK_THROWS_AS(InvertedIndex::load_file(tmp.path() / "missing.idx"),
                  data_error);
}

TEST_CASE("searching a reloaded index reproduces scores exactly") {
  InvertedIndex idx;
  idx.add_document("d1", {"apple", "banana", "cherry"});
  idx.add_document("d2", {"apple", "apple"});
  idx.add_document("d3", {"banana"});
  std::ostringstream out;
  idx.save(out);
  std::istringstream in(out.str());
  auto loaded = InvertedIndex::load(in);

  auto a = search(idx, one_term("apple"));
  auto b = search(loaded, one_term("apple"));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].doc_id == b[i].doc_id);
    CHECK(a[i].score == b[i].score);
  }
}

TEST_CASE("malformed index files are rejected with line numbers") {
  auto load_str = [](const std::string& s) {
    std::istringstream in(s);
    return InvertedIndex::load(in);
  };
  CHECK_THROWS_AS(load_str("clir-index 2\n"), format_error);
  CHECK_THROWS_AS(load_str("clir-index 1\ndocs 2\nd1\t3\n"), format_error);
  CHECK_THROWS_AS(load_str("clir-index 1\ndocs 1\nd1 3\n"), format_error);
  CHECK_THROWS_AS(
      load_str("clir-index 1\ndocs 1\nd1\t3\nterms 1\nx\t2\t0:1\nend\n"),
      format_error);
  CHECK_THROWS_AS(
      load_str("clir-index 1\ndocs 1\nd1\t3\nterms 1\nx\t1\t0:0\nend\n"),
      format_error);
  CHECK_THROWS_AS(
      load_str("clir-index 1\ndocs 1\nd1\t3\nterms 1\nx\t1\t1:1\nend\n"),
      format_error);
  CHECK_THROWS_AS(
      load_str("clir-index 1\ndocs 2\nd1\t3\nd2\t1\nterms 1\nx\t2\t1:1 0:1\nend\n"),
      format_error);
  CHECK_THROWS_AS(
      load_str("clir-index 1\ndocs 1\nd1\t3\nterms 1\nx\tzz\t0:1\nend\n"),
      format_error);
  CHECK_THROWS_AS(
      load_str("clir-index 1\ndocs 1\nd1\t3\nterms 1\nx\t1\t0:1\n"),
      format_error);
  CHECK_THROWS_AS(
      load_str(
          "clir-index 1\ndocs 2\nd1\t1\nd1\t1\nterms 1\nx\t1\t0:1\nend\n"),
      format_error);
  try {
    load_str("clir-index 1\ndocs 1\nd1 3\n");
    FAIL("expected format_error");
  } catch (const format_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("sgml corpora parse docno, title and text blocks") {
  std::string text =
      "preamble to ignore\n"
      "<DOC>\n<DOCNO> d1 </DOCNO>\n<TITLE>Hello World</TITLE>\n"
      "<TEXT>first part</TEXT>\n<TEXT>second part</TEXT>\n</DOC>\n"
      "between docs\n"
      "<DOC><DOCNO>d2</DOCNO><TEXT>other</TEXT></DOC>\n";
  auto docs = parse_sgml_corpus(text);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "d1");
  CHECK(docs[0].title == "Hello World");
  CHECK(docs[0].body == "first part\nsecond part");
  CHECK(docs[1].id == "d2");
  CHECK(docs[1].title.empty());
  CHECK(docs[1].body == "other");
}

TEST_CASE("sgml corpora reject structural damage") {
  CHECK_THROWS_AS(parse_sgml_corpus("<DOC><TEXT>x</TEXT></DOC>"),
                  format_error);
  CHECK_THROWS_AS(parse_sgml_corpus("<DOC><DOCNO>  </DOCNO></DOC>"),
                  format_error);
  CHECK_THROWS_AS(
      parse_sgml_corpus("<DOC><DOCNO>d1</DOCNO><TEXT>x</DOC>"),
      format_error);
  CHECK_THROWS_AS(parse_sgml_corpus("<DOC><DOCNO>d1</DOCNO>"), format_error);
  CHECK(parse_sgml_corpus("no docs here").empty());
}

TEST_CASE("directory corpora take files in sorted name order") {
  fixtures::TempDir tmp;
  tmp.file("b.txt", "bravo content");
  tmp.file("a.txt", "alpha content");
  tmp.file("c.txt", "charlie content");
  auto docs = load_directory_corpus(tmp.path());
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].id == "a.txt");
  CHECK(docs[0].body == "alpha content");
  CHECK(docs[1].id == "b.txt");
  CHECK(docs[2].id == "c.txt");

  CHECK_THROWS_AS(load_directory_corpus(tmp.path() / "missing"), data_error);
}

TEST_CASE("disjoint vocabularies rank exactly as the formula predicts") {
  std::mt19937_64 rng(211);
  std::uniform_int_distribution<std::size_t> ndocs_d(3, 8);
  std::uniform_int_distribution<std::uint32_t> tf_d(1, 4);
  std::uniform_int_distribution<std::uint32_t> fill_d(0, 8);
  std::uniform_real_distribution<double> weight_d(0.1, 2.0);

  for (int corpus = 0; corpus < 100; ++corpus) {
    std::size_t ndocs = ndocs_d(rng);
    InvertedIndex idx;
    WeightedQuery wq(TranslationMethod::we);
    int g = wq.add_group("", false);
    std::vector<std::pair<std::string, double>> expected;

    for (std::size_t i = 0; i < ndocs; ++i) {
      std::string unit = "u" + std::to_string(i);
      std::uint32_t tf = tf_d(rng);
      std::uint32_t fill = fill_d(rng);
      std::vector<std::string> tokens(tf, unit);
      for (std::uint32_t j = 0; j < fill; ++j)
        tokens.push_back("f" + std::to_string(i) + "_" + std::to_string(j));
      std::string id = "d" + std::to_string(i);
      idx.add_document(id, tokens);

      double w = weight_d(rng);
      wq.add(unit, w, g);
      double idf = 1.0 + std::log(static_cast<double>(ndocs) / 2.0);
      double score = (1.0 / static_cast<double>(ndocs)) * w *
                     std::sqrt(static_cast<double>(tf)) * idf * idf /
                     std::sqrt(static_cast<double>(tokens.size()));
      expected.emplace_back(id, score);
    }

    std::sort(expected.begin(), expected.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });

    auto results = search(idx, wq);
    REQUIRE(results.size() == ndocs);
    for (std::size_t i = 0; i < ndocs; ++i) {
      CHECK(results[i].doc_id == expected[i].first);
      CHECK_THAT(results[i].score,
                 Catch::Matchers::WithinAbs(expected[i].second, 1e-12));
    }
  }
}
