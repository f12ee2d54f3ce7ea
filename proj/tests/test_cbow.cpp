#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "clir/cbow.hpp"
#include "clir/embedding.hpp"

#include "fixtures.hpp"

using namespace clir;

namespace {

CbowConfig small_config() {
  CbowConfig cfg;
  cfg.dim = 10;
  cfg.window = 2;
  cfg.negative = 3;
  cfg.epochs = 10;
  cfg.min_count = 1;
  cfg.seed = 1;
  return cfg;
}

std::vector<std::vector<std::string>> toy_sentences() {
  // b and d are interchangeable between fixed neighbors; q is unrelated.
  std::vector<std::vector<std::string>> s;
  for (int i = 0; i < 100; ++i) {
    s.push_back({"left", "b", "right"});
    s.push_back({"left", "d", "right"});
    s.push_back({"up", "q", "down"});
  }
  return s;
}

}  // namespace

TEST_CASE("cbow config validation") {
  CbowConfig cfg = small_config();
  cfg.dim = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = small_config();
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = small_config();
  cfg.lr_floor_factor = 2.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("cbow vocabulary is ordered by count desc, then word asc") {
  std::vector<std::vector<std::string>> s = {{"b", "a", "a"},
                                             {"b", "a", "c", "d", "d"}};
  auto cfg = small_config();
  cfg.epochs = 1;
  auto store = train_cbow(s, cfg);
  REQUIRE(store.size() == 4);
  CHECK(store.word_at(0) == "a");  // count 3
  CHECK(store.word_at(1) == "b");  // count 2, before d
  CHECK(store.word_at(2) == "d");  // count 2
  CHECK(store.word_at(3) == "c");  // count 1
  CHECK(store.dim() == cfg.dim);

  SECTION("min_count filters rare words") {
    cfg.min_count = 2;
    auto filtered = train_cbow(s, cfg);
    CHECK(filtered.size() == 3);
    CHECK_FALSE(filtered.contains("c"));
  }
}

TEST_CASE("cbow rejects corpora with nothing to train on") {
  auto cfg = small_config();
  cfg.min_count = 5;
  std::vector<std::vector<std::string>> rare = {{"a", "b"}, {"c"}};
  CHECK_THROWS_AS(train_cbow(rare, cfg), data_error);
  CHECK_THROWS_AS(train_cbow({}, cfg), data_error);
}

TEST_CASE("cbow training is bitwise reproducible for a fixed seed") {
  auto s = toy_sentences();
  auto cfg = small_config();
  auto one = train_cbow(s, cfg);
  auto two = train_cbow(s, cfg);
  REQUIRE(one.size() == two.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    auto a = one.vector_at(i), b = two.vector_at(i);
    for (std::size_t j = 0; j < one.dim(); ++j) CHECK(a[j] == b[j]);
  }

  SECTION("a different seed moves the vectors") {
    cfg.seed = 2;
    auto other = train_cbow(s, cfg);
    bool any_diff = false;
    for (std::size_t j = 0; j < one.dim() && !any_diff; ++j)
      any_diff = one.vector_of("b")[j] != other.vector_of("b")[j];
    CHECK(any_diff);
  }
}

TEST_CASE("cbow places interchangeable words near each other") {
  auto store = train_cbow(toy_sentences(), small_config());
  double near = cosine(store.vector_of("b"), store.vector_of("d"));
  double far = cosine(store.vector_of("b"), store.vector_of("q"));
  CHECK(near > far);
  CHECK(near > 0.5);
}

TEST_CASE("train_cbow_file tokenizes lines and folds case on request") {
  fixtures::TempDir tmp;
  std::string text;
  for (int i = 0; i < 50; ++i) text += "Alpha beta gamma.\nALPHA beta delta!\n";
  auto p = tmp.file("corpus.txt", text);

  auto cfg = small_config();
  cfg.epochs = 1;
  auto folded = train_cbow_file(p, cfg, true);
  CHECK(folded.contains("alpha"));
  CHECK_FALSE(folded.contains("Alpha"));

  auto verbatim = train_cbow_file(p, cfg, false);
  CHECK(verbatim.contains("Alpha"));
  CHECK(verbatim.contains("ALPHA"));

  auto empty = tmp.file("empty.txt", "\n\n");
  CHECK_THROWS_AS(train_cbow_file(empty, cfg, true), data_error);
}
