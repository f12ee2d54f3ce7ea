#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

#include "clir/projection.hpp"

#include "fixtures.hpp"

using namespace clir;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows,
                     std::size_t cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

TrainingSet make_training_set(Matrix x, Matrix y) {
  TrainingSet ts;
  ts.pairs = x.cols();
  ts.x = std::move(x);
  ts.y = std::move(y);
  return ts;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

/// Independent solver for the same ridge objective, using Eigen's
/// complete orthogonal decomposition instead of Cholesky.
Eigen::MatrixXd ridge_oracle(const Matrix& x, const Matrix& y,
                             double lambda) {
  Eigen::MatrixXd X = to_eigen(x), Y = to_eigen(y);
  Eigen::MatrixXd A =
      X * X.transpose() +
      lambda * Eigen::MatrixXd::Identity(X.rows(), X.rows());
  Eigen::MatrixXd Wt =
      A.completeOrthogonalDecomposition().solve(X * Y.transpose());
  return Wt.transpose();
}

}  // namespace

TEST_CASE("lexicon parsing keeps clean pairs and counts the rest") {
  fixtures::TempDir tmp;
  auto p = tmp.file("lex.tsv",
                    "ghara\thouse\n"
                    "ghara\thome\n"
                    "khela\t play \n"
                    "\n"
                    "no-tab-line\n"
                    "\tmissing-source\n"
                    "missing-target\t\n"
                    "multi\ttwo words\n");
  auto lex = load_lexicon(p);
  REQUIRE(lex.pairs.size() == 3);
  CHECK(lex.pairs[0] == std::pair<std::string, std::string>{"ghara", "house"});
  CHECK(lex.pairs[1] == std::pair<std::string, std::string>{"ghara", "home"});
  CHECK(lex.pairs[2] == std::pair<std::string, std::string>{"khela", "play"});
  CHECK(lex.skipped_malformed == 3);
  CHECK(lex.skipped_multiword == 1);
}

TEST_CASE("training set collects one pair per translation") {
  auto src = fixtures::make_store({{"a", {1.0f, 0.0f}}, {"b", {0.0f, 1.0f}}});
  auto tgt = fixtures::make_store({{"x", {1.0f}}, {"y", {2.0f}}});
  TranslationLexicon lex;
  lex.pairs = {{"a", "x"}, {"a", "y"}, {"b", "y"}, {"missing", "x"},
               {"a", "missing"}};
  auto ts = build_training_set(lex, src, tgt);
  CHECK(ts.pairs == 3);
  CHECK(ts.skipped_missing == 2);
  REQUIRE(ts.x.cols() == 3);
  CHECK(ts.x(0, 0) == 1.0);  // a
  CHECK(ts.y(0, 0) == 1.0);  // x
  CHECK(ts.y(0, 1) == 2.0);  // y
  CHECK(ts.x(1, 2) == 1.0);  // b

  SECTION("nothing usable is a data error") {
    TranslationLexicon none;
    none.pairs = {{"missing", "x"}};
    CHECK_THROWS_AS(build_training_set(none, src, tgt), data_error);
  }

  SECTION("pre-normalization scales to unit vectors and skips zero rows") {
    auto src2 = fixtures::make_store(
        {{"a", {3.0f, 4.0f}}, {"z", {0.0f, 0.0f}}});
    auto tgt2 = fixtures::make_store({{"x", {2.0f}}, {"y", {1.0f}}});
    TranslationLexicon lex2;
    lex2.pairs = {{"a", "x"}, {"z", "y"}};
    auto norm = build_training_set(lex2, src2, tgt2, true);
    CHECK(norm.pairs == 1);
    CHECK(norm.skipped_missing == 1);
    CHECK(norm.x(0, 0) == Catch::Approx(0.6).epsilon(1e-6));
    CHECK(norm.y(0, 0) == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("one-dimensional regression solves exactly") {
  Matrix x(1, 2), y(1, 2);
  x(0, 0) = 2.0;
  x(0, 1) = 3.0;
  y(0, 0) = 4.0;
  y(0, 1) = 6.0;
  auto pm = learn_projection(make_training_set(x, y), 0.0);
  CHECK(pm.matrix()(0, 0) == 2.0);
  CHECK(projection_rmse(pm, make_training_set(x, y)) == 0.0);
}

TEST_CASE("rmse on a known residual") {
  Matrix x(1, 1), y(1, 1);
  x(0, 0) = 1.0;
  y(0, 0) = 3.0;
  Matrix w(1, 1);
  w(0, 0) = 2.0;
  ProjectionMatrix pm(w, 0.0, 1);
  CHECK(projection_rmse(pm, make_training_set(x, y)) ==
        Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed form recovers a planted linear map") {
  std::mt19937_64 rng(11);
  std::size_t d1 = 12, d2 = 9, n = 80;
  Matrix w_true = random_matrix(rng, d2, d1);
  Matrix x = random_matrix(rng, d1, n);
  Matrix y = matmul(w_true, x);
  auto pm = learn_projection(make_training_set(x, y), 0.0);
  for (std::size_t i = 0; i < d2; ++i)
    for (std::size_t j = 0; j < d1; ++j)
      CHECK(pm.matrix()(i, j) == Catch::Approx(w_true(i, j)).margin(1e-8));
}

TEST_CASE("closed form agrees with an independent eigen solver") {
  std::mt19937_64 rng(13);
  std::size_t d1 = 8, d2 = 6, n = 40;
  Matrix x = random_matrix(rng, d1, n);
  Matrix y = random_matrix(rng, d2, n);
  for (double lambda : {1e-3, 0.5, 10.0}) {
    auto pm = learn_projection(make_training_set(x, y), lambda);
    auto oracle = ridge_oracle(x, y, lambda);
    for (std::size_t i = 0; i < d2; ++i)
      for (std::size_t j = 0; j < d1; ++j)
        CHECK(pm.matrix()(i, j) ==
              Catch::Approx(oracle(i, j)).margin(1e-8));
  }
}

TEST_CASE("closed form matches gradient descent on the same objective") {
  std::mt19937_64 rng(17);
  std::size_t d1 = 3, d2 = 2, n = 25;
  Matrix x = random_matrix(rng, d1, n);
  Matrix y = random_matrix(rng, d2, n);
  double lambda = 0.1;
  auto pm = learn_projection(make_training_set(x, y), lambda);

  // gradient of sum ||Wx - y||^2 + lambda ||W||_F^2 is 2(WX - Y)X^T + 2 lambda W
  Eigen::MatrixXd X = to_eigen(x), Y = to_eigen(y);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d2, d1);
  double step = 1.0 / (2.0 * (X * X.transpose()).trace() + lambda);
  for (int it = 0; it < 200000; ++it) {
    Eigen::MatrixXd grad =
        2.0 * (W * X - Y) * X.transpose() + 2.0 * lambda * W;
    W -= step * grad;
  }
  for (std::size_t i = 0; i < d2; ++i)
    for (std::size_t j = 0; j < d1; ++j)
      CHECK(pm.matrix()(i, j) == Catch::Approx(W(i, j)).margin(1e-6));
}

TEST_CASE("larger ridge shrinks the solution norm") {
  std::mt19937_64 rng(19);
  Matrix x = random_matrix(rng, 6, 30);
  Matrix y = random_matrix(rng, 4, 30);
  double prev = -1.0;
  bool first = true;
  for (double lambda : {0.0, 0.1, 1.0, 10.0, 100.0}) {
    auto pm = learn_projection(make_training_set(x, y), lambda);
    double norm = pm.matrix().frobenius_norm();
    if (!first) CHECK(norm <= prev + 1e-12);
    prev = norm;
    first = false;
  }
}

TEST_CASE("rank-deficient data without ridge names the remedy") {
  // two identical training columns, d1 = 2: X X^T is singular
  Matrix x(2, 2), y(1, 2);
  x(0, 0) = 1.0;
  x(1, 0) = 2.0;
  x(0, 1) = 1.0;
  x(1, 1) = 2.0;
  y(0, 0) = 1.0;
  y(0, 1) = 1.0;
  try {
    learn_projection(make_training_set(x, y), 0.0);
    FAIL("expected singular_matrix_error");
  } catch (const singular_matrix_error& e) {
    CHECK(std::string(e.what()).find("ridge lambda") != std::string::npos);
  }
  CHECK_NOTHROW(learn_projection(make_training_set(x, y), 1e-6));
}

TEST_CASE("negative lambda is a config error") {
  Matrix x(1, 1), y(1, 1);
  x(0, 0) = 1.0;
  y(0, 0) = 1.0;
  CHECK_THROWS_AS(learn_projection(make_training_set(x, y), -1.0),
                  config_error);
}

TEST_CASE("projection matrices round-trip through their text format") {
  std::mt19937_64 rng(23);
  Matrix w = random_matrix(rng, 3, 4);
  ProjectionMatrix pm(w, 0.125, 77);
  std::ostringstream out;
  pm.save(out);

  std::istringstream in(out.str());
  auto loaded = ProjectionMatrix::load(in);
  CHECK(loaded.lambda() == 0.125);
  CHECK(loaded.training_pairs() == 77);
  REQUIRE(loaded.output_dim() == 3);
  REQUIRE(loaded.input_dim() == 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(loaded.matrix()(i, j) == w(i, j));

  std::ostringstream again;
  loaded.save(again);
  CHECK(again.str() == out.str());
}

TEST_CASE("projection file errors carry line numbers") {
  auto load = [](const std::string& text) {
    std::istringstream in(text);
    return ProjectionMatrix::load(in);
  };
  CHECK_THROWS_AS(load(""), format_error);
  CHECK_THROWS_AS(load("2 2 0\n"), format_error);            // short header
  CHECK_THROWS_AS(load("1 2 0 1\n1\n"), format_error);       // short row
  CHECK_THROWS_AS(load("1 2 0 1\n1 x\n"), format_error);     // bad value
  CHECK_THROWS_AS(load("2 1 0 1\n1\n"), format_error);       // missing row
}

TEST_CASE("project validates dimensions and accepts float input") {
  Matrix w(2, 2);
  w(0, 0) = 1.0;
  w(0, 1) = 2.0;
  w(1, 0) = 3.0;
  w(1, 1) = 4.0;
  ProjectionMatrix pm(w, 0.0, 1);
  std::vector<float> x{1.0f, 1.0f};
  auto y = pm.project(std::span<const float>(x));
  REQUIRE(y.size() == 2);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 7.0);

  std::vector<double> wrong{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(pm.project(std::span<const double>(wrong)), data_error);
}
