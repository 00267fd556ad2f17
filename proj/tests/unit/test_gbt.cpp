#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "bowaudit/gbt.hpp"
#include "bowaudit/rng.hpp"
#include "oracles.hpp"

using namespace bowaudit;
using Catch::Approx;

namespace {

constexpr Label P = Label::positive;
constexpr Label N = Label::negative;

using oracle::Dense;
using oracle::random_dense;
using oracle::random_labels;

bool trees_well_formed(const GbtModel& m) {
  for (const auto& t : m.trees) {
    if (t.depth() > m.params.max_depth) return false;
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) continue;
      if (n.left < 0 || n.right < 0) return false;
      if (static_cast<std::size_t>(n.left) >= t.nodes.size()) return false;
      if (static_cast<std::size_t>(n.right) >= t.nodes.size()) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("gradient and hessian match finite differences of the loss") {
  Pcg32 rng(3);
  for (int i = 0; i < 10; ++i) {
    const double m = (rng.uniform() - 0.5) * 12.0;
    for (double y : {0.0, 1.0}) {
      const double eps = 1e-5;
      const double fd = (logistic_loss(m + eps, y) - logistic_loss(m - eps, y)) / (2 * eps);
      const double g = sigmoid(m) - y;
      CHECK(std::abs(fd - g) <= 1e-6 * std::max(1.0, std::abs(g)));
      const double fd2 = (sigmoid(m + eps) - sigmoid(m - eps)) / (2 * eps);
      CHECK(fd2 == Approx(sigmoid(m) * (1 - sigmoid(m))).epsilon(1e-6));
    }
  }
}

TEST_CASE("sigmoid is symmetric and monotone") {
  // Strict where doubles can still tell the values apart; beyond |m| ~ 36
  // the upper tail rounds to 1.
  double prev = 0.0;
  for (double m = -30; m <= 30; m += 0.25) {
    CHECK(sigmoid(m) + sigmoid(-m) == Approx(1.0));
    CHECK(sigmoid(m) > prev);
    prev = sigmoid(m);
  }
  for (double m = 30; m <= 800; m += 7) {
    CHECK(sigmoid(m) >= prev);
    prev = sigmoid(m);
  }
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(std::isfinite(logistic_loss(800.0, 0.0)));
  CHECK(logistic_loss(-800.0, 0.0) == 0.0);
}

TEST_CASE("training loss never increases") {
  Pcg32 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Dense d = random_dense(rng, 60, 8, 3);
    const auto y = random_labels(rng, 60);
    GbtParams p;
    p.rounds = 30;
    p.learning_rate = trial % 2 ? 0.3 : 0.1;
    p.min_child_weight = trial % 3 ? 1.0 : 0.0;
    TrainingLog log;
    train_gbt(d.sparse(), y, p, &log);
    REQUIRE(log.mean_loss.size() == 31);
    for (std::size_t k = 1; k < log.mean_loss.size(); ++k) REQUIRE(log.mean_loss[k] <= log.mean_loss[k - 1] + 1e-9);
  }
}

TEST_CASE("first split equals the exhaustive argmax of the gain") {
  Pcg32 rng(17);
  int compared = 0, split_found = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 2 + rng.bounded(11);
    const std::size_t features = 1 + rng.bounded(4);
    const Dense d = random_dense(rng, rows, features, 4);
    const auto y = random_labels(rng, rows);
    GbtParams p;
    p.rounds = 1;
    p.min_child_weight = trial % 2 ? 0.0 : 0.5;
    p.l2_lambda = trial % 3 == 0 ? 0.0 : 1.0;
    p.base_margin = trial % 5 == 0 ? 0.4 : 0.0;
    const auto model = train_gbt(d.sparse(), y, p);
    const auto want = oracle::root_split(d, y, p);
    const auto& root = model.trees[0].nodes[0];
    ++compared;
    if (want.feature < 0) {
      REQUIRE(root.is_leaf());
      continue;
    }
    ++split_found;
    REQUIRE_FALSE(root.is_leaf());
    REQUIRE(root.gain == Approx(want.gain).margin(1e-12));
    if (want.gain - want.runner_up > 1e-9) {
      REQUIRE(root.feature == want.feature);
      REQUIRE(root.threshold == want.threshold);
    }
  }
  CHECK(compared == 200);
  CHECK(split_found > 50);
}

TEST_CASE("ties go to the lowest feature index") {
  // Features 0 and 1 are identical columns.
  Dense d;
  d.n_features = 3;
  d.x = {{1, 1, 0}, {1, 1, 0}, {0, 0, 1}, {0, 0, 1}, {1, 1, 0}, {0, 0, 0}};
  const std::vector<Label> y{P, P, N, N, P, N};
  GbtParams p;
  p.rounds = 1;
  p.min_child_weight = 0.0;
  const auto model = train_gbt(d.sparse(), y, p);
  CHECK(model.trees[0].nodes[0].feature == 0);
  CHECK(model.trees[0].nodes[0].threshold == 0.5);
}

TEST_CASE("single-leaf weight is -G/(H+lambda)") {
  Pcg32 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Dense d = random_dense(rng, 15, 3, 2);
    const auto y = random_labels(rng, 15);
    GbtParams p;
    p.rounds = 1;
    p.gamma = 1e9;  // no split can pay for itself
    p.base_margin = (rng.uniform() - 0.5) * 2;
    const auto model = train_gbt(d.sparse(), y, p);
    REQUIRE(model.trees[0].nodes.size() == 1);
    const double prob = sigmoid(p.base_margin);
    double G = 0, H = 0;
    for (auto l : y) G += prob - (l == P ? 1.0 : 0.0), H += prob * (1 - prob);
    REQUIRE(model.trees[0].nodes[0].weight == Approx(-G / (H + p.l2_lambda)).epsilon(1e-12));
  }
}

TEST_CASE("all-positive labels drive probabilities high") {
  Pcg32 rng(29);
  const Dense d = random_dense(rng, 40, 5, 3);
  const std::vector<Label> y(40, P);
  const auto m = train_gbt(d.sparse(), y, GbtParams{});
  for (const auto& row : d.sparse().rows) CHECK(predict_prob(m, row) > 0.95);
}

TEST_CASE("one separating binary feature is learned within 10 rounds") {
  Pcg32 rng(31);
  Dense d;
  d.n_features = 4;
  std::vector<Label> y;
  for (int i = 0; i < 80; ++i) {
    const bool pos = rng.bounded(2);
    d.x.push_back({pos ? 1u : 0u, rng.bounded(3), rng.bounded(2), rng.bounded(4)});
    y.push_back(pos ? P : N);
  }
  GbtParams p;
  p.rounds = 10;
  const auto m = train_gbt(d.sparse(), y, p);
  const auto s = d.sparse();
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(predict_label(m, s.rows[i]) == y[i]);
  CHECK(feature_importance(m).begin()->first == 0);
}

TEST_CASE("zero rounds give the base probability") {
  GbtParams p;
  p.rounds = 0;
  Dense d;
  d.n_features = 2;
  d.x = {{1, 0}, {0, 1}};
  const auto m = train_gbt(d.sparse(), std::vector<Label>{P, N}, p);
  CHECK(m.trees.empty());
  CHECK(predict_prob(m, SparseRow{}) == 0.5);
  CHECK(predict_prob(m, SparseRow{{1, 3}}) == 0.5);
  CHECK(feature_importance(m).empty());
}

TEST_CASE("predict_label threshold is inclusive") {
  GbtModel m;
  m.n_features = 1;
  CHECK(predict_label(m, SparseRow{}) == P);
  m.params.base_margin = std::log(0.49 / 0.51);
  CHECK(predict_prob(m, SparseRow{}) == Approx(0.49));
  CHECK(predict_label(m, SparseRow{}) == N);
  CHECK(predict_label(m, SparseRow{}, 0.4) == P);
  CHECK_THROWS_AS(predict_label(m, SparseRow{}, 1.0), ConfigError);
  CHECK_THROWS_AS(predict_prob(m, SparseRow{{1, 1}}), DataError);
}

TEST_CASE("feature importance") {
  SECTION("hand-built stumps with equal gains") {
    GbtModel m;
    m.n_features = 2;
    for (int f : {0, 1}) {
      Tree t;
      t.nodes = {TreeNode{f, 0.5, 1, 2, 0.0, 3.0, 1.0}, TreeNode{}, TreeNode{}};
      m.trees.push_back(t);
    }
    const auto imp = feature_importance(m);
    CHECK(imp.at(0) == 0.5);
    CHECK(imp.at(1) == 0.5);
  }
  SECTION("trained stumps agree with the logged gains") {
    Pcg32 rng(37);
    const Dense d = random_dense(rng, 50, 4, 3);
    const auto y = random_labels(rng, 50);
    GbtParams p;
    p.max_depth = 1;
    p.rounds = 8;
    p.min_child_weight = 0.0;
    TrainingLog log;
    const auto m = train_gbt(d.sparse(), y, p, &log);
    std::map<std::size_t, double> expect;
    double total = 0;
    for (const auto& s : log.splits) expect[static_cast<std::size_t>(s.feature)] += s.gain, total += s.gain;
    const auto imp = feature_importance(m);
    REQUIRE(imp.size() == expect.size());
    double sum = 0;
    for (const auto& [f, g] : expect) {
      CHECK(imp.at(f) == Approx(g / total));
      sum += imp.at(f);
    }
    CHECK(sum == Approx(1.0));
  }
  SECTION("a single split feature gets everything") {
    Dense d;
    d.n_features = 3;
    std::vector<Label> y;
    for (int i = 0; i < 20; ++i) {
      d.x.push_back({0, static_cast<std::uint32_t>(i % 2), 0});
      y.push_back(i % 2 ? P : N);
    }
    const auto imp = feature_importance(train_gbt(d.sparse(), y, GbtParams{}));
    REQUIRE(imp.size() == 1);
    CHECK(imp.at(1) == 1.0);
  }
}

TEST_CASE("trees respect the depth limit and are well formed") {
  Pcg32 rng(41);
  for (int depth : {1, 2, 3, 6}) {
    const Dense d = random_dense(rng, 100, 10, 4);
    const auto y = random_labels(rng, 100);
    GbtParams p;
    p.rounds = 10;
    p.max_depth = depth;
    p.min_child_weight = 0.0;
    CHECK(trees_well_formed(train_gbt(d.sparse(), y, p)));
  }
}

TEST_CASE("training is deterministic and the JSON dump round-trips") {
  Pcg32 rng(43);
  const Dense d = random_dense(rng, 80, 12, 3);
  const auto y = random_labels(rng, 80);
  GbtParams p;
  p.rounds = 15;
  const auto a = train_gbt(d.sparse(), y, p);
  const auto b = train_gbt(d.sparse(), y, p);
  CHECK(a == b);
  const auto back = gbt_model_from_json(nlohmann::json::parse(to_json(a).dump()));
  CHECK(back == a);
  CHECK(gbt_params_from_json(to_json(p)) == p);
}

TEST_CASE("training input errors") {
  DocTermMatrix empty;
  CHECK_THROWS_AS(train_gbt(empty, std::vector<Label>{}, GbtParams{}), DataError);
  Dense d;
  d.n_features = 1;
  d.x = {{1}, {0}};
  CHECK_THROWS_AS(train_gbt(d.sparse(), std::vector<Label>{P}, GbtParams{}), DataError);
  GbtParams bad;
  bad.max_depth = 0;
  CHECK_THROWS_AS(train_gbt(d.sparse(), std::vector<Label>{P, N}, bad), ConfigError);
}
