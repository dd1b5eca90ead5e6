#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "relscope/errors.hpp"
#include "relscope/random.hpp"
#include "relscope/svm.hpp"

using namespace relscope;

namespace {
SvmModel fixed_model(std::vector<double> decisions) {
  SvmModel m;
  m.dim = 1;
  for (std::size_t c = 0; c < decisions.size(); ++c) {
    m.classes.push_back(static_cast<int>(c));
    m.class_names.push_back(std::string(1, static_cast<char>('A' + c)));
    m.weights.push_back({decisions[c]});
    m.bias.push_back(0.0);
  }
  return m;
}

struct Blobs {
  FeatureMatrix x;
  std::vector<int> y;
};

Blobs blobs(Rng& rng, std::size_t per_class, int n_classes, double spread, std::size_t dim = 3) {
  Blobs b;
  for (int c = 0; c < n_classes; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> row(dim);
      for (std::size_t d = 0; d < dim; ++d) row[d] = (d == static_cast<std::size_t>(c) % dim ? 4.0 : 0.0) + spread * rng.normal();
      if (c >= static_cast<int>(dim)) row[0] -= 4.0;
      b.x.push_row(row);
      b.y.push_back(c);
    }
  return b;
}
}  // namespace

TEST_CASE("predict takes the argmax with ties to the lowest index") {
  std::vector<double> one{1.0};
  auto p = predict(fixed_model({0.9, 0.1, -0.3}), one);
  CHECK(p.class_index == 0);
  CHECK(p.decisions == std::vector<double>{0.9, 0.1, -0.3});
  CHECK(predict(fixed_model({0.5, 0.5, 0.1}), one).class_index == 0);
  CHECK(predict(fixed_model({0.1, 0.5, 0.5}), one).class_index == 1);
  std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(predict(fixed_model({1, 2}), two), ShapeError);
}

TEST_CASE("two separable points") {
  FeatureMatrix x;
  std::vector<double> a{1.0}, b{-1.0};
  x.push_row(a);
  x.push_row(b);
  std::vector<int> y{0, 1};
  SvmConfig cfg;
  cfg.lambda = 0.01;
  auto m = train(x, y, cfg);
  auto pa = predict(m, a), pb = predict(m, b);
  CHECK(pa.label == 0);
  CHECK(pb.label == 1);
  CHECK(pa.decisions[0] * pb.decisions[0] < 0);
}

TEST_CASE("binary objective is near the grid minimum and non-increasing") {
  Rng rng(61);
  FeatureMatrix x;
  std::vector<int> s;
  for (int i = 0; i < 20; ++i) {
    int sign = i % 2 ? 1 : -1;
    std::vector<double> row{sign * 1.0 + 0.8 * rng.normal(), sign * 0.5 + 0.8 * rng.normal()};
    x.push_row(row);
    s.push_back(sign);
  }
  SvmConfig cfg;
  cfg.lambda = 0.1;
  cfg.epochs = 2000;
  auto m = train_binary(x, s, cfg);
  double grid = oracle::grid_minimum_2d(x, s, cfg.lambda);
  CHECK(m.objective <= grid * (1 + 1e-3));
  CHECK(m.objective >= grid * (1 - 1e-3));
  CHECK(m.objective == doctest::Approx(hinge_objective(x, s, m.w, m.b, cfg.lambda)));
  for (std::size_t i = 1; i < m.objective_trace.size(); ++i)
    CHECK(m.objective_trace[i] <= m.objective_trace[i - 1] + 1e-12);
}

TEST_CASE("training is deterministic and seed-sensitive in the iterates") {
  Rng rng(62);
  auto b = blobs(rng, 20, 3, 1.0);
  SvmConfig cfg;
  cfg.seed = 5;
  auto m1 = train(b.x, b.y, cfg);
  auto m2 = train(b.x, b.y, cfg);
  CHECK(serialize_model(m1) == serialize_model(m2));
}

TEST_CASE("training errors") {
  FeatureMatrix x;
  std::vector<double> r1{1.0}, r2{2.0};
  x.push_row(r1);
  x.push_row(r2);
  std::vector<int> same{0, 0};
  CHECK_THROWS_AS(train(x, same, {}), TrainError);
  std::vector<int> short_labels{0};
  CHECK_THROWS_AS(train(x, short_labels, {}), ShapeError);
  FeatureMatrix bad;
  std::vector<double> nan_row{NAN};
  bad.push_row(r1);
  bad.push_row(nan_row);
  std::vector<int> y{0, 1};
  CHECK_THROWS_AS(train(bad, y, {}), InputError);
  std::vector<double> wide{1.0, 2.0};
  CHECK_THROWS_AS(x.push_row(wide), ShapeError);
}

TEST_CASE("lambda selection") {
  Rng rng(63);
  auto tr = blobs(rng, 30, 4, 0.3);
  auto va = blobs(rng, 10, 4, 0.3);
  SvmConfig cfg;
  std::vector<double> one{0.05};
  CHECK(select_lambda(tr.x, tr.y, va.x, va.y, one, cfg).lambda == 0.05);
  auto sel = select_lambda(tr.x, tr.y, va.x, va.y, kDefaultLambdaGrid, cfg);
  REQUIRE(sel.val_accuracy.size() == kDefaultLambdaGrid.size());
  double best = *std::max_element(sel.val_accuracy.begin(), sel.val_accuracy.end());
  CHECK(best == 1.0);
  auto first = std::find(sel.val_accuracy.begin(), sel.val_accuracy.end(), best) - sel.val_accuracy.begin();
  CHECK(sel.lambda == kDefaultLambdaGrid[static_cast<std::size_t>(first)]);
  std::vector<double> empty;
  CHECK_THROWS_AS(select_lambda(tr.x, tr.y, va.x, va.y, empty, cfg), InputError);
}

TEST_CASE("equal validation accuracy picks the smallest lambda") {
  Rng rng(64);
  auto tr = blobs(rng, 20, 2, 0.1);
  auto va = blobs(rng, 5, 2, 0.1);
  std::vector<double> grid{1.0, 1e-2, 1e-3};
  auto sel = select_lambda(tr.x, tr.y, va.x, va.y, grid, {});
  REQUIRE(std::all_of(sel.val_accuracy.begin(), sel.val_accuracy.end(), [](double a) { return a == 1.0; }));
  CHECK(sel.lambda == 1e-3);
}

TEST_CASE("model serialization round trip") {
  Rng rng(65);
  auto b = blobs(rng, 15, 3, 1.0);
  auto m = train(b.x, b.y, {});
  m.class_names = {"x", "y", "z"};
  m.metadata["task"] = "relation";
  auto path = std::filesystem::temp_directory_path() / "relscope-unit.model";
  save_model(path, m);
  auto back = load_model(path);
  CHECK(serialize_model(back) == serialize_model(m));
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  CHECK(back.metadata == m.metadata);
  CHECK(predict_labels(back, b.x) == predict_labels(m, b.x));
  CHECK_THROWS_AS(deserialize_model("{not json"), ParseError);
  CHECK_THROWS_AS(load_model("/nonexistent/relscope.model"), IoError);
}
