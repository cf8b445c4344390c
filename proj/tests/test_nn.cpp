#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <functional>

#include "iceberg/nn.hpp"

using namespace iceberg;
namespace fs = std::filesystem;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.next_gaussian();
  return m;
}

// Relative error with a floor so near-zero gradient pairs compare absolutely.
double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

// Central finite differences over every parameter of the model against the
// analytic gradients for an arbitrary scalar loss of the logits.
double check_model_gradients(
    MlpModel& model, const Matrix& inputs, bool train_mode, std::uint64_t rng_seed,
    const std::function<std::pair<double, Matrix>(const Matrix&)>& loss_fn) {
  Rng fwd_rng(rng_seed);
  auto [logits, tape] = forward(model, inputs, train_mode, fwd_rng);
  auto [loss, grad_logits] = loss_fn(logits);
  (void)loss;
  Gradients grads = backward(model, tape, grad_logits);

  const double h = 1e-5;
  double worst = 0.0;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    Rng rng_plus(rng_seed);  // identical dropout masks on every probe
    const double up = loss_fn(forward(model, inputs, train_mode, rng_plus).first).first;
    param = saved - h;
    Rng rng_minus(rng_seed);
    const double down = loss_fn(forward(model, inputs, train_mode, rng_minus).first).first;
    param = saved;
    worst = std::max(worst, rel_err(analytic, (up - down) / (2.0 * h)));
  };
  for (int l = 0; l < model.num_layers(); ++l) {
    for (std::size_t i = 0; i < model.weights[l].data.size(); ++i) {
      probe(model.weights[l].data[i], grads.weights[l].data[i]);
    }
    for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
      probe(model.biases[l][i], grads.biases[l][i]);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("zero parameters map any input to zero logits") {
  Rng rng(1);
  MlpModel model = init_mlp({3, 4, 2}, 0.0, rng);
  for (auto& w : model.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
  Matrix x = random_matrix(5, 3, rng);
  Matrix logits = forward_eval(model, x);
  for (double v : logits.data) CHECK(v == 0.0);
}

TEST_CASE("eval-mode forward is deterministic even with dropout configured") {
  Rng rng(2);
  MlpModel model = init_mlp({4, 8, 3}, 0.5, rng);
  Matrix x = random_matrix(6, 4, rng);
  Matrix a = forward_eval(model, x);
  Matrix b = forward_eval(model, x);
  CHECK(a.data == b.data);
}

TEST_CASE("single linear layer with identity weights is the identity map") {
  Rng rng(3);
  MlpModel model = init_mlp({2, 2}, 0.0, rng);
  std::fill(model.weights[0].data.begin(), model.weights[0].data.end(), 0.0);
  model.weights[0].at(0, 0) = 1.0;
  model.weights[0].at(1, 1) = 1.0;
  Matrix x(1, 2);
  x.at(0, 0) = 3.0;
  x.at(0, 1) = -1.0;
  Matrix logits = forward_eval(model, x);
  CHECK(logits.at(0, 0) == 3.0);
  CHECK(logits.at(0, 1) == -1.0);
}

TEST_CASE("cross entropy on uniform logits is ln 2") {
  Matrix logits(1, 2, 0.0);
  auto [loss, grad] = softmax_cross_entropy(logits, {0}, {1.0});
  CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(grad.at(0, 0) == doctest::Approx(-0.5));
  CHECK(grad.at(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("cross entropy is stabilized against large logits") {
  Matrix logits(1, 2, 0.0);
  logits.at(0, 0) = 1000.0;
  auto [loss, grad] = softmax_cross_entropy(logits, {0}, {1.0});
  CHECK(std::isfinite(loss));
  CHECK(loss >= 0.0);
  CHECK(loss < 1e-10);
  for (double v : grad.data) CHECK(std::isfinite(v));
}

TEST_CASE("all-zero sample weights are rejected") {
  Matrix logits(2, 3, 0.0);
  CHECK_THROWS_WITH_AS(softmax_cross_entropy(logits, {0, 1}, {0.0, 0.0}),
                       doctest::Contains("empty effective batch"), std::invalid_argument);
}

TEST_CASE("cross-entropy gradient matches central finite differences") {
  Rng rng(4);
  Matrix logits = random_matrix(5, 4, rng);
  std::vector<int> targets{0, 3, 1, 2, 2};
  std::vector<double> weights{1.0, 0.5, 2.0, 1.0, 0.25};
  auto [loss, grad] = softmax_cross_entropy(logits, targets, weights);
  (void)loss;
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < logits.data.size(); ++i) {
    const double saved = logits.data[i];
    logits.data[i] = saved + h;
    const double up = softmax_cross_entropy(logits, targets, weights).first;
    logits.data[i] = saved - h;
    const double down = softmax_cross_entropy(logits, targets, weights).first;
    logits.data[i] = saved;
    worst = std::max(worst, rel_err(grad.data[i], (up - down) / (2.0 * h)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("full-model gradients match finite differences") {
  Rng rng(5);
  MlpModel model = init_mlp({3, 4, 2}, 0.0, rng);
  Matrix x = random_matrix(6, 3, rng);
  std::vector<int> targets{0, 1, 1, 0, 1, 0};
  auto ce = [&](const Matrix& logits) {
    return softmax_cross_entropy(logits, targets, std::vector<double>(6, 1.0));
  };

  SUBCASE("deterministic forward") {
    CHECK(check_model_gradients(model, x, false, 0, ce) < 1e-5);
  }
  SUBCASE("dropout replayed from the tape") {
    model.dropout_rate = 0.4;
    CHECK(check_model_gradients(model, x, true, 99, ce) < 1e-5);
  }
}

TEST_CASE("zero logit gradients produce zero parameter gradients") {
  Rng rng(6);
  MlpModel model = init_mlp({3, 5, 2}, 0.0, rng);
  Matrix x = random_matrix(4, 3, rng);
  Rng fwd(0);
  auto [logits, tape] = forward(model, x, false, fwd);
  (void)logits;
  Gradients grads = backward(model, tape, Matrix(4, 2, 0.0));
  for (const auto& w : grads.weights) {
    for (double v : w.data) CHECK(v == 0.0);
  }
  for (const auto& b : grads.biases) {
    for (double v : b) CHECK(v == 0.0);
  }
}

TEST_CASE("adam with zero learning rate leaves parameters untouched") {
  Rng rng(7);
  MlpModel model = init_mlp({3, 4, 2}, 0.0, rng);
  const std::uint64_t before = model_digest(model);
  OptimizerState opt = init_optimizer(model, 0.0, 5e-4);
  Gradients grads = zero_gradients(model);
  for (auto& w : grads.weights) {
    for (double& v : w.data) v = 1.0;
  }
  adam_step(model, grads, opt);
  adam_step(model, grads, opt);
  CHECK(model_digest(model) == before);
}

TEST_CASE("adam descends on a convex toy problem") {
  Rng rng(8);
  MlpModel model = init_mlp({2, 2}, 0.0, rng);
  Matrix x(4, 2);
  x.at(0, 0) = 1.0;
  x.at(1, 0) = 1.0;
  x.at(2, 1) = 1.0;
  x.at(3, 1) = 1.0;
  std::vector<int> targets{0, 0, 1, 1};
  OptimizerState opt = init_optimizer(model, 0.05, 0.0);
  double first = -1.0, last = -1.0;
  for (int step = 0; step < 50; ++step) {
    Rng fwd(0);
    auto [logits, tape] = forward(model, x, false, fwd);
    auto [loss, grad] = softmax_cross_entropy(logits, targets, std::vector<double>(4, 1.0));
    if (step == 0) first = loss;
    last = loss;
    adam_step(model, backward(model, tape, grad), opt);
  }
  CHECK(last < first * 0.5);
}

TEST_CASE("softmax rows sum to one and shift invariance holds") {
  Rng rng(9);
  Matrix logits = random_matrix(10, 6, rng);
  Matrix p = softmax(logits);
  for (int i = 0; i < 10; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 6; ++j) sum += p.at(i, j);
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
  Matrix shifted = logits;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 6; ++j) shifted.at(i, j) += 123.456;
  }
  Matrix q = softmax(shifted);
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    CHECK(p.data[i] == doctest::Approx(q.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("dropout statistics and inverted scaling") {
  Rng rng(10);
  MlpModel model = init_mlp({50, 50}, 0.5, rng);
  Matrix x(200, 50, 1.0);
  Rng fwd(123);
  auto [logits, tape] = forward(model, x, true, fwd);
  (void)logits;
  const Matrix& masked = tape.inputs[0];
  int zeros = 0;
  for (double v : masked.data) {
    if (v == 0.0) {
      ++zeros;
    } else {
      CHECK(v == 2.0);  // inverted scale 1/(1-0.5)
    }
  }
  const double frac = static_cast<double>(zeros) / masked.data.size();
  CHECK(frac > 0.45);
  CHECK(frac < 0.55);
}

TEST_CASE("glorot init stays inside the fan bound") {
  Rng rng(11);
  MlpModel model = init_mlp({30, 20}, 0.0, rng);
  const double limit = std::sqrt(6.0 / (30 + 20));
  double spread = 0.0;
  for (double v : model.weights[0].data) {
    CHECK(std::abs(v) <= limit);
    spread = std::max(spread, std::abs(v));
  }
  CHECK(spread > limit * 0.5);  // not collapsed at zero
  for (double b : model.biases[0]) CHECK(b == 0.0);
}

TEST_CASE("checkpoint round trip is bitwise") {
  Rng rng(12);
  MlpModel model = init_mlp({5, 7, 3}, 0.3, rng);
  const fs::path path = fs::temp_directory_path() / "iceberg_nn_ckpt.bin";
  save_model(model, path);
  MlpModel back = load_model(path);
  CHECK(back.layer_dims == model.layer_dims);
  CHECK(back.dropout_rate == model.dropout_rate);
  CHECK(model_digest(back) == model_digest(model));
  fs::remove(path);
}

TEST_CASE("fixed seeds give bitwise identical training trajectories") {
  auto run = [] {
    Rng rng(mix_seed(42, 0));
    MlpModel model = init_mlp({4, 6, 3}, 0.5, rng);
    OptimizerState opt = init_optimizer(model, 0.01, 5e-4);
    Rng data_rng(7);
    Matrix x = random_matrix(12, 4, data_rng);
    std::vector<int> targets;
    for (int i = 0; i < 12; ++i) targets.push_back(i % 3);
    for (int epoch = 0; epoch < 20; ++epoch) {
      Rng fwd(mix_seed(42, epoch + 1));
      auto [logits, tape] = forward(model, x, true, fwd);
      auto [loss, grad] =
          softmax_cross_entropy(logits, targets, std::vector<double>(12, 1.0));
      (void)loss;
      adam_step(model, backward(model, tape, grad), opt);
    }
    return model_digest(model);
  };
  CHECK(run() == run());
}
