#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "iceberg/matrix.hpp"
#include "iceberg/rng.hpp"

namespace iceberg {

// Fully-connected head: ReLU between hidden layers, inverted dropout before
// every linear layer (train mode only). weights[l] is dims[l] x dims[l+1].
struct MlpModel {
  std::vector<int> layer_dims;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  double dropout_rate = 0.5;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
};

// Glorot-uniform weights, zero biases.
MlpModel init_mlp(const std::vector<int>& layer_dims, double dropout_rate, Rng& rng);

// Activation record from one forward pass; consumed by backward.
struct ForwardTape {
  bool train_mode = false;
  std::vector<Matrix> inputs;         // per layer: post-dropout input to the linear op
  std::vector<Matrix> dropout_masks;  // per layer: 0 or 1/(1-p) per element (train mode)
  std::vector<Matrix> pre_act;        // per hidden layer: z before ReLU
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

Gradients zero_gradients(const MlpModel& model);

// accum += scale * g
void accumulate(Gradients& accum, const Gradients& g, double scale);

// Dropout draws row-major per layer from rng (train mode only), so a batch
// prefix sees the same masks regardless of trailing rows.
std::pair<Matrix, ForwardTape> forward(const MlpModel& model, const Matrix& inputs,
                                       bool train_mode, Rng& rng);

// Eval-mode forward without tape bookkeeping.
Matrix forward_eval(const MlpModel& model, const Matrix& inputs);

// Row-wise softmax with max-subtraction.
Matrix softmax(const Matrix& logits);

// loss = sum_b w_b * (-log softmax(logits_b)[target_b]) / sum_b w_b.
// grad_logits is the exact gradient of that expression.
std::pair<double, Matrix> softmax_cross_entropy(const Matrix& logits,
                                                const std::vector<int>& targets,
                                                const std::vector<double>& sample_weights);

Gradients backward(const MlpModel& model, const ForwardTape& tape,
                   const Matrix& grad_logits);

struct OptimizerState {
  std::vector<Matrix> m_weights, v_weights;
  std::vector<std::vector<double>> m_biases, v_biases;
  std::int64_t step = 0;
  double learning_rate = 0.01;
  double weight_decay = 0.0;  // decoupled, applied to weights only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

OptimizerState init_optimizer(const MlpModel& model, double learning_rate,
                              double weight_decay);

// Adam with bias correction; weight decay decoupled from the moments.
void adam_step(MlpModel& model, const Gradients& grads, OptimizerState& state);

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

// FNV-1a digest of all parameters; used by determinism tests.
std::uint64_t model_digest(const MlpModel& model);

}  // namespace iceberg
