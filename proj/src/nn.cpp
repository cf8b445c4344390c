#include "iceberg/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "iceberg/hash.hpp"
#include "iceberg/kernels.hpp"

namespace iceberg {

namespace {

constexpr char kMagic[8] = {'I', 'C', 'E', 'M', 'L', 'P', '0', '1'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void check_finite(const Matrix& m, const char* what) {
  for (double v : m.data) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("nn: non-finite ") + what);
  }
}

}  // namespace

MlpModel init_mlp(const std::vector<int>& layer_dims, double dropout_rate, Rng& rng) {
  if (layer_dims.size() < 2) throw std::invalid_argument("nn: need at least one layer");
  for (int d : layer_dims) {
    if (d <= 0) throw std::invalid_argument("nn: non-positive layer dim");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("nn: dropout_rate must be in [0, 1)");
  }
  MlpModel model;
  model.layer_dims = layer_dims;
  model.dropout_rate = dropout_rate;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const int fan_in = layer_dims[l], fan_out = layer_dims[l + 1];
    Matrix w(fan_in, fan_out);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : w.data) v = (2.0 * rng.next_double() - 1.0) * limit;
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(fan_out, 0.0);
  }
  return model;
}

Gradients zero_gradients(const MlpModel& model) {
  Gradients g;
  for (int l = 0; l < model.num_layers(); ++l) {
    g.weights.emplace_back(model.weights[l].rows, model.weights[l].cols);
    g.biases.emplace_back(model.biases[l].size(), 0.0);
  }
  return g;
}

void accumulate(Gradients& accum, const Gradients& g, double scale) {
  if (accum.weights.size() != g.weights.size()) {
    throw std::invalid_argument("nn: gradient shape mismatch");
  }
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    if (!accum.weights[l].same_shape(g.weights[l]) ||
        accum.biases[l].size() != g.biases[l].size()) {
      throw std::invalid_argument("nn: gradient shape mismatch");
    }
    for (std::size_t i = 0; i < g.weights[l].data.size(); ++i) {
      accum.weights[l].data[i] += scale * g.weights[l].data[i];
    }
    for (std::size_t i = 0; i < g.biases[l].size(); ++i) {
      accum.biases[l][i] += scale * g.biases[l][i];
    }
  }
}

std::pair<Matrix, ForwardTape> forward(const MlpModel& model, const Matrix& inputs,
                                       bool train_mode, Rng& rng) {
  if (inputs.cols != model.input_dim()) {
    throw std::invalid_argument("nn: input width does not match layer_dims[0]");
  }
  check_finite(inputs, "input");

  ForwardTape tape;
  tape.train_mode = train_mode;
  const int layers = model.num_layers();
  Matrix h = inputs;
  Matrix z;
  for (int l = 0; l < layers; ++l) {
    if (train_mode && model.dropout_rate > 0.0) {
      const double keep = 1.0 - model.dropout_rate;
      const double scale = 1.0 / keep;
      Matrix mask(h.rows, h.cols);
      for (std::size_t i = 0; i < mask.data.size(); ++i) {
        mask.data[i] = rng.next_bernoulli(keep) ? scale : 0.0;
        h.data[i] *= mask.data[i];
      }
      tape.dropout_masks.push_back(std::move(mask));
    } else {
      tape.dropout_masks.emplace_back();
    }
    tape.inputs.push_back(h);

    z = Matrix(h.rows, model.weights[l].cols);
    kernels::gemm(h, model.weights[l], z);
    for (int i = 0; i < z.rows; ++i) {
      double* zr = z.row(i);
      for (int j = 0; j < z.cols; ++j) zr[j] += model.biases[l][j];
    }
    if (l + 1 < layers) {
      tape.pre_act.push_back(z);
      for (double& v : z.data) v = v > 0.0 ? v : 0.0;
    }
    h = std::move(z);
  }
  return {std::move(h), std::move(tape)};
}

Matrix forward_eval(const MlpModel& model, const Matrix& inputs) {
  Rng unused(0);
  return forward(model, inputs, false, unused).first;
}

Matrix softmax(const Matrix& logits) {
  Matrix probs(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    const double* in = logits.row(i);
    double* out = probs.row(i);
    double mx = in[0];
    for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (int j = 0; j < logits.cols; ++j) {
      out[j] = std::exp(in[j] - mx);
      sum += out[j];
    }
    for (int j = 0; j < logits.cols; ++j) out[j] /= sum;
  }
  return probs;
}

std::pair<double, Matrix> softmax_cross_entropy(const Matrix& logits,
                                                const std::vector<int>& targets,
                                                const std::vector<double>& sample_weights) {
  const int b = logits.rows, c = logits.cols;
  if (static_cast<int>(targets.size()) != b || static_cast<int>(sample_weights.size()) != b) {
    throw std::invalid_argument("nn: batch size mismatch");
  }
  double weight_sum = 0.0;
  for (double w : sample_weights) {
    if (w < 0.0) throw std::invalid_argument("nn: negative sample weight");
    weight_sum += w;
  }
  if (weight_sum == 0.0) throw std::invalid_argument("empty effective batch");

  Matrix probs = softmax(logits);
  Matrix grad(b, c);
  double loss = 0.0;
  for (int i = 0; i < b; ++i) {
    const int y = targets[i];
    if (y < 0 || y >= c) throw std::invalid_argument("nn: target class out of range");
    const double w = sample_weights[i] / weight_sum;
    loss -= w * std::log(probs.at(i, y));
    const double* p = probs.row(i);
    double* g = grad.row(i);
    for (int j = 0; j < c; ++j) g[j] = w * p[j];
    g[y] -= w;
  }
  return {loss, std::move(grad)};
}

Gradients backward(const MlpModel& model, const ForwardTape& tape,
                   const Matrix& grad_logits) {
  const int layers = model.num_layers();
  if (static_cast<int>(tape.inputs.size()) != layers) {
    throw std::invalid_argument("nn: tape does not match model");
  }
  if (grad_logits.rows != tape.inputs[0].rows || grad_logits.cols != model.output_dim()) {
    throw std::invalid_argument("nn: grad_logits shape mismatch");
  }

  Gradients grads = zero_gradients(model);
  Matrix g = grad_logits;
  for (int l = layers - 1; l >= 0; --l) {
    kernels::gemm_at_b(tape.inputs[l], g, grads.weights[l]);
    for (int i = 0; i < g.rows; ++i) {
      const double* gr = g.row(i);
      for (int j = 0; j < g.cols; ++j) grads.biases[l][j] += gr[j];
    }
    if (l == 0) break;

    Matrix gin(g.rows, model.weights[l].rows);
    kernels::gemm_a_bt(g, model.weights[l], gin);
    // Through the dropout that fed this layer, then the previous ReLU.
    if (tape.train_mode && model.dropout_rate > 0.0) {
      const Matrix& mask = tape.dropout_masks[l];
      for (std::size_t i = 0; i < gin.data.size(); ++i) gin.data[i] *= mask.data[i];
    }
    const Matrix& z = tape.pre_act[l - 1];
    for (std::size_t i = 0; i < gin.data.size(); ++i) {
      if (z.data[i] <= 0.0) gin.data[i] = 0.0;
    }
    g = std::move(gin);
  }
  // Dropout on the raw input affects only grads w.r.t. inputs, which we do
  // not propagate further; parameter gradients above already saw the masked
  // activations via tape.inputs.
  return grads;
}

OptimizerState init_optimizer(const MlpModel& model, double learning_rate,
                              double weight_decay) {
  OptimizerState state;
  state.learning_rate = learning_rate;
  state.weight_decay = weight_decay;
  for (int l = 0; l < model.num_layers(); ++l) {
    state.m_weights.emplace_back(model.weights[l].rows, model.weights[l].cols);
    state.v_weights.emplace_back(model.weights[l].rows, model.weights[l].cols);
    state.m_biases.emplace_back(model.biases[l].size(), 0.0);
    state.v_biases.emplace_back(model.biases[l].size(), 0.0);
  }
  return state;
}

void adam_step(MlpModel& model, const Gradients& grads, OptimizerState& state) {
  if (grads.weights.size() != static_cast<std::size_t>(model.num_layers())) {
    throw std::invalid_argument("nn: gradient/model mismatch");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](double& param, double g, double& m, double& v, bool decay) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    double step = mhat / (std::sqrt(vhat) + state.epsilon);
    if (decay) step += state.weight_decay * param;
    param -= state.learning_rate * step;
  };
  for (int l = 0; l < model.num_layers(); ++l) {
    if (!grads.weights[l].same_shape(model.weights[l])) {
      throw std::invalid_argument("nn: gradient shape mismatch");
    }
    for (std::size_t i = 0; i < model.weights[l].data.size(); ++i) {
      update(model.weights[l].data[i], grads.weights[l].data[i],
             state.m_weights[l].data[i], state.v_weights[l].data[i], true);
    }
    for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
      update(model.biases[l][i], grads.biases[l][i], state.m_biases[l][i],
             state.v_biases[l][i], false);
    }
  }
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot write " + path.string());
  auto put = [&](const void* p, std::size_t n) {
    if (std::fwrite(p, 1, n, f.get()) != n) {
      throw std::runtime_error("short write to " + path.string());
    }
  };
  put(kMagic, sizeof(kMagic));
  put(&kVersion, sizeof(kVersion));
  const std::int32_t ndims = static_cast<std::int32_t>(model.layer_dims.size());
  put(&ndims, sizeof(ndims));
  for (int d : model.layer_dims) {
    const std::int32_t v = d;
    put(&v, sizeof(v));
  }
  put(&model.dropout_rate, sizeof(double));
  for (int l = 0; l < model.num_layers(); ++l) {
    put(model.weights[l].data.data(), model.weights[l].data.size() * sizeof(double));
    put(model.biases[l].data(), model.biases[l].size() * sizeof(double));
  }
}

MlpModel load_model(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot read " + path.string());
  auto get = [&](void* p, std::size_t n) {
    if (std::fread(p, 1, n, f.get()) != n) {
      throw std::runtime_error("truncated checkpoint " + path.string());
    }
  };
  char magic[8];
  get(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path.string() + ": not a model checkpoint");
  }
  std::uint32_t version = 0;
  get(&version, sizeof(version));
  if (version != kVersion) {
    throw std::runtime_error(path.string() + ": unsupported checkpoint version");
  }
  std::int32_t ndims = 0;
  get(&ndims, sizeof(ndims));
  if (ndims < 2 || ndims > 64) throw std::runtime_error(path.string() + ": corrupt header");
  MlpModel model;
  for (std::int32_t i = 0; i < ndims; ++i) {
    std::int32_t d = 0;
    get(&d, sizeof(d));
    if (d <= 0) throw std::runtime_error(path.string() + ": corrupt layer dims");
    model.layer_dims.push_back(d);
  }
  get(&model.dropout_rate, sizeof(double));
  for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
    Matrix w(model.layer_dims[l], model.layer_dims[l + 1]);
    get(w.data.data(), w.data.size() * sizeof(double));
    model.weights.push_back(std::move(w));
    std::vector<double> b(model.layer_dims[l + 1]);
    get(b.data(), b.size() * sizeof(double));
    model.biases.push_back(std::move(b));
  }
  return model;
}

std::uint64_t model_digest(const MlpModel& model) {
  Fnv1a h;
  for (int d : model.layer_dims) h.update_int(d);
  for (int l = 0; l < model.num_layers(); ++l) {
    h.update_vec(model.weights[l].data);
    h.update_vec(model.biases[l]);
  }
  return h.digest();
}

}  // namespace iceberg
