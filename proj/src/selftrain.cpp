#include "iceberg/selftrain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace iceberg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix gather_rows(const Matrix& x, const std::vector<int>& idx) {
  Matrix out(static_cast<int>(idx.size()), x.cols);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double* src = x.row(idx[k]);
    std::copy(src, src + x.cols, out.row(static_cast<int>(k)));
  }
  return out;
}

std::vector<int> complement_of(const std::vector<int>& sorted_idx, int n) {
  std::vector<int> out;
  out.reserve(n - sorted_idx.size());
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    if (k < sorted_idx.size() && sorted_idx[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

void check_config(const TrainConfig& config) {
  if (config.epochs <= 0) throw std::invalid_argument("train: epochs must be > 0");
  if (config.threshold_mode == ThresholdMode::fixed &&
      !(config.fixed_tau > 0.0 && config.fixed_tau < 1.0)) {
    throw std::invalid_argument("train: fixed threshold must be in (0, 1)");
  }
  if (config.lambda < 0.0) throw std::invalid_argument("train: negative lambda");
  for (int h : config.hidden_dims) {
    if (h <= 0) throw std::invalid_argument("train: non-positive hidden dim");
  }
}

// RNG stream layout: stream 0 seeds initialization; epoch e uses stream
// 2e+1 for the supervised-batch dropout and 2e+2 for the pseudo-batch
// dropout. Separate per-batch streams keep the supervised trajectory
// bitwise identical whether or not the unsupervised term is active.
Rng init_stream(std::uint64_t seed) { return Rng(mix_seed(seed, 0)); }
Rng sup_stream(std::uint64_t seed, int epoch) {
  return Rng(mix_seed(seed, 2ULL * epoch + 1));
}
Rng unsup_stream(std::uint64_t seed, int epoch) {
  return Rng(mix_seed(seed, 2ULL * epoch + 2));
}

}  // namespace

TrainConfig train_config_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  static const std::set<std::string> known = {
      "alpha", "hops", "hidden", "dropout", "lr", "weight_decay", "epochs",
      "mode", "double_balancing", "noise_tolerant", "lambda", "mu", "beta",
      "threshold", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw std::runtime_error(path.string() + ": unknown config key '" + it.key() + "'");
    }
  }
  TrainConfig c;
  try {
    c.propagation.alpha = j.value("alpha", c.propagation.alpha);
    c.propagation.hops = j.value("hops", c.propagation.hops);
    c.hidden_dims = j.value("hidden", c.hidden_dims);
    c.dropout = j.value("dropout", c.dropout);
    c.learning_rate = j.value("lr", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.epochs = j.value("epochs", c.epochs);
    if (j.contains("mode")) c.supervised_mode = parse_balancing_mode(j.at("mode"));
    c.use_double_balancing = j.value("double_balancing", c.use_double_balancing);
    c.use_noise_tolerant = j.value("noise_tolerant", c.use_noise_tolerant);
    c.lambda = j.value("lambda", c.lambda);
    c.mu = j.value("mu", c.mu);
    c.beta = j.value("beta", c.beta);
    if (j.contains("threshold")) {
      const auto& t = j.at("threshold");
      if (t.is_string() && t.get<std::string>() == "dynamic") {
        c.threshold_mode = ThresholdMode::dynamic_mean;
      } else if (t.is_number()) {
        c.threshold_mode = ThresholdMode::fixed;
        c.fixed_tau = t.get<double>();
      } else {
        throw std::runtime_error("threshold must be \"dynamic\" or a number");
      }
    }
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return c;
}

std::string train_config_to_json(const TrainConfig& config) {
  nlohmann::json j;
  j["alpha"] = config.propagation.alpha;
  j["hops"] = config.propagation.hops;
  j["hidden"] = config.hidden_dims;
  j["dropout"] = config.dropout;
  j["lr"] = config.learning_rate;
  j["weight_decay"] = config.weight_decay;
  j["epochs"] = config.epochs;
  j["mode"] = to_string(config.supervised_mode);
  j["double_balancing"] = config.use_double_balancing;
  j["noise_tolerant"] = config.use_noise_tolerant;
  j["lambda"] = config.lambda;
  j["mu"] = config.mu;
  j["beta"] = config.beta;
  if (config.threshold_mode == ThresholdMode::dynamic_mean) {
    j["threshold"] = "dynamic";
  } else {
    j["threshold"] = config.fixed_tau;
  }
  j["seed"] = config.seed;
  return j.dump(2);
}

std::string run_summary_json(const RunRecord& record, const TrainConfig& config) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(train_config_to_json(config));
  j["epochs_run"] = record.epochs.size();
  j["best_epoch"] = record.best_epoch;
  j["best_val_balanced_accuracy"] = record.best_val_balanced_accuracy;
  j["test"]["balanced_accuracy"] = record.final_test.balanced_accuracy;
  j["test"]["macro_f1"] = record.final_test.macro_f1;
  j["test"]["accuracy"] = record.final_test.accuracy;
  return j.dump(2);
}

void save_run_record(const RunRecord& record, const TrainConfig& config,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t e = 0; e < record.epochs.size(); ++e) {
    const EpochStats& s = record.epochs[e];
    nlohmann::json j;
    j["epoch"] = e;
    j["sup_loss"] = s.supervised_loss;
    j["unsup_loss"] = s.unsupervised_loss;
    j["pseudo_hist"] = s.pseudo_histogram;
    j["pseudo_acc"] = s.pseudo_accuracy;
    j["utilization"] = s.utilization;
    j["val_bacc"] = s.val_balanced_accuracy;
    j["seconds"] = s.seconds;
    out << j.dump() << '\n';
  }
  nlohmann::json summary = nlohmann::json::parse(run_summary_json(record, config));
  summary["total_seconds"] = record.total_seconds;
  out << summary.dump() << '\n';
}

std::pair<std::vector<double>, std::vector<int>> predict_confidence(
    const MlpModel& model, const DiffusedFeatures& diffused) {
  Matrix probs = softmax(forward_eval(model, diffused.matrix));
  std::vector<double> confidence(probs.rows);
  std::vector<int> pred(probs.rows);
  for (int i = 0; i < probs.rows; ++i) {
    const double* p = probs.row(i);
    int arg = 0;
    double best = p[0];
    for (int j = 1; j < probs.cols; ++j) {
      if (p[j] > best) {
        best = p[j];
        arg = j;
      }
    }
    confidence[i] = best;
    pred[i] = arg;
  }
  return {std::move(confidence), std::move(pred)};
}

double dynamic_threshold(const std::vector<double>& confidence,
                         const std::vector<int>& unlabeled_idx) {
  if (unlabeled_idx.empty()) {
    throw std::invalid_argument("dynamic_threshold: empty unlabeled set");
  }
  double sum = 0.0;
  for (int i : unlabeled_idx) sum += confidence[i];
  return sum / unlabeled_idx.size();
}

PseudoLabelSet select_pseudo(const std::vector<double>& confidence,
                             const std::vector<int>& pred,
                             const std::vector<int>& unlabeled_idx, double threshold,
                             int num_classes) {
  PseudoLabelSet out;
  out.threshold_used = threshold;
  for (int i : unlabeled_idx) {
    if (confidence[i] >= threshold) {
      out.node_idx.push_back(i);
      out.pred_class.push_back(pred[i]);
      out.confidence.push_back(confidence[i]);
    }
  }
  out.pi.source = ClassCounts::Source::pseudo;
  out.pi.counts.assign(num_classes, 0);
  for (int c : out.pred_class) ++out.pi.counts[c];
  return out;
}

std::pair<MlpModel, RunRecord> train(const SparseGraph& graph, const SplitMasks& masks,
                                     const TrainConfig& config) {
  return train(graph, masks, config, diffuse_graph(graph, config.propagation));
}

std::pair<MlpModel, RunRecord> train(const SparseGraph& graph, const SplitMasks& masks,
                                     const TrainConfig& config,
                                     const DiffusedFeatures& diffused) {
  check_config(config);
  validate_masks(graph, masks);
  if (diffused.source_hash != diffusion_hash(graph, config.propagation)) {
    throw std::runtime_error("diffusion-hash mismatch: cache does not match graph/config");
  }
  if (masks.train_idx.empty()) throw std::invalid_argument("train: empty labeled set");

  const Matrix& x = diffused.matrix;
  const int num_classes = graph.num_classes;
  const Matrix x_labeled = gather_rows(x, masks.train_idx);
  std::vector<int> targets;
  targets.reserve(masks.train_idx.size());
  for (int i : masks.train_idx) targets.push_back(graph.labels[i]);
  const ClassCounts labeled_counts =
      count_classes(graph.labels, masks.train_idx, num_classes, ClassCounts::Source::labeled);
  const std::vector<int> unlabeled_idx = complement_of(masks.train_idx, graph.num_nodes);

  std::vector<int> dims;
  dims.push_back(x.cols);
  dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
  dims.push_back(num_classes);
  Rng init_rng = init_stream(config.seed);
  MlpModel model = init_mlp(dims, config.dropout, init_rng);
  OptimizerState opt = init_optimizer(model, config.learning_rate, config.weight_decay);

  RunRecord record;
  record.epochs.reserve(config.epochs);
  MlpModel best_model = model;
  double best_val = -1.0;
  int best_epoch = -1;
  const auto run_start = Clock::now();

  auto eval_snapshot = [&](const MlpModel& m, std::vector<double>& conf,
                           std::vector<int>& pred) {
    std::tie(conf, pred) = predict_confidence(m, diffused);
    if (masks.val_idx.empty()) return 0.0;
    return evaluate(pred, graph.labels, masks.val_idx, num_classes).balanced_accuracy;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = Clock::now();
    EpochStats stats;

    // (1) eval-mode pass over every node with the parameters entering the
    // epoch; doubles as the validation probe for snapshot selection.
    std::vector<double> confidence;
    std::vector<int> pred;
    stats.val_balanced_accuracy = eval_snapshot(model, confidence, pred);
    if (!masks.val_idx.empty() && stats.val_balanced_accuracy > best_val) {
      best_val = stats.val_balanced_accuracy;
      best_epoch = epoch;
      best_model = model;
    }

    // (2) threshold + pseudo-label selection.
    PseudoLabelSet pseudo;
    if (!unlabeled_idx.empty()) {
      const double tau = config.threshold_mode == ThresholdMode::dynamic_mean
                             ? dynamic_threshold(confidence, unlabeled_idx)
                             : config.fixed_tau;
      pseudo = select_pseudo(confidence, pred, unlabeled_idx, tau, num_classes);
    }
    stats.pseudo_histogram = pseudo.pi.counts;
    stats.utilization = unlabeled_idx.empty()
                            ? 0.0
                            : static_cast<double>(pseudo.node_idx.size()) / unlabeled_idx.size();
    if (!pseudo.node_idx.empty()) {
      int correct = 0;
      for (std::size_t k = 0; k < pseudo.node_idx.size(); ++k) {
        // Ground truth enters diagnostics only; nothing below feeds gradients.
        if (graph.labels[pseudo.node_idx[k]] == pseudo.pred_class[k]) ++correct;
      }
      stats.pseudo_accuracy = static_cast<double>(correct) / pseudo.node_idx.size();
    }

    // (3)+(4) train-mode forwards and losses. The supervised batch draws from
    // its own dropout stream, so its trajectory is unchanged by the pseudo
    // batch's presence.
    Rng sup_rng = sup_stream(config.seed, epoch);
    auto [logits_l, tape_l] = forward(model, x_labeled, true, sup_rng);
    auto [sup_loss, grad_l] =
        supervised_loss(config.supervised_mode, logits_l, targets, labeled_counts);
    Gradients grads = backward(model, tape_l, grad_l);
    stats.supervised_loss = sup_loss;

    const bool unsup_active =
        config.use_double_balancing && config.lambda != 0.0 && !pseudo.node_idx.empty();
    if (unsup_active) {
      Rng unsup_rng = unsup_stream(config.seed, epoch);
      Matrix x_pseudo = gather_rows(x, pseudo.node_idx);
      auto [logits_p, tape_p] = forward(model, x_pseudo, true, unsup_rng);
      const double beta_eff = config.use_noise_tolerant ? config.beta : 0.0;
      auto [unsup_loss, grad_p] = double_balanced_unsup_loss(
          logits_p, pseudo.pred_class, pseudo.pi, config.mu, beta_eff, config.lambda);
      Gradients unsup_grads = backward(model, tape_p, grad_p);
      accumulate(grads, unsup_grads, 1.0);
      stats.unsupervised_loss = unsup_loss;
    }

    const double total_loss = stats.supervised_loss + stats.unsupervised_loss;
    if (!std::isfinite(total_loss)) {
      throw std::runtime_error(
          "training diverged at epoch " + std::to_string(epoch) +
          ": non-finite loss (supervised=" + std::to_string(stats.supervised_loss) +
          ", unsupervised=" + std::to_string(stats.unsupervised_loss) + ")");
    }

    // (5) optimizer step.
    adam_step(model, grads, opt);

    stats.seconds = seconds_since(t0);
    record.epochs.push_back(std::move(stats));
  }

  // The parameters after the final step never entered the loop's probe.
  {
    std::vector<double> confidence;
    std::vector<int> pred;
    const double final_val = eval_snapshot(model, confidence, pred);
    if (masks.val_idx.empty() || final_val > best_val) {
      best_val = final_val;
      best_epoch = config.epochs;
      best_model = model;
    }
  }

  record.best_val_balanced_accuracy = best_val;
  record.best_epoch = best_epoch;
  if (!masks.test_idx.empty()) {
    auto [conf, pred] = predict_confidence(best_model, diffused);
    record.final_test = evaluate(pred, graph.labels, masks.test_idx, num_classes);
  }
  record.total_seconds = seconds_since(run_start);
  return {std::move(best_model), std::move(record)};
}

std::vector<StageRecord> multistage_selftrain(const SparseGraph& graph,
                                              const SplitMasks& masks,
                                              const TrainConfig& base_config, int stages,
                                              double fixed_tau, int top_k_per_stage) {
  if (stages < 1) throw std::invalid_argument("multistage: stages must be >= 1");
  if (!(fixed_tau > 0.0 && fixed_tau < 1.0)) {
    throw std::invalid_argument("multistage: tau must be in (0, 1)");
  }
  if (top_k_per_stage < 1) throw std::invalid_argument("multistage: top_k must be >= 1");

  TrainConfig config = base_config;
  config.use_double_balancing = false;
  config.use_noise_tolerant = false;

  // Structure and features never change across stages, so one diffusion
  // serves every retrain (labels are excluded from the diffusion hash).
  const DiffusedFeatures diffused = diffuse_graph(graph, config.propagation);

  SparseGraph working = graph;  // labels get overwritten at adopted nodes
  SplitMasks current = masks;
  std::vector<int> cumulative(graph.num_classes, 0);
  std::vector<StageRecord> records;
  records.reserve(stages);

  for (int stage = 0; stage < stages; ++stage) {
    TrainConfig stage_config = config;
    stage_config.seed =
        stage == 0 ? config.seed : mix_seed(config.seed, 0x5747ULL + stage);
    auto [model, run] = train(working, current, stage_config, diffused);

    StageRecord rec;
    rec.run = std::move(run);

    // Adopt up to top_k confident test-pool predictions permanently.
    auto [confidence, pred] = predict_confidence(model, diffused);
    std::vector<int> candidates;
    for (int i : current.test_idx) {
      if (confidence[i] >= fixed_tau) candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      if (confidence[a] != confidence[b]) return confidence[a] > confidence[b];
      return a < b;
    });
    if (candidates.size() > static_cast<std::size_t>(top_k_per_stage)) {
      candidates.resize(top_k_per_stage);
    }
    if (candidates.empty()) {
      std::cerr << "multistage: stage " << stage
                << ": no predictions exceed tau, stage skipped\n";
    }
    for (int i : candidates) {
      working.labels[i] = pred[i];  // the assigned pseudo label, not truth
      ++cumulative[pred[i]];
      current.train_idx.push_back(i);
    }
    if (!candidates.empty()) {
      std::sort(current.train_idx.begin(), current.train_idx.end());
      std::vector<int> remaining;
      remaining.reserve(current.test_idx.size());
      std::sort(candidates.begin(), candidates.end());
      std::set_difference(current.test_idx.begin(), current.test_idx.end(),
                          candidates.begin(), candidates.end(),
                          std::back_inserter(remaining));
      current.test_idx = std::move(remaining);
      current.labeled_counts.assign(working.num_classes, 0);
      for (int i : current.train_idx) ++current.labeled_counts[working.labels[i]];
      int lo = current.labeled_counts[0], hi = current.labeled_counts[0];
      for (int c : current.labeled_counts) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      current.imbalance_ratio = lo > 0 ? static_cast<double>(hi) / lo : 0.0;
    }

    rec.cumulative_pseudo_counts = cumulative;
    rec.added = static_cast<int>(candidates.size());
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace iceberg
