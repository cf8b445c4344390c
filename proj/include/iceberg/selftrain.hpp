#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "iceberg/balancing.hpp"
#include "iceberg/graph.hpp"
#include "iceberg/metrics.hpp"
#include "iceberg/nn.hpp"
#include "iceberg/propagation.hpp"
#include "iceberg/splits.hpp"

namespace iceberg {

struct PseudoLabelSet {
  std::vector<int> node_idx;      // selected unlabeled nodes
  std::vector<int> pred_class;    // parallel to node_idx
  std::vector<double> confidence; // parallel to node_idx, each >= threshold_used
  ClassCounts pi;                 // histogram of pred_class, source = pseudo
  double threshold_used = 0.0;
};

enum class ThresholdMode { dynamic_mean, fixed };

struct TrainConfig {
  PropagationConfig propagation;
  std::vector<int> hidden_dims{256};
  double dropout = 0.5;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  int epochs = 1000;
  BalancingMode supervised_mode = BalancingMode::ERM;
  bool use_double_balancing = false;
  bool use_noise_tolerant = false;
  double lambda = 1.0;
  double mu = 1.0;
  double beta = 0.5;
  ThresholdMode threshold_mode = ThresholdMode::dynamic_mean;
  double fixed_tau = 0.9;  // used when threshold_mode == fixed; must be in (0,1)
  std::uint64_t seed = 0;
};

TrainConfig train_config_from_json_file(const std::filesystem::path& path);
std::string train_config_to_json(const TrainConfig& config);

struct EpochStats {
  double supervised_loss = 0.0;
  double unsupervised_loss = 0.0;
  std::vector<int> pseudo_histogram;
  double pseudo_accuracy = 0.0;  // diagnostic only: truth of selected nodes
  double utilization = 0.0;      // |pseudo| / |unlabeled|
  double val_balanced_accuracy = 0.0;
  double seconds = 0.0;
};

struct RunRecord {
  std::vector<EpochStats> epochs;
  MetricReport final_test;  // best-validation snapshot evaluated on test_idx
  double best_val_balanced_accuracy = 0.0;
  int best_epoch = -1;
  double total_seconds = 0.0;
};

// One line of JSON per epoch followed by a summary line.
void save_run_record(const RunRecord& record, const TrainConfig& config,
                     const std::filesystem::path& path);
std::string run_summary_json(const RunRecord& record, const TrainConfig& config);

// Eval-mode forward over the diffused features; confidence[i] is the max
// softmax probability, pred[i] the argmax with ties to the lowest class id.
std::pair<std::vector<double>, std::vector<int>> predict_confidence(
    const MlpModel& model, const DiffusedFeatures& diffused);

// Mean confidence over the unlabeled nodes.
double dynamic_threshold(const std::vector<double>& confidence,
                         const std::vector<int>& unlabeled_idx);

PseudoLabelSet select_pseudo(const std::vector<double>& confidence,
                             const std::vector<int>& pred,
                             const std::vector<int>& unlabeled_idx, double threshold,
                             int num_classes);

// Full per-epoch Double Balancing loop. Diffuses internally.
std::pair<MlpModel, RunRecord> train(const SparseGraph& graph, const SplitMasks& masks,
                                     const TrainConfig& config);

// Same loop over a precomputed diffusion; throws "diffusion-hash mismatch"
// when diffused.source_hash != diffusion_hash(graph, config.propagation).
std::pair<MlpModel, RunRecord> train(const SparseGraph& graph, const SplitMasks& masks,
                                     const TrainConfig& config,
                                     const DiffusedFeatures& diffused);

struct StageRecord {
  RunRecord run;
  std::vector<int> cumulative_pseudo_counts;  // per class, assigned labels
  int added = 0;                              // pseudo labels added this stage
};

// Classic teacher-student self-training: train supervised, permanently adopt
// up to top_k confident predictions per stage, retrain from scratch. Double
// balancing is forced off; this is the Matthew-effect diagnostic baseline.
std::vector<StageRecord> multistage_selftrain(const SparseGraph& graph,
                                              const SplitMasks& masks,
                                              const TrainConfig& base_config, int stages,
                                              double fixed_tau, int top_k_per_stage);

}  // namespace iceberg
