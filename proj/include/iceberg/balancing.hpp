#pragma once

#include <string>
#include <utility>
#include <vector>

#include "iceberg/matrix.hpp"

namespace iceberg {

struct ClassCounts {
  enum class Source { labeled, pseudo };
  std::vector<int> counts;
  Source source = Source::labeled;
};

enum class BalancingMode { ERM, ReWeight, BalancedSoftmax };

BalancingMode parse_balancing_mode(const std::string& name);  // erm | reweight | bs
std::string to_string(BalancingMode mode);

// Exact histogram of labels[idx] over C classes.
ClassCounts count_classes(const std::vector<int>& labels, const std::vector<int>& idx,
                          int num_classes, ClassCounts::Source source);

// q[b][c] = logits[b][c] + mu * ln(max(counts[c], 1)). The floor realizes the
// zero-count-class stability claim while keeping logits finite.
Matrix adjust_logits(const Matrix& logits, const ClassCounts& counts, double mu);

// ERM: plain CE. ReWeight: CE with per-sample weight 1/counts[target],
// renormalized to mean 1. BalancedSoftmax: CE on adjust_logits(logits,
// labeled_counts, 1). grad_logits is exact for each mode.
std::pair<double, Matrix> supervised_loss(BalancingMode mode, const Matrix& logits,
                                          const std::vector<int>& targets,
                                          const ClassCounts& labeled_counts);

// Reverse cross-entropy log-zero clamp (symmetric-cross-entropy convention).
inline constexpr double kRceClampA = -4.0;

// lambda * mean_b [ CE(q_b, y_b) + beta * RCE(softmax(q_b), y_b) ] where
// q = adjust_logits(logits, pi, mu) and RCE(p, y) = -A * (1 - p_y).
// Empty batch returns (0, empty grad): a skip signal, not an error.
std::pair<double, Matrix> double_balanced_unsup_loss(const Matrix& logits,
                                                     const std::vector<int>& pseudo_labels,
                                                     const ClassCounts& pi, double mu,
                                                     double beta, double lambda);

}  // namespace iceberg
