#include "iceberg/balancing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iceberg/nn.hpp"

namespace iceberg {

BalancingMode parse_balancing_mode(const std::string& name) {
  if (name == "erm") return BalancingMode::ERM;
  if (name == "reweight") return BalancingMode::ReWeight;
  if (name == "bs") return BalancingMode::BalancedSoftmax;
  throw std::invalid_argument("unknown balancing mode '" + name +
                              "' (expected erm, reweight or bs)");
}

std::string to_string(BalancingMode mode) {
  switch (mode) {
    case BalancingMode::ERM: return "erm";
    case BalancingMode::ReWeight: return "reweight";
    case BalancingMode::BalancedSoftmax: return "bs";
  }
  throw std::logic_error("unreachable");
}

ClassCounts count_classes(const std::vector<int>& labels, const std::vector<int>& idx,
                          int num_classes, ClassCounts::Source source) {
  ClassCounts out;
  out.source = source;
  out.counts.assign(num_classes, 0);
  for (int i : idx) {
    if (i < 0 || i >= static_cast<int>(labels.size())) {
      throw std::invalid_argument("count_classes: index out of range");
    }
    const int c = labels[i];
    if (c < 0 || c >= num_classes) {
      throw std::invalid_argument("count_classes: label out of range");
    }
    ++out.counts[c];
  }
  return out;
}

Matrix adjust_logits(const Matrix& logits, const ClassCounts& counts, double mu) {
  if (!std::isfinite(mu)) throw std::invalid_argument("adjust_logits: non-finite mu");
  if (static_cast<int>(counts.counts.size()) != logits.cols) {
    throw std::invalid_argument("adjust_logits: counts length != class count");
  }
  std::vector<double> offset(logits.cols);
  for (int c = 0; c < logits.cols; ++c) {
    offset[c] = mu * std::log(static_cast<double>(std::max(counts.counts[c], 1)));
  }
  Matrix q = logits;
  for (int i = 0; i < q.rows; ++i) {
    double* row = q.row(i);
    for (int c = 0; c < q.cols; ++c) row[c] += offset[c];
  }
  return q;
}

std::pair<double, Matrix> supervised_loss(BalancingMode mode, const Matrix& logits,
                                          const std::vector<int>& targets,
                                          const ClassCounts& labeled_counts) {
  const int b = logits.rows;
  std::vector<double> weights(b, 1.0);
  switch (mode) {
    case BalancingMode::ERM:
      return softmax_cross_entropy(logits, targets, weights);
    case BalancingMode::ReWeight: {
      double sum = 0.0;
      for (int i = 0; i < b; ++i) {
        const int y = targets[i];
        if (y < 0 || y >= static_cast<int>(labeled_counts.counts.size()) ||
            labeled_counts.counts[y] == 0) {
          throw std::invalid_argument("reweight: target class has zero labeled count");
        }
        weights[i] = 1.0 / labeled_counts.counts[y];
        sum += weights[i];
      }
      for (double& w : weights) w *= b / sum;  // mean 1 over the batch
      return softmax_cross_entropy(logits, targets, weights);
    }
    case BalancingMode::BalancedSoftmax: {
      // d(adjusted)/d(logits) is the identity, so the CE gradient passes
      // through unchanged.
      Matrix q = adjust_logits(logits, labeled_counts, 1.0);
      return softmax_cross_entropy(q, targets, weights);
    }
  }
  throw std::logic_error("unreachable");
}

std::pair<double, Matrix> double_balanced_unsup_loss(const Matrix& logits,
                                                     const std::vector<int>& pseudo_labels,
                                                     const ClassCounts& pi, double mu,
                                                     double beta, double lambda) {
  const int b = logits.rows, c = logits.cols;
  if (static_cast<int>(pseudo_labels.size()) != b) {
    throw std::invalid_argument("unsup: batch size mismatch");
  }
  if (b == 0) return {0.0, Matrix()};

  Matrix q = adjust_logits(logits, pi, mu);
  Matrix probs = softmax(q);
  Matrix grad(b, c);
  double loss = 0.0;
  const double inv_b = 1.0 / b;
  for (int i = 0; i < b; ++i) {
    const int y = pseudo_labels[i];
    if (y < 0 || y >= c) throw std::invalid_argument("unsup: pseudo label out of range");
    const double* p = probs.row(i);
    double* g = grad.row(i);
    // CE(q, y) = -log p_y; RCE(p, y) = -A * (1 - p_y) with log 0 clamped to A.
    loss += -std::log(p[y]) + beta * (-kRceClampA) * (1.0 - p[y]);
    // d CE / d q_m = p_m - [m == y]; d RCE / d q_m = A * p_y * ([m == y] - p_m).
    const double rce_coeff = beta * kRceClampA * p[y];
    for (int m = 0; m < c; ++m) {
      const double delta = m == y ? 1.0 : 0.0;
      g[m] = lambda * inv_b * ((p[m] - delta) + rce_coeff * (delta - p[m]));
    }
  }
  loss *= lambda * inv_b;
  return {loss, std::move(grad)};
}

}  // namespace iceberg
