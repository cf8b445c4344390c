#include "iceberg/metrics.hpp"

#include <cstdint>
#include <stdexcept>

namespace iceberg {

MetricReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth,
                      const std::vector<int>& idx, int num_classes) {
  if (idx.empty()) throw std::invalid_argument("evaluate: empty index set");
  if (num_classes <= 0) throw std::invalid_argument("evaluate: non-positive class count");

  // confusion[t][p] = count of nodes with truth t predicted p.
  std::vector<std::vector<std::int64_t>> confusion(
      num_classes, std::vector<std::int64_t>(num_classes, 0));
  for (int i : idx) {
    if (i < 0 || i >= static_cast<int>(pred.size()) || i >= static_cast<int>(truth.size())) {
      throw std::invalid_argument("evaluate: index out of range");
    }
    const int t = truth[i], p = pred[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
      throw std::invalid_argument("evaluate: class id out of range");
    }
    ++confusion[t][p];
  }

  MetricReport report;
  report.per_class_recall.assign(num_classes, 0.0);
  std::int64_t correct = 0;
  double recall_sum = 0.0;
  int present = 0;
  double f1_sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    std::int64_t tp = confusion[c][c];
    std::int64_t support = 0, predicted = 0;
    for (int k = 0; k < num_classes; ++k) {
      support += confusion[c][k];
      predicted += confusion[k][c];
    }
    correct += tp;
    double recall = 0.0, precision = 0.0;
    if (support > 0) {
      recall = static_cast<double>(tp) / support;
      report.per_class_recall[c] = recall;
      recall_sum += recall;
      ++present;
    }
    if (predicted > 0) precision = static_cast<double>(tp) / predicted;
    if (precision + recall > 0.0) {
      f1_sum += 2.0 * precision * recall / (precision + recall);
    }
  }
  report.accuracy = static_cast<double>(correct) / idx.size();
  report.balanced_accuracy = present > 0 ? recall_sum / present : 0.0;
  report.macro_f1 = f1_sum / num_classes;
  return report;
}

}  // namespace iceberg
