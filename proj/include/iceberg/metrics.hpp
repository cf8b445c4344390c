#pragma once

#include <vector>

namespace iceberg {

struct MetricReport {
  double balanced_accuracy = 0.0;  // mean recall over classes present in truth
  double macro_f1 = 0.0;           // mean F1 over all C classes, 0 when undefined
  double accuracy = 0.0;
  std::vector<double> per_class_recall;  // length C, 0 for absent classes
};

MetricReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth,
                      const std::vector<int>& idx, int num_classes);

}  // namespace iceberg
