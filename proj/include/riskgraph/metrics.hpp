#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskgraph/common.hpp"

namespace riskgraph::metrics {

struct EvalResult {
  double roc_auc = 0.0;
  double average_precision = 0.0;
  std::vector<std::pair<double, double>> pr_curve; // (recall, precision)
  size_t n_pos = 0;
  size_t n_neg = 0;
};

// Mann-Whitney AUC with half credit for score ties. Throws MetricError
// unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int8_t> labels);

// Step-rule AP: equal scores are grouped into one threshold step.
// Throws MetricError when there is no positive.
double average_precision(std::span<const double> scores, std::span<const int8_t> labels);

// One (recall, precision) point per distinct score threshold, recall
// non-decreasing. average_precision is exactly the step integral of this.
std::vector<std::pair<double, double>> pr_curve(std::span<const double> scores,
                                                std::span<const int8_t> labels);

EvalResult evaluate(std::span<const double> scores, std::span<const int8_t> labels);

void write_pr_curve(const std::vector<std::pair<double, double>>& curve,
                    const std::string& path);

} // namespace riskgraph::metrics
