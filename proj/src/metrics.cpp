#include "riskgraph/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <numeric>

namespace riskgraph::metrics {

namespace {

void check_input(std::span<const double> scores, std::span<const int8_t> labels) {
  if (scores.size() != labels.size()) throw MetricError("scores/labels length mismatch");
  if (scores.empty()) throw MetricError("empty input");
}

// Indices sorted by descending score; equal scores keep input order.
std::vector<size_t> order_desc(std::span<const double> scores) {
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  return idx;
}

} // namespace

double roc_auc(std::span<const double> scores, std::span<const int8_t> labels) {
  check_input(scores, labels);
  size_t n_pos = 0;
  for (int8_t y : labels) n_pos += (y != 0);
  size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw MetricError("roc_auc undefined for single-class labels");

  // Average ranks over tie groups, then the rank-sum form of the U statistic.
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j)); // 1-based
    for (size_t k = i; k < j; ++k) {
      if (labels[idx[k]] != 0) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  double np = static_cast<double>(n_pos);
  double nn = static_cast<double>(n_neg);
  double u = rank_sum_pos - np * (np + 1.0) / 2.0;
  return u / (np * nn);
}

std::vector<std::pair<double, double>> pr_curve(std::span<const double> scores,
                                                std::span<const int8_t> labels) {
  check_input(scores, labels);
  size_t n_pos = 0;
  for (int8_t y : labels) n_pos += (y != 0);
  if (n_pos == 0) throw MetricError("pr_curve undefined without positives");

  auto idx = order_desc(scores);
  std::vector<std::pair<double, double>> curve;
  size_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    for (size_t k = i; k < j; ++k) {
      if (labels[idx[k]] != 0)
        ++tp;
      else
        ++fp;
    }
    double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.emplace_back(recall, precision);
    i = j;
  }
  return curve;
}

double average_precision(std::span<const double> scores, std::span<const int8_t> labels) {
  auto curve = pr_curve(scores, labels);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (auto& [recall, precision] : curve) {
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

EvalResult evaluate(std::span<const double> scores, std::span<const int8_t> labels) {
  EvalResult r;
  r.pr_curve = pr_curve(scores, labels);
  double prev_recall = 0.0;
  for (auto& [recall, precision] : r.pr_curve) {
    r.average_precision += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  r.roc_auc = roc_auc(scores, labels);
  for (int8_t y : labels) {
    if (y != 0)
      ++r.n_pos;
    else
      ++r.n_neg;
  }
  return r;
}

void write_pr_curve(const std::vector<std::pair<double, double>>& curve,
                    const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw IoError("cannot open file for write: " + path);
  std::fprintf(f.get(), "# recall precision\n");
  for (auto& [recall, precision] : curve) {
    std::fprintf(f.get(), "%.9f %.9f\n", recall, precision);
  }
}

} // namespace riskgraph::metrics
