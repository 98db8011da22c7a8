#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskgraph/common.hpp"

namespace riskgraph::gbdt {

struct TreeNode {
  int32_t feature = -1; // -1 marks a leaf
  float threshold = 0.0f;
  int32_t left = -1;
  int32_t right = -1;
  double value = 0.0; // leaf value (pre-shrinkage)
};

struct RegressionTree {
  std::vector<TreeNode> nodes; // node 0 is the root

  double leaf_value(std::span<const float> x) const;
};

struct TrainParams {
  uint32_t n_trees = 64;
  uint32_t max_depth = 4;
  double shrinkage = 0.1;
  uint32_t min_leaf = 8;
  double lambda_l2 = 1.0;
  uint64_t seed = 1;
  // When a validation set is supplied: stop after this many rounds without
  // improvement and keep the best iteration. 0 disables early stopping.
  uint32_t early_stop_patience = 0;
};

struct GbdtModel {
  uint32_t feature_dim = 0;
  double base_score = 0.0;
  double shrinkage = 0.1;
  bool degenerate = false; // single-class training data, no trees
  std::vector<RegressionTree> trees;

  size_t n_trees() const { return trees.size(); }
};

struct TrainHistory {
  std::vector<double> train_logloss; // after each tree
  std::vector<double> val_logloss;
  uint32_t best_iteration = 0;
};

// Row-major feature matrix view.
struct DataView {
  const float* data = nullptr;
  size_t n = 0;
  size_t dim = 0;

  std::span<const float> row(size_t i) const { return {data + i * dim, dim}; }
};

// Second-order boosting on logistic loss with exact greedy splits.
// Deterministic: features are scanned in index order, thresholds ascending,
// and ties keep the first candidate.
GbdtModel train_gbdt(DataView features, std::span<const int8_t> labels,
                     const TrainParams& params, TrainHistory* history = nullptr,
                     std::optional<DataView> val_features = std::nullopt,
                     std::span<const int8_t> val_labels = {});

double predict_margin(const GbdtModel& model, std::span<const float> x);
double predict(const GbdtModel& model, std::span<const float> x);

// Leaf embedding: raw (pre-shrinkage) leaf value per tree, in tree order.
std::vector<float> encode(const GbdtModel& model, std::span<const float> x);
void encode_into(const GbdtModel& model, std::span<const float> x, std::span<float> out);

double logloss(const GbdtModel& model, DataView features, std::span<const int8_t> labels);

void save_model(const GbdtModel& model, const std::string& path);
GbdtModel load_model(const std::string& path);

// Fingerprint of the serialized model; recorded in embedding store manifests.
uint64_t model_checksum(const GbdtModel& model);

} // namespace riskgraph::gbdt
