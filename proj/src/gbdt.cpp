#include "riskgraph/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "riskgraph/binio.hpp"

namespace riskgraph::gbdt {

namespace {

constexpr uint32_t kModelMagic = 0x42474752; // "RGGB"
constexpr uint16_t kModelVersion = 1;
constexpr double kMinSplitGain = 1e-12;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamped_logit(double p) {
  p = std::clamp(p, 1e-6, 1.0 - 1e-6);
  return std::log(p / (1.0 - p));
}

double bce(double margin, int8_t y) {
  // log(1 + exp(-margin)) for y=1, log(1 + exp(margin)) for y=0; stable form.
  double z = y != 0 ? margin : -margin;
  if (z > 0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

struct NodeStats {
  double g_sum = 0.0, h_sum = 0.0;
  uint32_t count = 0;
  double best_gain = 0.0;
  int32_t best_feature = -1;
  float best_threshold = 0.0f;
  int32_t node_id = -1;
};

double leaf_weight(double g, double h, double lambda) { return -g / (h + lambda); }

double split_score(double g, double h, double lambda) { return g * g / (h + lambda); }

} // namespace

double RegressionTree::leaf_value(std::span<const float> x) const {
  int32_t cur = 0;
  while (nodes[cur].feature >= 0) {
    const TreeNode& nd = nodes[cur];
    cur = x[static_cast<size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
  }
  return nodes[cur].value;
}

GbdtModel train_gbdt(DataView features, std::span<const int8_t> labels,
                     const TrainParams& params, TrainHistory* history,
                     std::optional<DataView> val_features, std::span<const int8_t> val_labels) {
  if (features.n == 0 || features.dim == 0) throw InputError("empty training data");
  if (labels.size() != features.n) throw InputError("labels/features size mismatch");
  if (params.max_depth == 0) throw ConfigError("max_depth must be >= 1");
  if (params.min_leaf == 0) throw ConfigError("min_leaf must be >= 1");
  size_t n = features.n;
  size_t pos = 0;
  for (size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InputError("labels must be 0/1");
    pos += (labels[i] != 0);
  }
  for (size_t i = 0; i < n * features.dim; ++i) {
    if (!std::isfinite(features.data[i])) throw InputError("non-finite feature value");
  }

  GbdtModel model;
  model.feature_dim = static_cast<uint32_t>(features.dim);
  model.shrinkage = params.shrinkage;
  model.base_score = clamped_logit(static_cast<double>(pos) / static_cast<double>(n));
  if (pos == 0 || pos == n) {
    model.degenerate = true;
    return model;
  }

  // Presorted sample order per feature; ties resolved by index.
  std::vector<std::vector<uint32_t>> sorted(features.dim);
  for (size_t f = 0; f < features.dim; ++f) {
    auto& ord = sorted[f];
    ord.resize(n);
    std::iota(ord.begin(), ord.end(), 0u);
    std::stable_sort(ord.begin(), ord.end(), [&](uint32_t a, uint32_t b) {
      return features.data[a * features.dim + f] < features.data[b * features.dim + f];
    });
  }

  std::vector<double> margin(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<int32_t> node_of(n);

  std::vector<double> val_margin;
  if (val_features) val_margin.assign(val_features->n, model.base_score);
  double best_val = std::numeric_limits<double>::infinity();
  uint32_t best_iter = 0;
  uint32_t since_best = 0;

  for (uint32_t k = 0; k < params.n_trees; ++k) {
    for (size_t i = 0; i < n; ++i) {
      double p = sigmoid(margin[i]);
      grad[i] = p - static_cast<double>(labels[i]);
      hess[i] = p * (1.0 - p);
    }

    RegressionTree tree;
    tree.nodes.push_back({});
    std::fill(node_of.begin(), node_of.end(), 0);
    std::vector<int32_t> active{0};

    for (uint32_t depth = 0; depth < params.max_depth && !active.empty(); ++depth) {
      std::vector<NodeStats> stats(active.size());
      std::vector<int32_t> slot_of(tree.nodes.size(), -1);
      for (size_t s = 0; s < active.size(); ++s) {
        stats[s].node_id = active[s];
        slot_of[static_cast<size_t>(active[s])] = static_cast<int32_t>(s);
      }
      for (size_t i = 0; i < n; ++i) {
        int32_t slot = node_of[i] >= 0 ? slot_of[static_cast<size_t>(node_of[i])] : -1;
        if (slot < 0) continue;
        stats[static_cast<size_t>(slot)].g_sum += grad[i];
        stats[static_cast<size_t>(slot)].h_sum += hess[i];
        ++stats[static_cast<size_t>(slot)].count;
      }

      // Exact greedy scan: one pass per feature, running left-sums per node.
      std::vector<double> gl(stats.size()), hl(stats.size());
      std::vector<uint32_t> cl(stats.size());
      std::vector<float> last_val(stats.size());
      std::vector<uint8_t> has_prev(stats.size());
      for (size_t f = 0; f < features.dim; ++f) {
        std::fill(gl.begin(), gl.end(), 0.0);
        std::fill(hl.begin(), hl.end(), 0.0);
        std::fill(cl.begin(), cl.end(), 0u);
        std::fill(has_prev.begin(), has_prev.end(), uint8_t{0});
        for (uint32_t j = 0; j < n; ++j) {
          uint32_t i = sorted[f][j];
          int32_t slot = node_of[i] >= 0 ? slot_of[static_cast<size_t>(node_of[i])] : -1;
          if (slot < 0) continue;
          auto s = static_cast<size_t>(slot);
          float v = features.data[i * features.dim + f];
          if (has_prev[s] && v > last_val[s] && cl[s] >= params.min_leaf &&
              stats[s].count - cl[s] >= params.min_leaf) {
            double gr = stats[s].g_sum - gl[s];
            double hr = stats[s].h_sum - hl[s];
            double gain = split_score(gl[s], hl[s], params.lambda_l2) +
                          split_score(gr, hr, params.lambda_l2) -
                          split_score(stats[s].g_sum, stats[s].h_sum, params.lambda_l2);
            if (gain > stats[s].best_gain + kMinSplitGain) {
              stats[s].best_gain = gain;
              stats[s].best_feature = static_cast<int32_t>(f);
              stats[s].best_threshold = last_val[s] + (v - last_val[s]) * 0.5f;
            }
          }
          gl[s] += grad[i];
          hl[s] += hess[i];
          ++cl[s];
          last_val[s] = v;
          has_prev[s] = 1;
        }
      }

      std::vector<int32_t> next_active;
      for (const auto& st : stats) {
        TreeNode& nd = tree.nodes[static_cast<size_t>(st.node_id)];
        if (st.best_feature >= 0) {
          nd.feature = st.best_feature;
          nd.threshold = st.best_threshold;
          nd.left = static_cast<int32_t>(tree.nodes.size());
          nd.right = nd.left + 1;
          tree.nodes.push_back({});
          tree.nodes.push_back({});
          next_active.push_back(nd.left);
          next_active.push_back(nd.right);
        } else {
          nd.feature = -1;
          nd.value = leaf_weight(st.g_sum, st.h_sum, params.lambda_l2);
        }
      }

      // Route samples of split nodes to their children.
      for (size_t i = 0; i < n; ++i) {
        int32_t cur = node_of[i];
        if (cur < 0) continue;
        const TreeNode& nd = tree.nodes[static_cast<size_t>(cur)];
        if (nd.feature < 0) {
          node_of[i] = -1 - cur; // frozen in a leaf; keep id for the update
          continue;
        }
        float v = features.data[i * features.dim + static_cast<size_t>(nd.feature)];
        node_of[i] = v < nd.threshold ? nd.left : nd.right;
      }
      active = std::move(next_active);
    }

    // Depth limit reached: remaining active nodes become leaves.
    if (!active.empty()) {
      std::vector<double> g_fin(tree.nodes.size(), 0.0), h_fin(tree.nodes.size(), 0.0);
      for (size_t i = 0; i < n; ++i) {
        if (node_of[i] >= 0) {
          g_fin[static_cast<size_t>(node_of[i])] += grad[i];
          h_fin[static_cast<size_t>(node_of[i])] += hess[i];
        }
      }
      for (int32_t id : active) {
        TreeNode& nd = tree.nodes[static_cast<size_t>(id)];
        nd.feature = -1;
        nd.value = leaf_weight(g_fin[static_cast<size_t>(id)], h_fin[static_cast<size_t>(id)],
                               params.lambda_l2);
      }
    }

    for (size_t i = 0; i < n; ++i) {
      int32_t leaf = node_of[i] >= 0 ? node_of[i] : -1 - node_of[i];
      margin[i] += params.shrinkage * tree.nodes[static_cast<size_t>(leaf)].value;
    }
    model.trees.push_back(std::move(tree));

    if (history) {
      double ll = 0.0;
      for (size_t i = 0; i < n; ++i) ll += bce(margin[i], labels[i]);
      history->train_logloss.push_back(ll / static_cast<double>(n));
    }
    if (val_features) {
      const RegressionTree& t = model.trees.back();
      double ll = 0.0;
      for (size_t i = 0; i < val_features->n; ++i) {
        val_margin[i] += params.shrinkage * t.leaf_value(val_features->row(i));
        ll += bce(val_margin[i], val_labels[i]);
      }
      ll /= static_cast<double>(val_features->n);
      if (history) history->val_logloss.push_back(ll);
      if (ll < best_val) {
        best_val = ll;
        best_iter = k + 1;
        since_best = 0;
      } else if (params.early_stop_patience > 0 && ++since_best >= params.early_stop_patience) {
        break;
      }
    }
  }

  if (val_features && params.early_stop_patience > 0) {
    model.trees.resize(best_iter);
    if (history) history->best_iteration = best_iter;
  } else if (history) {
    history->best_iteration = static_cast<uint32_t>(model.trees.size());
  }
  return model;
}

double predict_margin(const GbdtModel& model, std::span<const float> x) {
  if (x.size() != model.feature_dim) throw InputError("feature dimension mismatch");
  double m = model.base_score;
  for (const auto& t : model.trees) m += model.shrinkage * t.leaf_value(x);
  return m;
}

double predict(const GbdtModel& model, std::span<const float> x) {
  return sigmoid(predict_margin(model, x));
}

std::vector<float> encode(const GbdtModel& model, std::span<const float> x) {
  std::vector<float> out(model.trees.size());
  encode_into(model, x, out);
  return out;
}

void encode_into(const GbdtModel& model, std::span<const float> x, std::span<float> out) {
  if (x.size() != model.feature_dim) throw InputError("feature dimension mismatch");
  if (out.size() != model.trees.size()) throw InputError("embedding size mismatch");
  for (size_t i = 0; i < model.trees.size(); ++i) {
    out[i] = static_cast<float>(model.trees[i].leaf_value(x));
  }
}

double logloss(const GbdtModel& model, DataView features, std::span<const int8_t> labels) {
  double ll = 0.0;
  for (size_t i = 0; i < features.n; ++i) {
    ll += bce(predict_margin(model, features.row(i)), labels[i]);
  }
  return ll / static_cast<double>(features.n);
}

namespace {

binio::BinWriter serialize(const GbdtModel& model) {
  binio::BinWriter w;
  w.put<uint32_t>(kModelMagic);
  w.put<uint16_t>(kModelVersion);
  w.put<uint32_t>(model.feature_dim);
  w.put<double>(model.base_score);
  w.put<double>(model.shrinkage);
  w.put<uint8_t>(model.degenerate ? 1 : 0);
  w.put<uint32_t>(static_cast<uint32_t>(model.trees.size()));
  for (const auto& t : model.trees) {
    w.put<uint32_t>(static_cast<uint32_t>(t.nodes.size()));
    for (const auto& nd : t.nodes) {
      w.put<int32_t>(nd.feature);
      w.put<float>(nd.threshold);
      w.put<int32_t>(nd.left);
      w.put<int32_t>(nd.right);
      w.put<double>(nd.value);
    }
  }
  return w;
}

} // namespace

void save_model(const GbdtModel& model, const std::string& path) {
  serialize(model).write_file(path);
}

uint64_t model_checksum(const GbdtModel& model) {
  auto w = serialize(model);
  return binio::fnv1a(w.bytes());
}

GbdtModel load_model(const std::string& path) {
  binio::BinReader r(path);
  if (r.get<uint32_t>() != kModelMagic) throw IoError("not a tree model file: " + path);
  if (r.get<uint16_t>() != kModelVersion) throw IoError("unsupported tree model version");
  GbdtModel model;
  model.feature_dim = r.get<uint32_t>();
  model.base_score = r.get<double>();
  model.shrinkage = r.get<double>();
  model.degenerate = r.get<uint8_t>() != 0;
  uint32_t n_trees = r.get<uint32_t>();
  model.trees.resize(n_trees);
  for (auto& t : model.trees) {
    uint32_t n_nodes = r.get<uint32_t>();
    t.nodes.resize(n_nodes);
    for (auto& nd : t.nodes) {
      nd.feature = r.get<int32_t>();
      nd.threshold = r.get<float>();
      nd.left = r.get<int32_t>();
      nd.right = r.get<int32_t>();
      nd.value = r.get<double>();
    }
  }
  return model;
}

} // namespace riskgraph::gbdt
