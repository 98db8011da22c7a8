#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "riskgraph/common.hpp"
#include "riskgraph/graph.hpp"

// Two-stage graph network: a residual graph-conv stack over the batch graph
// producing entity states, a single conv layer + projection over the rt
// graph producing target states, and a linear decoder. All layers share the
// update
//
//   h' = relu(W * mean({h_v} u {h_u : u in N(v)}) + b) + h_v
//
// with the mean taken over the node itself and its neighbors. Inference runs
// in single precision; training and gradient checks instantiate the same
// code in double precision.

namespace riskgraph::nn {

template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Undirected adjacency in CSR form.
struct ConvGraph {
  uint32_t n = 0;
  std::vector<uint32_t> offsets; // n+1
  std::vector<uint32_t> adj;

  static ConvGraph from_edges(uint32_t n,
                              std::span<const std::pair<uint32_t, uint32_t>> edges);
  uint32_t degree(uint32_t v) const { return offsets[v + 1] - offsets[v]; }
};

template <typename T>
struct Params {
  MatX<T> w_in;
  VecX<T> b_in;
  std::vector<MatX<T>> conv_w;
  std::vector<VecX<T>> conv_b;
  MatX<T> phi_w;
  VecX<T> phi_b;
  MatX<T> rt_w;
  VecX<T> rt_b;
  VecX<T> dec_w;
  T dec_b = T(0);

  int input_dim() const { return static_cast<int>(w_in.cols()); }
  int hidden() const { return static_cast<int>(w_in.rows()); }
  int n_layers() const { return static_cast<int>(conv_w.size()); }

  template <typename U>
  Params<U> cast() const {
    Params<U> p;
    p.w_in = w_in.template cast<U>();
    p.b_in = b_in.template cast<U>();
    for (const auto& w : conv_w) p.conv_w.push_back(w.template cast<U>());
    for (const auto& b : conv_b) p.conv_b.push_back(b.template cast<U>());
    p.phi_w = phi_w.template cast<U>();
    p.phi_b = phi_b.template cast<U>();
    p.rt_w = rt_w.template cast<U>();
    p.rt_b = rt_b.template cast<U>();
    p.dec_w = dec_w.template cast<U>();
    p.dec_b = static_cast<U>(dec_b);
    return p;
  }

  bool all_finite() const;
  void set_zero();
};

// Glorot-uniform weights, zero biases, seeded.
Params<double> init_params(int input_dim, int hidden, int layers, uint64_t seed);

// Zero-shaped clone (for gradients and optimizer state).
template <typename T>
Params<T> zeros_like(const Params<T>& p) {
  Params<T> z = p;
  z.set_zero();
  return z;
}

// mean over {v} u N(v) per column.
template <typename T>
MatX<T> mean_aggregate(const ConvGraph& g, const MatX<T>& h);

template <typename T>
MatX<T> conv_layer(const ConvGraph& g, const MatX<T>& h_prev, const MatX<T>& w,
                   const VecX<T>& b);

template <typename T>
struct BatchInput {
  ConvGraph g;
  MatX<T> x;                          // input_dim x n, entity columns zero
  std::vector<graph::NodeKind> kinds; // optional; target nodes are rejected
};

template <typename T>
struct BatchTrace {
  std::vector<MatX<T>> h;   // L+1 entries
  std::vector<MatX<T>> agg; // L entries
  std::vector<MatX<T>> pre; // L entries, pre-activation
};

// Runs the input projection plus the conv stack; returns states for all
// nodes (callers slice out the entity block).
template <typename T>
MatX<T> batch_forward(const Params<T>& p, const BatchInput<T>& in,
                      BatchTrace<T>* trace = nullptr);

template <typename T>
struct RtInput {
  MatX<T> x;                               // input_dim x n_targets
  std::vector<std::vector<uint32_t>> nbrs; // entity-state columns per target
};

template <typename T>
struct RtTrace {
  MatX<T> z, m, pre;
};

template <typename T>
MatX<T> rt_forward(const Params<T>& p, const RtInput<T>& in, const MatX<T>& entity_states,
                   RtTrace<T>* trace = nullptr);

template <typename T>
VecX<T> decode(const Params<T>& p, const MatX<T>& h_rt);

struct CheckpointMeta {
  double learning_rate = 0.0;
  uint32_t epochs_trained = 0;
  uint64_t seed = 0;
};

void save_params(const Params<float>& p, const CheckpointMeta& meta, const std::string& path);
Params<float> load_params(const std::string& path, CheckpointMeta* meta = nullptr);
uint64_t params_checksum(const Params<float>& p);

} // namespace riskgraph::nn
