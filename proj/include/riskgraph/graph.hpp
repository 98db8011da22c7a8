#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskgraph/common.hpp"

namespace riskgraph::graph {

// Bipartite transaction-entity graph; edges are undirected.
struct StaticGraph {
  std::vector<uint64_t> txn_ids;                    // sorted ascending
  std::vector<EntityKey> entity_nodes;              // sorted, unique
  std::vector<std::pair<uint32_t, uint32_t>> edges; // (txn index, entity index), sorted

  size_t node_count() const { return txn_ids.size() + entity_nodes.size(); }
};

// Every transaction node carries its creation day; entities are materialized
// once per day on which a linked transaction was created. An edge connects a
// transaction at day i to an entity instance at day t only when i <= t.
struct SnapshotGraph {
  std::vector<uint32_t> txn_rows; // index into the source records
  std::vector<int32_t> txn_days;
  std::vector<EntityKey> inst_keys;
  std::vector<int32_t> inst_days;
  std::vector<std::pair<uint32_t, uint32_t>> edges; // (txn node, entity instance)

  size_t node_count() const { return txn_rows.size() + inst_keys.size(); }
};

enum class NodeKind : uint8_t { Target = 0, Reference = 1, Entity = 2 };

struct NodeRef {
  NodeKind kind;
  uint32_t index;

  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

struct PartitionEdge {
  NodeRef a; // batch: reference side ; rt: source (entity)
  NodeRef b; // batch: entity side    ; rt: destination (target)

  friend auto operator<=>(const PartitionEdge&, const PartitionEdge&) = default;
};

// All targets of one day plus their 1-hop entity instances and the historical
// reference transactions inside the window [window_begin, day-1].
// batch_edges are bidirectional reference<->entity links; rt_edges are
// directed entity->target links. Targets are message sinks.
struct Partition {
  int32_t day = 0;
  int32_t window_begin = 0;
  std::vector<uint32_t> target_rows; // rows into TdGraph txn table
  std::vector<uint32_t> ref_rows;
  std::vector<EntityKey> entities; // instance keys; instance day == day
  std::vector<PartitionEdge> batch_edges;
  std::vector<PartitionEdge> rt_edges;

  size_t node_count() const {
    return target_rows.size() + ref_rows.size() + entities.size();
  }
};

enum class SplitRole : int8_t { Train = 0, Val = 1, Test = 2 };

struct TdGraph {
  uint32_t feature_dim = 0;
  int32_t max_history = 30;
  // Global transaction table; row order is txn_id order.
  std::vector<uint64_t> txn_ids;
  std::vector<int32_t> txn_days;
  std::vector<int8_t> txn_labels;
  std::vector<int8_t> txn_roles; // SplitRole
  std::vector<float> features;   // row-major, txn_ids.size() x feature_dim
  std::vector<Partition> partitions; // ascending by day

  std::span<const float> feature_row(uint32_t row) const {
    return {features.data() + static_cast<size_t>(row) * feature_dim, feature_dim};
  }
  size_t node_count() const;
  size_t edge_count() const;
};

StaticGraph build_static(std::span<const TransactionRecord> records);
SnapshotGraph build_snapshot(std::span<const TransactionRecord> records);

// Builds the per-day partitions from the snapshot graph. `records` supplies
// features and labels for the transaction table; `roles` (optional, txn-id
// indexed) tags each transaction with its split role.
TdGraph build_td(const SnapshotGraph& snapshot, std::span<const TransactionRecord> records,
                 int32_t max_history, std::span<const SplitRole> roles = {});

enum class ViolationKind : uint8_t {
  FutureReference = 0,
  ReversedRTEdge = 1,
  BatchEdgeTouchesTarget = 2,
  TargetTargetPath = 3,
  MalformedEdge = 4,
};

struct Violation {
  ViolationKind kind;
  uint32_t partition_index;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Violations are data, not errors: hand-built graphs with reversed edges or
// future references come back described, never thrown.
ValidationReport validate_leakage_freedom(const TdGraph& td);

struct MiniBatchCommunity {
  uint32_t partition_index = 0;
  uint32_t node_budget = 0;
  std::vector<NodeRef> members; // sorted by (kind, index)
};

// Connected components of the partition's undirected skeleton, split by a
// deterministic label-propagation pass when larger than the budget, then
// merged first-fit decreasing. Every target lands in exactly one community.
std::vector<MiniBatchCommunity> make_minibatches(const Partition& partition,
                                                 uint32_t partition_index,
                                                 uint32_t node_budget);

// Counts reads of partition adjacency made on behalf of scoring paths
// (k-hop expansion, end-to-end forward). The real-time path must leave it
// untouched.
std::atomic<uint64_t>& graph_structure_accesses();

void write_td(const TdGraph& td, const std::string& path);
TdGraph read_td(const std::string& path);

struct GraphSummary {
  size_t static_nodes = 0, static_edges = 0;
  size_t snapshot_nodes = 0, snapshot_edges = 0;
  size_t td_nodes = 0, td_edges = 0;
  size_t n_targets = 0, n_partitions = 0;
  double fraud_fraction = 0.0;
};

GraphSummary summarize(const StaticGraph& sg, const SnapshotGraph& snap, const TdGraph& td);
std::string format_summary(const GraphSummary& s);

} // namespace riskgraph::graph
