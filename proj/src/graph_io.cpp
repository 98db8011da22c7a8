#include <algorithm>

#include "riskgraph/binio.hpp"
#include "riskgraph/graph.hpp"

// Versioned binary container for the two-stage graph: header, section table,
// transaction table, feature block, partitions, checksum trailer.

namespace riskgraph::graph {

namespace {

constexpr uint32_t kTdMagic = 0x44544752; // "RGTD"
constexpr uint16_t kTdVersion = 1;

constexpr uint32_t kSectionTxns = 1;
constexpr uint32_t kSectionFeatures = 2;
constexpr uint32_t kSectionPartitions = 3;

void put_edges(binio::BinWriter& w, const std::vector<PartitionEdge>& edges) {
  w.put<uint64_t>(edges.size());
  for (const auto& e : edges) {
    w.put<uint8_t>(static_cast<uint8_t>(e.a.kind));
    w.put<uint32_t>(e.a.index);
    w.put<uint8_t>(static_cast<uint8_t>(e.b.kind));
    w.put<uint32_t>(e.b.index);
  }
}

std::vector<PartitionEdge> get_edges(binio::BinReader& r) {
  uint64_t n = r.get<uint64_t>();
  std::vector<PartitionEdge> edges;
  edges.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    PartitionEdge e;
    e.a.kind = static_cast<NodeKind>(r.get<uint8_t>());
    e.a.index = r.get<uint32_t>();
    e.b.kind = static_cast<NodeKind>(r.get<uint8_t>());
    e.b.index = r.get<uint32_t>();
    edges.push_back(e);
  }
  return edges;
}

} // namespace

void write_td(const TdGraph& td, const std::string& path) {
  binio::BinWriter w;
  w.put<uint32_t>(kTdMagic);
  w.put<uint16_t>(kTdVersion);
  w.put<uint32_t>(td.feature_dim);
  w.put<int32_t>(td.max_history);
  w.put<uint64_t>(td.txn_ids.size());
  w.put<uint32_t>(static_cast<uint32_t>(td.partitions.size()));
  w.put<uint32_t>(3); // section count

  w.put<uint32_t>(kSectionTxns);
  w.put_span(std::span<const uint64_t>(td.txn_ids));
  w.put_span(std::span<const int32_t>(td.txn_days));
  w.put_span(std::span<const int8_t>(td.txn_labels));
  w.put_span(std::span<const int8_t>(td.txn_roles));

  w.put<uint32_t>(kSectionFeatures);
  w.put_span(std::span<const float>(td.features));

  w.put<uint32_t>(kSectionPartitions);
  for (const auto& p : td.partitions) {
    w.put<int32_t>(p.day);
    w.put<int32_t>(p.window_begin);
    w.put<uint64_t>(p.target_rows.size());
    w.put_span(std::span<const uint32_t>(p.target_rows));
    w.put<uint64_t>(p.ref_rows.size());
    w.put_span(std::span<const uint32_t>(p.ref_rows));
    w.put<uint64_t>(p.entities.size());
    for (const auto& e : p.entities) {
      w.put<uint8_t>(static_cast<uint8_t>(e.type));
      w.put<uint64_t>(e.key);
    }
    put_edges(w, p.batch_edges);
    put_edges(w, p.rt_edges);
  }
  w.write_file(path);
}

TdGraph read_td(const std::string& path) {
  binio::BinReader r(path);
  if (r.get<uint32_t>() != kTdMagic) throw IoError("not a two-stage graph file: " + path);
  if (r.get<uint16_t>() != kTdVersion) throw IoError("unsupported graph version");
  TdGraph td;
  td.feature_dim = r.get<uint32_t>();
  td.max_history = r.get<int32_t>();
  uint64_t n_txns = r.get<uint64_t>();
  uint32_t n_parts = r.get<uint32_t>();
  uint32_t n_sections = r.get<uint32_t>();
  if (n_sections != 3) throw IoError("unexpected section count");

  if (r.get<uint32_t>() != kSectionTxns) throw IoError("missing transaction section");
  td.txn_ids = r.get_vec<uint64_t>(n_txns);
  td.txn_days = r.get_vec<int32_t>(n_txns);
  td.txn_labels = r.get_vec<int8_t>(n_txns);
  td.txn_roles = r.get_vec<int8_t>(n_txns);

  if (r.get<uint32_t>() != kSectionFeatures) throw IoError("missing feature section");
  td.features = r.get_vec<float>(n_txns * td.feature_dim);

  if (r.get<uint32_t>() != kSectionPartitions) throw IoError("missing partition section");
  td.partitions.reserve(n_parts);
  for (uint32_t i = 0; i < n_parts; ++i) {
    Partition p;
    p.day = r.get<int32_t>();
    p.window_begin = r.get<int32_t>();
    p.target_rows = r.get_vec<uint32_t>(r.get<uint64_t>());
    p.ref_rows = r.get_vec<uint32_t>(r.get<uint64_t>());
    uint64_t ne = r.get<uint64_t>();
    p.entities.reserve(ne);
    for (uint64_t e = 0; e < ne; ++e) {
      EntityKey k;
      k.type = static_cast<EntityType>(r.get<uint8_t>());
      k.key = r.get<uint64_t>();
      p.entities.push_back(k);
    }
    p.batch_edges = get_edges(r);
    p.rt_edges = get_edges(r);
    td.partitions.push_back(std::move(p));
  }
  return td;
}

} // namespace riskgraph::graph
