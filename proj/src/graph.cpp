#include "riskgraph/graph.hpp"

#include <algorithm>
#include <numeric>

namespace riskgraph::graph {

namespace {

// Entity -> (day, txn node) adjacency extracted once from the records.
struct EntityLinks {
  std::vector<EntityKey> keys; // sorted unique
  // per entity: (day, record index) sorted by (day, record index)
  std::vector<std::vector<std::pair<int32_t, uint32_t>>> links;
};

EntityLinks collect_entity_links(std::span<const TransactionRecord> records) {
  EntityLinks out;
  out.keys.reserve(records.size());
  for (const auto& r : records) {
    for (const auto& e : r.entities) out.keys.push_back(e);
  }
  std::sort(out.keys.begin(), out.keys.end());
  out.keys.erase(std::unique(out.keys.begin(), out.keys.end()), out.keys.end());
  out.links.resize(out.keys.size());
  for (uint32_t i = 0; i < records.size(); ++i) {
    for (const auto& e : records[i].entities) {
      size_t idx = static_cast<size_t>(
          std::lower_bound(out.keys.begin(), out.keys.end(), e) - out.keys.begin());
      out.links[idx].emplace_back(records[i].day, i);
    }
  }
  for (auto& l : out.links) std::sort(l.begin(), l.end());
  return out;
}

void validate_records(std::span<const TransactionRecord> records) {
  std::vector<uint64_t> ids;
  ids.reserve(records.size());
  for (const auto& r : records) {
    if (r.day < 0) throw InputError("negative timestamp");
    if (r.label != 0 && r.label != 1) throw InputError("label must be 0 or 1");
    ids.push_back(r.txn_id);
    bool seen[kNumEntityTypes] = {};
    for (const auto& e : r.entities) {
      auto t = static_cast<size_t>(e.type);
      if (t >= kNumEntityTypes) throw InputError("entity type out of range");
      if (seen[t]) throw InputError("duplicate entity type on one transaction");
      seen[t] = true;
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw InputError("duplicate txn_id");
}

} // namespace

std::atomic<uint64_t>& graph_structure_accesses() {
  static std::atomic<uint64_t> counter{0};
  return counter;
}

StaticGraph build_static(std::span<const TransactionRecord> records) {
  validate_records(records);
  StaticGraph g;
  std::vector<std::pair<uint64_t, uint32_t>> id_rows;
  id_rows.reserve(records.size());
  for (uint32_t i = 0; i < records.size(); ++i) id_rows.emplace_back(records[i].txn_id, i);
  std::sort(id_rows.begin(), id_rows.end());
  std::vector<uint32_t> row_to_node(records.size());
  g.txn_ids.reserve(records.size());
  for (uint32_t n = 0; n < id_rows.size(); ++n) {
    g.txn_ids.push_back(id_rows[n].first);
    row_to_node[id_rows[n].second] = n;
  }

  for (const auto& r : records) {
    for (const auto& e : r.entities) g.entity_nodes.push_back(e);
  }
  std::sort(g.entity_nodes.begin(), g.entity_nodes.end());
  g.entity_nodes.erase(std::unique(g.entity_nodes.begin(), g.entity_nodes.end()),
                       g.entity_nodes.end());

  for (uint32_t i = 0; i < records.size(); ++i) {
    for (const auto& e : records[i].entities) {
      auto idx = static_cast<uint32_t>(
          std::lower_bound(g.entity_nodes.begin(), g.entity_nodes.end(), e) -
          g.entity_nodes.begin());
      g.edges.emplace_back(row_to_node[i], idx);
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

SnapshotGraph build_snapshot(std::span<const TransactionRecord> records) {
  validate_records(records);
  SnapshotGraph g;
  g.txn_rows.resize(records.size());
  std::iota(g.txn_rows.begin(), g.txn_rows.end(), 0u);
  g.txn_days.reserve(records.size());
  for (const auto& r : records) g.txn_days.push_back(r.day);

  EntityLinks links = collect_entity_links(records);

  // Materialize one instance per (entity, creation day) and connect every
  // linked transaction from that day or earlier.
  std::vector<std::tuple<int32_t, EntityKey, uint32_t>> inst; // (day, key, entity idx)
  for (uint32_t e = 0; e < links.keys.size(); ++e) {
    int32_t prev = -1;
    for (const auto& [day, row] : links.links[e]) {
      if (day != prev) {
        inst.emplace_back(day, links.keys[e], e);
        prev = day;
      }
    }
  }
  std::sort(inst.begin(), inst.end());

  g.inst_keys.reserve(inst.size());
  g.inst_days.reserve(inst.size());
  for (const auto& [day, key, eidx] : inst) {
    g.inst_keys.push_back(key);
    g.inst_days.push_back(day);
  }
  for (uint32_t i = 0; i < inst.size(); ++i) {
    const auto& [day, key, eidx] = inst[i];
    for (const auto& [ldy, row] : links.links[eidx]) {
      if (ldy > day) break; // links sorted by day
      g.edges.emplace_back(row, i);
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

TdGraph build_td(const SnapshotGraph& snapshot, std::span<const TransactionRecord> records,
                 int32_t max_history, std::span<const SplitRole> roles) {
  if (max_history < 1) throw InputError("max_history must be >= 1");
  if (!roles.empty() && roles.size() != records.size())
    throw InputError("roles length must match records");

  TdGraph td;
  td.max_history = max_history;
  td.feature_dim = records.empty() ? 0 : static_cast<uint32_t>(records[0].features.size());

  // Transaction table in txn_id order.
  std::vector<uint32_t> order(records.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](uint32_t a, uint32_t b) { return records[a].txn_id < records[b].txn_id; });
  std::vector<uint32_t> row_of_record(records.size());
  td.txn_ids.reserve(records.size());
  td.txn_days.reserve(records.size());
  td.txn_labels.reserve(records.size());
  td.txn_roles.reserve(records.size());
  td.features.reserve(records.size() * td.feature_dim);
  for (uint32_t row = 0; row < order.size(); ++row) {
    uint32_t rec = order[row];
    row_of_record[rec] = row;
    const auto& r = records[rec];
    if (r.features.size() != td.feature_dim) throw InputError("inconsistent feature_dim");
    td.txn_ids.push_back(r.txn_id);
    td.txn_days.push_back(r.day);
    td.txn_labels.push_back(r.label);
    td.txn_roles.push_back(
        static_cast<int8_t>(roles.empty() ? SplitRole::Train : roles[rec]));
    td.features.insert(td.features.end(), r.features.begin(), r.features.end());
  }

  // Instance adjacency: instance -> linked (day, record) pairs.
  std::vector<std::vector<std::pair<int32_t, uint32_t>>> inst_links(snapshot.inst_keys.size());
  for (const auto& [txn_node, inst] : snapshot.edges) {
    inst_links[inst].emplace_back(snapshot.txn_days[txn_node], snapshot.txn_rows[txn_node]);
  }

  // Group instances and transactions by day.
  std::vector<int32_t> days;
  for (int32_t d : snapshot.txn_days) days.push_back(d);
  std::sort(days.begin(), days.end());
  days.erase(std::unique(days.begin(), days.end()), days.end());

  std::vector<std::vector<uint32_t>> inst_by_day_idx; // parallel to `days`
  inst_by_day_idx.resize(days.size());
  for (uint32_t i = 0; i < snapshot.inst_keys.size(); ++i) {
    auto it = std::lower_bound(days.begin(), days.end(), snapshot.inst_days[i]);
    inst_by_day_idx[static_cast<size_t>(it - days.begin())].push_back(i);
  }
  std::vector<std::vector<uint32_t>> recs_by_day_idx(days.size());
  for (uint32_t rec = 0; rec < records.size(); ++rec) {
    auto it = std::lower_bound(days.begin(), days.end(), records[rec].day);
    recs_by_day_idx[static_cast<size_t>(it - days.begin())].push_back(rec);
  }

  for (size_t di = 0; di < days.size(); ++di) {
    int32_t t = days[di];
    Partition p;
    p.day = t;
    p.window_begin = std::max<int32_t>(0, t - max_history);

    p.target_rows.reserve(recs_by_day_idx[di].size());
    for (uint32_t rec : recs_by_day_idx[di]) p.target_rows.push_back(row_of_record[rec]);
    std::sort(p.target_rows.begin(), p.target_rows.end());
    std::vector<uint32_t> target_pos(td.txn_ids.size(), UINT32_MAX);
    for (uint32_t i = 0; i < p.target_rows.size(); ++i) target_pos[p.target_rows[i]] = i;

    // Entities of this day's targets, already unique per (key, day).
    const auto& insts = inst_by_day_idx[di];
    p.entities.reserve(insts.size());
    for (uint32_t inst : insts) p.entities.push_back(snapshot.inst_keys[inst]);
    // Instances of one day are sorted by key because the snapshot instance
    // table is sorted by (day, key).

    // References: in-window linked transactions strictly before day t.
    std::vector<std::pair<int32_t, uint32_t>> refs; // (day, row)
    for (uint32_t inst : insts) {
      for (const auto& [day, rec] : inst_links[inst]) {
        if (day >= t) continue;
        if (day < p.window_begin) continue;
        refs.emplace_back(day, row_of_record[rec]);
      }
    }
    std::sort(refs.begin(), refs.end());
    refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
    std::vector<uint32_t> ref_pos(td.txn_ids.size(), UINT32_MAX);
    p.ref_rows.reserve(refs.size());
    for (uint32_t i = 0; i < refs.size(); ++i) {
      p.ref_rows.push_back(refs[i].second);
      ref_pos[refs[i].second] = i;
    }

    for (uint32_t ei = 0; ei < insts.size(); ++ei) {
      uint32_t inst = insts[ei];
      for (const auto& [day, rec] : inst_links[inst]) {
        uint32_t row = row_of_record[rec];
        if (day == t) {
          p.rt_edges.push_back({{NodeKind::Entity, ei}, {NodeKind::Target, target_pos[row]}});
        } else if (day >= p.window_begin && day < t) {
          p.batch_edges.push_back(
              {{NodeKind::Reference, ref_pos[row]}, {NodeKind::Entity, ei}});
        }
      }
    }
    std::sort(p.batch_edges.begin(), p.batch_edges.end());
    std::sort(p.rt_edges.begin(), p.rt_edges.end());
    td.partitions.push_back(std::move(p));
  }
  return td;
}

size_t TdGraph::node_count() const {
  size_t n = 0;
  for (const auto& p : partitions) n += p.node_count();
  return n;
}

// Batch edges are bidirectional and therefore counted once per direction;
// rt edges are directed and counted once.
size_t TdGraph::edge_count() const {
  size_t n = 0;
  for (const auto& p : partitions) n += 2 * p.batch_edges.size() + p.rt_edges.size();
  return n;
}

namespace {

bool node_in_range(const Partition& p, NodeRef n) {
  switch (n.kind) {
    case NodeKind::Target: return n.index < p.target_rows.size();
    case NodeKind::Reference: return n.index < p.ref_rows.size();
    case NodeKind::Entity: return n.index < p.entities.size();
  }
  return false;
}

std::string describe(NodeRef n) {
  const char* kind = n.kind == NodeKind::Target ? "target"
                     : n.kind == NodeKind::Reference ? "reference"
                                                     : "entity";
  return std::string(kind) + "#" + std::to_string(n.index);
}

} // namespace

ValidationReport validate_leakage_freedom(const TdGraph& td) {
  ValidationReport report;
  for (uint32_t pi = 0; pi < td.partitions.size(); ++pi) {
    const Partition& p = td.partitions[pi];

    for (const auto& e : p.batch_edges) {
      if (!node_in_range(p, e.a) || !node_in_range(p, e.b)) {
        report.violations.push_back({ViolationKind::MalformedEdge, pi,
                                     "batch edge endpoint out of range"});
        continue;
      }
      if (e.a.kind == NodeKind::Target || e.b.kind == NodeKind::Target) {
        report.violations.push_back({ViolationKind::BatchEdgeTouchesTarget, pi,
                                     describe(e.a) + " <-> " + describe(e.b)});
      } else if (!((e.a.kind == NodeKind::Reference && e.b.kind == NodeKind::Entity) ||
                   (e.a.kind == NodeKind::Entity && e.b.kind == NodeKind::Reference))) {
        report.violations.push_back({ViolationKind::MalformedEdge, pi,
                                     "batch edge must pair a reference with an entity: " +
                                         describe(e.a) + " <-> " + describe(e.b)});
      }
    }

    for (const auto& e : p.rt_edges) {
      if (!node_in_range(p, e.a) || !node_in_range(p, e.b)) {
        report.violations.push_back(
            {ViolationKind::MalformedEdge, pi, "rt edge endpoint out of range"});
        continue;
      }
      if (!(e.a.kind == NodeKind::Entity && e.b.kind == NodeKind::Target)) {
        report.violations.push_back({ViolationKind::ReversedRTEdge, pi,
                                     describe(e.a) + " -> " + describe(e.b)});
      }
    }

    // Future references: reachability over batch+rt edges into a target with
    // a day not later than the reference's. One violation per offending
    // reference.
    std::vector<std::vector<uint32_t>> entity_targets(p.entities.size());
    for (const auto& e : p.rt_edges) {
      if (e.a.kind == NodeKind::Entity && e.b.kind == NodeKind::Target &&
          node_in_range(p, e.a) && node_in_range(p, e.b)) {
        entity_targets[e.a.index].push_back(e.b.index);
      }
    }
    std::vector<bool> flagged(p.ref_rows.size(), false);
    for (const auto& e : p.batch_edges) {
      NodeRef ref = e.a.kind == NodeKind::Reference ? e.a : e.b;
      NodeRef ent = e.a.kind == NodeKind::Entity ? e.a : e.b;
      if (ref.kind != NodeKind::Reference || ent.kind != NodeKind::Entity) continue;
      if (!node_in_range(p, ref) || !node_in_range(p, ent)) continue;
      if (flagged[ref.index]) continue;
      int32_t ref_day = td.txn_days[p.ref_rows[ref.index]];
      for (uint32_t tgt : entity_targets[ent.index]) {
        int32_t tgt_day = td.txn_days[p.target_rows[tgt]];
        if (ref_day >= tgt_day) {
          report.violations.push_back(
              {ViolationKind::FutureReference, pi,
               "reference txn " + std::to_string(td.txn_ids[p.ref_rows[ref.index]]) +
                   " (day " + std::to_string(ref_day) + ") reaches target txn " +
                   std::to_string(td.txn_ids[p.target_rows[tgt]]) + " (day " +
                   std::to_string(tgt_day) + ")"});
          flagged[ref.index] = true;
          break;
        }
      }
    }

    // Target-to-target paths over rt edges only. Well-formed rt edges give
    // targets no outgoing arcs, so only malformed graphs do any work here.
    std::vector<std::pair<NodeRef, NodeRef>> arcs;
    for (const auto& e : p.rt_edges) {
      if (node_in_range(p, e.a) && node_in_range(p, e.b)) arcs.emplace_back(e.a, e.b);
    }
    std::vector<std::pair<NodeRef, NodeRef>> from_target;
    for (const auto& [a, b] : arcs) {
      if (a.kind == NodeKind::Target) from_target.emplace_back(a, b);
    }
    if (!from_target.empty()) {
      for (uint32_t start = 0; start < p.target_rows.size(); ++start) {
        // BFS over rt arcs from this target.
        std::vector<NodeRef> frontier{{NodeKind::Target, start}};
        std::vector<NodeRef> seen = frontier;
        bool hit = false;
        while (!frontier.empty() && !hit) {
          std::vector<NodeRef> next;
          for (NodeRef u : frontier) {
            for (const auto& [a, b] : arcs) {
              if (!(a == u)) continue;
              if (b.kind == NodeKind::Target && !(b == NodeRef{NodeKind::Target, start})) {
                report.violations.push_back(
                    {ViolationKind::TargetTargetPath, pi,
                     "target#" + std::to_string(start) + " reaches target#" +
                         std::to_string(b.index) + " via rt edges"});
                hit = true;
                break;
              }
              if (std::find(seen.begin(), seen.end(), b) == seen.end()) {
                seen.push_back(b);
                next.push_back(b);
              }
            }
            if (hit) break;
          }
          frontier = std::move(next);
        }
      }
    }
  }
  return report;
}

GraphSummary summarize(const StaticGraph& sg, const SnapshotGraph& snap, const TdGraph& td) {
  GraphSummary s;
  s.static_nodes = sg.node_count();
  s.static_edges = sg.edges.size();
  s.snapshot_nodes = snap.node_count();
  s.snapshot_edges = snap.edges.size();
  s.td_nodes = td.node_count();
  s.td_edges = td.edge_count();
  s.n_partitions = td.partitions.size();
  size_t pos = 0;
  for (const auto& p : td.partitions) {
    s.n_targets += p.target_rows.size();
    for (uint32_t row : p.target_rows) pos += (td.txn_labels[row] != 0);
  }
  s.fraud_fraction = s.n_targets ? static_cast<double>(pos) / static_cast<double>(s.n_targets) : 0.0;
  return s;
}

std::string format_summary(const GraphSummary& s) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "graph summary\n"
                "  stage      nodes        edges\n"
                "  static     %-12zu %zu\n"
                "  snapshot   %-12zu %zu\n"
                "  two-stage  %-12zu %zu\n"
                "  partitions %zu, targets %zu, fraud fraction %.4f\n",
                s.static_nodes, s.static_edges, s.snapshot_nodes, s.snapshot_edges, s.td_nodes,
                s.td_edges, s.n_partitions, s.n_targets, s.fraud_fraction);
  return buf;
}

} // namespace riskgraph::graph
