#include "riskgraph/graph.hpp"

#include <algorithm>
#include <numeric>

// Community forming for mini-batch training: connected components of the
// partition skeleton, a deterministic label-propagation split for oversized
// components, then first-fit-decreasing merging up to the node budget.

namespace riskgraph::graph {

namespace {

struct Skeleton {
  uint32_t n_targets, n_refs, n_entities, n;
  std::vector<uint32_t> offsets; // CSR over unified ids
  std::vector<uint32_t> adj;
};

uint32_t unify(const Skeleton& s, NodeRef r) {
  switch (r.kind) {
    case NodeKind::Target: return r.index;
    case NodeKind::Reference: return s.n_targets + r.index;
    case NodeKind::Entity: return s.n_targets + s.n_refs + r.index;
  }
  return 0;
}

NodeRef deunify(const Skeleton& s, uint32_t id) {
  if (id < s.n_targets) return {NodeKind::Target, id};
  if (id < s.n_targets + s.n_refs) return {NodeKind::Reference, id - s.n_targets};
  return {NodeKind::Entity, id - s.n_targets - s.n_refs};
}

Skeleton build_skeleton(const Partition& p) {
  Skeleton s;
  s.n_targets = static_cast<uint32_t>(p.target_rows.size());
  s.n_refs = static_cast<uint32_t>(p.ref_rows.size());
  s.n_entities = static_cast<uint32_t>(p.entities.size());
  s.n = s.n_targets + s.n_refs + s.n_entities;

  std::vector<std::pair<uint32_t, uint32_t>> und;
  und.reserve(2 * (p.batch_edges.size() + p.rt_edges.size()));
  auto add = [&](NodeRef a, NodeRef b) {
    uint32_t u = unify(s, a), v = unify(s, b);
    if (u >= s.n || v >= s.n) return;
    und.emplace_back(u, v);
    und.emplace_back(v, u);
  };
  for (const auto& e : p.batch_edges) add(e.a, e.b);
  for (const auto& e : p.rt_edges) add(e.a, e.b);
  std::sort(und.begin(), und.end());
  und.erase(std::unique(und.begin(), und.end()), und.end());

  s.offsets.assign(s.n + 1, 0);
  for (const auto& [u, v] : und) ++s.offsets[u + 1];
  for (uint32_t i = 0; i < s.n; ++i) s.offsets[i + 1] += s.offsets[i];
  s.adj.resize(und.size());
  std::vector<uint32_t> fill(s.n, 0);
  for (const auto& [u, v] : und) s.adj[s.offsets[u] + fill[u]++] = v;
  return s;
}

// Splits one oversized component into ceil(size/budget) groups. Seeds are
// spread evenly over the canonical node order and pinned; the remaining
// nodes adopt the plurality label of their neighbors (ties toward the
// smallest label) in ascending node order until stable.
std::vector<std::vector<uint32_t>> label_propagation_split(const Skeleton& s,
                                                           const std::vector<uint32_t>& comp,
                                                           uint32_t budget) {
  uint32_t k = static_cast<uint32_t>((comp.size() + budget - 1) / budget);
  std::vector<int32_t> label_of(s.n, -1);
  std::vector<bool> pinned(s.n, false);
  for (uint32_t j = 0; j < k; ++j) {
    uint32_t seed = comp[static_cast<size_t>(j) * comp.size() / k];
    label_of[seed] = static_cast<int32_t>(j);
    pinned[seed] = true;
  }

  std::vector<uint32_t> counts(k);
  for (int round = 0; round < 64; ++round) {
    bool changed = false;
    for (uint32_t u : comp) {
      if (pinned[u]) continue;
      std::fill(counts.begin(), counts.end(), 0u);
      bool any = false;
      for (uint32_t i = s.offsets[u]; i < s.offsets[u + 1]; ++i) {
        int32_t l = label_of[s.adj[i]];
        if (l >= 0) {
          ++counts[static_cast<size_t>(l)];
          any = true;
        }
      }
      if (!any) continue;
      uint32_t best = 0;
      for (uint32_t l = 1; l < k; ++l) {
        if (counts[l] > counts[best]) best = l;
      }
      if (label_of[u] != static_cast<int32_t>(best)) {
        label_of[u] = static_cast<int32_t>(best);
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<std::vector<uint32_t>> groups(k);
  for (uint32_t u : comp) {
    int32_t l = label_of[u];
    groups[l < 0 ? 0 : static_cast<size_t>(l)].push_back(u);
  }
  groups.erase(std::remove_if(groups.begin(), groups.end(),
                              [](const auto& g) { return g.empty(); }),
               groups.end());
  return groups;
}

} // namespace

std::vector<MiniBatchCommunity> make_minibatches(const Partition& partition,
                                                 uint32_t partition_index,
                                                 uint32_t node_budget) {
  if (node_budget == 0) throw InputError("node_budget must be >= 1");
  Skeleton s = build_skeleton(partition);

  // Connected components in ascending order of their smallest node id.
  std::vector<std::vector<uint32_t>> pieces;
  std::vector<bool> visited(s.n, false);
  std::vector<uint32_t> stack;
  for (uint32_t start = 0; start < s.n; ++start) {
    if (visited[start]) continue;
    std::vector<uint32_t> comp;
    stack.push_back(start);
    visited[start] = true;
    while (!stack.empty()) {
      uint32_t u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (uint32_t i = s.offsets[u]; i < s.offsets[u + 1]; ++i) {
        uint32_t v = s.adj[i];
        if (!visited[v]) {
          visited[v] = true;
          stack.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    if (comp.size() > node_budget) {
      for (auto& g : label_propagation_split(s, comp, node_budget)) {
        std::sort(g.begin(), g.end());
        pieces.push_back(std::move(g));
      }
    } else {
      pieces.push_back(std::move(comp));
    }
  }

  // First-fit decreasing by size; ties keep the piece with the smallest
  // member first.
  std::vector<uint32_t> order(pieces.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    if (pieces[a].size() != pieces[b].size()) return pieces[a].size() > pieces[b].size();
    return pieces[a][0] < pieces[b][0];
  });

  std::vector<std::vector<uint32_t>> bins;
  std::vector<size_t> bin_sizes;
  for (uint32_t pi : order) {
    const auto& piece = pieces[pi];
    bool placed = false;
    for (size_t b = 0; b < bins.size(); ++b) {
      if (bin_sizes[b] + piece.size() <= node_budget) {
        bins[b].insert(bins[b].end(), piece.begin(), piece.end());
        bin_sizes[b] += piece.size();
        placed = true;
        break;
      }
    }
    if (!placed) {
      bins.push_back(piece);
      bin_sizes.push_back(piece.size());
    }
  }

  std::vector<MiniBatchCommunity> out;
  out.reserve(bins.size());
  for (auto& bin : bins) {
    std::sort(bin.begin(), bin.end());
    MiniBatchCommunity c;
    c.partition_index = partition_index;
    c.node_budget = node_budget;
    c.members.reserve(bin.size());
    for (uint32_t id : bin) c.members.push_back(deunify(s, id));
    out.push_back(std::move(c));
  }
  return out;
}

} // namespace riskgraph::graph
