#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pronog/error.hpp"
#include "pronog/matrix.hpp"
#include "pronog/rng.hpp"

namespace pronog {

// Undirected graph in CSR form. Both directions of every edge are stored,
// neighbor lists are sorted, and self-loops are never stored (encoder
// normalization adds them transiently). Immutable after construction.
struct Graph {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> row_offsets;  // num_nodes + 1
  std::vector<std::size_t> col_indices;  // sorted within each row
  Matrix features;                       // num_nodes x d
  std::vector<int> labels;               // empty when unlabeled
  int num_classes = 0;                   // 0 when no class set declared

  // Builds from an arbitrary edge list: symmetrizes, deduplicates, drops
  // self-loops, validates indices and label range.
  static Graph build(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                     Matrix features, std::vector<int> labels = {}, int num_classes = 0) {
    if (features.rows != n) throw data_error("Graph: features must have one row per node");
    if (!features.all_finite()) throw data_error("Graph: non-finite feature entries");
    if (!labels.empty()) {
      if (labels.size() != n) throw data_error("Graph: labels must have one entry per node");
      for (int y : labels) {
        if (y < 0 || (num_classes > 0 && y >= num_classes))
          throw data_error("Graph: label index out of declared class range");
      }
    }
    std::set<std::pair<std::size_t, std::size_t>> dedup;
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) throw data_error("Graph: node index out of range");
      if (u == v) continue;
      dedup.emplace(u, v);
      dedup.emplace(v, u);
    }
    Graph g;
    g.num_nodes = n;
    g.features = std::move(features);
    g.labels = std::move(labels);
    g.num_classes = num_classes;
    g.row_offsets.assign(n + 1, 0);
    for (const auto& [u, v] : dedup) g.row_offsets[u + 1]++;
    for (std::size_t i = 0; i < n; ++i) g.row_offsets[i + 1] += g.row_offsets[i];
    g.col_indices.reserve(dedup.size());
    for (const auto& [u, v] : dedup) g.col_indices.push_back(v);  // set order => sorted rows
    return g;
  }

  std::span<const std::size_t> neighbors(std::size_t v) const {
    return {col_indices.data() + row_offsets[v], row_offsets[v + 1] - row_offsets[v]};
  }

  std::size_t degree(std::size_t v) const { return row_offsets[v + 1] - row_offsets[v]; }

  bool has_edge(std::size_t u, std::size_t v) const {
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  bool has_labels() const { return !labels.empty(); }

  std::size_t num_undirected_edges() const { return col_indices.size() / 2; }

  // Each undirected edge once, u < v, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> undirected_edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(num_undirected_edges());
    for (std::size_t u = 0; u < num_nodes; ++u) {
      for (std::size_t v : neighbors(u)) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }
};

struct GraphCollection {
  std::vector<Graph> graphs;
  std::vector<int> graph_labels;  // empty when unlabeled; else one per graph
  int num_classes = 0;
};

// ---------------------------------------------------------------------------
// Homophily analysis

struct EdgeHomophilyCounts {
  std::size_t homophilic = 0;
  std::size_t total = 0;  // undirected edges, each counted once
};

inline EdgeHomophilyCounts graph_homophily_counts(const Graph& g, std::span<const int> labels) {
  if (labels.size() != g.num_nodes) throw data_error("homophily: labels/node count mismatch");
  EdgeHomophilyCounts c;
  for (std::size_t u = 0; u < g.num_nodes; ++u) {
    for (std::size_t v : g.neighbors(u)) {
      if (u < v) {
        ++c.total;
        if (labels[u] == labels[v]) ++c.homophilic;
      }
    }
  }
  return c;
}

inline double graph_homophily_ratio(const Graph& g, std::span<const int> labels) {
  const auto c = graph_homophily_counts(g, labels);
  if (c.total == 0) throw data_error("graph_homophily_ratio: undefined ratio (no edges)");
  return static_cast<double>(c.homophilic) / static_cast<double>(c.total);
}

inline double graph_homophily_ratio(const Graph& g) {
  if (!g.has_labels()) throw data_error("graph_homophily_ratio: graph has no labels");
  return graph_homophily_ratio(g, g.labels);
}

struct NeighborHomophilyCounts {
  std::size_t same = 0;
  std::size_t degree = 0;
};

inline NeighborHomophilyCounts node_homophily_counts(const Graph& g, std::span<const int> labels,
                                                     std::size_t v) {
  if (labels.size() != g.num_nodes) throw data_error("homophily: labels/node count mismatch");
  NeighborHomophilyCounts c;
  for (std::size_t u : g.neighbors(v)) {
    ++c.degree;
    if (labels[u] == labels[v]) ++c.same;
  }
  return c;
}

inline double node_homophily_ratio(const Graph& g, std::span<const int> labels, std::size_t v) {
  const auto c = node_homophily_counts(g, labels, v);
  if (c.degree == 0)
    throw data_error("node_homophily_ratio: undefined ratio (isolated node " +
                     std::to_string(v) + ")");
  return static_cast<double>(c.same) / static_cast<double>(c.degree);
}

// Bucket index for the node homophily ratio: [0,0.2) [0.2,0.4) [0.4,0.6)
// [0.6,0.8) [0.8,1.0]. Isolated nodes get kIsolatedBucket. Bucketing is done
// on the integer counts so boundary ratios land exactly.
inline constexpr int kIsolatedBucket = -1;

inline std::vector<int> homophily_buckets(const Graph& g, std::span<const int> labels) {
  std::vector<int> out(g.num_nodes, kIsolatedBucket);
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    const auto c = node_homophily_counts(g, labels, v);
    if (c.degree == 0) continue;
    out[v] = static_cast<int>(std::min<std::size_t>(4, 5 * c.same / c.degree));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ego networks

struct EgoNetwork {
  std::size_t center = 0;
  std::vector<std::size_t> members;  // ascending original ids, includes center

  bool contains(std::size_t v) const {
    return std::binary_search(members.begin(), members.end(), v);
  }

  // Bijection members -> [0, |members|).
  std::size_t local_index(std::size_t v) const {
    const auto it = std::lower_bound(members.begin(), members.end(), v);
    if (it == members.end() || *it != v) throw data_error("EgoNetwork: node is not a member");
    return static_cast<std::size_t>(it - members.begin());
  }
};

// Nodes reachable from v within delta hops, by BFS.
inline EgoNetwork ego_network(const Graph& g, std::size_t v, std::size_t delta) {
  if (v >= g.num_nodes) throw data_error("ego_network: node index out of range");
  std::vector<std::size_t> dist(g.num_nodes, SIZE_MAX);
  std::vector<std::size_t> frontier{v};
  dist[v] = 0;
  EgoNetwork ego;
  ego.center = v;
  ego.members.push_back(v);
  for (std::size_t hop = 0; hop < delta && !frontier.empty(); ++hop) {
    std::vector<std::size_t> next;
    for (std::size_t u : frontier) {
      for (std::size_t w : g.neighbors(u)) {
        if (dist[w] == SIZE_MAX) {
          dist[w] = hop + 1;
          next.push_back(w);
          ego.members.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(ego.members.begin(), ego.members.end());
  return ego;
}

// Induced subgraph on a sorted member list; features and labels restricted.
inline Graph induced_subgraph(const Graph& g, const std::vector<std::size_t>& members) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  Matrix feats(members.size(), g.features.cols);
  std::vector<int> labels;
  if (g.has_labels()) labels.resize(members.size());
  for (std::size_t li = 0; li < members.size(); ++li) {
    const std::size_t u = members[li];
    const auto row = g.features.row(u);
    std::copy(row.begin(), row.end(), feats.row(li).begin());
    if (g.has_labels()) labels[li] = g.labels[u];
    for (std::size_t v : g.neighbors(u)) {
      const auto it = std::lower_bound(members.begin(), members.end(), v);
      if (it != members.end() && *it == v) {
        edges.emplace_back(li, static_cast<std::size_t>(it - members.begin()));
      }
    }
  }
  return Graph::build(members.size(), edges, std::move(feats), std::move(labels), g.num_classes);
}

// One induced ego-network per node, in node order.
inline std::vector<Graph> ego_instances(const Graph& g, std::size_t delta) {
  std::vector<Graph> out;
  out.reserve(g.num_nodes);
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    out.push_back(induced_subgraph(g, ego_network(g, v, delta).members));
  }
  return out;
}

// One induced ego-network per labeled node; graph label = center's label.
inline GraphCollection build_ego_dataset(const Graph& g, std::size_t delta) {
  if (!g.has_labels()) throw data_error("build_ego_dataset: graph has no labels");
  GraphCollection col;
  col.num_classes = g.num_classes;
  col.graphs = ego_instances(g, delta);
  col.graph_labels = g.labels;
  return col;
}

// ---------------------------------------------------------------------------
// Synthetic graphs with a planted homophily ratio

// Labels round-robin; edge counts split exactly into intra/inter-class so the
// realized ratio lands within rounding of the target. The wiring is structured
// rather than uniform: cross-class edges only join adjacent labels
// (|y_u - y_v| == 1), and nodes alternate in blocks of c between a pool
// favoured for intra edges and a pool favoured for inter edges, so node-level
// homophily spreads across buckets instead of concentrating at the graph mean.
// Features are the one-hot label plus uniform noise in [-0.01, 0.01], which
// makes label agreement and cosine ordering consistent by construction.
inline Graph planted_homophily_graph(std::size_t n, int c, double target_h, double avg_degree,
                                     std::uint64_t seed) {
  if (c < 1) throw data_error("planted_homophily_graph: need at least one class");
  if (n < 2 * static_cast<std::size_t>(c))
    throw data_error("planted_homophily_graph: need n >= 2c");
  if (target_h < 0.0 || target_h > 1.0)
    throw data_error("planted_homophily_graph: target ratio outside [0,1]");
  if (avg_degree <= 0.0) throw data_error("planted_homophily_graph: degree must be positive");

  std::vector<int> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<int>(v % c);

  const std::size_t m = static_cast<std::size_t>(std::llround(avg_degree * n / 2.0));
  const std::size_t m_intra = static_cast<std::size_t>(std::llround(target_h * m));
  const std::size_t m_inter = m - m_intra;

  Rng rng(seed);
  std::set<std::pair<std::size_t, std::size_t>> chosen;  // u < v
  auto try_insert = [&](std::size_t u, std::size_t v) {
    if (u == v) return false;
    if (u > v) std::swap(u, v);
    return chosen.emplace(u, v).second;
  };
  const std::size_t max_attempts = 200 * (m + 1);

  std::vector<std::vector<std::size_t>> by_class(c);
  for (std::size_t v = 0; v < n; ++v) by_class[labels[v]].push_back(v);

  // Alternating blocks of c nodes: the "hom" pool soaks up intra edges, the
  // other pool the inter edges (soft bias via rejection, so any node can still
  // receive either kind).
  auto hom_pool = [&](std::size_t v) { return (v / static_cast<std::size_t>(c)) % 2 == 0; };

  std::size_t placed = 0, attempts = 0;
  while (placed < m_intra) {
    if (++attempts > max_attempts)
      throw data_error("planted_homophily_graph: infeasible target, retries exhausted");
    const auto& cls = by_class[rng.bounded(c)];
    if (cls.size() < 2) continue;
    const std::size_t u = rng.pick(cls);
    const std::size_t v = rng.pick(cls);
    if (!hom_pool(u) && rng.bounded(4) < 3) continue;
    if (!hom_pool(v) && rng.bounded(4) < 3) continue;
    if (try_insert(u, v)) ++placed;
  }
  placed = 0;
  while (placed < m_inter) {
    if (++attempts > max_attempts)
      throw data_error("planted_homophily_graph: infeasible target, retries exhausted");
    const std::size_t u = rng.bounded(n);
    const std::size_t v = rng.bounded(n);
    if (labels[u] == labels[v]) continue;
    if (std::abs(labels[u] - labels[v]) != 1) continue;
    if (hom_pool(u) && rng.bounded(5) < 2) continue;
    if (hom_pool(v) && rng.bounded(5) < 2) continue;
    if (try_insert(u, v)) ++placed;
  }

  // Reconnect isolated nodes by swapping in an edge of the same kind, which
  // keeps the intra/inter counts and hence the realized ratio.
  std::vector<std::size_t> deg(n, 0);
  for (const auto& [u, v] : chosen) {
    ++deg[u];
    ++deg[v];
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (deg[v] > 0) continue;
    const bool intra_possible = by_class[labels[v]].size() >= 2 && m_intra > 0;
    const bool inter_possible = c > 1 && m_inter > 0;
    for (std::size_t attempt = 0; attempt < 500 && deg[v] == 0; ++attempt) {
      bool want_intra;
      if (intra_possible && inter_possible) {
        want_intra = rng.bounded(m) < m_intra;
      } else if (intra_possible) {
        want_intra = true;
      } else if (inter_possible) {
        want_intra = false;
      } else {
        break;
      }
      std::size_t partner;
      if (want_intra) {
        partner = rng.pick(by_class[labels[v]]);
        if (partner == v) continue;
      } else {
        partner = rng.bounded(n);
        if (labels[partner] == labels[v]) continue;
        if (std::abs(labels[partner] - labels[v]) != 1) continue;
      }
      std::size_t pu = v, pv = partner;
      if (pu > pv) std::swap(pu, pv);
      if (chosen.count({pu, pv})) continue;
      // find a removable edge of the same kind whose endpoints keep degree >= 2
      std::vector<std::pair<std::size_t, std::size_t>> removable;
      for (const auto& e : chosen) {
        const bool e_intra = labels[e.first] == labels[e.second];
        if (e_intra == want_intra && deg[e.first] >= 2 && deg[e.second] >= 2) removable.push_back(e);
      }
      if (removable.empty()) continue;
      const auto victim = removable[rng.bounded(removable.size())];
      chosen.erase(victim);
      --deg[victim.first];
      --deg[victim.second];
      chosen.insert({pu, pv});
      ++deg[pu];
      ++deg[pv];
    }
  }

  Matrix feats(n, c);
  for (std::size_t v = 0; v < n; ++v) {
    for (int j = 0; j < c; ++j) {
      feats.at(v, j) = (j == labels[v] ? 1.0 : 0.0) + rng.uniform(-0.01, 0.01);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges(chosen.begin(), chosen.end());
  Graph g = Graph::build(n, edges, std::move(feats), std::move(labels), c);

  const double realized = graph_homophily_ratio(g);
  if (std::abs(realized - target_h) > 0.05)
    throw data_error("planted_homophily_graph: realized ratio misses target");
  return g;
}

}  // namespace pronog
