#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pronog/contrastive.hpp"
#include "pronog/encoder.hpp"
#include "pronog/error.hpp"
#include "pronog/graph.hpp"
#include "pronog/mlp.hpp"
#include "pronog/rng.hpp"

namespace pronog {

// Seed streams, so independent consumers never share draws.
namespace seed_stream {
inline constexpr std::uint64_t epoch_task = 1;
inline constexpr std::uint64_t eval_task = 2;
inline constexpr std::uint64_t theorem1 = 3;
inline constexpr std::uint64_t theorem2 = 4;
inline constexpr std::uint64_t fewshot_task = 5;
inline constexpr std::uint64_t run = 6;
}  // namespace seed_stream

// Per anchor: one uniformly sampled neighbor positive and a fixed number of
// uniformly sampled non-neighbor negatives. Satisfies the homophily-task
// definition by construction.
inline ContrastiveTask build_link_prediction_task(const Graph& g,
                                                  std::size_t negatives_per_anchor,
                                                  std::uint64_t seed) {
  if (negatives_per_anchor == 0)
    throw config_error("build_link_prediction_task: need >=1 negative per anchor");
  ContrastiveTask task;
  task.views.push_back(g);
  task.source_view = 0;
  Rng rng(seed);
  for (std::size_t u = 0; u < g.num_nodes; ++u) {
    const auto nb = g.neighbors(u);
    if (nb.empty())
      throw data_error("build_link_prediction_task: node " + std::to_string(u) +
                       " has no neighbors");
    std::vector<std::size_t> non_neighbors;
    for (std::size_t v = 0; v < g.num_nodes; ++v) {
      if (v != u && !g.has_edge(u, v)) non_neighbors.push_back(v);
    }
    if (non_neighbors.size() < negatives_per_anchor)
      throw data_error("build_link_prediction_task: node " + std::to_string(u) + " has only " +
                       std::to_string(non_neighbors.size()) + " non-neighbors, need " +
                       std::to_string(negatives_per_anchor));
    task.anchors.push_back(InstanceHandle::node_of(0, u));
    task.positives.push_back({InstanceHandle::node_of(0, nb[rng.bounded(nb.size())])});
    std::vector<InstanceHandle> negs;
    for (std::size_t j : rng.sample_without_replacement(non_neighbors.size(), negatives_per_anchor))
      negs.push_back(InstanceHandle::node_of(0, non_neighbors[j]));
    task.negatives.push_back(std::move(negs));
  }
  return task;
}

// Uniformly removes floor(ratio * |E|) undirected edges; features and labels
// are untouched.
inline Graph augment_edge_drop(const Graph& g, double ratio, std::uint64_t seed) {
  if (ratio < 0.0 || ratio >= 1.0)
    throw config_error("augment_edge_drop: ratio must lie in [0,1)");
  auto edges = g.undirected_edges();
  const std::size_t drop = static_cast<std::size_t>(ratio * static_cast<double>(edges.size()));
  Rng rng(seed);
  std::vector<bool> dropped(edges.size(), false);
  for (std::size_t j : rng.sample_without_replacement(edges.size(), drop)) dropped[j] = true;
  std::vector<std::pair<std::size_t, std::size_t>> kept;
  kept.reserve(edges.size() - drop);
  for (std::size_t j = 0; j < edges.size(); ++j) {
    if (!dropped[j]) kept.push_back(edges[j]);
  }
  return Graph::build(g.num_nodes, kept, g.features, g.labels, g.num_classes);
}

// Two edge-dropped views per instance; each anchor is the pooled handle of its
// first view, its positive the pooled second view, its negatives the pooled
// views of every other instance.
inline ContrastiveTask build_graphcl_task(const std::vector<Graph>& instances, double ratio,
                                          std::uint64_t seed) {
  if (instances.size() < 2)
    throw data_error("build_graphcl_task: need >=2 instances for negatives");
  ContrastiveTask task;
  const std::size_t n = instances.size();
  for (std::size_t i = 0; i < n; ++i) {
    task.views.push_back(augment_edge_drop(instances[i], ratio, derive_seed(seed, 0, 2 * i)));
    task.views.push_back(augment_edge_drop(instances[i], ratio, derive_seed(seed, 0, 2 * i + 1)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    task.anchors.push_back(InstanceHandle::pooled_view(2 * i));
    task.positives.push_back({InstanceHandle::pooled_view(2 * i + 1)});
    std::vector<InstanceHandle> negs;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      negs.push_back(InstanceHandle::pooled_view(2 * j));
      negs.push_back(InstanceHandle::pooled_view(2 * j + 1));
    }
    task.negatives.push_back(std::move(negs));
  }
  return task;
}

inline ContrastiveTask build_graphcl_task(const GraphCollection& col, double ratio,
                                          std::uint64_t seed) {
  return build_graphcl_task(col.graphs, ratio, seed);
}

// Single-graph form: the instances are the nodes' delta-hop ego-subgraphs.
inline ContrastiveTask build_graphcl_task(const Graph& g, double ratio, std::size_t delta,
                                          std::uint64_t seed) {
  return build_graphcl_task(ego_instances(g, delta), ratio, seed);
}

// Summary anchor against true vs feature-shuffled nodes. The corruption
// permutation is seeded and never the identity.
inline ContrastiveTask build_dgi_task(const Graph& g, std::uint64_t seed) {
  if (g.num_nodes < 2) throw data_error("build_dgi_task: need >=2 nodes");
  Rng rng(seed);
  std::vector<std::size_t> perm;
  bool identity = true;
  do {
    perm = rng.permutation(g.num_nodes);
    identity = true;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (perm[i] != i) {
        identity = false;
        break;
      }
    }
  } while (identity);

  Matrix corrupted(g.num_nodes, g.features.cols);
  for (std::size_t r = 0; r < g.num_nodes; ++r) {
    const auto src = g.features.row(perm[r]);
    std::copy(src.begin(), src.end(), corrupted.row(r).begin());
  }
  Graph corrupted_graph =
      Graph::build(g.num_nodes, g.undirected_edges(), std::move(corrupted), g.labels,
                   g.num_classes);

  ContrastiveTask task;
  task.views.push_back(g);
  task.views.push_back(std::move(corrupted_graph));
  task.source_view = 0;
  task.anchors.push_back(InstanceHandle::pooled_view(0));
  std::vector<InstanceHandle> pos, neg;
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    pos.push_back(InstanceHandle::node_of(0, v));
    neg.push_back(InstanceHandle::node_of(1, v));
  }
  task.positives.push_back(std::move(pos));
  task.negatives.push_back(std::move(neg));
  return task;
}

enum class PretrainTaskKind { link_prediction, graphcl, dgi };

inline std::string to_string(PretrainTaskKind k) {
  switch (k) {
    case PretrainTaskKind::link_prediction: return "link_prediction";
    case PretrainTaskKind::graphcl: return "graphcl";
    case PretrainTaskKind::dgi: return "dgi";
  }
  throw config_error("unknown pretrain task kind");
}

struct PretrainConfig {
  PretrainTaskKind task = PretrainTaskKind::graphcl;
  std::size_t epochs = 2000;
  std::size_t patience = 50;
  AdamConfig adam;
  double tau = 0.5;
  double edge_drop_ratio = 0.2;     // graphcl augmentation strength
  std::size_t negatives_per_anchor = 1;  // link prediction
  std::size_t ego_delta = 1;        // graphcl instance radius on a single graph
  std::uint64_t seed = 39;
};

struct PretrainResult {
  std::vector<double> trace;  // best held-out loss after each epoch, nonincreasing
  double best_loss = 0.0;
  std::size_t epochs_run = 0;
};

namespace detail {

inline double task_loss(const GcnEncoder& enc, const ContrastiveTask& task,
                        const SimilarityKernel& kernel, std::vector<Matrix>* grads) {
  std::vector<Matrix> embs;
  embs.reserve(task.views.size());
  for (const auto& view : task.views) embs.push_back(encode(enc, view));
  return standardized_contrastive_loss(embs, task, kernel, grads).loss;
}

// Minimizes the standardized contrastive loss over tasks drawn per epoch from
// make_task(epoch seed). A fixed held-out task (stream-separated seed) drives
// the trace and early stopping so the reported curve is deterministic even
// though the training tasks are re-sampled.
template <class TaskFactory>
PretrainResult pretrain_loop(GcnEncoder& enc, const PretrainConfig& cfg, TaskFactory make_task) {
  if (enc.frozen()) throw contract_violation("pretrain: encoder is frozen");
  if (cfg.epochs == 0) throw config_error("pretrain: epochs must be positive");
  const SimilarityKernel kernel = SimilarityKernel::exp_cos(cfg.tau);
  const ContrastiveTask eval_task = make_task(derive_seed(cfg.seed, seed_stream::eval_task));

  PretrainResult res;
  res.best_loss = task_loss(enc, eval_task, kernel, nullptr);
  std::size_t since_improvement = 0;
  const auto params = enc.params();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const ContrastiveTask task = make_task(derive_seed(cfg.seed, seed_stream::epoch_task, epoch));
    enc.zero_grad();
    std::vector<Matrix> emb_grads;
    const double train_loss = task_loss(enc, task, kernel, &emb_grads);
    if (!std::isfinite(train_loss))
      throw numeric_error("pretrain: non-finite loss at epoch " + std::to_string(epoch));
    for (std::size_t v = 0; v < task.views.size(); ++v)
      encode_backward(enc, task.views[v], emb_grads[v]);
    adam_step(params, cfg.adam, epoch);

    const double eval_loss = task_loss(enc, eval_task, kernel, nullptr);
    res.epochs_run = epoch;
    if (eval_loss < res.best_loss) {
      res.best_loss = eval_loss;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    res.trace.push_back(res.best_loss);
    if (since_improvement >= cfg.patience) break;
  }
  return res;
}

}  // namespace detail

inline PretrainResult pretrain(GcnEncoder& enc, const Graph& g, const PretrainConfig& cfg) {
  switch (cfg.task) {
    case PretrainTaskKind::link_prediction:
      return detail::pretrain_loop(enc, cfg, [&](std::uint64_t s) {
        return build_link_prediction_task(g, cfg.negatives_per_anchor, s);
      });
    case PretrainTaskKind::dgi:
      return detail::pretrain_loop(enc, cfg,
                                   [&](std::uint64_t s) { return build_dgi_task(g, s); });
    case PretrainTaskKind::graphcl: {
      const std::vector<Graph> instances = ego_instances(g, cfg.ego_delta);
      return detail::pretrain_loop(enc, cfg, [&](std::uint64_t s) {
        return build_graphcl_task(instances, cfg.edge_drop_ratio, s);
      });
    }
  }
  throw config_error("pretrain: unknown task kind");
}

inline PretrainResult pretrain(GcnEncoder& enc, const GraphCollection& col,
                               const PretrainConfig& cfg) {
  if (cfg.task != PretrainTaskKind::graphcl)
    throw config_error("pretrain: " + to_string(cfg.task) +
                       " operates on a single graph, not a collection");
  return detail::pretrain_loop(enc, cfg, [&](std::uint64_t s) {
    return build_graphcl_task(col, cfg.edge_drop_ratio, s);
  });
}

}  // namespace pronog
