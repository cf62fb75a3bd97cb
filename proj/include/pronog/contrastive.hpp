#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pronog/error.hpp"
#include "pronog/graph.hpp"
#include "pronog/matrix.hpp"

namespace pronog {

// Similarity kernel applied to cosine values. The raw kind exists for
// rank-based uses; the contrastive loss requires the strictly positive
// exponential kind.
struct SimilarityKernel {
  enum class Kind { raw_cosine, exp_cosine };
  Kind kind = Kind::exp_cosine;
  double tau = 0.5;

  static SimilarityKernel raw() { return {Kind::raw_cosine, 0.0}; }
  static SimilarityKernel exp_cos(double tau = 0.5) {
    if (tau <= 0.0) throw config_error("SimilarityKernel: temperature must be positive");
    return {Kind::exp_cosine, tau};
  }

  double value(double cos) const {
    return kind == Kind::raw_cosine ? cos : std::exp(cos / tau);
  }
  double grad(double cos) const {  // d value / d cos
    return kind == Kind::raw_cosine ? 1.0 : std::exp(cos / tau) / tau;
  }
};

// An instance a contrastive pair resolves to: one node's embedding row of a
// view, or the pooled (mean-row) embedding of a whole view.
struct InstanceHandle {
  std::size_t view = 0;
  std::size_t node = 0;  // meaningful only when !pooled
  bool pooled = false;

  static InstanceHandle node_of(std::size_t view, std::size_t node) { return {view, node, false}; }
  static InstanceHandle pooled_view(std::size_t view) { return {view, 0, true}; }

  bool operator==(const InstanceHandle&) const = default;
};

// A contrastive pre-training task: per anchor, a positive set A_u and a
// negative set B_u of instance handles over a list of graph views. When every
// instance is a node of one designated source graph, source_view names it.
struct ContrastiveTask {
  std::vector<Graph> views;
  std::optional<std::size_t> source_view;
  std::vector<InstanceHandle> anchors;
  std::vector<std::vector<InstanceHandle>> positives;  // one set per anchor
  std::vector<std::vector<InstanceHandle>> negatives;

  void validate() const {
    if (views.empty()) throw data_error("ContrastiveTask: no views");
    if (positives.size() != anchors.size() || negatives.size() != anchors.size())
      throw data_error("ContrastiveTask: per-anchor set count mismatch");
    auto check = [&](const InstanceHandle& h) {
      if (h.view >= views.size()) throw data_error("ContrastiveTask: handle view out of range");
      if (!h.pooled && h.node >= views[h.view].num_nodes)
        throw data_error("ContrastiveTask: handle node out of range");
    };
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      check(anchors[i]);
      if (positives[i].empty() || negatives[i].empty())
        throw data_error("ContrastiveTask: every anchor needs >=1 positive and >=1 negative");
      for (const auto& h : positives[i]) check(h);
      for (const auto& h : negatives[i]) check(h);
    }
  }
};

namespace detail {

inline std::vector<double> resolve_handle(const InstanceHandle& h,
                                          const std::vector<Matrix>& embs) {
  if (h.pooled) return mean_rows(embs[h.view]);
  const auto row = embs[h.view].row(h.node);
  return {row.begin(), row.end()};
}

// Pushes a gradient w.r.t. the resolved vector back onto the embedding rows.
inline void scatter_handle_grad(const InstanceHandle& h, const std::vector<double>& gvec,
                                std::vector<Matrix>& grads) {
  Matrix& gm = grads[h.view];
  if (h.pooled) {
    const double inv = 1.0 / static_cast<double>(gm.rows);
    for (std::size_t r = 0; r < gm.rows; ++r) {
      for (std::size_t c = 0; c < gm.cols; ++c) gm.at(r, c) += gvec[c] * inv;
    }
  } else {
    for (std::size_t c = 0; c < gm.cols; ++c) gm.at(h.node, c) += gvec[c];
  }
}

}  // namespace detail

struct ContrastiveLossResult {
  double loss = 0.0;
  std::vector<double> p;  // per-anchor P(u, A_u, B_u)
};

// L_T = -sum_u ln P(u,A_u,B_u), P = S_A/(S_A+S_B) with S the kernel-summed
// cosine similarities. Optionally accumulates dL/d(embeddings) into grads
// (same shapes as embs, pre-zeroed by the caller or empty to skip).
inline ContrastiveLossResult standardized_contrastive_loss(
    const std::vector<Matrix>& embs, const ContrastiveTask& task, const SimilarityKernel& kernel,
    std::vector<Matrix>* grads = nullptr) {
  if (kernel.kind != SimilarityKernel::Kind::exp_cosine)
    throw config_error("standardized_contrastive_loss: kernel must be strictly positive "
                       "(exp-cosine); raw cosine is unsupported");
  task.validate();
  if (embs.size() != task.views.size())
    throw data_error("standardized_contrastive_loss: one embedding matrix per view required");
  for (std::size_t v = 0; v < embs.size(); ++v) {
    if (embs[v].rows != task.views[v].num_nodes)
      throw data_error("standardized_contrastive_loss: embedding rows mismatch view nodes");
    require_finite(embs[v], "contrastive embeddings");
  }
  if (grads) {
    grads->clear();
    for (const auto& e : embs) grads->emplace_back(e.rows, e.cols);
  }

  ContrastiveLossResult res;
  for (std::size_t i = 0; i < task.anchors.size(); ++i) {
    const std::vector<double> va = detail::resolve_handle(task.anchors[i], embs);
    std::vector<double> cos_pos, cos_neg;
    double sa = 0.0, sb = 0.0;
    for (const auto& h : task.positives[i]) {
      const double c = cosine_similarity(va, detail::resolve_handle(h, embs));
      cos_pos.push_back(c);
      sa += kernel.value(c);
    }
    for (const auto& h : task.negatives[i]) {
      const double c = cosine_similarity(va, detail::resolve_handle(h, embs));
      cos_neg.push_back(c);
      sb += kernel.value(c);
    }
    const double p = sa / (sa + sb);
    res.p.push_back(p);
    res.loss -= std::log(p);

    if (grads) {
      const double d_sa = 1.0 / (sa + sb) - 1.0 / sa;
      const double d_sb = 1.0 / (sa + sb);
      std::vector<double> dva(va.size(), 0.0);
      auto backprop_pair = [&](const InstanceHandle& h, double cos, double d_s) {
        const std::vector<double> vi = detail::resolve_handle(h, embs);
        std::vector<double> dvi(vi.size(), 0.0);
        cosine_similarity_backward(va, vi, d_s * kernel.grad(cos), dva, dvi);
        detail::scatter_handle_grad(h, dvi, *grads);
      };
      for (std::size_t j = 0; j < task.positives[i].size(); ++j)
        backprop_pair(task.positives[i][j], cos_pos[j], d_sa);
      for (std::size_t j = 0; j < task.negatives[i].size(); ++j)
        backprop_pair(task.negatives[i][j], cos_neg[j], d_sb);
      detail::scatter_handle_grad(task.anchors[i], dva, *grads);
    }
  }
  if (!std::isfinite(res.loss))
    throw numeric_error("standardized_contrastive_loss: non-finite loss");
  return res;
}

enum class SampleClass { homophily, non_homophily };

// A triplet (u, a, b) with (u,a) an edge and (u,b) a non-edge is a homophily
// sample iff the anchor is strictly more similar to the linked node.
inline SampleClass classify_sample(const Graph& g, std::size_t u, std::size_t a, std::size_t b,
                                   const Matrix& emb) {
  if (u >= g.num_nodes || a >= g.num_nodes || b >= g.num_nodes)
    throw data_error("classify_sample: invalid triplet, node out of range");
  if (!g.has_edge(u, a))
    throw data_error("classify_sample: invalid triplet, (u,a) must be an edge");
  if (b == u || g.has_edge(u, b))
    throw data_error("classify_sample: invalid triplet, (u,b) must be a non-edge");
  if (emb.rows != g.num_nodes) throw data_error("classify_sample: embedding rows mismatch");
  const double ca = cosine_similarity(emb.row(u), emb.row(a));
  const double cb = cosine_similarity(emb.row(u), emb.row(b));
  return ca > cb ? SampleClass::homophily : SampleClass::non_homophily;
}

// True iff every anchor is a node of g, every positive is one of its
// neighbors, and every negative a non-neighbor. Any pooled or off-source
// handle makes the task non-homophilic by definition.
inline bool is_homophily_task(const ContrastiveTask& task, const Graph& g) {
  task.validate();
  if (!task.source_view) return false;
  const std::size_t sv = *task.source_view;
  if (sv >= task.views.size() || task.views[sv].num_nodes != g.num_nodes) return false;
  auto node_of_source = [&](const InstanceHandle& h) {
    return !h.pooled && h.view == sv && h.node < g.num_nodes;
  };
  for (std::size_t i = 0; i < task.anchors.size(); ++i) {
    if (!node_of_source(task.anchors[i])) return false;
    const std::size_t u = task.anchors[i].node;
    for (const auto& h : task.positives[i]) {
      if (!node_of_source(h) || !g.has_edge(u, h.node)) return false;
    }
    for (const auto& h : task.negatives[i]) {
      if (!node_of_source(h) || g.has_edge(u, h.node)) return false;
    }
  }
  return true;
}

// E_T = sum_u |A_u||B_u| * p_pos * (1 - p_neg): the expected number of
// homophily samples when positives share the anchor's label with probability
// p_pos and negatives with probability p_neg.
inline double expected_homophily_samples(const ContrastiveTask& task, double p_pos,
                                         double p_neg) {
  if (p_pos < 0.0 || p_pos > 1.0 || p_neg < 0.0 || p_neg > 1.0)
    throw data_error("expected_homophily_samples: probabilities must lie in [0,1]");
  double total = 0.0;
  for (std::size_t i = 0; i < task.anchors.size(); ++i) {
    total += static_cast<double>(task.positives[i].size()) *
             static_cast<double>(task.negatives[i].size());
  }
  return total * p_pos * (1.0 - p_neg);
}

}  // namespace pronog
