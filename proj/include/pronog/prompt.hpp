#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pronog/checkpoint.hpp"
#include "pronog/encoder.hpp"
#include "pronog/error.hpp"
#include "pronog/fewshot.hpp"
#include "pronog/graph.hpp"
#include "pronog/matrix.hpp"
#include "pronog/mlp.hpp"

namespace pronog {

// Bottleneck hypernetwork mapping a node's neighborhood readout to its
// prompt vector. Output passes through a sigmoid so prompts act as soft
// gates on the frozen embedding.
struct ConditionNet {
  Mlp mlp;  // d -> m -> d, sigmoid hidden

  ConditionNet() = default;
  ConditionNet(std::size_t d, std::size_t m, std::uint64_t seed)
      : mlp(d, m, d, Activation::sigmoid, seed) {
    if (d == 0 || m == 0) throw config_error("ConditionNet: dims must be positive");
    if (!(m < d || m <= 64))
      throw config_error("ConditionNet: hidden dim " + std::to_string(m) +
                         " is no bottleneck for embedding dim " + std::to_string(d));
  }

  std::size_t dim() const { return mlp.d_in(); }
  std::size_t hidden() const { return mlp.hidden(); }
  std::vector<Param*> params() { return mlp.params(); }
};

// Similarity-weighted neighborhood readout:
// s_v = (1/|V(S_v)|) sum_u h_u * cos(h_u, h_v), the center contributing with
// weight 1.
inline std::vector<double> subgraph_readout(const Matrix& emb, const EgoNetwork& ego,
                                            std::size_t v) {
  if (ego.center != v) throw data_error("subgraph_readout: ego network is not centered on v");
  if (v >= emb.rows) throw data_error("subgraph_readout: node beyond embedding rows");
  const auto hv = emb.row(v);
  std::vector<double> s(emb.cols, 0.0);
  for (std::size_t u : ego.members) {
    if (u >= emb.rows) throw data_error("subgraph_readout: member beyond embedding rows");
    const auto hu = emb.row(u);
    const double w = cosine_similarity(hu, hv);
    for (std::size_t c = 0; c < emb.cols; ++c) s[c] += w * hu[c];
  }
  const double inv = 1.0 / static_cast<double>(ego.members.size());
  for (double& x : s) x *= inv;
  return s;
}

// Unweighted variant of the readout (ablation).
inline std::vector<double> unweighted_readout(const Matrix& emb, const EgoNetwork& ego) {
  std::vector<double> s(emb.cols, 0.0);
  for (std::size_t u : ego.members) {
    const auto hu = emb.row(u);
    for (std::size_t c = 0; c < emb.cols; ++c) s[c] += hu[c];
  }
  const double inv = 1.0 / static_cast<double>(ego.members.size());
  for (double& x : s) x *= inv;
  return s;
}

// p = sigmoid(mlp(s)), batched over rows.
inline Matrix generate_prompts(const ConditionNet& cn, const Matrix& s) {
  return apply_activation(Activation::sigmoid, mlp_forward(cn.mlp, s));
}

inline std::vector<double> generate_prompt(const ConditionNet& cn, const std::vector<double>& s) {
  Matrix row(1, s.size());
  std::copy(s.begin(), s.end(), row.data.begin());
  const Matrix p = generate_prompts(cn, row);
  return {p.data.begin(), p.data.end()};
}

inline std::vector<double> apply_prompt(const std::vector<double>& p,
                                        const std::vector<double>& h) {
  if (p.size() != h.size()) throw data_error("apply_prompt: dimension mismatch");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * h[i];
  return out;
}

inline std::vector<double> graph_embedding(const Matrix& prompted) {
  if (prompted.rows == 0) throw data_error("graph_embedding: empty graph");
  return mean_rows(prompted);
}

struct Prototypes {
  std::vector<int> classes;  // ascending
  Matrix values;             // classes.size() x d
};

inline Prototypes class_prototypes(const std::vector<std::pair<std::vector<double>, int>>& support,
                                   const std::vector<int>& classes) {
  if (support.empty()) throw data_error("class_prototypes: empty support set");
  const std::size_t d = support.front().first.size();
  Prototypes protos;
  protos.classes = classes;
  std::sort(protos.classes.begin(), protos.classes.end());
  protos.values = Matrix(protos.classes.size(), d);
  std::vector<std::size_t> counts(protos.classes.size(), 0);
  for (const auto& [vec, cls] : support) {
    if (vec.size() != d) throw data_error("class_prototypes: inconsistent dimensions");
    const auto it = std::lower_bound(protos.classes.begin(), protos.classes.end(), cls);
    if (it == protos.classes.end() || *it != cls)
      throw data_error("class_prototypes: support class " + std::to_string(cls) +
                       " not in class set");
    const std::size_t ci = static_cast<std::size_t>(it - protos.classes.begin());
    for (std::size_t j = 0; j < d; ++j) protos.values.at(ci, j) += vec[j];
    ++counts[ci];
  }
  for (std::size_t ci = 0; ci < protos.classes.size(); ++ci) {
    if (counts[ci] == 0)
      throw data_error("class_prototypes: class " + std::to_string(protos.classes[ci]) +
                       " has no support");
    for (std::size_t j = 0; j < d; ++j)
      protos.values.at(ci, j) /= static_cast<double>(counts[ci]);
  }
  return protos;
}

namespace detail {
inline std::size_t class_index(const Prototypes& protos, int cls) {
  const auto it = std::lower_bound(protos.classes.begin(), protos.classes.end(), cls);
  if (it == protos.classes.end() || *it != cls)
    throw data_error("class " + std::to_string(cls) + " not among prototypes");
  return static_cast<std::size_t>(it - protos.classes.begin());
}
}  // namespace detail

// L = -sum_i ln softmax_c(cos(e_i, proto_c)/tau) at the true class.
inline double downstream_loss(const std::vector<std::pair<std::vector<double>, int>>& query,
                              const Prototypes& protos, double tau) {
  if (tau <= 0.0) throw config_error("downstream_loss: temperature must be positive");
  double loss = 0.0;
  for (const auto& [vec, cls] : query) {
    const std::size_t yi = detail::class_index(protos, cls);
    double max_cos = -2.0;
    std::vector<double> coss(protos.classes.size());
    for (std::size_t c = 0; c < protos.classes.size(); ++c) {
      coss[c] = cosine_similarity(vec, protos.values.row(c));
      max_cos = std::max(max_cos, coss[c]);
    }
    double z = 0.0;
    for (double c : coss) z += std::exp((c - max_cos) / tau);
    loss += -(coss[yi] - max_cos) / tau + std::log(z);
  }
  if (!std::isfinite(loss)) throw numeric_error("downstream_loss: non-finite loss");
  return loss;
}

// Highest-cosine prototype; ties resolve to the smallest class index.
inline int predict(const std::vector<double>& emb, const Prototypes& protos) {
  if (protos.classes.empty()) throw data_error("predict: no prototypes");
  int best_class = protos.classes[0];
  double best_cos = cosine_similarity(emb, protos.values.row(0));
  for (std::size_t c = 1; c < protos.classes.size(); ++c) {
    const double cos = cosine_similarity(emb, protos.values.row(c));
    if (cos > best_cos) {
      best_cos = cos;
      best_class = protos.classes[c];
    }
  }
  return best_class;
}

// ---------------------------------------------------------------------------
// Ablation variants and the tuning loop

enum class PromptVariant { pronog, no_prompt, single_prompt, node_cond, no_sim };

inline PromptVariant parse_variant(const std::string& s) {
  if (s == "pronog") return PromptVariant::pronog;
  if (s == "no_prompt") return PromptVariant::no_prompt;
  if (s == "single_prompt") return PromptVariant::single_prompt;
  if (s == "node_cond") return PromptVariant::node_cond;
  if (s == "no_sim") return PromptVariant::no_sim;
  throw config_error("unknown variant '" + s + "'");
}

inline std::string to_string(PromptVariant v) {
  switch (v) {
    case PromptVariant::pronog: return "pronog";
    case PromptVariant::no_prompt: return "no_prompt";
    case PromptVariant::single_prompt: return "single_prompt";
    case PromptVariant::node_cond: return "node_cond";
    case PromptVariant::no_sim: return "no_sim";
  }
  throw config_error("unknown variant tag");
}

inline bool uses_condition_net(PromptVariant v) {
  return v == PromptVariant::pronog || v == PromptVariant::node_cond ||
         v == PromptVariant::no_sim;
}

// Frozen per-instance tuning inputs: embedding rows and, for condition-net
// variants, the matching condition inputs. Node instances have one row;
// graph instances one row per member node.
struct InstanceInputs {
  Matrix h;
  Matrix s;  // empty for variants without a condition-net
  int label = 0;
};

struct PromptModel {
  PromptVariant variant = PromptVariant::pronog;
  ConditionNet cn;  // condition-net variants
  Param single;     // single_prompt: learnable 1 x d vector, all-ones init

  PromptModel() = default;
  PromptModel(PromptVariant v, std::size_t d, std::size_t m, std::uint64_t seed) : variant(v) {
    if (uses_condition_net(v)) {
      cn = ConditionNet(d, m, seed);
    } else if (v == PromptVariant::single_prompt) {
      single = Param(Matrix(1, d, 1.0));
    }
  }

  std::vector<Param*> tunable() {
    if (uses_condition_net(variant)) return cn.params();
    if (variant == PromptVariant::single_prompt) return {&single};
    return {};
  }

  Matrix prompts(const InstanceInputs& in) const {
    switch (variant) {
      case PromptVariant::no_prompt: return Matrix(in.h.rows, in.h.cols, 1.0);
      case PromptVariant::single_prompt: {
        Matrix p(in.h.rows, in.h.cols);
        for (std::size_t r = 0; r < p.rows; ++r) {
          for (std::size_t c = 0; c < p.cols; ++c) p.at(r, c) = single.value.at(0, c);
        }
        return p;
      }
      default: return generate_prompts(cn, in.s);
    }
  }

  // Pushes dL/d(prompt matrix) into the tunable parameters.
  void prompts_backward(const InstanceInputs& in, const Matrix& dp) {
    switch (variant) {
      case PromptVariant::no_prompt: return;
      case PromptVariant::single_prompt:
        for (std::size_t r = 0; r < dp.rows; ++r) {
          for (std::size_t c = 0; c < dp.cols; ++c) single.grad.at(0, c) += dp.at(r, c);
        }
        return;
      default: {
        const Matrix out = mlp_forward(cn.mlp, in.s);
        Matrix dout(out.rows, out.cols);
        for (std::size_t i = 0; i < out.data.size(); ++i) {
          const double p = activate(Activation::sigmoid, out.data[i]);
          dout.data[i] = dp.data[i] * p * (1.0 - p);
        }
        mlp_backward(cn.mlp, in.s, dout);
        return;
      }
    }
  }
};

inline std::vector<double> instance_embedding(const PromptModel& model,
                                              const InstanceInputs& in) {
  return graph_embedding(hadamard(model.prompts(in), in.h));
}

// ---------------------------------------------------------------------------
// Input builders (Algorithm: encode once, then tune only the prompt side)

inline std::vector<InstanceInputs> build_node_instance_inputs(
    const Graph& g, const Matrix& emb, const std::vector<std::pair<std::size_t, int>>& instances,
    std::size_t delta, PromptVariant variant) {
  std::vector<InstanceInputs> out;
  out.reserve(instances.size());
  for (const auto& [v, y] : instances) {
    if (v >= g.num_nodes) throw data_error("instance node out of range");
    InstanceInputs in;
    in.label = y;
    in.h = Matrix(1, emb.cols);
    const auto row = emb.row(v);
    std::copy(row.begin(), row.end(), in.h.data.begin());
    if (uses_condition_net(variant)) {
      std::vector<double> s;
      if (variant == PromptVariant::node_cond) {
        s.assign(row.begin(), row.end());
      } else {
        const EgoNetwork ego = ego_network(g, v, delta);
        s = variant == PromptVariant::no_sim ? unweighted_readout(emb, ego)
                                             : subgraph_readout(emb, ego, v);
      }
      in.s = Matrix(1, emb.cols);
      std::copy(s.begin(), s.end(), in.s.data.begin());
    }
    out.push_back(std::move(in));
  }
  return out;
}

inline std::vector<InstanceInputs> build_graph_instance_inputs(
    const GraphCollection& col, const std::vector<Matrix>& embs,
    const std::vector<std::pair<std::size_t, int>>& instances, std::size_t delta,
    PromptVariant variant) {
  if (embs.size() != col.graphs.size())
    throw data_error("build_graph_instance_inputs: one embedding matrix per graph required");
  std::vector<InstanceInputs> out;
  out.reserve(instances.size());
  for (const auto& [gi, y] : instances) {
    if (gi >= col.graphs.size()) throw data_error("instance graph out of range");
    const Graph& g = col.graphs[gi];
    const Matrix& emb = embs[gi];
    InstanceInputs in;
    in.label = y;
    in.h = emb;
    if (uses_condition_net(variant)) {
      in.s = Matrix(g.num_nodes, emb.cols);
      for (std::size_t u = 0; u < g.num_nodes; ++u) {
        std::vector<double> s;
        if (variant == PromptVariant::node_cond) {
          const auto row = emb.row(u);
          s.assign(row.begin(), row.end());
        } else {
          const EgoNetwork ego = ego_network(g, u, delta);
          s = variant == PromptVariant::no_sim ? unweighted_readout(emb, ego)
                                               : subgraph_readout(emb, ego, u);
        }
        std::copy(s.begin(), s.end(), in.s.row(u).begin());
      }
    }
    out.push_back(std::move(in));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tuning

struct TuneConfig {
  std::size_t delta = 2;
  double tau = 0.5;
  std::size_t epochs = 2000;
  std::size_t patience = 50;
  AdamConfig adam;
  std::uint64_t seed = 39;  // prompt-model initialization seed
};

struct TuneResult {
  std::vector<double> trace;  // support loss per epoch, before that epoch's update
  double best_loss = 0.0;
  std::size_t epochs_run = 0;
};

namespace detail {

// Support loss of Eq.-9 form where prototypes are themselves means of the
// support embeddings; d_emb receives the total gradient including the
// prototype path.
inline double support_loss_and_grads(const std::vector<std::vector<double>>& emb,
                                     const std::vector<int>& labels,
                                     const std::vector<int>& classes, double tau,
                                     std::vector<std::vector<double>>* d_emb) {
  std::vector<std::pair<std::vector<double>, int>> pairs;
  pairs.reserve(emb.size());
  for (std::size_t i = 0; i < emb.size(); ++i) pairs.emplace_back(emb[i], labels[i]);
  const Prototypes protos = class_prototypes(pairs, classes);

  const std::size_t num_classes = protos.classes.size();
  std::vector<std::size_t> class_count(num_classes, 0);
  std::vector<std::size_t> label_index(emb.size());
  for (std::size_t i = 0; i < emb.size(); ++i) {
    label_index[i] = class_index(protos, labels[i]);
    ++class_count[label_index[i]];
  }

  Matrix d_protos(num_classes, protos.values.cols);
  double loss = 0.0;
  for (std::size_t i = 0; i < emb.size(); ++i) {
    std::vector<double> coss(num_classes);
    double max_cos = -2.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      coss[c] = cosine_similarity(emb[i], protos.values.row(c));
      max_cos = std::max(max_cos, coss[c]);
    }
    double z = 0.0;
    std::vector<double> q(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
      q[c] = std::exp((coss[c] - max_cos) / tau);
      z += q[c];
    }
    for (double& x : q) x /= z;
    loss += -std::log(q[label_index[i]]);

    if (d_emb) {
      for (std::size_t c = 0; c < num_classes; ++c) {
        const double g = (q[c] - (c == label_index[i] ? 1.0 : 0.0)) / tau;
        cosine_similarity_backward(emb[i], protos.values.row(c), g, (*d_emb)[i],
                                   d_protos.row(c));
      }
    }
  }
  if (d_emb) {
    // prototype = mean of its supports, so its gradient spreads evenly
    for (std::size_t i = 0; i < emb.size(); ++i) {
      const std::size_t c = label_index[i];
      const double inv = 1.0 / static_cast<double>(class_count[c]);
      for (std::size_t j = 0; j < (*d_emb)[i].size(); ++j)
        (*d_emb)[i][j] += d_protos.at(c, j) * inv;
    }
  }
  return loss;
}

}  // namespace detail

// Minimizes the support loss over the prompt parameters only; the instance
// inputs stay frozen. Restores the best-seen parameters on return.
inline TuneResult tune_on_inputs(PromptModel& model,
                                 const std::vector<InstanceInputs>& supports,
                                 const std::vector<int>& classes, const TuneConfig& cfg) {
  if (supports.empty()) throw data_error("tune: empty support set");
  if (cfg.epochs == 0) throw config_error("tune: epochs must be positive");
  if (cfg.tau <= 0.0) throw config_error("tune: temperature must be positive");

  const auto params = model.tunable();
  std::vector<Matrix> best_values;
  for (Param* p : params) best_values.push_back(p->value);

  TuneResult res;
  res.best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_improvement = 0;
  std::vector<int> labels;
  for (const auto& in : supports) labels.push_back(in.label);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // forward: prompts -> prompted embeddings -> instance embeddings
    std::vector<Matrix> prompt_mats;
    std::vector<std::vector<double>> emb;
    prompt_mats.reserve(supports.size());
    for (const auto& in : supports) {
      prompt_mats.push_back(model.prompts(in));
      emb.push_back(graph_embedding(hadamard(prompt_mats.back(), in.h)));
    }

    std::vector<std::vector<double>> d_emb(emb.size());
    for (std::size_t i = 0; i < emb.size(); ++i) d_emb[i].assign(emb[i].size(), 0.0);
    const double loss = detail::support_loss_and_grads(emb, labels, classes, cfg.tau, &d_emb);
    if (!std::isfinite(loss))
      throw numeric_error("tune: non-finite loss at epoch " + std::to_string(epoch));

    res.trace.push_back(loss);
    res.epochs_run = epoch;
    if (loss < res.best_loss) {
      res.best_loss = loss;
      for (std::size_t i = 0; i < params.size(); ++i) best_values[i] = params[i]->value;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (params.empty()) break;  // nothing to tune; the single pass records the loss
    if (since_improvement >= cfg.patience) break;

    for (Param* p : params) p->zero_grad();
    for (std::size_t i = 0; i < supports.size(); ++i) {
      // e = mean of prompted rows, so each row sees d_emb / row count
      const Matrix& h = supports[i].h;
      Matrix dp(h.rows, h.cols);
      const double inv = 1.0 / static_cast<double>(h.rows);
      for (std::size_t r = 0; r < h.rows; ++r) {
        for (std::size_t c = 0; c < h.cols; ++c)
          dp.at(r, c) = d_emb[i][c] * inv * h.at(r, c);
      }
      model.prompts_backward(supports[i], dp);
    }
    adam_step(params, cfg.adam, epoch);
  }

  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  return res;
}

inline TuneResult tune(PromptModel& model, const GcnEncoder& enc, const FewShotTask& task,
                       const Graph& g, const TuneConfig& cfg) {
  if (!enc.frozen()) throw contract_violation("tune: encoder must be frozen");
  if (task.instance_kind != InstanceKind::node)
    throw data_error("tune: node-instance task required for a single graph");
  const Matrix emb = encode(enc, g);
  const auto supports =
      build_node_instance_inputs(g, emb, task.support, cfg.delta, model.variant);
  return tune_on_inputs(model, supports, task.classes, cfg);
}

inline TuneResult tune(PromptModel& model, const GcnEncoder& enc, const FewShotTask& task,
                       const GraphCollection& col, const TuneConfig& cfg) {
  if (!enc.frozen()) throw contract_violation("tune: encoder must be frozen");
  if (task.instance_kind != InstanceKind::graph)
    throw data_error("tune: graph-instance task required for a collection");
  std::vector<Matrix> embs;
  embs.reserve(col.graphs.size());
  for (const auto& g : col.graphs) embs.push_back(encode(enc, g));
  const auto supports =
      build_graph_instance_inputs(col, embs, task.support, cfg.delta, model.variant);
  return tune_on_inputs(model, supports, task.classes, cfg);
}

inline TuneResult tune(ConditionNet& cn, const GcnEncoder& enc, const FewShotTask& task,
                       const Graph& g, const TuneConfig& cfg) {
  PromptModel model;
  model.variant = PromptVariant::pronog;
  model.cn = cn;
  const TuneResult res = tune(model, enc, task, g, cfg);
  cn = model.cn;
  return res;
}

inline void save_condition_net(const ConditionNet& cn, const std::string& path) {
  auto out = ckpt::open_write(path, ckpt::kKindConditionNet);
  ckpt::put_u8(out, static_cast<std::uint8_t>(cn.mlp.activation));
  ckpt::put_matrix(out, cn.mlp.w1.value);
  ckpt::put_matrix(out, cn.mlp.b1.value);
  ckpt::put_matrix(out, cn.mlp.w2.value);
  ckpt::put_matrix(out, cn.mlp.b2.value);
  if (!out) throw data_error("save_condition_net: write failed for " + path);
}

inline ConditionNet load_condition_net(const std::string& path) {
  auto in = ckpt::open_read(path, ckpt::kKindConditionNet);
  ConditionNet cn;
  cn.mlp.activation = static_cast<Activation>(ckpt::get_u8(in));
  cn.mlp.w1 = Param(ckpt::get_matrix(in));
  cn.mlp.b1 = Param(ckpt::get_matrix(in));
  cn.mlp.w2 = Param(ckpt::get_matrix(in));
  cn.mlp.b2 = Param(ckpt::get_matrix(in));
  if (cn.mlp.b1.value.rows != 1 || cn.mlp.b1.value.cols != cn.mlp.w1.value.cols ||
      cn.mlp.w2.value.rows != cn.mlp.w1.value.cols || cn.mlp.b2.value.rows != 1 ||
      cn.mlp.b2.value.cols != cn.mlp.w2.value.cols ||
      cn.mlp.w1.value.rows != cn.mlp.w2.value.cols)
    throw data_error("load_condition_net: inconsistent shapes in " + path);
  return cn;
}

inline std::string parameter_digest(const ConditionNet& cn) {
  ParameterHasher h;
  h.feed_matrix(cn.mlp.w1.value);
  h.feed_matrix(cn.mlp.b1.value);
  h.feed_matrix(cn.mlp.w2.value);
  h.feed_matrix(cn.mlp.b2.value);
  return h.hex();
}

}  // namespace pronog
