#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pronog/checkpoint.hpp"
#include "pronog/error.hpp"
#include "pronog/graph.hpp"
#include "pronog/matrix.hpp"
#include "pronog/mlp.hpp"
#include "pronog/rng.hpp"

namespace pronog {

// Symmetric-normalized operator with self-loops: D̃^{-1/2}(A+I)D̃^{-1/2}.
inline SparseOperator normalize_adjacency(const Graph& g) {
  const std::size_t n = g.num_nodes;
  std::vector<double> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(double(g.degree(v) + 1));

  SparseOperator op;
  op.rows = op.cols = n;
  op.row_offsets.assign(n + 1, 0);
  op.col_indices.reserve(g.col_indices.size() + n);
  op.values.reserve(g.col_indices.size() + n);
  for (std::size_t u = 0; u < n; ++u) {
    bool self_done = false;
    for (std::size_t v : g.neighbors(u)) {
      if (!self_done && u < v) {  // insert the self entry in sorted position
        op.col_indices.push_back(u);
        op.values.push_back(inv_sqrt[u] * inv_sqrt[u]);
        self_done = true;
      }
      op.col_indices.push_back(v);
      op.values.push_back(inv_sqrt[u] * inv_sqrt[v]);
    }
    if (!self_done) {
      op.col_indices.push_back(u);
      op.values.push_back(inv_sqrt[u] * inv_sqrt[u]);
    }
    op.row_offsets[u + 1] = op.col_indices.size();
  }
  return op;
}

// Message-passing encoder: H^l = act(Â H^{l-1} W^l), H^0 = X, last layer
// linear, hidden layers rectified. Zero layers degenerates to the identity.
struct GcnEncoder {
  std::vector<Param> weights;          // W^l, dims chain
  std::vector<Activation> activations; // one per layer

  GcnEncoder() = default;

  // dims = [d_in, d_1, ..., d_out]; dims.size() - 1 layers.
  GcnEncoder(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw config_error("GcnEncoder: need at least input and output dims");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      weights.emplace_back(
          glorot_uniform(dims[l], dims[l + 1], dims[l], dims[l + 1], derive_seed(seed, l)));
      activations.push_back(l + 2 < dims.size() ? Activation::relu : Activation::linear);
    }
  }

  std::size_t num_layers() const { return weights.size(); }

  std::size_t input_dim() const {
    return weights.empty() ? 0 : weights.front().value.rows;
  }

  std::size_t output_dim(std::size_t feature_dim) const {
    return weights.empty() ? feature_dim : weights.back().value.cols;
  }

  bool frozen() const {
    for (const auto& w : weights)
      if (!w.frozen) return false;
    return !weights.empty();
  }

  std::vector<Param*> params() {
    std::vector<Param*> out;
    for (auto& w : weights) out.push_back(&w);
    return out;
  }

  void zero_grad() {
    for (auto& w : weights) w.zero_grad();
  }
};

inline void freeze(GcnEncoder& enc) {
  for (auto& w : enc.weights) w.frozen = true;
}

inline std::string parameter_digest(const GcnEncoder& enc) {
  ParameterHasher h;
  h.feed_u64(enc.weights.size());
  for (const auto& w : enc.weights) h.feed_matrix(w.value);
  return h.hex();
}

inline Matrix encode(const GcnEncoder& enc, const Graph& g) {
  if (!enc.weights.empty() && g.features.cols != enc.weights.front().value.rows)
    throw data_error("encode: feature dim " + std::to_string(g.features.cols) +
                     " does not match encoder input dim " +
                     std::to_string(enc.weights.front().value.rows));
  Matrix h = g.features;
  if (enc.weights.empty()) return h;
  const SparseOperator a_hat = normalize_adjacency(g);
  for (std::size_t l = 0; l < enc.weights.size(); ++l) {
    h = apply_activation(enc.activations[l], matmul(spmm(a_hat, h), enc.weights[l].value));
  }
  return h;
}

// Accumulates dL/dW into each layer's grad and returns dL/dX. Recomputes the
// forward intermediates, so no cached state is needed.
inline Matrix encode_backward(GcnEncoder& enc, const Graph& g, const Matrix& upstream) {
  if (enc.frozen()) throw contract_violation("encode_backward: encoder is frozen");
  require_finite(upstream, "encode_backward upstream");
  if (enc.weights.empty()) return upstream;
  if (g.features.cols != enc.weights.front().value.rows)
    throw data_error("encode_backward: feature dim mismatch");
  if (upstream.rows != g.num_nodes || upstream.cols != enc.weights.back().value.cols)
    throw data_error("encode_backward: upstream shape mismatch");

  const SparseOperator a_hat = normalize_adjacency(g);
  const std::size_t L = enc.weights.size();
  std::vector<Matrix> propagated(L);  // Â H^{l-1}
  std::vector<Matrix> pre_act(L);     // Â H^{l-1} W^l
  Matrix h = g.features;
  for (std::size_t l = 0; l < L; ++l) {
    propagated[l] = spmm(a_hat, h);
    pre_act[l] = matmul(propagated[l], enc.weights[l].value);
    h = apply_activation(enc.activations[l], pre_act[l]);
  }

  Matrix dh = upstream;
  for (std::size_t l = L; l-- > 0;) {
    Matrix dz = dh;
    for (std::size_t i = 0; i < dz.data.size(); ++i)
      dz.data[i] *= activate_grad(enc.activations[l], pre_act[l].data[i]);
    add_inplace(enc.weights[l].grad, matmul_tn(propagated[l], dz));
    // Â is symmetric, so d(Â H^{l-1}) pulls back through Â directly.
    dh = spmm(a_hat, matmul_nt(dz, enc.weights[l].value));
  }
  return dh;
}

inline void save_encoder(const GcnEncoder& enc, const std::string& path) {
  auto out = ckpt::open_write(path, ckpt::kKindEncoder);
  ckpt::put_u64(out, enc.weights.size());
  for (std::size_t l = 0; l < enc.weights.size(); ++l) {
    ckpt::put_u8(out, static_cast<std::uint8_t>(enc.activations[l]));
    ckpt::put_matrix(out, enc.weights[l].value);
  }
  if (!out) throw data_error("save_encoder: write failed for " + path);
}

inline GcnEncoder load_encoder(const std::string& path) {
  auto in = ckpt::open_read(path, ckpt::kKindEncoder);
  const std::uint64_t layers = ckpt::get_u64(in);
  if (layers > 64) throw data_error("load_encoder: implausible layer count");
  GcnEncoder enc;
  for (std::uint64_t l = 0; l < layers; ++l) {
    const auto act = static_cast<Activation>(ckpt::get_u8(in));
    if (act != Activation::linear && act != Activation::relu && act != Activation::sigmoid)
      throw data_error("load_encoder: unknown activation tag");
    enc.weights.emplace_back(ckpt::get_matrix(in));
    enc.activations.push_back(act);
  }
  for (std::size_t l = 1; l < enc.weights.size(); ++l) {
    if (enc.weights[l - 1].value.cols != enc.weights[l].value.rows)
      throw data_error("load_encoder: layer dims do not chain");
  }
  return enc;
}

}  // namespace pronog
