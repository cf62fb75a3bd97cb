#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "pronog/error.hpp"
#include "pronog/matrix.hpp"
#include "pronog/rng.hpp"

namespace pronog {

enum class Activation : std::uint8_t { linear = 0, relu = 1, sigmoid = 2 };

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::linear: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::sigmoid: {
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      const double e = std::exp(x);
      return e / (1.0 + e);
    }
  }
  throw numeric_error("activate: unknown tag");
}

// Derivative in terms of the pre-activation x. Rectifier subgradient at 0 is 0.
inline double activate_grad(Activation a, double x) {
  switch (a) {
    case Activation::linear: return 1.0;
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: {
      const double s = activate(Activation::sigmoid, x);
      return s * (1.0 - s);
    }
  }
  throw numeric_error("activate_grad: unknown tag");
}

inline Matrix apply_activation(Activation a, const Matrix& x) {
  Matrix out(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) out.data[i] = activate(a, x.data[i]);
  return out;
}

// Learnable tensor with its gradient and optimizer state.
struct Param {
  Matrix value;
  Matrix grad;
  Matrix moment1;
  Matrix moment2;
  bool frozen = false;

  Param() = default;
  Param(std::size_t rows, std::size_t cols)
      : value(rows, cols), grad(rows, cols), moment1(rows, cols), moment2(rows, cols) {}
  explicit Param(Matrix v)
      : value(std::move(v)),
        grad(value.rows, value.cols),
        moment1(value.rows, value.cols),
        moment2(value.rows, value.cols) {}

  void zero_grad() { grad.fill(0.0); }
};

// Glorot-uniform init in +-sqrt(6/(fan_in+fan_out)).
inline Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::size_t rows,
                             std::size_t cols, std::uint64_t seed) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return random_uniform_matrix(rows, cols, -bound, bound, seed);
}

// Two-layer perceptron: act(x*w1 + b1)*w2 + b2, biases broadcast per row.
struct Mlp {
  Param w1;  // d_in x m
  Param b1;  // 1 x m
  Param w2;  // m x d_out
  Param b2;  // 1 x d_out
  Activation activation = Activation::sigmoid;

  Mlp() = default;
  Mlp(std::size_t d_in, std::size_t m, std::size_t d_out, Activation act, std::uint64_t seed)
      : w1(glorot_uniform(d_in, m, d_in, m, derive_seed(seed, 0))),
        b1(1, m),
        w2(glorot_uniform(m, d_out, m, d_out, derive_seed(seed, 1))),
        b2(1, d_out),
        activation(act) {}

  std::size_t d_in() const { return w1.value.rows; }
  std::size_t hidden() const { return w1.value.cols; }
  std::size_t d_out() const { return w2.value.cols; }

  std::vector<Param*> params() { return {&w1, &b1, &w2, &b2}; }

  void zero_grad() {
    for (Param* p : params()) p->zero_grad();
  }
};

namespace detail {
inline Matrix add_row_broadcast(const Matrix& x, const Matrix& bias) {
  if (bias.rows != 1 || bias.cols != x.cols) throw numeric_error("bias: shape mismatch");
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) out.at(r, c) += bias.at(0, c);
  }
  return out;
}

inline Matrix colsum(const Matrix& x) {
  Matrix out(1, x.cols);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) out.at(0, c) += x.at(r, c);
  }
  return out;
}
}  // namespace detail

inline Matrix mlp_forward(const Mlp& mlp, const Matrix& x) {
  if (x.cols != mlp.d_in()) throw numeric_error("mlp_forward: shape mismatch");
  const Matrix z1 = detail::add_row_broadcast(matmul(x, mlp.w1.value), mlp.b1.value);
  const Matrix a1 = apply_activation(mlp.activation, z1);
  return detail::add_row_broadcast(matmul(a1, mlp.w2.value), mlp.b2.value);
}

// Accumulates parameter gradients and returns dL/dx. Recomputes the hidden
// activations from x, so no cache from the forward pass is needed.
inline Matrix mlp_backward(Mlp& mlp, const Matrix& x, const Matrix& upstream) {
  if (x.cols != mlp.d_in()) throw numeric_error("mlp_backward: shape mismatch");
  if (upstream.rows != x.rows || upstream.cols != mlp.d_out())
    throw numeric_error("mlp_backward: upstream shape mismatch");
  require_finite(upstream, "mlp_backward upstream");

  const Matrix z1 = detail::add_row_broadcast(matmul(x, mlp.w1.value), mlp.b1.value);
  const Matrix a1 = apply_activation(mlp.activation, z1);

  add_inplace(mlp.w2.grad, matmul_tn(a1, upstream));
  add_inplace(mlp.b2.grad, detail::colsum(upstream));

  Matrix dz1 = matmul_nt(upstream, mlp.w2.value);  // dL/da1
  for (std::size_t i = 0; i < dz1.data.size(); ++i) {
    dz1.data[i] *= activate_grad(mlp.activation, z1.data[i]);
  }

  add_inplace(mlp.w1.grad, matmul_tn(x, dz1));
  add_inplace(mlp.b1.grad, detail::colsum(dz1));
  return matmul_nt(dz1, mlp.w1.value);  // dL/dx
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard adaptive-moment update with bias correction; step_index starts at 1.
inline void adam_step(const std::vector<Param*>& params, const AdamConfig& cfg,
                      std::size_t step_index) {
  if (step_index < 1) throw numeric_error("adam_step: step_index must be >= 1");
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_index));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_index));
  for (Param* p : params) {
    if (p->frozen) throw contract_violation("adam_step: parameter is frozen");
    require_finite(p->grad, "adam_step gradient");
    for (std::size_t i = 0; i < p->value.data.size(); ++i) {
      const double g = p->grad.data[i];
      double& m1 = p->moment1.data[i];
      double& m2 = p->moment2.data[i];
      m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * g;
      m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * g * g;
      p->value.data[i] -= cfg.lr * (m1 / c1) / (std::sqrt(m2 / c2) + cfg.eps);
    }
  }
}

// Central-difference check of the analytic gradients already stored in params.
// f evaluates the scalar objective at the params' current values. Relative
// error is |analytic - numeric| / max(|analytic|, |numeric|, 1).
inline double finite_difference_check(const std::function<double()>& f,
                                      const std::vector<Param*>& params, double h = 1e-5) {
  if (h <= 0.0) throw numeric_error("finite_difference_check: h must be positive");
  double max_err = 0.0;
  for (Param* p : params) {
    for (std::size_t i = 0; i < p->value.data.size(); ++i) {
      const double saved = p->value.data[i];
      p->value.data[i] = saved + h;
      const double fp = f();
      p->value.data[i] = saved - h;
      const double fm = f();
      p->value.data[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw numeric_error("finite_difference_check: non-finite objective");
      const double numeric = (fp - fm) / (2.0 * h);
      const double analytic = p->grad.data[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1.0});
      max_err = std::max(max_err, std::abs(analytic - numeric) / denom);
    }
  }
  return max_err;
}

}  // namespace pronog
