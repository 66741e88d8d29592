#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emo/nn/kernels.hpp"

namespace emo::nn {

enum class OpKind { Conv, ConvTranspose, InstanceNorm, Relu, LeakyRelu, Tanh, ResidualBegin, ResidualEnd };

struct Op {
  OpKind kind = OpKind::Relu;
  ConvShape conv{};      // Conv / ConvTranspose
  int channels = 0;      // InstanceNorm
  bool bias = true;      // Conv / ConvTranspose
  bool affine = true;    // InstanceNorm
  double slope = 0.01;   // LeakyRelu
  int first_param = -1;  // index of the op's first parameter tensor
};

template <typename T>
struct ParamTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<T> data;
};

/// Saved activations for one forward pass, consumed by backward.
template <typename T>
struct Trace {
  std::vector<Tensor<T>> inputs;  // input of each op
  std::vector<NormCache<T>> norms;
  Tensor<T> output;
};

/// Whether a network runs the fast kernels or the serial references.
enum class Backend { Fast, Reference };

/// Feed-forward stack of ops with residual begin/end markers (nesting allowed).
template <typename T>
class Network {
 public:
  explicit Network(std::string prefix = {}) : prefix_(std::move(prefix)) {}

  void add_conv(const ConvShape& s, bool bias = true);
  void add_conv_transpose(const ConvShape& s, bool bias = true);
  void add_instance_norm(int channels, bool affine);
  void add_relu();
  void add_leaky_relu(double slope);
  void add_tanh();
  void begin_residual();
  void end_residual();

  const std::vector<Op>& ops() const noexcept { return ops_; }
  std::vector<ParamTensor<T>>& params() noexcept { return params_; }
  const std::vector<ParamTensor<T>>& params() const noexcept { return params_; }
  std::size_t param_count() const noexcept;

  /// Normal(0, stddev) for conv weights, zero biases, unit gamma / zero beta.
  void init_normal(std::uint64_t seed, double stddev);

  Tensor<T> forward(const Tensor<T>& x, Trace<T>* trace, Backend backend = Backend::Fast) const;

  /// Accumulates parameter gradients into `grads` (same layout as params()).
  /// Returns dL/dx when `want_dx`, else an empty tensor.
  Tensor<T> backward(const Trace<T>& trace, const Tensor<T>& dy, std::span<std::vector<T>> grads,
                     bool want_dx, Backend backend = Backend::Fast) const;

  std::vector<std::vector<T>> zero_grads() const;

  template <typename U>
  Network<U> cast() const {
    Network<U> out(prefix_);
    out.copy_structure_from(ops_);
    out.params().clear();
    for (const auto& p : params_) {
      ParamTensor<U> q{p.name, p.shape, std::vector<U>(p.data.begin(), p.data.end())};
      out.params().push_back(std::move(q));
    }
    return out;
  }

  void copy_structure_from(const std::vector<Op>& ops) { ops_ = ops; }

 private:
  int add_param(const std::string& suffix, std::vector<int> shape, std::size_t count);

  std::string prefix_;
  std::vector<Op> ops_;
  std::vector<ParamTensor<T>> params_;
};

template <typename T>
inline T sigmoid(T z) noexcept {
  if (z >= 0) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

/// log(1 + exp(z)), stable for large |z|.
template <typename T>
inline T softplus(T z) noexcept {
  return std::max(z, T(0)) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace emo::nn
