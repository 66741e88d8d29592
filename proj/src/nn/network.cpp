#include "emo/nn/network.hpp"

#include <cmath>
#include <random>

#include "emo/core/error.hpp"

namespace emo::nn {

template <typename T>
int Network<T>::add_param(const std::string& suffix, std::vector<int> shape, std::size_t count) {
  const int index = static_cast<int>(params_.size());
  params_.push_back({prefix_ + std::to_string(ops_.size()) + "." + suffix, std::move(shape),
                     std::vector<T>(count, T(0))});
  return index;
}

template <typename T>
void Network<T>::add_conv(const ConvShape& s, bool bias) {
  Op op{OpKind::Conv, s};
  op.bias = bias;
  op.first_param = add_param("weight", {s.cout, s.cin, s.k, s.k}, s.weight_count());
  if (bias) add_param("bias", {s.cout}, static_cast<std::size_t>(s.cout));
  ops_.push_back(op);
}

template <typename T>
void Network<T>::add_conv_transpose(const ConvShape& s, bool bias) {
  Op op{OpKind::ConvTranspose, s};
  op.bias = bias;
  op.first_param = add_param("weight", {s.cin, s.cout, s.k, s.k}, s.weight_count());
  if (bias) add_param("bias", {s.cout}, static_cast<std::size_t>(s.cout));
  ops_.push_back(op);
}

template <typename T>
void Network<T>::add_instance_norm(int channels, bool affine) {
  Op op{OpKind::InstanceNorm};
  op.channels = channels;
  op.affine = affine;
  if (affine) {
    op.first_param = add_param("gamma", {channels}, static_cast<std::size_t>(channels));
    add_param("beta", {channels}, static_cast<std::size_t>(channels));
  }
  ops_.push_back(op);
}

template <typename T>
void Network<T>::add_relu() { ops_.push_back(Op{OpKind::Relu}); }

template <typename T>
void Network<T>::add_leaky_relu(double slope) {
  Op op{OpKind::LeakyRelu};
  op.slope = slope;
  ops_.push_back(op);
}

template <typename T>
void Network<T>::add_tanh() { ops_.push_back(Op{OpKind::Tanh}); }

template <typename T>
void Network<T>::begin_residual() { ops_.push_back(Op{OpKind::ResidualBegin}); }

template <typename T>
void Network<T>::end_residual() { ops_.push_back(Op{OpKind::ResidualEnd}); }

template <typename T>
std::size_t Network<T>::param_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.data.size();
  return n;
}

template <typename T>
void Network<T>::init_normal(std::uint64_t seed, double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  for (const Op& op : ops_) {
    if (op.first_param < 0) continue;
    if (op.kind == OpKind::InstanceNorm) {
      std::fill(params_[op.first_param].data.begin(), params_[op.first_param].data.end(), T(1));
      std::fill(params_[op.first_param + 1].data.begin(), params_[op.first_param + 1].data.end(), T(0));
      continue;
    }
    for (T& w : params_[op.first_param].data) w = static_cast<T>(normal(rng));
    if (op.bias) std::fill(params_[op.first_param + 1].data.begin(), params_[op.first_param + 1].data.end(), T(0));
  }
}

template <typename T>
std::vector<std::vector<T>> Network<T>::zero_grads() const {
  std::vector<std::vector<T>> g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.data.size(), T(0));
  return g;
}

namespace {

constexpr double kNormEps = 1e-5;

template <typename T>
T tanh_clamped(T v) noexcept {
  const T hi = std::nextafter(T(1), T(0));
  return std::clamp(std::tanh(v), -hi, hi);
}

template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  if (!dst.same_shape(src)) throw Error(Errc::ShapeMismatch, "residual shapes differ");
  const std::size_t n = dst.size();
  T* d = dst.data.data();
  const T* s = src.data.data();
#pragma omp parallel for simd schedule(static)
  for (std::size_t i = 0; i < n; ++i) d[i] += s[i];
}

}  // namespace

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& x, Trace<T>* trace, Backend backend) const {
  const bool fast = backend == Backend::Fast;
  if (trace) {
    trace->inputs.clear();
    trace->inputs.reserve(ops_.size());
    trace->norms.assign(ops_.size(), {});
  }
  std::vector<Tensor<T>> skips;
  Tensor<T> h = x;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const Op& op = ops_[i];
    if (trace) trace->inputs.push_back(h);
    switch (op.kind) {
      case OpKind::Conv: {
        const T* w = params_[op.first_param].data.data();
        const T* b = op.bias ? params_[op.first_param + 1].data.data() : nullptr;
        h = fast ? kernels::conv2d_forward(h, w, b, op.conv) : reference::conv2d_forward(h, w, b, op.conv);
        break;
      }
      case OpKind::ConvTranspose: {
        const T* w = params_[op.first_param].data.data();
        const T* b = op.bias ? params_[op.first_param + 1].data.data() : nullptr;
        h = fast ? kernels::conv_transpose2d_forward(h, w, b, op.conv)
                 : reference::conv_transpose2d_forward(h, w, b, op.conv);
        break;
      }
      case OpKind::InstanceNorm: {
        if (h.c != op.channels) throw Error(Errc::ShapeMismatch, "instance norm channel mismatch");
        const T* g = op.affine ? params_[op.first_param].data.data() : nullptr;
        const T* b = op.affine ? params_[op.first_param + 1].data.data() : nullptr;
        NormCache<T> local;
        NormCache<T>& cache = trace ? trace->norms[i] : local;
        h = fast ? kernels::instance_norm_forward(h, g, b, static_cast<T>(kNormEps), cache)
                 : reference::instance_norm_forward(h, g, b, static_cast<T>(kNormEps), cache);
        break;
      }
      case OpKind::Relu:
        for (T& v : h.data) v = v > T(0) ? v : T(0);
        break;
      case OpKind::LeakyRelu: {
        const T a = static_cast<T>(op.slope);
        for (T& v : h.data) v = v > T(0) ? v : a * v;
        break;
      }
      case OpKind::Tanh:
        for (T& v : h.data) v = tanh_clamped(v);
        break;
      case OpKind::ResidualBegin:
        skips.push_back(h);
        break;
      case OpKind::ResidualEnd:
        if (skips.empty()) throw Error(Errc::ShapeMismatch, "unbalanced residual markers");
        add_into(h, skips.back());
        skips.pop_back();
        break;
    }
  }
  if (trace) trace->output = h;
  return h;
}

template <typename T>
Tensor<T> Network<T>::backward(const Trace<T>& trace, const Tensor<T>& dy, std::span<std::vector<T>> grads,
                               bool want_dx, Backend backend) const {
  const bool fast = backend == Backend::Fast;
  if (trace.inputs.size() != ops_.size()) throw Error(Errc::ShapeMismatch, "trace does not match network");
  if (!dy.same_shape(trace.output)) throw Error(Errc::ShapeMismatch, "output gradient shape mismatch");
  std::vector<Tensor<T>> skip_grads;
  Tensor<T> g = dy;
  for (std::size_t r = ops_.size(); r-- > 0;) {
    const Op& op = ops_[r];
    const Tensor<T>& in = trace.inputs[r];
    // The first op's input gradient is only needed when the caller asks.
    const bool need_dx = want_dx || r > 0;
    switch (op.kind) {
      case OpKind::Conv:
      case OpKind::ConvTranspose: {
        const T* w = params_[op.first_param].data.data();
        T* dw = grads[op.first_param].data();
        T* db = op.bias ? grads[op.first_param + 1].data() : nullptr;
        Tensor<T> dx;
        if (op.kind == OpKind::Conv) {
          if (fast)
            kernels::conv2d_backward(in, w, g, op.conv, need_dx ? &dx : nullptr, dw, db);
          else
            reference::conv2d_backward(in, w, g, op.conv, need_dx ? &dx : nullptr, dw, db);
        } else {
          if (fast)
            kernels::conv_transpose2d_backward(in, w, g, op.conv, need_dx ? &dx : nullptr, dw, db);
          else
            reference::conv_transpose2d_backward(in, w, g, op.conv, need_dx ? &dx : nullptr, dw, db);
        }
        g = std::move(dx);
        break;
      }
      case OpKind::InstanceNorm: {
        const T* gm = op.affine ? params_[op.first_param].data.data() : nullptr;
        T* dg = op.affine ? grads[op.first_param].data() : nullptr;
        T* db = op.affine ? grads[op.first_param + 1].data() : nullptr;
        Tensor<T> dx;
        if (fast)
          kernels::instance_norm_backward(in, g, gm, trace.norms[r], dx, dg, db);
        else
          reference::instance_norm_backward(in, g, gm, trace.norms[r], dx, dg, db);
        g = std::move(dx);
        break;
      }
      case OpKind::Relu:
        for (std::size_t i = 0; i < g.size(); ++i)
          if (!(in.data[i] > T(0))) g.data[i] = T(0);
        break;
      case OpKind::LeakyRelu: {
        const T a = static_cast<T>(op.slope);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (!(in.data[i] > T(0))) g.data[i] *= a;
        break;
      }
      case OpKind::Tanh:
        for (std::size_t i = 0; i < g.size(); ++i) {
          const T y = tanh_clamped(in.data[i]);
          g.data[i] *= T(1) - y * y;
        }
        break;
      case OpKind::ResidualEnd:
        skip_grads.push_back(g);
        break;
      case OpKind::ResidualBegin:
        add_into(g, skip_grads.back());
        skip_grads.pop_back();
        break;
    }
    if (!need_dx && r == 0) return {};
  }
  return g;
}

template class Network<float>;
template class Network<double>;

}  // namespace emo::nn
