#pragma once

#include <vector>

#include "emo/nn/tensor.hpp"

namespace emo::nn {

/// Convolution geometry. Conv weights are [cout][cin][k][k]; transposed-conv
/// weights are [cin][cout][k][k]. Padding is zero padding.
struct ConvShape {
  int cin = 0;
  int cout = 0;
  int k = 1;
  int stride = 1;
  int pad = 0;

  int conv_out(int in) const noexcept { return (in + 2 * pad - k) / stride + 1; }
  int transpose_out(int in) const noexcept { return (in - 1) * stride - 2 * pad + k; }
  std::size_t weight_count() const noexcept { return static_cast<std::size_t>(cin) * cout * k * k; }
};

template <typename T>
struct NormCache {
  std::vector<T> mean;    // per (n, c)
  std::vector<T> invstd;  // per (n, c)
};

// Fast kernels: OpenMP over samples or planes, im2col + GEMM for convolutions.
// Weight/bias gradients accumulate (+=) into the given buffers; pass nullptr
// for bias or dx to skip them.
namespace kernels {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const T* weight, const T* bias, const ConvShape& s);

template <typename T>
void conv2d_backward(const Tensor<T>& x, const T* weight, const Tensor<T>& dy, const ConvShape& s,
                     Tensor<T>* dx, T* dweight, T* dbias);

template <typename T>
Tensor<T> conv_transpose2d_forward(const Tensor<T>& x, const T* weight, const T* bias, const ConvShape& s);

template <typename T>
void conv_transpose2d_backward(const Tensor<T>& x, const T* weight, const Tensor<T>& dy,
                               const ConvShape& s, Tensor<T>* dx, T* dweight, T* dbias);

/// Per-sample, per-channel normalization; gamma/beta may be null (no affine).
template <typename T>
Tensor<T> instance_norm_forward(const Tensor<T>& x, const T* gamma, const T* beta, T eps,
                                NormCache<T>& cache);

/// `y_hat` is the normalized (pre-affine) activation, recovered from the cache.
template <typename T>
void instance_norm_backward(const Tensor<T>& x, const Tensor<T>& dy, const T* gamma,
                            const NormCache<T>& cache, Tensor<T>& dx, T* dgamma, T* dbeta);

}  // namespace kernels

// Serial direct-loop references used to check the fast kernels.
namespace reference {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const T* weight, const T* bias, const ConvShape& s);

template <typename T>
void conv2d_backward(const Tensor<T>& x, const T* weight, const Tensor<T>& dy, const ConvShape& s,
                     Tensor<T>* dx, T* dweight, T* dbias);

template <typename T>
Tensor<T> conv_transpose2d_forward(const Tensor<T>& x, const T* weight, const T* bias, const ConvShape& s);

template <typename T>
void conv_transpose2d_backward(const Tensor<T>& x, const T* weight, const Tensor<T>& dy,
                               const ConvShape& s, Tensor<T>* dx, T* dweight, T* dbias);

template <typename T>
Tensor<T> instance_norm_forward(const Tensor<T>& x, const T* gamma, const T* beta, T eps,
                                NormCache<T>& cache);

template <typename T>
void instance_norm_backward(const Tensor<T>& x, const Tensor<T>& dy, const T* gamma,
                            const NormCache<T>& cache, Tensor<T>& dx, T* dgamma, T* dbeta);

}  // namespace reference

}  // namespace emo::nn
