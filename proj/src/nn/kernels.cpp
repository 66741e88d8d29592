#include "emo/nn/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <algorithm>
#include <cstring>

#include "emo/core/error.hpp"

namespace emo::nn::kernels {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Eigen picks packet vs scalar paths from pointer alignment, so products over
// raw tensor memory can round differently from call to call. Every GEMM
// operand and result goes through an owned (always aligned) matrix instead.
template <typename T>
RowMat<T> owned(const T* p, int rows, int cols) {
  return Eigen::Map<const RowMat<T>>(p, rows, cols);
}

template <typename T>
void store(const RowMat<T>& m, T* dst) {
  std::memcpy(dst, m.data(), sizeof(T) * static_cast<std::size_t>(m.size()));
}

/// Geometry of an im2col view: an image of `channels` x height x width seen
/// through a k x k window giving out_h x out_w positions.
struct ColGeom {
  int channels, height, width, k, stride, pad, out_h, out_w;
  int rows() const { return channels * k * k; }
  int cols() const { return out_h * out_w; }
};

/// Range [lo, hi) of output columns whose input column ox*stride - pad + kx
/// lands inside [0, width).
inline void valid_range(const ColGeom& g, int kx, int& lo, int& hi) {
  const int off = kx - g.pad;
  lo = off >= 0 ? 0 : (-off + g.stride - 1) / g.stride;
  hi = off >= g.width ? 0 : (g.width - 1 - off) / g.stride + 1;
  hi = std::min(hi, g.out_w);
  lo = std::min(lo, hi);
}

template <typename T>
void im2col(const T* img, const ColGeom& g, T* cols) {
  const int P = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        T* row = cols + static_cast<std::size_t>((c * g.k + ky) * g.k + kx) * P;
        int lo, hi;
        valid_range(g, kx, lo, hi);
        const int off = kx - g.pad;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          T* dst = row + static_cast<std::size_t>(oy) * g.out_w;
          if (iy < 0 || iy >= g.height) {
            std::fill(dst, dst + g.out_w, T(0));
            continue;
          }
          const T* src = img + (static_cast<std::size_t>(c) * g.height + iy) * g.width + off;
          std::fill(dst, dst + lo, T(0));
          if (g.stride == 1) {
            std::copy(src + lo, src + hi, dst + lo);
          } else {
            for (int ox = lo; ox < hi; ++ox) dst[ox] = src[ox * g.stride];
          }
          std::fill(dst + hi, dst + g.out_w, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ColGeom& g, T* img) {
  const int P = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const T* row = cols + static_cast<std::size_t>((c * g.k + ky) * g.k + kx) * P;
        int lo, hi;
        valid_range(g, kx, lo, hi);
        const int off = kx - g.pad;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.height) continue;
          const T* src = row + static_cast<std::size_t>(oy) * g.out_w;
          T* dst = img + (static_cast<std::size_t>(c) * g.height + iy) * g.width + off;
          if (g.stride == 1) {
            for (int ox = lo; ox < hi; ++ox) dst[ox] += src[ox];
          } else {
            for (int ox = lo; ox < hi; ++ox) dst[ox * g.stride] += src[ox];
          }
        }
      }
    }
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::ShapeMismatch, what);
}

/// Sums per-sample partial buffers in sample order so results do not depend
/// on the thread schedule.
template <typename T>
void reduce_partials(const std::vector<T>& partials, std::size_t count, int samples, T* out) {
  for (int n = 0; n < samples; ++n) {
    const T* p = partials.data() + static_cast<std::size_t>(n) * count;
    for (std::size_t i = 0; i < count; ++i) out[i] += p[i];
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const T* weight, const T* bias, const ConvShape& s) {
  require(x.c == s.cin, "conv2d_forward: channel mismatch");
  const int ho = s.conv_out(x.h);
  const int wo = s.conv_out(x.w);
  require(ho > 0 && wo > 0, "conv2d_forward: output would be empty");
  Tensor<T> y(x.n, s.cout, ho, wo);
  const ColGeom g{s.cin, x.h, x.w, s.k, s.stride, s.pad, ho, wo};
  const RowMat<T> W = owned(weight, s.cout, g.rows());
#pragma omp parallel
  {
    RowMat<T> cols(g.rows(), g.cols());
    RowMat<T> Y;
#pragma omp for schedule(static)
    for (int n = 0; n < x.n; ++n) {
      im2col(x.sample(n), g, cols.data());
      Y.noalias() = W * cols;
      if (bias) {
        for (int co = 0; co < s.cout; ++co) Y.row(co).array() += bias[co];
      }
      store(Y, y.sample(n));
    }
  }
  return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const T* weight, const Tensor<T>& dy, const ConvShape& s,
                     Tensor<T>* dx, T* dweight, T* dbias) {
  const ColGeom g{s.cin, x.h, x.w, s.k, s.stride, s.pad, dy.h, dy.w};
  require(dy.n == x.n && dy.c == s.cout && dy.h == s.conv_out(x.h) && dy.w == s.conv_out(x.w),
          "conv2d_backward: gradient shape mismatch");
  const RowMat<T> W = owned(weight, s.cout, g.rows());
  const std::size_t wcount = s.weight_count();
  std::vector<T> wpart(dweight ? wcount * static_cast<std::size_t>(x.n) : 0);
  std::vector<T> bpart(dbias ? static_cast<std::size_t>(s.cout) * x.n : 0);
  if (dx) *dx = Tensor<T>(x.n, x.c, x.h, x.w);
#pragma omp parallel
  {
    RowMat<T> cols(g.rows(), g.cols());
    RowMat<T> dcols, dW;
#pragma omp for schedule(static)
    for (int n = 0; n < x.n; ++n) {
      const RowMat<T> dY = owned(dy.sample(n), s.cout, g.cols());
      if (dweight) {
        im2col(x.sample(n), g, cols.data());
        dW.noalias() = dY * cols.transpose();
        store(dW, wpart.data() + static_cast<std::size_t>(n) * wcount);
      }
      if (dbias) {
        for (int co = 0; co < s.cout; ++co) bpart[static_cast<std::size_t>(n) * s.cout + co] = dY.row(co).sum();
      }
      if (dx) {
        dcols.noalias() = W.transpose() * dY;
        col2im_add(dcols.data(), g, dx->sample(n));
      }
    }
  }
  if (dweight) reduce_partials(wpart, wcount, x.n, dweight);
  if (dbias) reduce_partials(bpart, static_cast<std::size_t>(s.cout), x.n, dbias);
}

template <typename T>
Tensor<T> conv_transpose2d_forward(const Tensor<T>& x, const T* weight, const T* bias, const ConvShape& s) {
  require(x.c == s.cin, "conv_transpose2d_forward: channel mismatch");
  const int ho = s.transpose_out(x.h);
  const int wo = s.transpose_out(x.w);
  require(ho > 0 && wo > 0, "conv_transpose2d_forward: output would be empty");
  Tensor<T> y(x.n, s.cout, ho, wo);
  // The output plays the role of a conv input whose im2col view has x's size.
  const ColGeom g{s.cout, ho, wo, s.k, s.stride, s.pad, x.h, x.w};
  require(s.conv_out(ho) == x.h && s.conv_out(wo) == x.w, "conv_transpose2d_forward: non-invertible geometry");
  const RowMat<T> Wt = owned(weight, s.cin, g.rows());
#pragma omp parallel
  {
    RowMat<T> cols;
#pragma omp for schedule(static)
    for (int n = 0; n < x.n; ++n) {
      const RowMat<T> X = owned(x.sample(n), s.cin, g.cols());
      cols.noalias() = Wt.transpose() * X;
      T* out = y.sample(n);
      col2im_add(cols.data(), g, out);
      if (bias) {
        const std::size_t plane = y.plane();
        for (int co = 0; co < s.cout; ++co) {
          T* p = out + static_cast<std::size_t>(co) * plane;
          for (std::size_t i = 0; i < plane; ++i) p[i] += bias[co];
        }
      }
    }
  }
  return y;
}

template <typename T>
void conv_transpose2d_backward(const Tensor<T>& x, const T* weight, const Tensor<T>& dy,
                               const ConvShape& s, Tensor<T>* dx, T* dweight, T* dbias) {
  require(dy.n == x.n && dy.c == s.cout && dy.h == s.transpose_out(x.h) && dy.w == s.transpose_out(x.w),
          "conv_transpose2d_backward: gradient shape mismatch");
  const ColGeom g{s.cout, dy.h, dy.w, s.k, s.stride, s.pad, x.h, x.w};
  const RowMat<T> Wt = owned(weight, s.cin, g.rows());
  const std::size_t wcount = s.weight_count();
  std::vector<T> wpart(dweight ? wcount * static_cast<std::size_t>(x.n) : 0);
  std::vector<T> bpart(dbias ? static_cast<std::size_t>(s.cout) * x.n : 0);
  if (dx) *dx = Tensor<T>(x.n, x.c, x.h, x.w);
#pragma omp parallel
  {
    RowMat<T> cols(g.rows(), g.cols());
    RowMat<T> dX, dW;
#pragma omp for schedule(static)
    for (int n = 0; n < x.n; ++n) {
      im2col(dy.sample(n), g, cols.data());
      if (dx) {
        dX.noalias() = Wt * cols;
        store(dX, dx->sample(n));
      }
      if (dweight) {
        const RowMat<T> X = owned(x.sample(n), s.cin, g.cols());
        dW.noalias() = X * cols.transpose();
        store(dW, wpart.data() + static_cast<std::size_t>(n) * wcount);
      }
      if (dbias) {
        const std::size_t plane = dy.plane();
        for (int co = 0; co < s.cout; ++co) {
          const T* p = dy.sample(n) + static_cast<std::size_t>(co) * plane;
          T acc = 0;
          for (std::size_t i = 0; i < plane; ++i) acc += p[i];
          bpart[static_cast<std::size_t>(n) * s.cout + co] = acc;
        }
      }
    }
  }
  if (dweight) reduce_partials(wpart, wcount, x.n, dweight);
  if (dbias) reduce_partials(bpart, static_cast<std::size_t>(s.cout), x.n, dbias);
}

template <typename T>
Tensor<T> instance_norm_forward(const Tensor<T>& x, const T* gamma, const T* beta, T eps,
                                NormCache<T>& cache) {
  Tensor<T> y(x.n, x.c, x.h, x.w);
  const int planes = x.n * x.c;
  const std::size_t len = x.plane();
  cache.mean.assign(static_cast<std::size_t>(planes), T(0));
  cache.invstd.assign(static_cast<std::size_t>(planes), T(0));
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const T* src = x.data.data() + static_cast<std::size_t>(p) * len;
    T* dst = y.data.data() + static_cast<std::size_t>(p) * len;
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) sum += src[i];
    const double mean = sum / static_cast<double>(len);
    double sq = 0.0;
    for (std::size_t i = 0; i < len; ++i) sq += (src[i] - mean) * (src[i] - mean);
    const double invstd = 1.0 / std::sqrt(sq / static_cast<double>(len) + static_cast<double>(eps));
    const int ch = p % x.c;
    const T scale = static_cast<T>(invstd) * (gamma ? gamma[ch] : T(1));
    const T shift = (beta ? beta[ch] : T(0)) - static_cast<T>(mean) * scale;
    for (std::size_t i = 0; i < len; ++i) dst[i] = src[i] * scale + shift;
    cache.mean[static_cast<std::size_t>(p)] = static_cast<T>(mean);
    cache.invstd[static_cast<std::size_t>(p)] = static_cast<T>(invstd);
  }
  return y;
}

template <typename T>
void instance_norm_backward(const Tensor<T>& x, const Tensor<T>& dy, const T* gamma,
                            const NormCache<T>& cache, Tensor<T>& dx, T* dgamma, T* dbeta) {
  dx = Tensor<T>(x.n, x.c, x.h, x.w);
  const int planes = x.n * x.c;
  const std::size_t len = x.plane();
  std::vector<T> gpart(static_cast<std::size_t>(planes)), bpart(static_cast<std::size_t>(planes));
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const std::size_t off = static_cast<std::size_t>(p) * len;
    const T mean = cache.mean[static_cast<std::size_t>(p)];
    const T invstd = cache.invstd[static_cast<std::size_t>(p)];
    const T gm = gamma ? gamma[p % x.c] : T(1);
    double sum_g = 0.0, sum_gx = 0.0, sum_dy = 0.0, sum_dyx = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double xh = (x.data[off + i] - mean) * invstd;
      const double d = dy.data[off + i];
      sum_dy += d;
      sum_dyx += d * xh;
    }
    sum_g = sum_dy * gm;
    sum_gx = sum_dyx * gm;
    const double inv_len = 1.0 / static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) {
      const double xh = (x.data[off + i] - mean) * invstd;
      const double g = dy.data[off + i] * gm;
      dx.data[off + i] = static_cast<T>(invstd * (g - sum_g * inv_len - xh * sum_gx * inv_len));
    }
    gpart[static_cast<std::size_t>(p)] = static_cast<T>(sum_dyx);
    bpart[static_cast<std::size_t>(p)] = static_cast<T>(sum_dy);
  }
  for (int p = 0; p < planes; ++p) {
    if (dgamma) dgamma[p % x.c] += gpart[static_cast<std::size_t>(p)];
    if (dbeta) dbeta[p % x.c] += bpart[static_cast<std::size_t>(p)];
  }
}

#define EMO_INSTANTIATE(T)                                                                             \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const T*, const T*, const ConvShape&);         \
  template void conv2d_backward(const Tensor<T>&, const T*, const Tensor<T>&, const ConvShape&,      \
                                Tensor<T>*, T*, T*);                                                 \
  template Tensor<T> conv_transpose2d_forward(const Tensor<T>&, const T*, const T*, const ConvShape&); \
  template void conv_transpose2d_backward(const Tensor<T>&, const T*, const Tensor<T>&,              \
                                          const ConvShape&, Tensor<T>*, T*, T*);                     \
  template Tensor<T> instance_norm_forward(const Tensor<T>&, const T*, const T*, T, NormCache<T>&);  \
  template void instance_norm_backward(const Tensor<T>&, const Tensor<T>&, const T*,                 \
                                       const NormCache<T>&, Tensor<T>&, T*, T*);

EMO_INSTANTIATE(float)
EMO_INSTANTIATE(double)
#undef EMO_INSTANTIATE

}  // namespace emo::nn::kernels
