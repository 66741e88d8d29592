#include "emo/nn/kernels.hpp"

#include <cmath>

#include "emo/core/error.hpp"

namespace emo::nn::reference {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::ShapeMismatch, what);
}

std::size_t widx(const ConvShape& s, int a, int b, int ky, int kx, int bdim) {
  return ((static_cast<std::size_t>(a) * bdim + b) * s.k + ky) * s.k + kx;
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const T* weight, const T* bias, const ConvShape& s) {
  require(x.c == s.cin, "conv2d_forward: channel mismatch");
  const int ho = s.conv_out(x.h), wo = s.conv_out(x.w);
  require(ho > 0 && wo > 0, "conv2d_forward: output would be empty");
  Tensor<T> y(x.n, s.cout, ho, wo);
  for (int n = 0; n < x.n; ++n)
    for (int co = 0; co < s.cout; ++co)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          T acc = bias ? bias[co] : T(0);
          for (int ci = 0; ci < s.cin; ++ci)
            for (int ky = 0; ky < s.k; ++ky)
              for (int kx = 0; kx < s.k; ++kx) {
                const int iy = oy * s.stride - s.pad + ky;
                const int ix = ox * s.stride - s.pad + kx;
                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                acc += weight[widx(s, co, ci, ky, kx, s.cin)] * x.at(n, ci, iy, ix);
              }
          y.at(n, co, oy, ox) = acc;
        }
  return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const T* weight, const Tensor<T>& dy, const ConvShape& s,
                     Tensor<T>* dx, T* dweight, T* dbias) {
  require(dy.n == x.n && dy.c == s.cout && dy.h == s.conv_out(x.h) && dy.w == s.conv_out(x.w),
          "conv2d_backward: gradient shape mismatch");
  if (dx) *dx = Tensor<T>(x.n, x.c, x.h, x.w);
  for (int n = 0; n < x.n; ++n)
    for (int co = 0; co < s.cout; ++co)
      for (int oy = 0; oy < dy.h; ++oy)
        for (int ox = 0; ox < dy.w; ++ox) {
          const T g = dy.at(n, co, oy, ox);
          if (dbias) dbias[co] += g;
          for (int ci = 0; ci < s.cin; ++ci)
            for (int ky = 0; ky < s.k; ++ky)
              for (int kx = 0; kx < s.k; ++kx) {
                const int iy = oy * s.stride - s.pad + ky;
                const int ix = ox * s.stride - s.pad + kx;
                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                const std::size_t wi = widx(s, co, ci, ky, kx, s.cin);
                if (dweight) dweight[wi] += g * x.at(n, ci, iy, ix);
                if (dx) dx->at(n, ci, iy, ix) += g * weight[wi];
              }
        }
}

// Transposed conv scatters each input pixel through the kernel.
template <typename T>
Tensor<T> conv_transpose2d_forward(const Tensor<T>& x, const T* weight, const T* bias, const ConvShape& s) {
  require(x.c == s.cin, "conv_transpose2d_forward: channel mismatch");
  const int ho = s.transpose_out(x.h), wo = s.transpose_out(x.w);
  require(ho > 0 && wo > 0, "conv_transpose2d_forward: output would be empty");
  Tensor<T> y(x.n, s.cout, ho, wo);
  for (int n = 0; n < x.n; ++n) {
    for (int co = 0; co < s.cout; ++co)
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) y.at(n, co, oy, ox) = bias ? bias[co] : T(0);
    for (int ci = 0; ci < s.cin; ++ci)
      for (int iy = 0; iy < x.h; ++iy)
        for (int ix = 0; ix < x.w; ++ix) {
          const T v = x.at(n, ci, iy, ix);
          for (int co = 0; co < s.cout; ++co)
            for (int ky = 0; ky < s.k; ++ky)
              for (int kx = 0; kx < s.k; ++kx) {
                const int oy = iy * s.stride - s.pad + ky;
                const int ox = ix * s.stride - s.pad + kx;
                if (oy < 0 || oy >= ho || ox < 0 || ox >= wo) continue;
                y.at(n, co, oy, ox) += v * weight[widx(s, ci, co, ky, kx, s.cout)];
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
  if (dx) *dx = Tensor<T>(x.n, x.c, x.h, x.w);
  for (int n = 0; n < x.n; ++n) {
    if (dbias)
      for (int co = 0; co < s.cout; ++co)
        for (int oy = 0; oy < dy.h; ++oy)
          for (int ox = 0; ox < dy.w; ++ox) dbias[co] += dy.at(n, co, oy, ox);
    for (int ci = 0; ci < s.cin; ++ci)
      for (int iy = 0; iy < x.h; ++iy)
        for (int ix = 0; ix < x.w; ++ix)
          for (int co = 0; co < s.cout; ++co)
            for (int ky = 0; ky < s.k; ++ky)
              for (int kx = 0; kx < s.k; ++kx) {
                const int oy = iy * s.stride - s.pad + ky;
                const int ox = ix * s.stride - s.pad + kx;
                if (oy < 0 || oy >= dy.h || ox < 0 || ox >= dy.w) continue;
                const std::size_t wi = widx(s, ci, co, ky, kx, s.cout);
                const T g = dy.at(n, co, oy, ox);
                if (dweight) dweight[wi] += g * x.at(n, ci, iy, ix);
                if (dx) dx->at(n, ci, iy, ix) += g * weight[wi];
              }
  }
}

template <typename T>
Tensor<T> instance_norm_forward(const Tensor<T>& x, const T* gamma, const T* beta, T eps,
                                NormCache<T>& cache) {
  Tensor<T> y(x.n, x.c, x.h, x.w);
  cache.mean.assign(static_cast<std::size_t>(x.n) * x.c, T(0));
  cache.invstd.assign(static_cast<std::size_t>(x.n) * x.c, T(0));
  const double len = static_cast<double>(x.plane());
  for (int n = 0; n < x.n; ++n)
    for (int c = 0; c < x.c; ++c) {
      double mean = 0.0;
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j) mean += x.at(n, c, i, j);
      mean /= len;
      double var = 0.0;
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j) var += (x.at(n, c, i, j) - mean) * (x.at(n, c, i, j) - mean);
      var /= len;
      const double invstd = 1.0 / std::sqrt(var + eps);
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j) {
          double v = (x.at(n, c, i, j) - mean) * invstd;
          if (gamma) v *= gamma[c];
          if (beta) v += beta[c];
          y.at(n, c, i, j) = static_cast<T>(v);
        }
      cache.mean[static_cast<std::size_t>(n) * x.c + c] = static_cast<T>(mean);
      cache.invstd[static_cast<std::size_t>(n) * x.c + c] = static_cast<T>(invstd);
    }
  return y;
}

template <typename T>
void instance_norm_backward(const Tensor<T>& x, const Tensor<T>& dy, const T* gamma,
                            const NormCache<T>& cache, Tensor<T>& dx, T* dgamma, T* dbeta) {
  dx = Tensor<T>(x.n, x.c, x.h, x.w);
  const double len = static_cast<double>(x.plane());
  for (int n = 0; n < x.n; ++n)
    for (int c = 0; c < x.c; ++c) {
      const double mean = cache.mean[static_cast<std::size_t>(n) * x.c + c];
      const double invstd = cache.invstd[static_cast<std::size_t>(n) * x.c + c];
      const double gm = gamma ? gamma[c] : 1.0;
      double mean_g = 0.0, mean_gx = 0.0;
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j) {
          const double xh = (x.at(n, c, i, j) - mean) * invstd;
          const double d = dy.at(n, c, i, j);
          mean_g += d * gm;
          mean_gx += d * gm * xh;
          if (dgamma) dgamma[c] += static_cast<T>(d * xh);
          if (dbeta) dbeta[c] += static_cast<T>(d);
        }
      mean_g /= len;
      mean_gx /= len;
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j) {
          const double xh = (x.at(n, c, i, j) - mean) * invstd;
          dx.at(n, c, i, j) = static_cast<T>(invstd * (dy.at(n, c, i, j) * gm - mean_g - xh * mean_gx));
        }
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

}  // namespace emo::nn::reference
