#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace emo::optim {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamMoments {
  std::vector<T> m;
  std::vector<T> v;

  explicit AdamMoments(std::size_t n = 0) : m(n, T(0)), v(n, T(0)) {}
};

/// One bias-corrected Adam update. `step` is the 1-based index of this update.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamMoments<T>& mom, long step,
               const AdamConfig& cfg) {
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T lr = static_cast<T>(cfg.lr);
  const T eps = static_cast<T>(cfg.eps);
  const T inv_c1 = static_cast<T>(1.0 / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const std::size_t n = params.size();
#pragma omp parallel for simd schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const T g = grads[i];
    mom.m[i] = b1 * mom.m[i] + (T(1) - b1) * g;
    mom.v[i] = b2 * mom.v[i] + (T(1) - b2) * g * g;
    const T m_hat = mom.m[i] * inv_c1;
    const T v_hat = mom.v[i] * inv_c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace emo::optim
