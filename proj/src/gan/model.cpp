#include "emo/gan/model.hpp"

#include <string>

#include "emo/core/error.hpp"

namespace emo::gan {

template <typename T>
Tensor<T> tile_label(ExpressionDomain d, int h, int w) {
  Tensor<T> t(1, kNumDomains, h, w);
  std::fill_n(t.sample(0) + static_cast<std::size_t>(code(d)) * t.plane(), t.plane(), T(1));
  return t;
}

template <typename T>
Tensor<T> with_labels(const Tensor<T>& images, std::span<const int> domains) {
  if (images.c != 3) throw Error(Errc::ShapeMismatch, "expected 3-channel images");
  if (static_cast<int>(domains.size()) != images.n) throw Error(Errc::ShapeMismatch, "one domain per image required");
  Tensor<T> out(images.n, 3 + kNumDomains, images.h, images.w);
  const std::size_t plane = images.plane();
  for (int i = 0; i < images.n; ++i) {
    const int d = domains[static_cast<std::size_t>(i)];
    if (d < 0 || d >= kNumDomains) throw Error(Errc::ShapeMismatch, "domain code out of range");
    std::copy_n(images.sample(i), images.sample_size(), out.sample(i));
    std::fill_n(out.sample(i) + (3 + static_cast<std::size_t>(d)) * plane, plane, T(1));
  }
  return out;
}

template <typename T>
Network<T> build_generator(const GeneratorConfig& cfg) {
  if (cfg.width < 1 || cfg.res_blocks < 0) throw Error(Errc::BadConfig, "bad generator config");
  const int w = cfg.width;
  Network<T> g("G.");
  // No normalization on the stem: instance norm would subtract the
  // spatially constant label planes right back out.
  g.add_conv({3 + kNumDomains, w, 7, 1, 3}, true);
  g.add_relu();
  g.add_conv({w, 2 * w, 4, 2, 1}, false);
  g.add_instance_norm(2 * w, true);
  g.add_relu();
  g.add_conv({2 * w, 4 * w, 4, 2, 1}, false);
  g.add_instance_norm(4 * w, true);
  g.add_relu();
  for (int i = 0; i < cfg.res_blocks; ++i) {
    g.begin_residual();
    g.add_conv({4 * w, 4 * w, 3, 1, 1}, false);
    g.add_instance_norm(4 * w, false);
    g.add_relu();
    g.add_conv({4 * w, 4 * w, 3, 1, 1}, false);
    g.add_instance_norm(4 * w, false);
    g.end_residual();
  }
  g.add_conv_transpose({4 * w, 2 * w, 4, 2, 1}, false);
  g.add_instance_norm(2 * w, true);
  g.add_relu();
  g.add_conv_transpose({2 * w, w, 4, 2, 1}, false);
  g.add_instance_norm(w, true);
  g.add_relu();
  g.add_conv({w, 3, 7, 1, 3}, false);
  g.add_tanh();
  return g;
}

template <typename T>
Discriminator<T> build_discriminator(const DiscriminatorConfig& cfg, int image_size) {
  if (cfg.width < 1 || cfg.layers < 1 || image_size < 1) throw Error(Errc::BadConfig, "bad discriminator config");
  const int final = image_size >> cfg.layers;
  if (final < 1 || (final << cfg.layers) != image_size)
    throw Error(Errc::BadConfig, "image size " + std::to_string(image_size) + " is not divisible by 2^" +
                                     std::to_string(cfg.layers));
  Discriminator<T> d;
  int cin = 3, cout = cfg.width;
  for (int i = 0; i < cfg.layers; ++i) {
    d.trunk.add_conv({cin, cout, 4, 2, 1});
    d.trunk.add_leaky_relu(cfg.slope);
    cin = cout;
    cout *= 2;
  }
  d.patch.add_conv({cin, 1, 3, 1, 1}, false);
  d.cls.add_conv({cin, kNumDomains, final, 1, 0}, false);
  return d;
}

template <typename T>
std::vector<nn::ParamTensor<T>*> Discriminator<T>::param_refs() {
  std::vector<nn::ParamTensor<T>*> out;
  for (Network<T>* n : {&trunk, &patch, &cls})
    for (auto& p : n->params()) out.push_back(&p);
  return out;
}

template <typename T>
std::vector<const nn::ParamTensor<T>*> Discriminator<T>::param_refs() const {
  std::vector<const nn::ParamTensor<T>*> out;
  for (const Network<T>* n : {&trunk, &patch, &cls})
    for (const auto& p : n->params()) out.push_back(&p);
  return out;
}

template <typename T>
std::vector<std::vector<T>> Discriminator<T>::zero_grads() const {
  std::vector<std::vector<T>> g;
  for (const auto* p : param_refs()) g.emplace_back(p->data.size(), T(0));
  return g;
}

template <typename T>
std::size_t Discriminator<T>::param_count() const noexcept {
  return trunk.param_count() + patch.param_count() + cls.param_count();
}

template <typename T>
DiscOutput<T> Discriminator<T>::forward(const Tensor<T>& x, DiscTrace<T>* trace, Backend backend) const {
  if (x.c != 3) throw Error(Errc::ShapeMismatch, "discriminator expects 3-channel images");
  const Tensor<T> h = trunk.forward(x, trace ? &trace->trunk : nullptr, backend);
  DiscOutput<T> out;
  out.patch = patch.forward(h, trace ? &trace->patch : nullptr, backend);
  out.logits = cls.forward(h, trace ? &trace->cls : nullptr, backend);
  if (out.logits.h != 1 || out.logits.w != 1)
    throw Error(Errc::ShapeMismatch, "discriminator input size does not match its configuration");
  return out;
}

template <typename T>
Tensor<T> Discriminator<T>::backward(const DiscTrace<T>& trace, const Tensor<T>& dpatch, const Tensor<T>& dlogits,
                                     std::vector<std::vector<T>>& grads, bool want_dx, Backend backend) const {
  const std::size_t a = trunk.params().size();
  const std::size_t b = a + patch.params().size();
  std::span<std::vector<T>> all(grads);
  Tensor<T> dh = patch.backward(trace.patch, dpatch, all.subspan(a, b - a), true, backend);
  if (!dlogits.data.empty()) {
    const Tensor<T> dc = cls.backward(trace.cls, dlogits, all.subspan(b), true, backend);
    for (std::size_t i = 0; i < dh.size(); ++i) dh.data[i] += dc.data[i];
  }
  return trunk.backward(trace.trunk, dh, all.subspan(0, a), want_dx, backend);
}

template <typename T>
Tensor<T> generator_forward(const Network<T>& g, const Tensor<T>& x, std::span<const int> domains, Trace<T>* trace,
                            Backend backend) {
  if (x.c != 3 || x.h % 4 != 0 || x.w % 4 != 0 || x.h < 4 || x.w < 4)
    throw Error(Errc::ShapeMismatch, "generator input must be n x 3 x h x w with h, w multiples of 4");
  return g.forward(with_labels(x, domains), trace, backend);
}

#define EMO_INSTANTIATE(T)                                                                          \
  template Tensor<T> tile_label<T>(ExpressionDomain, int, int);                                     \
  template Tensor<T> with_labels<T>(const Tensor<T>&, std::span<const int>);                        \
  template Network<T> build_generator<T>(const GeneratorConfig&);                                   \
  template Discriminator<T> build_discriminator<T>(const DiscriminatorConfig&, int);                \
  template struct Discriminator<T>;                                                                 \
  template Tensor<T> generator_forward<T>(const Network<T>&, const Tensor<T>&, std::span<const int>, \
                                          Trace<T>*, Backend);

EMO_INSTANTIATE(float)
EMO_INSTANTIATE(double)
#undef EMO_INSTANTIATE

}  // namespace emo::gan
