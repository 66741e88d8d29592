#include "emo/gan/objective.hpp"

#include <algorithm>
#include <cmath>

#include "emo/core/error.hpp"

namespace emo::gan {

using nn::sigmoid;
using nn::softplus;

double adversarial_loss(std::span<const double> d_real, std::span<const double> d_fake) {
  auto clamp = [](double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); };
  double real = 0.0, fake = 0.0;
  for (double p : d_real) real += std::log(clamp(p));
  for (double p : d_fake) fake += std::log(1.0 - clamp(p));
  if (!d_real.empty()) real /= static_cast<double>(d_real.size());
  if (!d_fake.empty()) fake /= static_cast<double>(d_fake.size());
  return real + fake;
}

template <typename T>
double adversarial_loss_from_logits(const Tensor<T>& z_real, const Tensor<T>& z_fake) {
  std::vector<double> pr(z_real.size()), pf(z_fake.size());
  for (std::size_t i = 0; i < pr.size(); ++i) pr[i] = sigmoid(static_cast<double>(z_real.data[i]));
  for (std::size_t i = 0; i < pf.size(); ++i) pf[i] = sigmoid(static_cast<double>(z_fake.data[i]));
  return adversarial_loss(pr, pf);
}

template <typename T>
T real_term(const Tensor<T>& z, Tensor<T>* dz) {
  const double m = static_cast<double>(z.size());
  double acc = 0.0;
  if (dz) *dz = Tensor<T>(z.n, z.c, z.h, z.w);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double v = z.data[i];
    acc += softplus(-v);
    if (dz) dz->data[i] = static_cast<T>((sigmoid(v) - 1.0) / m);
  }
  return static_cast<T>(acc / m);
}

template <typename T>
T fake_term(const Tensor<T>& z, Tensor<T>* dz) {
  const double m = static_cast<double>(z.size());
  double acc = 0.0;
  if (dz) *dz = Tensor<T>(z.n, z.c, z.h, z.w);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double v = z.data[i];
    acc += softplus(v);
    if (dz) dz->data[i] = static_cast<T>(sigmoid(v) / m);
  }
  return static_cast<T>(acc / m);
}

template <typename T>
T domain_cross_entropy(const Tensor<T>& logits, std::span<const int> labels, Tensor<T>* dlogits) {
  if (logits.c != kNumDomains || logits.h != 1 || logits.w != 1 || static_cast<int>(labels.size()) != logits.n)
    throw Error(Errc::ShapeMismatch, "domain logits must be n x 7 x 1 x 1 with n labels");
  if (dlogits) *dlogits = Tensor<T>(logits.n, logits.c, 1, 1);
  double acc = 0.0;
  for (int i = 0; i < logits.n; ++i) {
    const T* z = logits.sample(i);
    double mx = z[0];
    for (int k = 1; k < kNumDomains; ++k) mx = std::max(mx, static_cast<double>(z[k]));
    double sum = 0.0;
    for (int k = 0; k < kNumDomains; ++k) sum += std::exp(z[k] - mx);
    const double lse = mx + std::log(sum);
    const int y = labels[static_cast<std::size_t>(i)];
    acc += lse - z[y];
    if (dlogits) {
      for (int k = 0; k < kNumDomains; ++k) {
        const double p = std::exp(z[k] - lse);
        dlogits->sample(i)[k] = static_cast<T>((p - (k == y ? 1.0 : 0.0)) / logits.n);
      }
    }
  }
  return static_cast<T>(acc / logits.n);
}

template <typename T>
T l1_loss(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>* da) {
  if (!a.same_shape(b)) throw Error(Errc::ShapeMismatch, "l1_loss shapes differ");
  const double m = static_cast<double>(a.size());
  double acc = 0.0;
  if (da) *da = Tensor<T>(a.n, a.c, a.h, a.w);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    acc += std::abs(d);
    if (da) da->data[i] = static_cast<T>(((d > 0) - (d < 0)) / m);
  }
  return static_cast<T>(acc / m);
}

template <typename T>
FakePass<T> make_fakes(const Network<T>& g, const Tensor<T>& real, std::span<const int> targets, Backend backend) {
  FakePass<T> out;
  out.fake = generator_forward(g, real, targets, &out.trace, backend);
  return out;
}

template <typename T>
void discriminator_objective(const Discriminator<T>& d, const Tensor<T>& real, std::span<const int> labels,
                             const Tensor<T>& fake, const LossWeights& w, LossComponents& out,
                             std::vector<std::vector<T>>* grads, Backend backend) {
  DiscTrace<T> tr_real, tr_fake;
  const bool g = grads != nullptr;
  const DiscOutput<T> o_real = d.forward(real, g ? &tr_real : nullptr, backend);
  const DiscOutput<T> o_fake = d.forward(fake, g ? &tr_fake : nullptr, backend);
  Tensor<T> dz_real, dz_fake, dlogits;
  const double t_real = real_term(o_real.patch, g ? &dz_real : nullptr);
  const double t_fake = fake_term(o_fake.patch, g ? &dz_fake : nullptr);
  const double ce = domain_cross_entropy(o_real.logits, labels, g ? &dlogits : nullptr);
  out.d_adv = t_real + t_fake;
  out.cls_real = ce;
  out.d_loss = out.d_adv + w.lambda_cls * ce;
  out.adv = adversarial_loss_from_logits(o_real.patch, o_fake.patch);
  if (!g) return;
  for (T& v : dlogits.data) v *= static_cast<T>(w.lambda_cls);
  d.backward(tr_real, dz_real, dlogits, *grads, false, backend);
  d.backward(tr_fake, dz_fake, Tensor<T>{}, *grads, false, backend);
}

template <typename T>
void generator_objective(const Network<T>& g, const Discriminator<T>& d, const Tensor<T>& real,
                         std::span<const int> labels, std::span<const int> targets, const FakePass<T>& fake,
                         const LossWeights& w, LossComponents& out, std::vector<std::vector<T>>* grads,
                         Backend backend) {
  const bool want = grads != nullptr;
  DiscTrace<T> tr_d;
  const DiscOutput<T> o = d.forward(fake.fake, want ? &tr_d : nullptr, backend);
  Trace<T> tr_rec;
  const Tensor<T> rec = generator_forward(g, fake.fake, labels, want ? &tr_rec : nullptr, backend);

  Tensor<T> dz, dlogits, drec;
  out.g_adv = real_term(o.patch, want ? &dz : nullptr);
  out.cls_fake = domain_cross_entropy(o.logits, targets, want ? &dlogits : nullptr);
  out.rec = l1_loss(rec, real, want ? &drec : nullptr);
  out.g_loss = out.g_adv + w.lambda_cls * out.cls_fake + w.lambda_rec * out.rec;
  if (!want) return;

  for (T& v : dlogits.data) v *= static_cast<T>(w.lambda_cls);
  for (T& v : drec.data) v *= static_cast<T>(w.lambda_rec);
  // Discriminator parameter gradients are computed but discarded.
  auto scratch = d.zero_grads();
  Tensor<T> dfake = d.backward(tr_d, dz, dlogits, scratch, true, backend);
  const Tensor<T> dinput = g.backward(tr_rec, drec, *grads, true, backend);
  // The reconstruction pass saw [fake, labels]; only the image channels flow back.
  for (int i = 0; i < dfake.n; ++i) {
    T* dst = dfake.sample(i);
    const T* src = dinput.sample(i);
    for (std::size_t k = 0; k < dfake.sample_size(); ++k) dst[k] += src[k];
  }
  g.backward(fake.trace, dfake, *grads, false, backend);
}

template <typename T>
LossComponents full_objective(const Tensor<T>& real, std::span<const int> labels, std::span<const int> targets,
                              const Network<T>& g, const Discriminator<T>& d, const LossWeights& w) {
  LossComponents c;
  const FakePass<T> fake = make_fakes(g, real, targets);
  discriminator_objective<T>(d, real, labels, fake.fake, w, c, nullptr);
  generator_objective<T>(g, d, real, labels, targets, fake, w, c, nullptr);
  return c;
}

#define EMO_INSTANTIATE(T)                                                                                     \
  template double adversarial_loss_from_logits<T>(const Tensor<T>&, const Tensor<T>&);                        \
  template T real_term<T>(const Tensor<T>&, Tensor<T>*);                                                       \
  template T fake_term<T>(const Tensor<T>&, Tensor<T>*);                                                       \
  template T domain_cross_entropy<T>(const Tensor<T>&, std::span<const int>, Tensor<T>*);                      \
  template T l1_loss<T>(const Tensor<T>&, const Tensor<T>&, Tensor<T>*);                                       \
  template FakePass<T> make_fakes<T>(const Network<T>&, const Tensor<T>&, std::span<const int>, Backend);      \
  template void discriminator_objective<T>(const Discriminator<T>&, const Tensor<T>&, std::span<const int>,    \
                                           const Tensor<T>&, const LossWeights&, LossComponents&,              \
                                           std::vector<std::vector<T>>*, Backend);                             \
  template void generator_objective<T>(const Network<T>&, const Discriminator<T>&, const Tensor<T>&,           \
                                       std::span<const int>, std::span<const int>, const FakePass<T>&,         \
                                       const LossWeights&, LossComponents&, std::vector<std::vector<T>>*,      \
                                       Backend);                                                               \
  template LossComponents full_objective<T>(const Tensor<T>&, std::span<const int>, std::span<const int>,      \
                                            const Network<T>&, const Discriminator<T>&, const LossWeights&);

EMO_INSTANTIATE(float)
EMO_INSTANTIATE(double)
#undef EMO_INSTANTIATE

}  // namespace emo::gan
