#pragma once

#include <span>
#include <vector>

#include "emo/gan/model.hpp"

namespace emo::gan {

inline constexpr double kProbClamp = 1e-7;

/// L(G, D) = E[log D(x)] + E[log(1 - D(G(y)))], probabilities clamped to
/// [1e-7, 1 - 1e-7], each expectation a mean over all given entries.
double adversarial_loss(std::span<const double> d_real, std::span<const double> d_fake);

/// Same, from realness logits (sigmoid applied first).
template <typename T>
double adversarial_loss_from_logits(const Tensor<T>& z_real, const Tensor<T>& z_fake);

struct LossWeights {
  double lambda_cls = 1.0;
  double lambda_rec = 10.0;
};

struct LossComponents {
  double d_loss = 0;    // d_adv + lambda_cls * cls_real
  double g_loss = 0;    // g_adv + lambda_cls * cls_fake + lambda_rec * rec
  double adv = 0;       // adversarial_loss on the same batch
  double d_adv = 0;     // -E[log D(x)] - E[log(1 - D(G))], from logits
  double g_adv = 0;     // -E[log D(G)], from logits
  double cls_real = 0;  // domain cross-entropy on real images vs. true labels
  double cls_fake = 0;  // domain cross-entropy on fakes vs. target labels
  double rec = 0;       // mean |G(G(x, target), true) - x|
};

// Term-level losses. When the gradient pointer is non-null it receives
// d(term)/d(input), already divided by the element count of the mean.

/// mean softplus(-z): the -log D term for images labeled real.
template <typename T>
T real_term(const Tensor<T>& z, Tensor<T>* dz);

/// mean softplus(z): the -log(1 - D) term for images labeled fake.
template <typename T>
T fake_term(const Tensor<T>& z, Tensor<T>* dz);

/// Mean softmax cross-entropy of n x 7 x 1 x 1 logits against class codes.
template <typename T>
T domain_cross_entropy(const Tensor<T>& logits, std::span<const int> labels, Tensor<T>* dlogits);

/// Mean absolute difference; gradient w.r.t. `a` uses sign(0) = 0.
template <typename T>
T l1_loss(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>* da);

/// A generator pass kept for reuse by both updates of a training step.
template <typename T>
struct FakePass {
  Tensor<T> fake;
  Trace<T> trace;
};

template <typename T>
FakePass<T> make_fakes(const Network<T>& g, const Tensor<T>& real, std::span<const int> targets,
                       Backend backend = Backend::Fast);

/// Discriminator objective on (real, fake); fills d_loss, d_adv, adv and
/// cls_real. Accumulates parameter gradients when `grads` is non-null.
template <typename T>
void discriminator_objective(const Discriminator<T>& d, const Tensor<T>& real, std::span<const int> labels,
                             const Tensor<T>& fake, const LossWeights& w, LossComponents& out,
                             std::vector<std::vector<T>>* grads, Backend backend = Backend::Fast);

/// Generator objective given a fake pass from make_fakes; fills g_loss,
/// g_adv, cls_fake and rec. Accumulates generator gradients when non-null.
template <typename T>
void generator_objective(const Network<T>& g, const Discriminator<T>& d, const Tensor<T>& real,
                         std::span<const int> labels, std::span<const int> targets, const FakePass<T>& fake,
                         const LossWeights& w, LossComponents& out, std::vector<std::vector<T>>* grads,
                         Backend backend = Backend::Fast);

/// Both objectives at fixed parameters, no gradients.
template <typename T>
LossComponents full_objective(const Tensor<T>& real, std::span<const int> labels, std::span<const int> targets,
                              const Network<T>& g, const Discriminator<T>& d, const LossWeights& w);

}  // namespace emo::gan
