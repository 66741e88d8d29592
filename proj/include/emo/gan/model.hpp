#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "emo/gan/domain.hpp"
#include "emo/nn/network.hpp"

namespace emo::gan {

using nn::Backend;
using nn::Network;
using nn::Tensor;
using nn::Trace;

struct GeneratorConfig {
  int width = 64;       // channels after the first conv
  int res_blocks = 6;
};

struct DiscriminatorConfig {
  int width = 64;       // channels after the first stride-2 conv
  int layers = 6;       // number of stride-2 convs
  double slope = 0.01;  // leaky ReLU
};

/// Full-size defaults for 128x128 faces.
struct ModelConfig {
  int image_size = 128;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
};

/// 1 x 7 x h x w one-hot map; channel code(d) is all ones.
template <typename T>
Tensor<T> tile_label(ExpressionDomain d, int h, int w);

/// Concatenates images (n x 3 x h x w) with the tiled one-hot of domains[i].
template <typename T>
Tensor<T> with_labels(const Tensor<T>& images, std::span<const int> domains);

template <typename T>
Network<T> build_generator(const GeneratorConfig& cfg);

template <typename T>
struct DiscOutput {
  Tensor<T> patch;   // n x 1 x s x s realness logits
  Tensor<T> logits;  // n x 7 x 1 x 1 domain logits
};

template <typename T>
struct DiscTrace {
  Trace<T> trunk, patch, cls;
};

/// Shared stride-2 trunk with a patch realness head and a domain head.
/// Parameters (and gradients) are ordered trunk, patch head, domain head.
template <typename T>
struct Discriminator {
  Network<T> trunk{"D.trunk."};
  Network<T> patch{"D.patch."};
  Network<T> cls{"D.cls."};

  std::vector<nn::ParamTensor<T>*> param_refs();
  std::vector<const nn::ParamTensor<T>*> param_refs() const;
  std::vector<std::vector<T>> zero_grads() const;
  std::size_t param_count() const noexcept;

  DiscOutput<T> forward(const Tensor<T>& x, DiscTrace<T>* trace, Backend backend = Backend::Fast) const;

  /// `dlogits` may be empty when the domain head receives no gradient.
  Tensor<T> backward(const DiscTrace<T>& trace, const Tensor<T>& dpatch, const Tensor<T>& dlogits,
                     std::vector<std::vector<T>>& grads, bool want_dx,
                     Backend backend = Backend::Fast) const;

  template <typename U>
  Discriminator<U> cast() const {
    return Discriminator<U>{trunk.template cast<U>(), patch.template cast<U>(), cls.template cast<U>()};
  }
};

/// Throws BadConfig when image_size is not divisible by 2^layers.
template <typename T>
Discriminator<T> build_discriminator(const DiscriminatorConfig& cfg, int image_size);

/// x: n x 3 x h x w in [-1, 1]. Throws ShapeMismatch for other channel counts
/// or when h, w are not multiples of 4.
template <typename T>
Tensor<T> generator_forward(const Network<T>& g, const Tensor<T>& x, std::span<const int> domains,
                            Trace<T>* trace = nullptr, Backend backend = Backend::Fast);

}  // namespace emo::gan
