// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "saltubes/tensor.hpp"

namespace saltubes {

/// Stride-1, same-padded 3D convolution followed by ReLU. Kernel extents are odd.
struct Conv3dLayer {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t kf = 1, kh = 1, kw = 1;
  std::vector<double> kernels;  // [out][in][kf][kh][kw]
  std::vector<double> bias;     // [out]

  Conv3dLayer() = default;
  Conv3dLayer(std::size_t out, std::size_t in, std::size_t kf, std::size_t kh, std::size_t kw);

  double& weight(std::size_t o, std::size_t i, std::size_t df, std::size_t dh, std::size_t dw) noexcept {
    return kernels[(((o * in_channels + i) * kf + df) * kh + dh) * kw + dw];
  }
  double weight(std::size_t o, std::size_t i, std::size_t df, std::size_t dh, std::size_t dw) const noexcept {
    return kernels[(((o * in_channels + i) * kf + df) * kh + dh) * kw + dw];
  }

  void validate() const;
};

/// conv -> ReLU (repeated) -> global average pool -> linear head.
struct RefNet {
  std::vector<Conv3dLayer> layers;
  ClassifierWeights head;

  void validate() const;
};

struct ForwardResult {
  ActivationVolume activations;  // output of the last conv layer
  std::vector<double> logits;
};

ActivationVolume conv3d_forward(const ActivationVolume& input, const Conv3dLayer& layer);
ForwardResult forward(const RefNet& net, const ActivationVolume& clip);

/// Per-channel mean over (F, H, W).
std::vector<double> global_average_pool(const ActivationVolume& acts);

/// Deterministic 64-bit LCG (Knuth MMIX constants):
///   state <- state * 6364136223846793005 + 1442695040888963407
/// seeded with state = seed. uniform() takes the top 53 bits of the new state
/// and scales by 2^-53, giving [0, 1).
class Lcg64 {
 public:
  explicit Lcg64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() noexcept {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_;
  }
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

struct LayerDims {
  std::size_t out_channels;
  std::size_t kf = 3, kh = 3, kw = 3;
};

struct RefNetDims {
  std::size_t input_channels = 1;
  std::vector<LayerDims> layers;
  std::size_t classes = 2;
};

/// Draw order: for each layer its kernels then its bias, then the head matrix,
/// then the head bias. Kernels ~ U(-s, s) with s = 1/sqrt(fan_in), layer bias
/// ~ U(-0.1, 0.1), head ~ U(-1, 1), head bias ~ U(-0.1, 0.1).
RefNet make_seeded(std::uint64_t seed, const RefNetDims& dims);

/// Clip of U(0, 1) values drawn from the same generator.
ActivationVolume make_seeded_clip(std::uint64_t seed, std::size_t frames, std::size_t height,
                                  std::size_t width, std::size_t channels);

/// FNV-1a (64-bit) over the little-endian bytes of every parameter, in draw order.
std::uint64_t weights_digest(const RefNet& net);

}  // namespace saltubes
