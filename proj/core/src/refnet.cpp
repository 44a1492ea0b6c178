// SPDX-License-Identifier: Apache-2.0
#include "saltubes/refnet.hpp"

#include <cmath>
#include <cstring>

#include "saltubes/error.hpp"

namespace saltubes {

Conv3dLayer::Conv3dLayer(std::size_t out, std::size_t in, std::size_t kf_, std::size_t kh_, std::size_t kw_)
    : out_channels(out), in_channels(in), kf(kf_), kh(kh_), kw(kw_),
      kernels(out * in * kf_ * kh_ * kw_, 0.0), bias(out, 0.0) {
  validate();
}

void Conv3dLayer::validate() const {
  if (out_channels == 0 || in_channels == 0) {
    throw Error(ErrorKind::InvalidShape, "conv layer needs at least one input and output channel");
  }
  if (kf % 2 == 0 || kh % 2 == 0 || kw % 2 == 0) {
    throw Error(ErrorKind::InvalidShape, "conv kernel extents must be odd");
  }
  if (kernels.size() != out_channels * in_channels * kf * kh * kw || bias.size() != out_channels) {
    throw Error(ErrorKind::Shape, "conv parameter buffers do not match the layer dimensions");
  }
}

void RefNet::validate() const {
  if (layers.empty()) throw Error(ErrorKind::InvalidShape, "refnet needs at least one conv layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].validate();
    if (l > 0 && layers[l].in_channels != layers[l - 1].out_channels) {
      throw Error(ErrorKind::Shape, "conv layer " + std::to_string(l) + " input channels do not chain");
    }
  }
  head.validate();
  if (head.channels != layers.back().out_channels) {
    throw Error(ErrorKind::Shape, "head columns must equal the last layer's output channels");
  }
}

ActivationVolume conv3d_forward(const ActivationVolume& input, const Conv3dLayer& layer) {
  if (input.channels() != layer.in_channels) {
    throw Error(ErrorKind::Shape, "conv expects " + std::to_string(layer.in_channels) +
                                      " input channels, got " + std::to_string(input.channels()));
  }
  const auto F = static_cast<std::ptrdiff_t>(input.frames());
  const auto H = static_cast<std::ptrdiff_t>(input.height());
  const auto W = static_cast<std::ptrdiff_t>(input.width());
  const auto pf = static_cast<std::ptrdiff_t>(layer.kf / 2);
  const auto ph = static_cast<std::ptrdiff_t>(layer.kh / 2);
  const auto pw = static_cast<std::ptrdiff_t>(layer.kw / 2);

  ActivationVolume out(input.frames(), input.height(), input.width(), layer.out_channels);
  for (std::ptrdiff_t f = 0; f < F; ++f)
    for (std::ptrdiff_t h = 0; h < H; ++h)
      for (std::ptrdiff_t w = 0; w < W; ++w)
        for (std::size_t o = 0; o < layer.out_channels; ++o) {
          double acc = layer.bias[o];
          for (std::size_t df = 0; df < layer.kf; ++df) {
            const std::ptrdiff_t sf = f + static_cast<std::ptrdiff_t>(df) - pf;
            if (sf < 0 || sf >= F) continue;
            for (std::size_t dh = 0; dh < layer.kh; ++dh) {
              const std::ptrdiff_t sh = h + static_cast<std::ptrdiff_t>(dh) - ph;
              if (sh < 0 || sh >= H) continue;
              for (std::size_t dw = 0; dw < layer.kw; ++dw) {
                const std::ptrdiff_t sw = w + static_cast<std::ptrdiff_t>(dw) - pw;
                if (sw < 0 || sw >= W) continue;
                for (std::size_t i = 0; i < layer.in_channels; ++i) {
                  acc += layer.weight(o, i, df, dh, dw) *
                         input(static_cast<std::size_t>(sf), static_cast<std::size_t>(sh),
                               static_cast<std::size_t>(sw), i);
                }
              }
            }
          }
          out(static_cast<std::size_t>(f), static_cast<std::size_t>(h), static_cast<std::size_t>(w), o) =
              acc > 0.0 ? acc : 0.0;
        }
  return out;
}

std::vector<double> global_average_pool(const ActivationVolume& acts) {
  std::vector<double> gap(acts.channels(), 0.0);
  const auto data = acts.data();
  for (std::size_t v = 0; v < acts.voxels(); ++v)
    for (std::size_t d = 0; d < acts.channels(); ++d) gap[d] += data[v * acts.channels() + d];
  for (double& g : gap) g /= static_cast<double>(acts.voxels());
  return gap;
}

ForwardResult forward(const RefNet& net, const ActivationVolume& clip) {
  net.validate();
  ActivationVolume x = conv3d_forward(clip, net.layers.front());
  for (std::size_t l = 1; l < net.layers.size(); ++l) x = conv3d_forward(x, net.layers[l]);

  const std::vector<double> gap = global_average_pool(x);
  std::vector<double> logits(net.head.classes);
  for (std::size_t i = 0; i < net.head.classes; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < net.head.channels; ++j) acc += net.head(i, j) * gap[j];
    logits[i] = acc + net.head.bias_of(i);
  }
  return {std::move(x), std::move(logits)};
}

RefNet make_seeded(std::uint64_t seed, const RefNetDims& dims) {
  if (dims.layers.empty() || dims.classes == 0 || dims.input_channels == 0) {
    throw Error(ErrorKind::InvalidShape, "refnet dims need a layer, a class and an input channel");
  }
  Lcg64 rng(seed);
  RefNet net;
  std::size_t in = dims.input_channels;
  for (const LayerDims& ld : dims.layers) {
    Conv3dLayer layer(ld.out_channels, in, ld.kf, ld.kh, ld.kw);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in * ld.kf * ld.kh * ld.kw));
    for (double& k : layer.kernels) k = rng.uniform(-scale, scale);
    for (double& b : layer.bias) b = rng.uniform(-0.1, 0.1);
    net.layers.push_back(std::move(layer));
    in = ld.out_channels;
  }
  std::vector<double> head(dims.classes * in);
  for (double& y : head) y = rng.uniform(-1.0, 1.0);
  net.head = ClassifierWeights(dims.classes, in, std::move(head));
  std::vector<double> bias(dims.classes);
  for (double& b : bias) b = rng.uniform(-0.1, 0.1);
  net.head.bias = std::move(bias);
  return net;
}

ActivationVolume make_seeded_clip(std::uint64_t seed, std::size_t frames, std::size_t height,
                                  std::size_t width, std::size_t channels) {
  Lcg64 rng(seed);
  ActivationVolume clip(frames, height, width, channels);
  for (double& v : clip.data()) v = rng.uniform();
  return clip;
}

namespace {

class Fnv1a {
 public:
  void add(std::span<const double> values) {
    for (double v : values) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof v);
      for (unsigned char b : bytes) {
        hash_ ^= b;
        hash_ *= 0x100000001b3ULL;
      }
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t weights_digest(const RefNet& net) {
  Fnv1a h;
  for (const Conv3dLayer& layer : net.layers) {
    h.add(layer.kernels);
    h.add(layer.bias);
  }
  h.add(net.head.matrix);
  if (net.head.bias) h.add(*net.head.bias);
  return h.value();
}

}  // namespace saltubes
