// SPDX-License-Identifier: Apache-2.0
#include "saltubes/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "saltubes/error.hpp"

namespace saltubes {

std::size_t shape_product(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_to_string(std::span<const std::size_t> shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

void validate_shape(std::span<const std::size_t> shape) {
  if (shape.empty() || shape.size() > kMaxRank) {
    throw Error(ErrorKind::InvalidShape,
                "tensor rank must be within 1.." + std::to_string(kMaxRank) + ", got " +
                    std::to_string(shape.size()));
  }
  if (std::ranges::any_of(shape, [](std::size_t e) { return e == 0; })) {
    throw Error(ErrorKind::InvalidShape,
                "tensor extents must be positive, got " + shape_to_string(shape));
  }
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_product(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != shape_product(shape_)) {
    throw Error(ErrorKind::CorruptFile, "shape " + shape_to_string(shape_) + " needs " +
                                            std::to_string(shape_product(shape_)) +
                                            " elements, got " + std::to_string(data_.size()));
  }
}

void DenseTensor::require_finite() const {
  auto it = std::ranges::find_if(data_, [](double v) { return !std::isfinite(v); });
  if (it != data_.end()) {
    throw Error(ErrorKind::Data, "non-finite element at flat index " +
                                     std::to_string(it - data_.begin()));
  }
}

Volume::Volume(std::size_t frames, std::size_t height, std::size_t width, double fill)
    : frames_(frames), height_(height), width_(width) {
  validate_shape(std::array{frames, height, width});
  data_.assign(frames * height * width, fill);
}

Volume::Volume(std::size_t frames, std::size_t height, std::size_t width, std::vector<double> data)
    : frames_(frames), height_(height), width_(width), data_(std::move(data)) {
  validate_shape(std::array{frames, height, width});
  if (data_.size() != frames * height * width) {
    throw Error(ErrorKind::Shape, "volume data length does not match its dimensions");
  }
}

DenseTensor Volume::to_tensor() const {
  return DenseTensor({frames_, height_, width_}, data_);
}

Volume Volume::from_tensor(const DenseTensor& tensor) {
  if (tensor.rank() != 3) {
    throw Error(ErrorKind::Shape,
                "expected a rank-3 F x H x W tensor, got shape " + shape_to_string(tensor.shape()));
  }
  const auto& s = tensor.shape();
  return Volume(s[0], s[1], s[2], std::vector<double>(tensor.data().begin(), tensor.data().end()));
}

ActivationVolume::ActivationVolume(std::size_t frames, std::size_t height, std::size_t width,
                                   std::size_t channels, double fill)
    : dims_{frames, height, width, channels},
      tensor_(Shape{frames, height, width, channels}) {
  std::ranges::fill(tensor_.data(), fill);
}

ActivationVolume::ActivationVolume(DenseTensor tensor) : tensor_(std::move(tensor)) {
  if (tensor_.rank() != 4) {
    throw Error(ErrorKind::Shape, "activation volume needs a rank-4 tensor, got shape " +
                                      shape_to_string(tensor_.shape()));
  }
  std::ranges::copy(tensor_.shape(), dims_.begin());
}

ActivationVolume ActivationVolume::slice_frame(std::size_t f) const {
  if (f >= frames()) throw Error(ErrorKind::Index, "frame index out of range");
  const std::size_t plane = height() * width() * channels();
  auto first = tensor_.data().begin() + static_cast<std::ptrdiff_t>(f * plane);
  return ActivationVolume(DenseTensor({1, height(), width(), channels()},
                                      std::vector<double>(first, first + static_cast<std::ptrdiff_t>(plane))));
}

Volume ActivationVolume::channel(std::size_t d) const {
  if (d >= channels()) throw Error(ErrorKind::Index, "channel index out of range");
  Volume out(frames(), height(), width());
  auto src = data();
  auto dst = out.data();
  for (std::size_t v = 0; v < voxels(); ++v) dst[v] = src[v * channels() + d];
  return out;
}

ClassifierWeights::ClassifierWeights(std::size_t n_classes, std::size_t n_channels,
                                     std::vector<double> values)
    : classes(n_classes), channels(n_channels), matrix(std::move(values)) {
  if (classes == 0 || channels == 0) {
    throw Error(ErrorKind::InvalidShape, "classifier weights need at least one class and channel");
  }
  if (matrix.size() != classes * channels) {
    throw Error(ErrorKind::Shape, "classifier matrix length does not match N x D'");
  }
}

std::span<const double> ClassifierWeights::row(std::size_t class_index) const {
  if (class_index >= classes) {
    throw Error(ErrorKind::Index, "class index " + std::to_string(class_index) +
                                      " out of range [0, " + std::to_string(classes) + ")");
  }
  return std::span<const double>(matrix).subspan(class_index * channels, channels);
}

void ClassifierWeights::validate() const {
  if (matrix.size() != classes * channels) {
    throw Error(ErrorKind::Shape, "classifier matrix length does not match N x D'");
  }
  if (bias && bias->size() != classes) {
    throw Error(ErrorKind::Shape, "bias length " + std::to_string(bias->size()) +
                                      " does not match class count " + std::to_string(classes));
  }
  if (!class_labels.empty() && class_labels.size() != classes) {
    throw Error(ErrorKind::Shape, std::to_string(class_labels.size()) +
                                      " class labels for " + std::to_string(classes) + " classes");
  }
}

void ClassifierWeights::require_compatible(const ActivationVolume& acts) const {
  if (channels != acts.channels()) {
    throw Error(ErrorKind::Shape, "classifier has " + std::to_string(channels) +
                                      " columns but activations have " +
                                      std::to_string(acts.channels()) + " channels");
  }
}

std::size_t ClassifierWeights::class_index_of(std::string_view label) const {
  auto it = std::ranges::find(class_labels, label);
  if (it == class_labels.end()) {
    throw Error(ErrorKind::Index, "unknown class label '" + std::string(label) + "'");
  }
  return static_cast<std::size_t>(it - class_labels.begin());
}

ClassifierWeights ClassifierWeights::from_tensor(const DenseTensor& matrix) {
  if (matrix.rank() != 2) {
    throw Error(ErrorKind::Shape, "classifier weights must be rank 2 (N x D'), got shape " +
                                      shape_to_string(matrix.shape()));
  }
  return ClassifierWeights(matrix.shape()[0], matrix.shape()[1],
                           std::vector<double>(matrix.data().begin(), matrix.data().end()));
}

namespace {
constexpr std::string_view kCanonicalAxes = "FHWD";
}

bool AxisOrder::is_valid(std::string_view order) noexcept {
  if (order.size() != 4) return false;
  for (char axis : kCanonicalAxes) {
    if (std::ranges::count(order, axis) != 1) return false;
  }
  return true;
}

AxisOrder::AxisOrder(std::string_view order) : order_(order) {
  if (!is_valid(order)) {
    throw Error(ErrorKind::InvalidArgument,
                "axis order '" + order_ + "' is not a permutation of F, H, W, D");
  }
  for (std::size_t c = 0; c < 4; ++c) positions_[c] = order_.find(kCanonicalAxes[c]);
}

namespace {

// Strides of the stored tensor, re-indexed by canonical axis.
std::array<std::size_t, 4> canonical_strides(const Shape& stored, const AxisOrder& order) {
  std::array<std::size_t, 4> stored_strides{};
  std::size_t stride = 1;
  for (std::size_t k = 4; k-- > 0;) {
    stored_strides[k] = stride;
    stride *= stored[k];
  }
  std::array<std::size_t, 4> out{};
  for (std::size_t c = 0; c < 4; ++c) out[c] = stored_strides[order.stored_position(c)];
  return out;
}

}  // namespace

ActivationVolume canonicalize(const DenseTensor& tensor, const AxisOrder& order) {
  if (tensor.rank() != 4) {
    throw Error(ErrorKind::Shape, "canonicalize needs a rank-4 tensor, got shape " +
                                      shape_to_string(tensor.shape()));
  }
  const auto& stored = tensor.shape();
  ActivationVolume out(stored[order.stored_position(0)], stored[order.stored_position(1)],
                       stored[order.stored_position(2)], stored[order.stored_position(3)]);
  const auto strides = canonical_strides(stored, order);
  auto src = tensor.data();
  auto dst = out.data();
  std::size_t flat = 0;
  for (std::size_t f = 0; f < out.frames(); ++f)
    for (std::size_t h = 0; h < out.height(); ++h)
      for (std::size_t w = 0; w < out.width(); ++w)
        for (std::size_t d = 0; d < out.channels(); ++d)
          dst[flat++] = src[f * strides[0] + h * strides[1] + w * strides[2] + d * strides[3]];
  return out;
}

DenseTensor decanonicalize(const ActivationVolume& volume, const AxisOrder& order) {
  const std::array<std::size_t, 4> canon{volume.frames(), volume.height(), volume.width(),
                                         volume.channels()};
  Shape stored(4);
  for (std::size_t c = 0; c < 4; ++c) stored[order.stored_position(c)] = canon[c];
  DenseTensor out(stored);
  const auto strides = canonical_strides(stored, order);
  auto src = volume.data();
  auto dst = out.data();
  std::size_t flat = 0;
  for (std::size_t f = 0; f < canon[0]; ++f)
    for (std::size_t h = 0; h < canon[1]; ++h)
      for (std::size_t w = 0; w < canon[2]; ++w)
        for (std::size_t d = 0; d < canon[3]; ++d)
          dst[f * strides[0] + h * strides[1] + w * strides[2] + d * strides[3]] = src[flat++];
  return out;
}

}  // namespace saltubes
