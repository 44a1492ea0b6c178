// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace saltubes {

using Shape = std::vector<std::size_t>;

inline constexpr std::size_t kMaxRank = 4;

std::size_t shape_product(std::span<const std::size_t> shape);
std::string shape_to_string(std::span<const std::size_t> shape);

/// Row-major tensor of doubles, rank 1..4, every extent positive.
class DenseTensor {
 public:
  DenseTensor() = default;
  /// Zero-filled tensor. Throws InvalidShape for empty/zero/over-rank shapes.
  explicit DenseTensor(Shape shape);
  /// Throws InvalidShape, or CorruptFile when data.size() != product(shape).
  DenseTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  /// Throws Data if any element is NaN or infinite.
  void require_finite() const;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

void validate_shape(std::span<const std::size_t> shape);

/// Dense F x H x W volume; the storage behind every saliency tube.
class Volume {
 public:
  Volume() = default;
  Volume(std::size_t frames, std::size_t height, std::size_t width, double fill = 0.0);
  Volume(std::size_t frames, std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::array<std::size_t, 3> dims() const noexcept { return {frames_, height_, width_}; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t index(std::size_t f, std::size_t h, std::size_t w) const noexcept {
    return (f * height_ + h) * width_ + w;
  }
  double& operator()(std::size_t f, std::size_t h, std::size_t w) noexcept {
    return data_[index(f, h, w)];
  }
  double operator()(std::size_t f, std::size_t h, std::size_t w) const noexcept {
    return data_[index(f, h, w)];
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  /// Contiguous H x W plane for frame f.
  std::span<const double> frame(std::size_t f) const noexcept {
    return std::span<const double>(data_).subspan(f * height_ * width_, height_ * width_);
  }

  DenseTensor to_tensor() const;
  /// Accepts rank-3 tensors only; throws Shape otherwise.
  static Volume from_tensor(const DenseTensor& tensor);

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  std::size_t frames_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Final-conv activations in canonical (frame, height, width, channel) order.
class ActivationVolume {
 public:
  ActivationVolume() = default;
  ActivationVolume(std::size_t frames, std::size_t height, std::size_t width,
                   std::size_t channels, double fill = 0.0);
  /// `tensor` must be rank 4 and already in canonical order.
  explicit ActivationVolume(DenseTensor tensor);

  std::size_t frames() const noexcept { return dims_[0]; }
  std::size_t height() const noexcept { return dims_[1]; }
  std::size_t width() const noexcept { return dims_[2]; }
  std::size_t channels() const noexcept { return dims_[3]; }
  std::size_t voxels() const noexcept { return dims_[0] * dims_[1] * dims_[2]; }

  std::size_t index(std::size_t f, std::size_t h, std::size_t w, std::size_t d) const noexcept {
    return ((f * dims_[1] + h) * dims_[2] + w) * dims_[3] + d;
  }
  double& operator()(std::size_t f, std::size_t h, std::size_t w, std::size_t d) noexcept {
    return tensor_.data()[index(f, h, w, d)];
  }
  double operator()(std::size_t f, std::size_t h, std::size_t w, std::size_t d) const noexcept {
    return tensor_.data()[index(f, h, w, d)];
  }

  const DenseTensor& tensor() const noexcept { return tensor_; }
  std::span<const double> data() const noexcept { return tensor_.data(); }
  std::span<double> data() noexcept { return tensor_.data(); }

  /// Single-frame volume holding frame f.
  ActivationVolume slice_frame(std::size_t f) const;
  /// Copy of channel d as an F x H x W volume.
  Volume channel(std::size_t d) const;

  friend bool operator==(const ActivationVolume&, const ActivationVolume&) = default;

 private:
  std::array<std::size_t, 4> dims_{};
  DenseTensor tensor_;
};

/// Prediction-layer weights: row i is the class vector y_i over D' channels.
struct ClassifierWeights {
  std::size_t classes = 0;
  std::size_t channels = 0;
  std::vector<double> matrix;  // classes x channels, row-major
  std::optional<std::vector<double>> bias;
  std::vector<std::string> class_labels;  // empty, or one per class

  ClassifierWeights() = default;
  ClassifierWeights(std::size_t n_classes, std::size_t n_channels, std::vector<double> values);

  std::span<const double> row(std::size_t class_index) const;
  double operator()(std::size_t class_index, std::size_t channel) const noexcept {
    return matrix[class_index * channels + channel];
  }
  double bias_of(std::size_t class_index) const noexcept {
    return bias ? (*bias)[class_index] : 0.0;
  }

  /// Throws if labels/bias lengths disagree with the class count.
  void validate() const;
  /// Throws Shape unless channels == acts.channels().
  void require_compatible(const ActivationVolume& acts) const;
  /// Exact-match lookup; throws Index when absent.
  std::size_t class_index_of(std::string_view label) const;

  static ClassifierWeights from_tensor(const DenseTensor& matrix);
};

/// Storage layout of a rank-4 activation tensor: a permutation of "FHWD".
class AxisOrder {
 public:
  /// Throws InvalidArgument unless `order` is a permutation of F, H, W, D.
  explicit AxisOrder(std::string_view order);
  static bool is_valid(std::string_view order) noexcept;

  const std::string& str() const noexcept { return order_; }
  /// Position in the stored layout of canonical axis c (0=F, 1=H, 2=W, 3=D).
  std::size_t stored_position(std::size_t canonical_axis) const noexcept {
    return positions_[canonical_axis];
  }

 private:
  std::string order_;
  std::array<std::size_t, 4> positions_{};
};

ActivationVolume canonicalize(const DenseTensor& tensor, const AxisOrder& order);
/// Inverse of canonicalize: lays the volume out in `order`.
DenseTensor decanonicalize(const ActivationVolume& volume, const AxisOrder& order);

}  // namespace saltubes
