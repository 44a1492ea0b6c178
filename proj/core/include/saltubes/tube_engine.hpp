// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "saltubes/tensor.hpp"

namespace saltubes {

/// Rule for choosing which channels of a class weight row are kept.
///
/// - nonneg:        keep y_ij >= 0
/// - absolute(t):   keep y_ij >= t
/// - percentile(p): t is the p-th percentile of the row (linear interpolation
///                  between order statistics), keep y_ij >= t
/// - topk(k):       keep the k largest weights, ties going to the lower index
struct TauPolicy {
  enum class Kind { NonNeg, Absolute, Percentile, TopK };

  Kind kind = Kind::NonNeg;
  double value = 0.0;

  static TauPolicy nonneg() { return {}; }
  static TauPolicy absolute(double tau) { return {Kind::Absolute, tau}; }
  static TauPolicy percentile(double p) { return {Kind::Percentile, p}; }
  static TauPolicy topk(std::size_t k) { return {Kind::TopK, static_cast<double>(k)}; }

  /// Parses "nonneg", "absolute:T", "percentile:P" or "topk:K". Checks every
  /// constraint that does not depend on D' (so "topk:0" is rejected here).
  static TauPolicy parse(std::string_view text);
  std::string to_string() const;

  /// Throws InvalidArgument when the policy is unusable for `channels`.
  void validate(std::size_t channels) const;
};

/// Kept channel indices for one class. Excluded channels are the complement.
struct FeatureSelection {
  std::size_t class_index = 0;
  std::size_t channels = 0;
  std::vector<std::size_t> selected;  // ascending

  std::size_t excluded_count() const noexcept { return channels - selected.size(); }
};

struct FeatureMap {
  std::size_t channel = 0;
  double weight = 0.0;
  Volume values;  // weight * activation channel
};

struct WeightedFeatureMaps {
  std::size_t class_index = 0;
  std::vector<FeatureMap> maps;  // ascending channel order
};

enum class Resolution { Activation, Video };
std::string_view to_string(Resolution r);

struct SaliencyTube {
  std::size_t class_index = 0;
  Volume raw;
  std::optional<Volume> normalized;
  Resolution resolution = Resolution::Activation;
};

/// Chooses the retained channels of row `class_index`.
/// Throws Index for a bad class, InvalidArgument for an unusable policy and
/// EmptySelection when nothing survives the threshold.
FeatureSelection select_features(const ClassifierWeights& weights, std::size_t class_index,
                                 const TauPolicy& policy);

/// One map per selected channel, map(f,h,w) = y_ij * a(f,h,w,j).
WeightedFeatureMaps weight_activations(const ActivationVolume& acts,
                                       const ClassifierWeights& weights,
                                       const FeatureSelection& selection);

/// Voxel-wise sum of all weighted maps; activation resolution, unnormalized.
SaliencyTube sum_tube(const WeightedFeatureMaps& maps);

/// The `top_m` maps with largest class weight (ties to the lower channel),
/// each wrapped as its own single-feature tube.
std::vector<std::pair<std::size_t, SaliencyTube>> per_feature_tubes(const WeightedFeatureMaps& maps,
                                                                    std::size_t top_m);

/// Global min-max over the whole volume. A constant volume maps to zeros.
SaliencyTube normalize_tube(SaliencyTube tube);
Volume min_max_normalize(const Volume& raw);

/// select -> weight -> sum for one activation volume.
SaliencyTube compute_tube(const ActivationVolume& acts, const ClassifierWeights& weights,
                          std::size_t class_index, const TauPolicy& policy);

/// 2D variant: each single-frame volume is weighted and summed on its own and
/// the results are stacked along F. Selection is computed once from the row.
SaliencyTube cam2d_per_frame(const std::vector<ActivationVolume>& frame_acts,
                             const ClassifierWeights& weights, std::size_t class_index,
                             const TauPolicy& policy);

/// Flat index of the largest raw voxel (first occurrence on ties).
std::size_t argmax(const Volume& volume);

}  // namespace saltubes
