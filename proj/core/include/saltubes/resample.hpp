// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "saltubes/tube_engine.hpp"

namespace saltubes {

enum class ResampleMethod { Trilinear, Cubic };

ResampleMethod parse_method(std::string_view name);
std::string_view to_string(ResampleMethod method);

struct ResampleSpec {
  std::array<std::size_t, 3> target{};  // F, H, W
  ResampleMethod method = ResampleMethod::Cubic;
  double cubic_a = -0.5;  // Catmull-Rom

  void validate() const;
};

enum class Axis { Frames = 0, Height = 1, Width = 2 };

/// Resamples one axis to `extent` samples with align-corners mapping.
/// Cubic samples outside the source are clamped to the edge.
Volume resample_axis(const Volume& in, Axis axis, std::size_t extent, ResampleMethod method,
                     double cubic_a = -0.5);

/// Separable resampling in F, H, W order.
Volume resample(const Volume& in, const ResampleSpec& spec);

/// Upsamples `tube.raw` to the video grid and recomputes the normalized
/// volume from the resampled raw values.
SaliencyTube upsample(const SaliencyTube& tube, const ResampleSpec& spec);

/// Mean of each frame over (h, w).
std::vector<double> temporal_marginal(const SaliencyTube& tube);
std::vector<double> temporal_marginal(const Volume& volume);

/// Catmull-Rom style cubic convolution kernel.
double cubic_kernel(double x, double a);

}  // namespace saltubes
