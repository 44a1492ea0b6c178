// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "saltubes/tube_engine.hpp"

namespace saltubes {

/// Everything the sidecar JSON records about how a tube was produced.
struct TubeMetadata {
  std::size_t class_index = 0;
  std::string class_label;
  std::string policy = "nonneg";
  std::vector<std::size_t> selected_features;
  std::size_t excluded_count = 0;
  std::string path_kind = "3d";  // "3d" or "2d"
  std::string method;            // empty when not resampled
  std::array<std::size_t, 3> activation_dims{};
  double activation_raw_sum = 0.0;
};

struct TubeOutputPaths {
  std::filesystem::path normalized;  // <stem>.npy
  std::filesystem::path raw;         // <stem>.raw.npy
  std::filesystem::path sidecar;     // <stem>.json
};

TubeOutputPaths tube_output_paths(const std::filesystem::path& out);

/// Writes normalized, raw and sidecar files; nothing is left behind on failure.
TubeOutputPaths write_tube(const SaliencyTube& tube, const TubeMetadata& meta,
                           const std::filesystem::path& out);

/// Reads a normalized F x H x W tube for rendering. Values must lie in [0, 1].
SaliencyTube read_normalized_tube(const std::filesystem::path& path);

std::string sidecar_json(const SaliencyTube& tube, const TubeMetadata& meta);

}  // namespace saltubes
