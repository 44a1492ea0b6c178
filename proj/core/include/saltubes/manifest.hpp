// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "saltubes/tensor.hpp"

namespace saltubes {

/// Run manifest written by an exporter. Paths are absolute after loading.
struct Manifest {
  std::string version = "1.0";
  std::filesystem::path activations_path;
  std::filesystem::path weights_path;
  std::optional<std::filesystem::path> bias_path;
  std::string axis_order = "FHWD";
  std::vector<std::string> class_labels;
  std::optional<std::filesystem::path> frames_dir;
  std::optional<std::array<std::size_t, 3>> video_dims;  // F, H, W
  /// Per-frame 2D activations (each F'=1 in `axis_order`); read by cam2d only.
  std::vector<std::filesystem::path> frame_activations_paths;
};

/// Validates every field and resolves relative paths against the manifest's
/// directory. Throws ManifestError naming the offending field.
Manifest load_manifest(const std::filesystem::path& path);

/// Writes `manifest` as JSON. Paths under the manifest's directory are stored
/// relative to it.
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct ModelInputs {
  ActivationVolume activations;
  ClassifierWeights weights;
};

/// Reads and cross-checks the tensors a manifest references.
ModelInputs load_inputs(const Manifest& manifest);
ClassifierWeights load_weights(const Manifest& manifest);

/// Per-frame activation volumes for the 2D path: the listed per-frame files
/// when present, otherwise the main activation volume sliced along F.
std::vector<ActivationVolume> load_frame_activations(const Manifest& manifest);

}  // namespace saltubes
