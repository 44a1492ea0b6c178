// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "saltubes/refnet.hpp"
#include "saltubes/render.hpp"

namespace saltubes {

/// A synthetic clip with a bright cube over a dim textured background, plus a
/// one-layer refnet whose channel 0 fires only on bright cells.
///
/// The clip fed to the net is the video's luminance averaged over
/// (height / grid_h) x (width / grid_w) pixel cells; frames are not pooled.
struct BlobLayout {
  std::size_t frames = 16;
  std::size_t height = 112;
  std::size_t width = 112;
  std::size_t grid_h = 7;
  std::size_t grid_w = 7;
  std::size_t first_frame = 5;  // inclusive, 0-based
  std::size_t last_frame = 8;   // inclusive
  std::size_t cell_row = 2;     // top-left blob cell on the activation grid
  std::size_t cell_col = 4;
  std::size_t cells = 2;        // blob spans cells x cells grid cells

  std::size_t cell_height() const noexcept { return height / grid_h; }
  std::size_t cell_width() const noexcept { return width / grid_w; }
  bool in_blob_frame(std::size_t f) const noexcept { return f >= first_frame && f <= last_frame; }
  void validate() const;
};

struct BlobScene {
  BlobLayout layout;
  FrameSequence video;
  ActivationVolume clip;  // F x grid_h x grid_w x 1 luminance
  RefNet net;
  ForwardResult result;
};

inline constexpr std::size_t kBlobClass = 0;

BlobScene make_blob_scene(const BlobLayout& layout = {});

/// Writes manifest.json, activations.npy (stored channels-first, "DFHW"),
/// weights.npy, bias.npy, logits.npy and frames/frame_NNNN.png under `dir`.
/// Returns the manifest path.
std::filesystem::path write_fixture(const BlobScene& scene, const std::filesystem::path& dir);

inline constexpr const char* kFixtureAxisOrder = "DFHW";
inline constexpr const char* kFixtureLogitsFile = "logits.npy";

}  // namespace saltubes
