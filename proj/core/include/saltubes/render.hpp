// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "saltubes/gif.hpp"
#include "saltubes/image.hpp"
#include "saltubes/tube_engine.hpp"

namespace saltubes {

struct FrameSequence {
  std::vector<RgbImage> frames;
  std::vector<std::filesystem::path> sources;

  std::size_t size() const noexcept { return frames.size(); }
  std::size_t height() const noexcept { return frames.empty() ? 0 : frames.front().height(); }
  std::size_t width() const noexcept { return frames.empty() ? 0 : frames.front().width(); }
};

enum class RenderMode { Heat, Focus };
RenderMode parse_render_mode(std::string_view name);

struct RenderConfig {
  RenderMode mode = RenderMode::Heat;
  double alpha = 0.5;   // heat blend weight, [0, 1]
  double floor = 0.15;  // focus luminance floor, [0, 1)
  unsigned gif_delay_ms = 100;

  void validate() const;
};

/// Piecewise-linear jet: r = clamp(1.5 - |4v - 3|), g = clamp(1.5 - |4v - 2|),
/// b = clamp(1.5 - |4v - 1|), scaled to 255 and rounded half away from zero.
Rgb jet_color(double v);

/// Alpha blend of the frame with jet(t).
RgbImage overlay_heat(const RgbImage& frame, std::span<const double> tube_slice, double alpha);
/// Scales each pixel by floor + (1 - floor) * t.
RgbImage overlay_focus(const RgbImage& frame, std::span<const double> tube_slice, double floor);

/// Composites every frame with the matching normalized tube slice.
std::vector<RgbImage> composite_frames(const FrameSequence& frames, const SaliencyTube& tube,
                                       const RenderConfig& config);

/// Writes out_dir/frame_0000.png ... and, when `gif_path` is set, an animated
/// GIF. On failure every file written so far is removed.
std::vector<std::filesystem::path> render_sequence(const FrameSequence& frames,
                                                   const SaliencyTube& tube,
                                                   const RenderConfig& config,
                                                   const std::filesystem::path& out_dir,
                                                   const std::optional<std::filesystem::path>& gif_path = std::nullopt);

/// PNG/JPEG files of `dir` in lexicographic order.
FrameSequence load_frames(const std::filesystem::path& dir);

std::string frame_file_name(std::size_t index);

}  // namespace saltubes
