// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "saltubes/image.hpp"

namespace saltubes {

using Rgb = std::array<std::uint8_t, 3>;

/// Median-cut quantization over every pixel of every frame. Returns at most
/// `max_colors` entries; fewer when the frames hold fewer distinct colors.
std::vector<Rgb> median_cut_palette(std::span<const RgbImage> frames, std::size_t max_colors = 256);

/// Index of the closest palette entry (squared RGB distance, lowest index on ties).
std::uint8_t nearest_palette_index(std::span<const Rgb> palette, Rgb color);

/// GIF89a with one global 256-entry palette, Netscape infinite-loop extension
/// and a fixed per-frame delay (rounded to centiseconds).
std::vector<std::uint8_t> encode_gif(std::span<const RgbImage> frames, unsigned delay_ms);
void write_gif(std::span<const RgbImage> frames, unsigned delay_ms, const std::filesystem::path& path);

/// Variable-width LZW as used by GIF image data (before sub-block framing).
std::vector<std::uint8_t> lzw_encode(std::span<const std::uint8_t> indices, int min_code_size = 8);

}  // namespace saltubes
