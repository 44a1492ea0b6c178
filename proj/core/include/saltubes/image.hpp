// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace saltubes {

/// 8-bit interleaved RGB, rows top to bottom.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(std::size_t height, std::size_t width, std::uint8_t fill = 0)
      : height_(height), width_(width), pixels_(height * width * 3, fill) {}
  RgbImage(std::size_t height, std::size_t width, std::vector<std::uint8_t> pixels);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixel_count() const noexcept { return height_ * width_; }

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) noexcept {
    return pixels_[(y * width_ + x) * 3 + c];
  }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const noexcept {
    return pixels_[(y * width_ + x) * 3 + c];
  }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Non-interlaced 8-bit RGB PNG.
void write_png(const RgbImage& image, const std::filesystem::path& path);
/// Grayscale is expanded to RGB; an alpha channel is dropped.
RgbImage read_png(const std::filesystem::path& path);
RgbImage read_jpeg(const std::filesystem::path& path);
/// Dispatches on the extension (.png, .jpg, .jpeg; case-insensitive).
RgbImage read_image(const std::filesystem::path& path);
bool is_supported_image(const std::filesystem::path& path);

}  // namespace saltubes
