// SPDX-License-Identifier: Apache-2.0
#include "saltubes/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "saltubes/error.hpp"
#include "saltubes/output_guard.hpp"

namespace saltubes {

namespace fs = std::filesystem;

RenderMode parse_render_mode(std::string_view name) {
  if (name == "heat") return RenderMode::Heat;
  if (name == "focus") return RenderMode::Focus;
  throw Error(ErrorKind::InvalidArgument, "unknown render mode '" + std::string(name) + "' (heat|focus)");
}

void RenderConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  if (!(floor >= 0.0 && floor < 1.0)) throw Error(ErrorKind::InvalidArgument, "floor must lie in [0, 1)");
}

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

double jet_channel(double v, double center) { return std::clamp(1.5 - std::abs(4.0 * v - center), 0.0, 1.0); }

void require_slice(const RgbImage& frame, std::span<const double> slice) {
  if (slice.size() != frame.pixel_count()) {
    throw Error(ErrorKind::Shape, "tube slice has " + std::to_string(slice.size()) +
                                      " values for a frame of " + std::to_string(frame.pixel_count()) +
                                      " pixels");
  }
}

}  // namespace

Rgb jet_color(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::Range, "jet_color input must lie in [0, 1]");
  return {to_byte(255.0 * jet_channel(v, 3.0)), to_byte(255.0 * jet_channel(v, 2.0)),
          to_byte(255.0 * jet_channel(v, 1.0))};
}

RgbImage overlay_heat(const RgbImage& frame, std::span<const double> tube_slice, double alpha) {
  require_slice(frame, tube_slice);
  RgbImage out(frame.height(), frame.width());
  auto src = frame.pixels();
  auto dst = out.pixels();
  for (std::size_t p = 0; p < tube_slice.size(); ++p) {
    const Rgb heat = jet_color(tube_slice[p]);
    for (std::size_t c = 0; c < 3; ++c) {
      dst[3 * p + c] = to_byte((1.0 - alpha) * src[3 * p + c] + alpha * heat[c]);
    }
  }
  return out;
}

RgbImage overlay_focus(const RgbImage& frame, std::span<const double> tube_slice, double floor) {
  require_slice(frame, tube_slice);
  RgbImage out(frame.height(), frame.width());
  auto src = frame.pixels();
  auto dst = out.pixels();
  for (std::size_t p = 0; p < tube_slice.size(); ++p) {
    const double gain = floor + (1.0 - floor) * tube_slice[p];
    for (std::size_t c = 0; c < 3; ++c) dst[3 * p + c] = to_byte(src[3 * p + c] * gain);
  }
  return out;
}

std::vector<RgbImage> composite_frames(const FrameSequence& frames, const SaliencyTube& tube,
                                       const RenderConfig& config) {
  config.validate();
  if (!tube.normalized) throw Error(ErrorKind::Data, "tube has no normalized volume to render");
  const Volume& norm = *tube.normalized;
  if (norm.frames() != frames.size()) {
    throw Error(ErrorKind::Shape, "tube has " + std::to_string(norm.frames()) + " frames but " +
                                      std::to_string(frames.size()) + " images were given");
  }
  if (norm.height() != frames.height() || norm.width() != frames.width()) {
    throw Error(ErrorKind::Shape, "tube is " + std::to_string(norm.height()) + "x" +
                                      std::to_string(norm.width()) + " but frames are " +
                                      std::to_string(frames.height()) + "x" + std::to_string(frames.width()));
  }
  std::vector<RgbImage> out;
  out.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    out.push_back(config.mode == RenderMode::Heat
                      ? overlay_heat(frames.frames[f], norm.frame(f), config.alpha)
                      : overlay_focus(frames.frames[f], norm.frame(f), config.floor));
  }
  return out;
}

std::string frame_file_name(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%04zu.png", index);
  return name;
}

std::vector<fs::path> render_sequence(const FrameSequence& frames, const SaliencyTube& tube,
                                      const RenderConfig& config, const fs::path& out_dir,
                                      const std::optional<fs::path>& gif_path) {
  const std::vector<RgbImage> composited = composite_frames(frames, tube, config);

  OutputGuard guard;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw Error(ErrorKind::Io, "cannot create output directory " + out_dir.string());
  }
  for (std::size_t f = 0; f < composited.size(); ++f) {
    const fs::path path = out_dir / frame_file_name(f);
    guard.track(path);
    write_png(composited[f], path);
  }
  if (gif_path) {
    guard.track(*gif_path);
    write_gif(composited, config.gif_delay_ms, *gif_path);
  }
  return guard.commit();
}

FrameSequence load_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_supported_image(entry.path())) files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorKind::EmptyInput, "no PNG or JPEG frames in " + dir.string());
  std::ranges::sort(files, {}, [](const fs::path& p) { return p.filename().string(); });

  FrameSequence seq;
  for (const auto& file : files) {
    RgbImage image = read_image(file);
    if (!seq.frames.empty() &&
        (image.height() != seq.height() || image.width() != seq.width())) {
      throw Error(ErrorKind::Shape, file.string() + " is " + std::to_string(image.width()) + "x" +
                                        std::to_string(image.height()) + ", expected " +
                                        std::to_string(seq.width()) + "x" + std::to_string(seq.height()));
    }
    seq.frames.push_back(std::move(image));
    seq.sources.push_back(file);
  }
  return seq;
}

}  // namespace saltubes
