// SPDX-License-Identifier: Apache-2.0
#include "saltubes/gif.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "saltubes/error.hpp"

namespace saltubes {

namespace {

struct ColorCount {
  Rgb color;
  std::uint64_t count;
};

std::uint32_t pack(Rgb c) { return (std::uint32_t{c[0]} << 16) | (std::uint32_t{c[1]} << 8) | c[2]; }

struct Box {
  std::size_t begin;
  std::size_t end;
  int widest_channel = 0;
  int range = 0;
};

void measure(Box& box, const std::vector<ColorCount>& colors) {
  std::array<int, 3> lo{255, 255, 255}, hi{0, 0, 0};
  for (std::size_t i = box.begin; i < box.end; ++i) {
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min<int>(lo[c], colors[i].color[c]);
      hi[c] = std::max<int>(hi[c], colors[i].color[c]);
    }
  }
  box.range = -1;
  for (int c = 0; c < 3; ++c) {
    if (hi[c] - lo[c] > box.range) {
      box.range = hi[c] - lo[c];
      box.widest_channel = c;
    }
  }
}

}  // namespace

std::vector<Rgb> median_cut_palette(std::span<const RgbImage> frames, std::size_t max_colors) {
  if (max_colors == 0) throw Error(ErrorKind::InvalidArgument, "palette needs at least one color");
  std::unordered_map<std::uint32_t, std::uint64_t> histogram;
  for (const RgbImage& frame : frames) {
    const auto px = frame.pixels();
    for (std::size_t p = 0; p < px.size(); p += 3) ++histogram[pack({px[p], px[p + 1], px[p + 2]})];
  }
  if (histogram.empty()) return {};

  std::vector<ColorCount> colors;
  colors.reserve(histogram.size());
  for (auto [key, count] : histogram) {
    colors.push_back({Rgb{static_cast<std::uint8_t>(key >> 16), static_cast<std::uint8_t>(key >> 8),
                          static_cast<std::uint8_t>(key)},
                      count});
  }
  // hash-map iteration order is unspecified; sort for determinism
  std::ranges::sort(colors, {}, [](const ColorCount& c) { return pack(c.color); });

  std::vector<Box> boxes{{0, colors.size()}};
  measure(boxes.front(), colors);
  while (boxes.size() < max_colors) {
    auto target = boxes.end();
    for (auto it = boxes.begin(); it != boxes.end(); ++it) {
      if (it->end - it->begin < 2) continue;
      if (target == boxes.end() || it->range > target->range) target = it;
    }
    if (target == boxes.end()) break;

    const int ch = target->widest_channel;
    auto first = colors.begin() + static_cast<std::ptrdiff_t>(target->begin);
    auto last = colors.begin() + static_cast<std::ptrdiff_t>(target->end);
    std::stable_sort(first, last, [ch](const ColorCount& a, const ColorCount& b) {
      return a.color[ch] < b.color[ch];
    });
    std::uint64_t total = 0;
    for (auto it = first; it != last; ++it) total += it->count;
    std::uint64_t running = 0;
    std::size_t split = target->begin;
    for (auto it = first; it != last; ++it, ++split) {
      running += it->count;
      if (2 * running >= total) break;
    }
    // both halves must be non-empty
    split = std::clamp(split + 1, target->begin + 1, target->end - 1);

    Box upper{split, target->end};
    target->end = split;
    measure(*target, colors);
    measure(upper, colors);
    boxes.push_back(upper);
  }

  std::vector<Rgb> palette;
  palette.reserve(boxes.size());
  for (const Box& box : boxes) {
    std::array<std::uint64_t, 3> sum{};
    std::uint64_t n = 0;
    for (std::size_t i = box.begin; i < box.end; ++i) {
      for (int c = 0; c < 3; ++c) sum[c] += colors[i].color[c] * colors[i].count;
      n += colors[i].count;
    }
    Rgb mean{};
    for (int c = 0; c < 3; ++c) mean[c] = static_cast<std::uint8_t>((sum[c] + n / 2) / n);
    palette.push_back(mean);
  }
  return palette;
}

std::uint8_t nearest_palette_index(std::span<const Rgb> palette, Rgb color) {
  int best = std::numeric_limits<int>::max();
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < palette.size(); ++i) {
    int dist = 0;
    for (int c = 0; c < 3; ++c) {
      const int d = int{palette[i][c]} - int{color[c]};
      dist += d * d;
    }
    if (dist < best) {
      best = dist;
      best_index = i;
    }
  }
  return static_cast<std::uint8_t>(best_index);
}

namespace {

class BitWriter {
 public:
  void write(unsigned code, int width) {
    buffer_ |= static_cast<std::uint32_t>(code) << bits_;
    bits_ += width;
    while (bits_ >= 8) {
      out_.push_back(static_cast<std::uint8_t>(buffer_ & 0xff));
      buffer_ >>= 8;
      bits_ -= 8;
    }
  }
  std::vector<std::uint8_t> finish() {
    if (bits_ > 0) out_.push_back(static_cast<std::uint8_t>(buffer_ & 0xff));
    buffer_ = 0;
    bits_ = 0;
    return std::move(out_);
  }

 private:
  std::vector<std::uint8_t> out_;
  std::uint32_t buffer_ = 0;
  int bits_ = 0;
};

constexpr unsigned kMaxCode = 4096;

}  // namespace

std::vector<std::uint8_t> lzw_encode(std::span<const std::uint8_t> indices, int min_code_size) {
  const unsigned clear = 1u << min_code_size;
  const unsigned end_of_info = clear + 1;
  const unsigned alphabet = clear;

  // dictionary[prefix * alphabet + symbol] -> code, 0 = absent
  std::vector<std::uint16_t> dictionary(kMaxCode * alphabet, 0);
  unsigned next_code = clear + 2;
  int width = min_code_size + 1;
  auto reset = [&] {
    std::ranges::fill(dictionary, std::uint16_t{0});
    next_code = clear + 2;
    width = min_code_size + 1;
  };

  BitWriter bits;
  bits.write(clear, width);
  if (indices.empty()) {
    bits.write(end_of_info, width);
    return bits.finish();
  }
  unsigned current = indices[0];
  for (std::size_t i = 1; i < indices.size(); ++i) {
    const unsigned symbol = indices[i];
    const std::size_t key = std::size_t{current} * alphabet + symbol;
    if (dictionary[key] != 0) {
      current = dictionary[key];
      continue;
    }
    bits.write(current, width);
    if (next_code < kMaxCode) {
      dictionary[key] = static_cast<std::uint16_t>(next_code++);
      if (next_code == (1u << width) + 1 && width < 12) ++width;
    } else {
      bits.write(clear, width);
      reset();
    }
    current = symbol;
  }
  bits.write(current, width);
  bits.write(end_of_info, width);
  return bits.finish();
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, unsigned v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

}  // namespace

std::vector<std::uint8_t> encode_gif(std::span<const RgbImage> frames, unsigned delay_ms) {
  if (frames.empty()) throw Error(ErrorKind::EmptyInput, "GIF needs at least one frame");
  const std::size_t height = frames.front().height();
  const std::size_t width = frames.front().width();
  if (width > 0xffff || height > 0xffff) throw Error(ErrorKind::Shape, "frame too large for GIF");
  for (const RgbImage& f : frames) {
    if (f.height() != height || f.width() != width) {
      throw Error(ErrorKind::Shape, "GIF frames must share one size");
    }
  }

  std::vector<Rgb> palette = median_cut_palette(frames, 256);
  const std::vector<Rgb> used = palette;
  palette.resize(256, Rgb{0, 0, 0});

  std::vector<std::uint8_t> out;
  const std::string_view signature = "GIF89a";
  out.insert(out.end(), signature.begin(), signature.end());
  put_u16(out, static_cast<unsigned>(width));
  put_u16(out, static_cast<unsigned>(height));
  out.push_back(0xF7);  // global table, 8-bit color resolution, 256 entries
  out.push_back(0);     // background index
  out.push_back(0);     // pixel aspect
  for (const Rgb& c : palette) out.insert(out.end(), c.begin(), c.end());

  // Netscape looping extension, loop count 0 = forever
  const std::string_view netscape = "NETSCAPE2.0";
  out.insert(out.end(), {0x21, 0xFF, 0x0B});
  out.insert(out.end(), netscape.begin(), netscape.end());
  out.insert(out.end(), {0x03, 0x01, 0x00, 0x00, 0x00});

  const unsigned delay_cs = (delay_ms + 5) / 10;
  std::unordered_map<std::uint32_t, std::uint8_t> cache;
  std::vector<std::uint8_t> indices(width * height);
  for (const RgbImage& frame : frames) {
    out.insert(out.end(), {0x21, 0xF9, 0x04, 0x04});  // graphic control, disposal: keep
    put_u16(out, delay_cs);
    out.insert(out.end(), {0x00, 0x00});

    out.push_back(0x2C);
    put_u16(out, 0);
    put_u16(out, 0);
    put_u16(out, static_cast<unsigned>(width));
    put_u16(out, static_cast<unsigned>(height));
    out.push_back(0x00);

    const auto px = frame.pixels();
    for (std::size_t p = 0; p < indices.size(); ++p) {
      const Rgb color{px[3 * p], px[3 * p + 1], px[3 * p + 2]};
      auto [it, inserted] = cache.try_emplace(pack(color), 0);
      if (inserted) it->second = nearest_palette_index(used, color);
      indices[p] = it->second;
    }
    const std::vector<std::uint8_t> data = lzw_encode(indices, 8);
    out.push_back(8);
    for (std::size_t pos = 0; pos < data.size(); pos += 255) {
      const std::size_t n = std::min<std::size_t>(255, data.size() - pos);
      out.push_back(static_cast<std::uint8_t>(n));
      out.insert(out.end(), data.begin() + static_cast<std::ptrdiff_t>(pos),
                 data.begin() + static_cast<std::ptrdiff_t>(pos + n));
    }
    out.push_back(0x00);
  }
  out.push_back(0x3B);
  return out;
}

void write_gif(std::span<const RgbImage> frames, unsigned delay_ms, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_gif(frames, delay_ms);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace saltubes
