// SPDX-License-Identifier: Apache-2.0
#include "saltubes/image.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "saltubes/error.hpp"

namespace saltubes {

RgbImage::RgbImage(std::size_t height, std::size_t width, std::vector<std::uint8_t> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (pixels_.size() != height * width * 3) {
    throw Error(ErrorKind::Shape, "RGB buffer length does not match image dimensions");
  }
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels().data(),
                               static_cast<png_int_32>(image.width() * 3), nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw Error(ErrorKind::Io, "cannot write " + path.string() + ": " + message);
  }
}

RgbImage read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    const std::string message = png.message;
    png_image_free(&png);
    throw Error(ErrorKind::Format, "cannot decode " + path.string() + ": " + message);
  }
  png.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, rgba.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw Error(ErrorKind::Format, "cannot decode " + path.string() + ": " + message);
  }
  RgbImage image(png.height, png.width);
  auto dst = image.pixels();
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    std::copy_n(rgba.begin() + static_cast<std::ptrdiff_t>(p * 4), 3,
                dst.begin() + static_cast<std::ptrdiff_t>(p * 3));
  }
  return image;
}

namespace {

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

// No objects with destructors may live between setjmp and the longjmp target.
bool decode_jpeg(std::FILE* file, jpeg_decompress_struct& cinfo, JpegErrorManager& err,
                 std::vector<std::uint8_t>& pixels, std::size_t& height, std::size_t& width) {
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  height = cinfo.output_height;
  width = cinfo.output_width;
  pixels.resize(height * width * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

}  // namespace

RgbImage read_jpeg(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorKind::Io, "cannot open " + path.string());
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  std::vector<std::uint8_t> pixels;
  std::size_t height = 0, width = 0;
  if (!decode_jpeg(file.get(), cinfo, err, pixels, height, width)) {
    throw Error(ErrorKind::Format, "cannot decode " + path.string() + ": " + err.message);
  }
  return RgbImage(height, width, std::move(pixels));
}

namespace {
std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}
}  // namespace

bool is_supported_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

RgbImage read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".jpg" || ext == ".jpeg") return read_jpeg(path);
  throw Error(ErrorKind::Format, "unsupported image type: " + path.string());
}

}  // namespace saltubes
