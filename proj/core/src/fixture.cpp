// SPDX-License-Identifier: Apache-2.0
#include "saltubes/fixture.hpp"

#include "saltubes/error.hpp"
#include "saltubes/manifest.hpp"
#include "saltubes/npy.hpp"

namespace saltubes {

namespace fs = std::filesystem;

void BlobLayout::validate() const {
  if (grid_h == 0 || grid_w == 0 || height % grid_h != 0 || width % grid_w != 0) {
    throw Error(ErrorKind::InvalidArgument, "blob video size must be a multiple of the grid");
  }
  if (first_frame > last_frame || last_frame >= frames || cell_row + cells > grid_h ||
      cell_col + cells > grid_w || cells == 0) {
    throw Error(ErrorKind::InvalidArgument, "blob does not fit inside the clip");
  }
}

namespace {

RgbImage make_frame(const BlobLayout& layout, std::size_t f, Lcg64& rng) {
  RgbImage image(layout.height, layout.width);
  const std::size_t y0 = layout.cell_row * layout.cell_height();
  const std::size_t y1 = (layout.cell_row + layout.cells) * layout.cell_height();
  const std::size_t x0 = layout.cell_col * layout.cell_width();
  const std::size_t x1 = (layout.cell_col + layout.cells) * layout.cell_width();
  for (std::size_t y = 0; y < layout.height; ++y) {
    for (std::size_t x = 0; x < layout.width; ++x) {
      const bool blob = layout.in_blob_frame(f) && y >= y0 && y < y1 && x >= x0 && x < x1;
      if (blob) {
        image.at(y, x, 0) = 250;
        image.at(y, x, 1) = 235;
        image.at(y, x, 2) = 215;
        continue;
      }
      // dim stripes plus noise; luminance stays below 0.35
      const double base = 30.0 + 20.0 * static_cast<double>((x / 8 + y / 8 + f) % 3);
      const double noise = rng.uniform(0.0, 15.0);
      image.at(y, x, 0) = static_cast<std::uint8_t>(base + noise);
      image.at(y, x, 1) = static_cast<std::uint8_t>(base + 10.0 + noise);
      image.at(y, x, 2) = static_cast<std::uint8_t>(base + 5.0 + noise);
    }
  }
  return image;
}

ActivationVolume pool_luminance(const BlobLayout& layout, const FrameSequence& video) {
  ActivationVolume clip(layout.frames, layout.grid_h, layout.grid_w, 1);
  const std::size_t ch = layout.cell_height();
  const std::size_t cw = layout.cell_width();
  for (std::size_t f = 0; f < layout.frames; ++f) {
    const RgbImage& img = video.frames[f];
    for (std::size_t r = 0; r < layout.grid_h; ++r) {
      for (std::size_t c = 0; c < layout.grid_w; ++c) {
        double sum = 0.0;
        for (std::size_t y = r * ch; y < (r + 1) * ch; ++y)
          for (std::size_t x = c * cw; x < (c + 1) * cw; ++x)
            sum += (img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / (3.0 * 255.0);
        clip(f, r, c, 0) = sum / static_cast<double>(ch * cw);
      }
    }
  }
  return clip;
}

RefNet make_blob_net() {
  RefNet net;
  Conv3dLayer layer(2, 1, 3, 3, 3);
  // channel 0: bright-cell detector, fires only where luminance > 0.5
  layer.weight(0, 0, 1, 1, 1) = 1.0;
  layer.bias[0] = -0.5;
  // channel 1: local mean luminance, fires everywhere
  for (std::size_t df = 0; df < 3; ++df)
    for (std::size_t dh = 0; dh < 3; ++dh)
      for (std::size_t dw = 0; dw < 3; ++dw) layer.weight(1, 0, df, dh, dw) = 1.0 / 27.0;
  net.layers.push_back(std::move(layer));

  net.head = ClassifierWeights(2, 2, {1.0, 0.0, -0.5, 1.0});
  net.head.bias = std::vector<double>{0.05, -0.05};
  net.head.class_labels = {"blob", "background"};
  return net;
}

}  // namespace

BlobScene make_blob_scene(const BlobLayout& layout) {
  layout.validate();
  BlobScene scene;
  scene.layout = layout;
  Lcg64 rng(0x5eed);
  for (std::size_t f = 0; f < layout.frames; ++f) {
    scene.video.frames.push_back(make_frame(layout, f, rng));
  }
  scene.clip = pool_luminance(layout, scene.video);
  scene.net = make_blob_net();
  scene.result = forward(scene.net, scene.clip);
  return scene;
}

fs::path write_fixture(const BlobScene& scene, const fs::path& dir) {
  fs::create_directories(dir / "frames");
  for (std::size_t f = 0; f < scene.video.size(); ++f) {
    write_png(scene.video.frames[f], dir / "frames" / frame_file_name(f));
  }
  const AxisOrder order(kFixtureAxisOrder);
  write_npy(decanonicalize(scene.result.activations, order), dir / "activations.npy");
  const ClassifierWeights& head = scene.net.head;
  write_npy(DenseTensor({head.classes, head.channels}, head.matrix), dir / "weights.npy");
  if (head.bias) write_npy(DenseTensor({head.classes}, *head.bias), dir / "bias.npy");
  write_npy(DenseTensor({scene.result.logits.size()}, scene.result.logits), dir / kFixtureLogitsFile);

  Manifest m;
  m.activations_path = dir / "activations.npy";
  m.weights_path = dir / "weights.npy";
  if (head.bias) m.bias_path = dir / "bias.npy";
  m.axis_order = kFixtureAxisOrder;
  m.class_labels = head.class_labels;
  m.frames_dir = dir / "frames";
  m.video_dims = {scene.layout.frames, scene.layout.height, scene.layout.width};
  const fs::path manifest_path = dir / "manifest.json";
  save_manifest(m, manifest_path);
  return manifest_path;
}

}  // namespace saltubes
