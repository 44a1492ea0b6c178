// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "gif_decoder.hpp"
#include "oracles.hpp"
#include "saltubes/error.hpp"
#include "saltubes/fixture.hpp"
#include "saltubes/manifest.hpp"
#include "saltubes/npy.hpp"
#include "saltubes/render.hpp"
#include "saltubes/resample.hpp"
#include "saltubes/selftest.hpp"
#include "saltubes/tube_engine.hpp"
#include "test_files.hpp"

namespace fs = std::filesystem;
using namespace saltubes;
namespace t = saltubes::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later checks only add detail on success.
class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && out_.pass) {
      out_.pass = false;
      out_.detail = what;
    }
  }
  void note(const std::string& text) {
    if (out_.pass) out_.detail = text;
  }
  bool ok() const { return out_.pass; }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome brute_force() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> fd(1, 4), hw(1, 6), dd(1, 8), nd(1, 5);
  double worst = 0.0;
  std::size_t tubes = 0;
  for (int k = 0; k < 100 && c.ok(); ++k) {
    const ActivationVolume acts = t::random_volume(rng, fd(rng), hw(rng), hw(rng), dd(rng));
    const ClassifierWeights w = t::random_weights(rng, nd(rng), acts.channels());
    for (std::size_t i = 0; i < w.classes; ++i) {
      const auto sel = t::nonneg_oracle(w, i);
      if (sel.empty()) {
        bool empty_error = false;
        try {
          compute_tube(acts, w, i, TauPolicy::nonneg());
        } catch (const Error& e) {
          empty_error = e.kind() == ErrorKind::EmptySelection;
        }
        c.require(empty_error, "case " + std::to_string(k) + ": all-negative row did not raise empty selection");
        continue;
      }
      const Volume got = compute_tube(acts, w, i, TauPolicy::nonneg()).raw;
      const Volume want = t::tube_oracle(acts, w, i, sel);
      worst = std::max(worst, t::max_rel_error(got.data(), want.data()));
      ++tubes;
    }
  }
  const double secs = seconds_since(start);
  c.require(worst <= 1e-9, "max relative error " + fmt("%.3g", worst));
  c.require(secs < 5.0, "runtime " + fmt("%.2f s", secs));
  c.note(std::to_string(tubes) + " tubes, max rel err " + fmt("%.2g", worst) + ", " + fmt("%.2f s", secs));
  return c.result();
}

Outcome cam_gap() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const RefNet net = make_seeded(5000 + s, {3, {{6, 3, 3, 3}, {8, 3, 3, 3}}, 4});
    const ForwardResult r = forward(net, make_seeded_clip(6000 + s, 4, 6, 5, 3));
    const double voxels = static_cast<double>(r.activations.voxels());
    for (std::size_t i = 0; i < net.head.classes; ++i) {
      const Volume raw = compute_tube(r.activations, net.head, i, TauPolicy::topk(net.head.channels)).raw;
      const double sum = std::accumulate(raw.data().begin(), raw.data().end(), 0.0);
      worst = std::max(worst, t::rel_error(sum, voxels * (r.logits[i] - net.head.bias_of(i))));
    }
  }
  const double secs = seconds_since(start);
  c.require(worst <= 1e-6, "max relative error " + fmt("%.3g", worst));
  c.require(secs < 10.0, "runtime " + fmt("%.2f s", secs));
  c.note("20 nets x 4 classes, max rel err " + fmt("%.2g", worst) + ", " + fmt("%.2f s", secs));
  return c.result();
}

Outcome scaling() {
  Check c;
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int k = 0; k < 50 && c.ok(); ++k) {
    const ActivationVolume acts = t::random_volume(rng, 3, 5, 6, 7, 0.0, 2.0);
    ClassifierWeights w = t::random_weights(rng, 2, 7);
    w.matrix[0] = 0.5;
    const SaliencyTube base = normalize_tube(compute_tube(acts, w, 0, TauPolicy::nonneg()));
    for (double factor : {0.1, 1.0, 7.3}) {
      ClassifierWeights scaled = w;
      for (std::size_t j = 0; j < w.channels; ++j) scaled.matrix[j] *= factor;
      const SaliencyTube s = normalize_tube(compute_tube(acts, scaled, 0, TauPolicy::nonneg()));
      c.require(argmax(s.raw) == argmax(base.raw), "argmax moved under c = " + fmt("%g", factor));
      const Volume& sn = s.normalized.value();
      c.require(sn.size() == acts.voxels(), "normalized tube has the wrong size");
      worst = std::max(worst, t::max_abs_error(sn.data(), base.normalized.value().data()));
    }
  }
  c.require(worst <= 1e-12, "normalized drift " + fmt("%.3g", worst));
  c.note("50 cases, c in {0.1, 1, 7.3}, max normalized drift " + fmt("%.2g", worst));
  return c.result();
}

Outcome exclusion() {
  Check c;
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> noise(-1e3, 1e3);
  std::size_t cases = 0;
  for (int k = 0; k < 50; ++k) {
    ActivationVolume acts = t::random_volume(rng, 3, 4, 4, 8);
    const ClassifierWeights w = t::random_weights(rng, 1, 8);
    const auto sel = t::nonneg_oracle(w, 0);
    if (sel.empty() || sel.size() == 8) continue;
    const Volume before = compute_tube(acts, w, 0, TauPolicy::nonneg()).raw;
    for (std::size_t v = 0; v < acts.voxels(); ++v)
      for (std::size_t j = 0; j < 8; ++j)
        if (!std::ranges::binary_search(sel, j)) acts.data()[v * 8 + j] = noise(rng);
    c.require(compute_tube(acts, w, 0, TauPolicy::nonneg()).raw == before,
              "case " + std::to_string(k) + " changed a voxel");
    ++cases;
  }
  c.require(cases >= 20, "too few cases with excluded channels");
  c.note(std::to_string(cases) + " cases, bit-identical raw tubes");
  return c.result();
}

double coord(std::size_t d, std::size_t in, std::size_t out) {
  return out > 1 ? static_cast<double>(d) * static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
}

Outcome resampling() {
  Check c;
  std::mt19937_64 rng(99);
  const std::array<std::size_t, 3> target{16, 112, 112};
  for (ResampleMethod m : {ResampleMethod::Trilinear, ResampleMethod::Cubic}) {
    const std::string name(to_string(m));
    const Volume flat = resample(Volume(4, 7, 7, 0.6180339887), {target, m});
    double drift = 0.0;
    for (double v : flat.data()) drift = std::max(drift, std::abs(v - 0.6180339887));
    c.require(drift <= 1e-12, name + " constant drift " + fmt("%.3g", drift));

    const Volume src = t::random_field(rng, 4, 7, 7);
    const Volume up = resample(src, {target, m});
    for (std::size_t cf : {0, 1})
      for (std::size_t ch : {0, 1})
        for (std::size_t cw : {0, 1})
          c.require(up(cf * 15, ch * 111, cw * 111) == src(cf * 3, ch * 6, cw * 6), name + " corner not exact");

    const Volume other = t::random_field(rng, 4, 7, 7);
    Volume mix = src;
    for (std::size_t k = 0; k < mix.size(); ++k) mix.data()[k] = 1.5 * src.data()[k] - 0.75 * other.data()[k];
    const Volume uo = resample(other, {target, m});
    const Volume um = resample(mix, {target, m});
    double lin = 0.0;
    for (std::size_t k = 0; k < um.size(); ++k)
      lin = std::max(lin, std::abs(um.data()[k] - (1.5 * up.data()[k] - 0.75 * uo.data()[k])));
    c.require(lin <= 1e-10, name + " linearity error " + fmt("%.3g", lin));
  }
  // a(f,h,w) = 0.5f + 2h - w + 3, reproduced exactly at every output sample
  Volume ramp(4, 7, 7);
  for (std::size_t f = 0; f < 4; ++f)
    for (std::size_t h = 0; h < 7; ++h)
      for (std::size_t w = 0; w < 7; ++w) ramp(f, h, w) = 0.5 * f + 2.0 * h - 1.0 * w + 3.0;
  const Volume ru = resample(ramp, {target, ResampleMethod::Trilinear});
  double ramp_err = 0.0;
  for (std::size_t f = 0; f < 16; ++f)
    for (std::size_t h = 0; h < 112; ++h)
      for (std::size_t w = 0; w < 112; ++w) {
        const double want = 0.5 * coord(f, 4, 16) + 2.0 * coord(h, 7, 112) - coord(w, 7, 112) + 3.0;
        ramp_err = std::max(ramp_err, std::abs(ru(f, h, w) - want));
      }
  c.require(ramp_err <= 1e-12, "trilinear ramp error " + fmt("%.3g", ramp_err));
  c.note("constants, corners, ramp (err " + fmt("%.2g", ramp_err) + "), linearity for trilinear and cubic");
  return c.result();
}

struct BlobRun {
  BlobLayout layout;
  SaliencyTube video_tube;
};

// Full pipeline from files on disk: fixture -> manifest -> tube -> video grid.
BlobRun run_blob_pipeline(const fs::path& dir) {
  const BlobScene scene = make_blob_scene();
  const fs::path manifest_path = write_fixture(scene, dir);
  const Manifest m = load_manifest(manifest_path);
  const ModelInputs in = load_inputs(m);
  const std::size_t cls = in.weights.class_index_of("blob");
  const SaliencyTube tube = compute_tube(in.activations, in.weights, cls, TauPolicy::nonneg());
  const auto dims = *m.video_dims;
  return {scene.layout, upsample(tube, {{dims[0], dims[1], dims[2]}, ResampleMethod::Cubic})};
}

Outcome blob_localization() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  t::TempDir dir;
  const BlobRun run = run_blob_pipeline(dir.path());
  const BlobLayout& L = run.layout;
  const Volume& raw = run.video_tube.raw;
  c.require(raw.dims() == (std::array<std::size_t, 3>{16, 112, 112}), "tube is not on the 16x112x112 grid");

  // support in video pixels, dilated by one upsampled cell on every side
  const std::size_t peak = argmax(raw);
  const std::size_t f = peak / (raw.height() * raw.width());
  const long y = static_cast<long>((peak / raw.width()) % raw.height());
  const long x = static_cast<long>(peak % raw.width());
  const long cell_h = static_cast<long>(L.cell_height()), cell_w = static_cast<long>(L.cell_width());
  const long y0 = static_cast<long>(L.cell_row) * cell_h - cell_h;
  const long y1 = static_cast<long>(L.cell_row + L.cells) * cell_h + cell_h;
  const long x0 = static_cast<long>(L.cell_col) * cell_w - cell_w;
  const long x1 = static_cast<long>(L.cell_col + L.cells) * cell_w + cell_w;
  const bool in_support = f + 1 >= L.first_frame && f <= L.last_frame + 1 && y >= y0 && y < y1 && x >= x0 && x < x1;
  c.require(in_support, "argmax at (" + std::to_string(f) + ", " + std::to_string(y) + ", " + std::to_string(x) +
                            ") is outside the dilated blob");

  const std::vector<double> marginal = temporal_marginal(raw);
  const std::size_t top = static_cast<std::size_t>(std::ranges::max_element(marginal) - marginal.begin());
  c.require(top >= 5 && top <= 8, "temporal marginal peaks at frame " + std::to_string(top));
  const double secs = seconds_since(start);
  c.require(secs < 10.0, "runtime " + fmt("%.2f s", secs));
  c.note("argmax (" + std::to_string(f) + ", " + std::to_string(y) + ", " + std::to_string(x) + "), marginal peak frame " +
         std::to_string(top) + ", " + fmt("%.2f s", secs));
  return c.result();
}

Outcome two_d_vs_three_d() {
  Check c;
  // activations identical in every frame, through both paths
  std::mt19937_64 rng(111);
  const ActivationVolume one = t::random_volume(rng, 1, 7, 7, 6, 0.0, 1.0);
  ActivationVolume replicated(16, 7, 7, 6);
  for (std::size_t f = 0; f < 16; ++f)
    std::copy(one.data().begin(), one.data().end(), replicated.data().begin() + static_cast<long>(f * one.data().size()));
  const ClassifierWeights w = t::random_weights(rng, 1, 6, -0.2, 1.0);
  const SaliencyTube t3 = upsample(compute_tube(replicated, w, 0, TauPolicy::nonneg()),
                                   {{16, 112, 112}, ResampleMethod::Cubic});
  const SaliencyTube t2 = cam2d_per_frame(std::vector<ActivationVolume>(16, one), w, 0, TauPolicy::nonneg());
  double spread = 0.0;
  for (const Volume* v : {&t3.raw, &t2.raw}) {
    const auto m = temporal_marginal(*v);
    const auto [lo, hi] = std::ranges::minmax(m);
    spread = std::max(spread, hi - lo);
  }
  c.require(spread <= 1e-12, "replicated marginal spread " + fmt("%.3g", spread));

  t::TempDir dir;
  const BlobRun run = run_blob_pipeline(dir.path());
  const auto m = temporal_marginal(run.video_tube.raw);
  const double mean = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
  const double ratio = *std::ranges::max_element(m) / mean;
  c.require(ratio > 2.0, "blob peak-to-mean " + fmt("%.3f", ratio));
  c.note("replicated spread " + fmt("%.2g", spread) + ", blob peak-to-mean " + fmt("%.3f", ratio));
  return c.result();
}

Outcome formats() {
  Check c;
  t::TempDir dir;
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<std::size_t> rank_d(1, 4), ext(1, 9);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int k = 0; k < 1000 && c.ok(); ++k) {
    Shape shape(rank_d(rng));
    for (auto& e : shape) e = ext(rng);
    DenseTensor tensor(shape);
    for (double& v : tensor.data()) {
      // arbitrary finite bit patterns, not only "nice" values
      double candidate;
      do {
        const std::uint64_t b = bits(rng);
        std::memcpy(&candidate, &b, sizeof candidate);
      } while (!std::isfinite(candidate));
      v = candidate;
    }
    const fs::path p = dir / "rt.npy";
    write_npy(tensor, p);
    const DenseTensor back = read_npy(p);
    c.require(back.shape() == tensor.shape() &&
                  std::memcmp(back.data().data(), tensor.data().data(), tensor.size() * sizeof(double)) == 0,
              "npy round trip " + std::to_string(k) + " not bit-exact");
  }

  // rendered PNG sequence and GIF: count, dims, byte-identical reruns
  const BlobScene scene = make_blob_scene();
  SaliencyTube tube = upsample(compute_tube(scene.result.activations, scene.net.head, kBlobClass, TauPolicy::nonneg()),
                               {{16, 112, 112}, ResampleMethod::Cubic});
  for (const char* run : {"a", "b"}) {
    render_sequence(scene.video, tube, {}, dir / run, dir / (std::string(run) + ".gif"));
  }
  std::size_t pngs = 0;
  for (std::size_t f = 0; f < 16; ++f) {
    const fs::path a = dir / "a" / frame_file_name(f);
    const RgbImage img = read_png(a);
    c.require(img.height() == 112 && img.width() == 112, "png " + std::to_string(f) + " has wrong dims");
    c.require(t::read_bytes(a) == t::read_bytes(dir / "b" / frame_file_name(f)), "png rerun differs");
    ++pngs;
  }
  const auto gif_bytes = t::read_bytes(dir / "a.gif");
  const t::DecodedGif gif = t::decode_gif(gif_bytes);
  c.require(gif.frames.size() == 16 && gif.width == 112 && gif.height == 112, "gif frame count or dims wrong");
  c.require(gif_bytes == t::read_bytes(dir / "b.gif"), "gif rerun differs");
  c.note("1000 npy round trips bit-exact, " + std::to_string(pngs) + " png + 16-frame gif decoded, reruns identical");
  return c.result();
}

Outcome cli_contract() {
  Check c;
  t::TempDir dir;
  auto run = [&](const std::string& args) { return t::run_command(std::string(SALTUBES_CLI_PATH) + " " + args); };
  auto expect = [&](int code, const std::string& args, const std::string& label) {
    const auto r = run(args);
    c.require(r.exit_code == code, label + ": exit " + std::to_string(r.exit_code) + ", wanted " + std::to_string(code));
    return r;
  };
  const std::string fx = t::quote(dir / "fx");
  const std::string manifest = t::quote(dir / "fx" / "manifest.json");

  expect(0, "selftest", "clean selftest");
  expect(0, "selftest --write-fixture " + fx, "write fixture");
  expect(0, "compute --manifest " + manifest + " --class-label blob --out " + t::quote(dir / "o" / "tube.npy"), "compute");
  expect(0, "render --tube " + t::quote(dir / "o" / "tube.npy") + " --frames " + t::quote(dir / "fx" / "frames") +
                " --out " + t::quote(dir / "r") + " --gif " + t::quote(dir / "r.gif"),
         "render");
  expect(1, "compute --manifest " + manifest + " --class-index 0 --tau-policy topk:0 --out " + t::quote(dir / "x.npy"),
         "topk:0");
  expect(1, "render --tube x --frames x --alpha 1.5 --out x", "alpha out of range");
  expect(2, "compute --manifest " + manifest + " --class-index 9 --out " + t::quote(dir / "x.npy"), "class out of range");
  expect(2, "info --manifest " + t::quote(dir / "nope.json"), "missing manifest");

  Manifest m = load_manifest(dir / "fx" / "manifest.json");
  m.weights_path = dir / "neg.npy";
  m.bias_path.reset();
  write_npy(DenseTensor({2, 2}, {1.0, 1.0, -1.0, -2.0}), m.weights_path);
  save_manifest(m, dir / "fx" / "neg.json");
  expect(3, "compute --manifest " + t::quote(dir / "fx" / "neg.json") + " --class-index 1 --out " + t::quote(dir / "x.npy"),
         "all-negative row");
  c.require(!fs::exists(dir / "x.npy"), "failed runs left an output behind");

  write_npy(DenseTensor({2}, {3.0, -3.0}), dir / "fx" / "logits.npy");
  expect(4, "selftest --fixture " + fx, "corrupted fixture");
  c.note("exit codes 0/1/2/3/4 reproduced; clean selftest passes");
  return c.result();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"brute-force equivalence", brute_force},
      {"cam-gap identity", cam_gap},
      {"scaling invariance", scaling},
      {"exclusion property", exclusion},
      {"resampling", resampling},
      {"planted-blob localization", blob_localization},
      {"2d-vs-3d temporal marginal", two_d_vs_three_d},
      {"formats", formats},
      {"cli contract", cli_contract},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
