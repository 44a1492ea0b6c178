// SPDX-License-Identifier: Apache-2.0
#include "saltubes/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "saltubes/error.hpp"
#include "saltubes/manifest.hpp"
#include "saltubes/npy.hpp"

namespace saltubes {

namespace fs = std::filesystem;

bool SelftestReport::passed() const {
  return !results.empty() &&
         std::ranges::all_of(results, [](const PropertyResult& r) { return r.passed; });
}

double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

namespace {

// Index-by-index reference: raw(f,h,w) = sum over y_ij >= 0 of y_ij * a(f,h,w,j).
Volume nonneg_oracle(const ActivationVolume& acts, const ClassifierWeights& weights, std::size_t i) {
  Volume out(acts.frames(), acts.height(), acts.width());
  for (std::size_t f = 0; f < acts.frames(); ++f)
    for (std::size_t h = 0; h < acts.height(); ++h)
      for (std::size_t w = 0; w < acts.width(); ++w) {
        double acc = 0.0;
        for (std::size_t j = 0; j < acts.channels(); ++j) {
          if (weights(i, j) >= 0.0) acc += weights(i, j) * acts(f, h, w, j);
        }
        out(f, h, w) = acc;
      }
  return out;
}

double max_relative_error(const Volume& a, const Volume& b) {
  double worst = 0.0;
  for (std::size_t v = 0; v < a.size(); ++v) {
    worst = std::max(worst, relative_error(a.data()[v], b.data()[v]));
  }
  return worst;
}

double volume_sum(const Volume& v) {
  double s = 0.0;
  for (double x : v.data()) s += x;
  return s;
}

// Returns an empty string when every brute-force case agrees.
std::string brute_force_cases(std::size_t cases, const ModelInputs& fixture) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> small(1, 4), mid(1, 6), chans(1, 8), classes(1, 5);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  auto check = [](const ActivationVolume& acts, const ClassifierWeights& weights) -> std::string {
    for (std::size_t i = 0; i < weights.classes; ++i) {
      const auto row = weights.row(i);
      if (std::ranges::none_of(row, [](double y) { return y >= 0.0; })) continue;
      const SaliencyTube tube = compute_tube(acts, weights, i, TauPolicy::nonneg());
      const double err = max_relative_error(tube.raw, nonneg_oracle(acts, weights, i));
      if (err > 1e-9) {
        std::ostringstream msg;
        msg << "class " << i << " relative error " << err;
        return msg.str();
      }
    }
    return {};
  };
  if (auto failure = check(fixture.activations, fixture.weights); !failure.empty()) {
    return "fixture " + failure;
  }
  for (std::size_t c = 0; c < cases; ++c) {
    ActivationVolume acts(small(rng), mid(rng), mid(rng), chans(rng));
    for (double& a : acts.data()) a = value(rng);
    const std::size_t n = classes(rng);
    std::vector<double> y(n * acts.channels());
    for (double& v : y) v = value(rng);
    if (auto failure = check(acts, ClassifierWeights(n, acts.channels(), std::move(y))); !failure.empty()) {
      return "case " + std::to_string(c) + " " + failure;
    }
  }
  return {};
}

std::string cam_gap_identity(const ActivationVolume& acts, const ClassifierWeights& weights,
                             std::span<const double> logits) {
  const TauPolicy all = TauPolicy::topk(weights.channels);
  const double voxels = static_cast<double>(acts.voxels());
  for (std::size_t i = 0; i < weights.classes; ++i) {
    const double lhs = volume_sum(compute_tube(acts, weights, i, all).raw);
    const double rhs = voxels * (logits[i] - weights.bias_of(i));
    const double err = relative_error(lhs, rhs);
    if (!(err <= 1e-6)) {
      std::ostringstream msg;
      msg << "class " << i << ": sum " << lhs << " vs " << rhs << " (relative error " << err << ")";
      return msg.str();
    }
  }
  return {};
}

std::string constant_preservation() {
  for (ResampleMethod method : {ResampleMethod::Trilinear, ResampleMethod::Cubic}) {
    const Volume src(3, 4, 5, 0.8125);
    const Volume out = resample(src, {{16, 37, 29}, method});
    for (double v : out.data()) {
      if (std::abs(v - 0.8125) > 1e-12) return std::string(to_string(method)) + " drifted";
    }
  }
  return {};
}

std::string endpoint_preservation() {
  Volume src(3, 4, 5);
  Lcg64 rng(11);
  for (double& v : src.data()) v = rng.uniform(-1.0, 1.0);
  for (ResampleMethod method : {ResampleMethod::Trilinear, ResampleMethod::Cubic}) {
    const Volume out = resample(src, {{9, 13, 17}, method});
    for (std::size_t cf : {0, 1})
      for (std::size_t ch : {0, 1})
        for (std::size_t cw : {0, 1}) {
          const double expect = src(cf * 2, ch * 3, cw * 4);
          if (out(cf * 8, ch * 12, cw * 16) != expect) {
            return std::string(to_string(method)) + " moved a corner value";
          }
        }
  }
  return {};
}

std::string exclusion_property(const ModelInputs& fixture) {
  const ClassifierWeights& weights = fixture.weights;
  for (std::size_t i = 0; i < weights.classes; ++i) {
    FeatureSelection sel;
    try {
      sel = select_features(weights, i, TauPolicy::nonneg());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::EmptySelection) continue;
      throw;
    }
    if (sel.excluded_count() == 0) continue;
    const Volume before = sum_tube(weight_activations(fixture.activations, weights, sel)).raw;
    ActivationVolume perturbed = fixture.activations;
    Lcg64 rng(99);
    for (std::size_t v = 0; v < perturbed.voxels(); ++v)
      for (std::size_t j = 0; j < perturbed.channels(); ++j)
        if (!std::ranges::binary_search(sel.selected, j)) perturbed.data()[v * perturbed.channels() + j] = rng.uniform(-50.0, 50.0);
    const Volume after = sum_tube(weight_activations(perturbed, weights, sel)).raw;
    if (!(before == after)) return "class " + std::to_string(i) + " changed under excluded-channel noise";
  }
  return {};
}

PropertyResult make_result(std::string name, const std::string& failure) {
  return {std::move(name), failure.empty(), failure.empty() ? "ok" : failure};
}

}  // namespace

BlobCheck check_blob_localization(const BlobLayout& layout, const SaliencyTube& tube) {
  BlobCheck out;
  const Volume& raw = tube.raw;
  const std::size_t peak = argmax(raw);
  out.argmax_frame = peak / (raw.height() * raw.width());
  out.argmax_row = (peak / raw.width()) % raw.height();
  out.argmax_col = peak % raw.width();

  // map video coordinate back onto the activation grid (align-corners)
  auto to_source = [](std::size_t d, std::size_t in, std::size_t out_extent) {
    if (out_extent <= 1 || in <= 1) return 0.0;
    return static_cast<double>(d) * static_cast<double>(in - 1) / static_cast<double>(out_extent - 1);
  };
  auto within = [](double s, double lo, double hi) { return s >= lo - 1.0 && s <= hi + 1.0; };
  const double sf = to_source(out.argmax_frame, layout.frames, raw.frames());
  const double sh = to_source(out.argmax_row, layout.grid_h, raw.height());
  const double sw = to_source(out.argmax_col, layout.grid_w, raw.width());
  out.argmax_in_support =
      within(sf, static_cast<double>(layout.first_frame), static_cast<double>(layout.last_frame)) &&
      within(sh, static_cast<double>(layout.cell_row), static_cast<double>(layout.cell_row + layout.cells - 1)) &&
      within(sw, static_cast<double>(layout.cell_col), static_cast<double>(layout.cell_col + layout.cells - 1));

  const std::vector<double> marginal = temporal_marginal(raw);
  const auto top = std::ranges::max_element(marginal);
  out.marginal_peak_frame = static_cast<std::size_t>(top - marginal.begin());
  // the source frame range maps to video frames through the same mapping
  const double peak_source = to_source(out.marginal_peak_frame, layout.frames, raw.frames());
  out.marginal_peak_in_blob = peak_source >= static_cast<double>(layout.first_frame) &&
                              peak_source <= static_cast<double>(layout.last_frame);
  double mean = 0.0;
  for (double m : marginal) mean += m;
  mean /= static_cast<double>(marginal.size());
  out.peak_to_mean = mean > 0.0 ? *top / mean : 0.0;
  return out;
}

SelftestReport run_selftest(const SelftestOptions& options) {
  SelftestReport report;
  auto& results = report.results;

  fs::path dir;
  bool generated = false;
  std::optional<BlobScene> scene;
  if (options.fixture_dir) {
    dir = *options.fixture_dir;
  } else {
    dir = fs::temp_directory_path() /
          ("saltubes-selftest-" + std::to_string(std::random_device{}()));
    generated = true;
  }
  struct Cleanup {
    fs::path dir;
    bool active;
    ~Cleanup() {
      std::error_code ec;
      if (active) fs::remove_all(dir, ec);
    }
  } cleanup{dir, generated};

  std::optional<ModelInputs> inputs;
  std::vector<double> logits;
  try {
    if (generated) {
      scene = make_blob_scene();
      write_fixture(*scene, dir);
    }
    inputs = load_inputs(load_manifest(dir / "manifest.json"));
    const DenseTensor logit_tensor = read_npy(dir / kFixtureLogitsFile);
    logits.assign(logit_tensor.data().begin(), logit_tensor.data().end());
    if (logits.size() != inputs->weights.classes) {
      throw Error(ErrorKind::Shape, "logits length does not match the class count");
    }
    if (generated && !(inputs->activations == scene->result.activations)) {
      throw Error(ErrorKind::Data, "activations changed across the manifest round trip");
    }
    results.push_back(make_result("fixture-load", {}));
  } catch (const std::exception& e) {
    results.push_back(make_result("fixture-load", e.what()));
    return report;
  }

  auto run = [&](const std::string& name, auto&& check) {
    try {
      results.push_back(make_result(name, check()));
    } catch (const std::exception& e) {
      results.push_back(make_result(name, e.what()));
    }
  };

  run("brute-force", [&] { return brute_force_cases(options.random_cases, *inputs); });
  run("cam-gap", [&]() -> std::string {
    if (auto failure = cam_gap_identity(inputs->activations, inputs->weights, logits); !failure.empty()) {
      return "fixture " + failure;
    }
    for (std::size_t s = 0; s < options.seeded_nets; ++s) {
      const RefNet net = make_seeded(1000 + s, {2, {{4, 3, 3, 3}, {5, 1, 3, 3}}, 3});
      const ForwardResult r = forward(net, make_seeded_clip(2000 + s, 4, 5, 6, 2));
      if (auto failure = cam_gap_identity(r.activations, net.head, r.logits); !failure.empty()) {
        return "seeded net " + std::to_string(s) + " " + failure;
      }
    }
    return {};
  });
  run("constant-preservation", constant_preservation);
  run("endpoint-preservation", endpoint_preservation);
  run("exclusion", [&] { return exclusion_property(*inputs); });

  if (generated) {
    run("blob-localization", [&]() -> std::string {
      const BlobLayout& layout = scene->layout;
      const SaliencyTube tube =
          upsample(compute_tube(inputs->activations, inputs->weights, kBlobClass, TauPolicy::nonneg()),
                   {{layout.frames, layout.height, layout.width}, ResampleMethod::Cubic});
      const BlobCheck check = check_blob_localization(layout, tube);
      if (!check.argmax_in_support) return "argmax outside the dilated blob support";
      if (!check.marginal_peak_in_blob) {
        return "temporal marginal peaks at frame " + std::to_string(check.marginal_peak_frame);
      }
      return {};
    });
  }
  return report;
}

}  // namespace saltubes
