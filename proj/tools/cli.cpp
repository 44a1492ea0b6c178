// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saltubes/error.hpp"
#include "saltubes/fixture.hpp"
#include "saltubes/manifest.hpp"
#include "saltubes/npy.hpp"
#include "saltubes/output_guard.hpp"
#include "saltubes/render.hpp"
#include "saltubes/resample.hpp"
#include "saltubes/selftest.hpp"
#include "saltubes/tube_engine.hpp"
#include "saltubes/tube_io.hpp"

namespace saltubes::cli {

namespace fs = std::filesystem;

namespace {

struct TubeArgs {
  std::string manifest;
  std::optional<std::size_t> class_index;
  std::optional<std::string> class_label;
  std::string tau_policy = "nonneg";
  std::vector<std::size_t> upsample;
  std::string method = "cubic";
  std::string out;
  std::optional<std::size_t> per_feature;
};

struct RenderArgs {
  std::string tube;
  std::string frames;
  std::string mode = "heat";
  double alpha = 0.5;
  double floor = 0.15;
  unsigned gif_delay_ms = 100;
  std::optional<std::string> gif;
  std::string out;
};

struct SelftestArgs {
  std::optional<std::string> fixture;
  std::optional<std::string> write_fixture;
};

void add_tube_options(CLI::App* cmd, TubeArgs& args) {
  cmd->add_option("--manifest", args.manifest, "Run manifest (JSON)")->required();
  auto* which = cmd->add_option_group("class", "Target class");
  which->add_option("--class-index", args.class_index, "Class row index");
  which->add_option("--class-label", args.class_label, "Class label from the manifest");
  which->require_option(1);
  cmd->add_option("--tau-policy", args.tau_policy,
                  "nonneg | absolute:T | percentile:P | topk:K")
      ->capture_default_str();
  cmd->add_option("--upsample", args.upsample, "Video grid F,H,W (default: manifest video_dims)")
      ->delimiter(',')
      ->expected(3);
  cmd->add_option("--method", args.method, "Resampling method")
      ->check(CLI::IsMember({"trilinear", "cubic"}))
      ->capture_default_str();
  cmd->add_option("--out", args.out, "Output tube path (<stem>.npy)")->required();
  cmd->add_option("--per-feature", args.per_feature,
                  "Also write the top M single-feature tubes as <stem>.feature_<j>.npy");
}

std::string policy_hint() {
  return "hint: the class weight row has nothing above the threshold; retry with a looser "
         "--tau-policy such as topk:1 or percentile:50";
}

int cmd_info(const std::string& manifest_path) {
  const Manifest m = load_manifest(manifest_path);
  const ModelInputs in = load_inputs(m);
  const ActivationVolume& a = in.activations;
  std::cout << "manifest:     " << fs::absolute(manifest_path).string() << '\n'
            << "version:      " << m.version << '\n'
            << "axis_order:   " << m.axis_order << '\n'
            << "activations:  F'=" << a.frames() << " H'=" << a.height() << " W'=" << a.width()
            << " D'=" << a.channels() << '\n'
            << "classes:      N=" << in.weights.classes << '\n'
            << "bias:         " << (in.weights.bias ? "yes" : "no") << '\n';
  std::cout << "class_labels:";
  if (m.class_labels.empty()) std::cout << " (none)";
  for (std::size_t i = 0; i < m.class_labels.size(); ++i) std::cout << ' ' << i << '=' << m.class_labels[i];
  std::cout << '\n';
  if (m.video_dims) {
    std::cout << "video_dims:   F=" << (*m.video_dims)[0] << " H=" << (*m.video_dims)[1]
              << " W=" << (*m.video_dims)[2] << '\n';
  }
  if (m.frames_dir) std::cout << "frames_dir:   " << m.frames_dir->string() << '\n';
  return kSuccess;
}

std::size_t resolve_class(const TubeArgs& args, const ClassifierWeights& weights) {
  if (args.class_label) return weights.class_index_of(*args.class_label);
  weights.row(*args.class_index);  // range check
  return *args.class_index;
}

std::optional<ResampleSpec> resample_target(const TubeArgs& args, const Manifest& m) {
  ResampleSpec spec;
  spec.method = parse_method(args.method);
  if (!args.upsample.empty()) {
    std::copy_n(args.upsample.begin(), 3, spec.target.begin());
  } else if (m.video_dims) {
    spec.target = *m.video_dims;
  } else {
    return std::nullopt;
  }
  spec.validate();
  return spec;
}

int cmd_tube(const TubeArgs& args, bool per_frame) {
  // flag values that need no I/O are checked first
  const TauPolicy policy = TauPolicy::parse(args.tau_policy);
  if (!args.upsample.empty()) {
    ResampleSpec{{args.upsample[0], args.upsample[1], args.upsample[2]}}.validate();
  }
  if (args.per_feature && *args.per_feature == 0) {
    throw Error(ErrorKind::InvalidArgument, "--per-feature must be at least 1");
  }
  if (args.per_feature && per_frame) {
    throw Error(ErrorKind::InvalidArgument, "--per-feature is only available for compute");
  }

  const Manifest m = load_manifest(args.manifest);
  const std::optional<ResampleSpec> spec = resample_target(args, m);

  TubeMetadata meta;
  meta.policy = policy.to_string();
  meta.path_kind = per_frame ? "2d" : "3d";
  SaliencyTube tube;
  ClassifierWeights weights;
  std::optional<WeightedFeatureMaps> maps;
  if (per_frame) {
    const std::vector<ActivationVolume> frames = load_frame_activations(m);
    weights = load_weights(m);
    meta.class_index = resolve_class(args, weights);
    tube = cam2d_per_frame(frames, weights, meta.class_index, policy);
    meta.selected_features = select_features(weights, meta.class_index, policy).selected;
  } else {
    ModelInputs in = load_inputs(m);
    weights = std::move(in.weights);
    meta.class_index = resolve_class(args, weights);
    const FeatureSelection selection = select_features(weights, meta.class_index, policy);
    meta.selected_features = selection.selected;
    maps = weight_activations(in.activations, weights, selection);
    tube = sum_tube(*maps);
  }
  meta.excluded_count = weights.channels - meta.selected_features.size();
  if (!weights.class_labels.empty()) meta.class_label = weights.class_labels[meta.class_index];
  meta.activation_dims = tube.raw.dims();
  for (double v : tube.raw.data()) meta.activation_raw_sum += v;

  auto finish = [&](const SaliencyTube& t) {
    if (spec) return upsample(t, *spec);
    return normalize_tube(t);
  };
  if (spec) meta.method = std::string(to_string(spec->method));
  const SaliencyTube out_tube = finish(tube);

  OutputGuard guard;
  const TubeOutputPaths paths = write_tube(out_tube, meta, args.out);
  for (const fs::path& p : {paths.normalized, paths.raw, paths.sidecar}) guard.track(p);

  if (args.per_feature && maps) {
    fs::path stem = args.out;
    if (stem.extension() == ".npy") stem.replace_extension();
    for (const auto& [channel, feature_tube] : per_feature_tubes(*maps, *args.per_feature)) {
      const fs::path p = stem.string() + ".feature_" + std::to_string(channel) + ".npy";
      guard.track(p);
      write_npy(finish(feature_tube).normalized->to_tensor(), p);
    }
  }
  guard.commit();
  std::cerr << "wrote " << paths.normalized.string() << " (" << meta.selected_features.size()
            << " of " << weights.channels << " features, " << to_string(out_tube.resolution)
            << " resolution)\n";
  return kSuccess;
}

int cmd_render(const RenderArgs& args) {
  RenderConfig config;
  config.mode = parse_render_mode(args.mode);
  config.alpha = args.alpha;
  config.floor = args.floor;
  config.gif_delay_ms = args.gif_delay_ms;
  config.validate();

  const SaliencyTube tube = read_normalized_tube(args.tube);
  const FrameSequence frames = load_frames(args.frames);
  std::optional<fs::path> gif;
  if (args.gif) gif = fs::path(*args.gif);
  const auto written = render_sequence(frames, tube, config, args.out, gif);
  std::cerr << "wrote " << written.size() << " files to " << args.out << '\n';
  return kSuccess;
}

int cmd_selftest(const SelftestArgs& args) {
  if (args.write_fixture) {
    const fs::path manifest = write_fixture(make_blob_scene(), *args.write_fixture);
    std::cerr << "wrote fixture " << manifest.string() << '\n';
    return kSuccess;
  }
  SelftestOptions options;
  if (args.fixture) options.fixture_dir = fs::path(*args.fixture);
  const SelftestReport report = run_selftest(options);
  for (const PropertyResult& r : report.results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
  }
  if (!report.passed()) {
    std::cerr << "selftest failed:";
    for (const PropertyResult& r : report.results)
      if (!r.passed) std::cerr << ' ' << r.name;
    std::cerr << '\n';
    return kSelftestFailure;
  }
  return kSuccess;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InvalidArgument: return kUsage;
    case ErrorKind::EmptySelection: return kEmptySelection;
    default: return kDataError;
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Spatio-temporal class saliency tubes for 3D-CNN video classifiers"};
  app.require_subcommand(1);

  std::string info_manifest;
  auto* info = app.add_subcommand("info", "Summarize a manifest and its tensors");
  info->add_option("--manifest", info_manifest, "Run manifest (JSON)")->required();

  TubeArgs compute_args;
  auto* compute = app.add_subcommand("compute", "Compute a saliency tube from 3D activations");
  add_tube_options(compute, compute_args);

  TubeArgs cam2d_args;
  auto* cam2d = app.add_subcommand("cam2d", "Per-frame 2D class activation maps stacked along time");
  add_tube_options(cam2d, cam2d_args);

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "Overlay a normalized tube on video frames");
  render->add_option("--tube", render_args.tube, "Normalized tube (F x H x W .npy)")->required();
  render->add_option("--frames", render_args.frames, "Directory of PNG/JPEG frames")->required();
  render->add_option("--mode", render_args.mode, "heat | focus")
      ->check(CLI::IsMember({"heat", "focus"}))
      ->capture_default_str();
  render->add_option("--alpha", render_args.alpha, "Heat blend weight")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  render->add_option("--floor", render_args.floor, "Focus luminance floor")
      ->check(CLI::Validator(
          [](std::string& s) -> std::string {
            double v = 0.0;
            try {
              v = std::stod(s);
            } catch (const std::exception&) {
              return "floor must be a number";
            }
            return (v >= 0.0 && v < 1.0) ? std::string{} : "floor must lie in [0, 1)";
          },
          "in [0, 1)"))
      ->capture_default_str();
  render->add_option("--gif-delay", render_args.gif_delay_ms, "GIF frame delay in ms")
      ->capture_default_str();
  render->add_option("--gif", render_args.gif, "Also write an animated GIF here");
  render->add_option("--out", render_args.out, "Output directory for frame_NNNN.png")->required();

  SelftestArgs selftest_args;
  auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle checks");
  selftest->add_option("--fixture", selftest_args.fixture, "Check an existing fixture directory");
  selftest->add_option("--write-fixture", selftest_args.write_fixture,
                       "Write the planted-blob fixture to a directory and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (info->parsed()) return cmd_info(info_manifest);
    if (compute->parsed()) return cmd_tube(compute_args, false);
    if (cam2d->parsed()) return cmd_tube(cam2d_args, true);
    if (render->parsed()) return cmd_render(render_args);
    if (selftest->parsed()) return cmd_selftest(selftest_args);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    if (e.kind() == ErrorKind::EmptySelection) std::cerr << policy_hint() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace saltubes::cli
