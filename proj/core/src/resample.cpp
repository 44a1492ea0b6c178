// SPDX-License-Identifier: Apache-2.0
#include "saltubes/resample.hpp"

#include <algorithm>
#include <cmath>

#include "saltubes/error.hpp"

namespace saltubes {

ResampleMethod parse_method(std::string_view name) {
  if (name == "trilinear") return ResampleMethod::Trilinear;
  if (name == "cubic") return ResampleMethod::Cubic;
  throw Error(ErrorKind::InvalidArgument,
              "unknown resampling method '" + std::string(name) + "' (trilinear|cubic)");
}

std::string_view to_string(ResampleMethod method) {
  return method == ResampleMethod::Trilinear ? "trilinear" : "cubic";
}

void ResampleSpec::validate() const {
  if (std::ranges::any_of(target, [](std::size_t e) { return e == 0; })) {
    throw Error(ErrorKind::InvalidArgument, "resample target dimensions must be positive");
  }
}

double cubic_kernel(double x, double a) {
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace {

// Interpolation weights for every output sample along one axis.
struct Tap {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
  int count = 0;
};

std::vector<Tap> build_taps(std::size_t in_extent, std::size_t out_extent, ResampleMethod method,
                            double a) {
  std::vector<Tap> taps(out_extent);
  const auto last = static_cast<std::ptrdiff_t>(in_extent) - 1;
  auto clamp = [&](std::ptrdiff_t i) { return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, last)); };

  for (std::size_t d = 0; d < out_extent; ++d) {
    double s = 0.0;
    if (out_extent > 1 && in_extent > 1) {
      s = static_cast<double>(d) * static_cast<double>(in_extent - 1) /
          static_cast<double>(out_extent - 1);
    }
    const double base = std::floor(s);
    const double t = s - base;
    const auto i0 = static_cast<std::ptrdiff_t>(base);
    Tap& tap = taps[d];
    if (method == ResampleMethod::Trilinear) {
      tap.count = 2;
      tap.index = {clamp(i0), clamp(i0 + 1), 0, 0};
      tap.weight = {1.0 - t, t, 0.0, 0.0};
    } else {
      tap.count = 4;
      for (int k = 0; k < 4; ++k) {
        tap.index[k] = clamp(i0 - 1 + k);
        tap.weight[k] = cubic_kernel(t - static_cast<double>(k - 1), a);
      }
    }
  }
  return taps;
}

}  // namespace

Volume resample_axis(const Volume& in, Axis axis, std::size_t extent, ResampleMethod method,
                     double cubic_a) {
  if (extent == 0) throw Error(ErrorKind::InvalidArgument, "resample extent must be positive");
  auto dims = in.dims();
  const auto ax = static_cast<std::size_t>(axis);
  const auto taps = build_taps(dims[ax], extent, method, cubic_a);
  auto out_dims = dims;
  out_dims[ax] = extent;
  Volume out(out_dims[0], out_dims[1], out_dims[2]);

  const std::array<std::size_t, 3> in_strides{dims[1] * dims[2], dims[2], 1};
  const std::size_t stride = in_strides[ax];
  auto src = in.data();
  for (std::size_t f = 0; f < out_dims[0]; ++f) {
    for (std::size_t h = 0; h < out_dims[1]; ++h) {
      for (std::size_t w = 0; w < out_dims[2]; ++w) {
        std::array<std::size_t, 3> pos{f, h, w};
        const Tap& tap = taps[pos[ax]];
        pos[ax] = 0;
        const std::size_t line = pos[0] * in_strides[0] + pos[1] * in_strides[1] + pos[2];
        double acc = 0.0;
        for (int k = 0; k < tap.count; ++k) acc += tap.weight[k] * src[line + tap.index[k] * stride];
        out(f, h, w) = acc;
      }
    }
  }
  return out;
}

Volume resample(const Volume& in, const ResampleSpec& spec) {
  spec.validate();
  Volume v = resample_axis(in, Axis::Frames, spec.target[0], spec.method, spec.cubic_a);
  v = resample_axis(v, Axis::Height, spec.target[1], spec.method, spec.cubic_a);
  return resample_axis(v, Axis::Width, spec.target[2], spec.method, spec.cubic_a);
}

SaliencyTube upsample(const SaliencyTube& tube, const ResampleSpec& spec) {
  if (tube.raw.size() == 0) throw Error(ErrorKind::Data, "tube has no raw volume");
  SaliencyTube out{tube.class_index, resample(tube.raw, spec), std::nullopt, Resolution::Video};
  out.normalized = min_max_normalize(out.raw);
  return out;
}

std::vector<double> temporal_marginal(const Volume& volume) {
  std::vector<double> m(volume.frames(), 0.0);
  const double plane = static_cast<double>(volume.height() * volume.width());
  for (std::size_t f = 0; f < volume.frames(); ++f) {
    double sum = 0.0;
    for (double v : volume.frame(f)) sum += v;
    m[f] = sum / plane;
  }
  return m;
}

std::vector<double> temporal_marginal(const SaliencyTube& tube) { return temporal_marginal(tube.raw); }

}  // namespace saltubes
