// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "saltubes/error.hpp"
#include "saltubes/resample.hpp"

namespace saltubes {
namespace {

using testing::max_abs_error;

double source_coord(std::size_t d, std::size_t in, std::size_t out) {
  return out > 1 ? static_cast<double>(d) * static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
}

TEST(Resample, ConstantFieldPreserved) {
  for (ResampleMethod method : {ResampleMethod::Trilinear, ResampleMethod::Cubic}) {
    for (double c : {-3.25, 0.0, 0.8125, 1e6}) {
      const Volume out = resample(Volume(4, 7, 7, c), {{16, 112, 112}, method});
      ASSERT_EQ(out.dims(), (std::array<std::size_t, 3>{16, 112, 112}));
      for (double v : out.data()) ASSERT_NEAR(v, c, 1e-12 * std::max(1.0, std::abs(c)));
    }
  }
}

TEST(Resample, RampExample) {
  const Volume ramp(1, 1, 2, std::vector<double>{0.0, 1.0});
  const Volume out = resample(ramp, {{1, 1, 5}, ResampleMethod::Trilinear});
  EXPECT_EQ(out, Volume(1, 1, 5, std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
}

TEST(Resample, TrilinearReproducesLinearRampInClosedForm) {
  // v(f,h,w) = 2f - 0.5h + 3w + 1 on the source grid
  const std::size_t f0 = 3, h0 = 5, w0 = 4;
  Volume src(f0, h0, w0);
  for (std::size_t f = 0; f < f0; ++f)
    for (std::size_t h = 0; h < h0; ++h)
      for (std::size_t w = 0; w < w0; ++w) src(f, h, w) = 2.0 * f - 0.5 * h + 3.0 * w + 1.0;
  const Volume out = resample(src, {{7, 11, 13}, ResampleMethod::Trilinear});
  for (std::size_t f = 0; f < 7; ++f)
    for (std::size_t h = 0; h < 11; ++h)
      for (std::size_t w = 0; w < 13; ++w) {
        const double expect = 2.0 * source_coord(f, f0, 7) - 0.5 * source_coord(h, h0, 11) +
                              3.0 * source_coord(w, w0, 13) + 1.0;
        ASSERT_NEAR(out(f, h, w), expect, 1e-12);
      }
}

TEST(Resample, CornersExact) {
  std::mt19937_64 rng(1);
  const Volume src = testing::random_field(rng, 3, 4, 5);
  for (ResampleMethod method : {ResampleMethod::Trilinear, ResampleMethod::Cubic}) {
    const Volume out = resample(src, {{16, 112, 112}, method});
    for (std::size_t cf : {0, 1})
      for (std::size_t ch : {0, 1})
        for (std::size_t cw : {0, 1}) {
          EXPECT_EQ(out(cf * 15, ch * 111, cw * 111), src(cf * 2, ch * 3, cw * 4));
        }
  }
}

TEST(Resample, GridPointsThatLandOnSourceSamplesAreExact) {
  // 5 -> 9 maps every second output sample onto a source sample
  std::mt19937_64 rng(2);
  const Volume src = testing::random_field(rng, 5, 5, 5);
  for (ResampleMethod method : {ResampleMethod::Trilinear, ResampleMethod::Cubic}) {
    const Volume out = resample(src, {{9, 9, 9}, method});
    for (std::size_t f = 0; f < 5; ++f)
      for (std::size_t h = 0; h < 5; ++h)
        for (std::size_t w = 0; w < 5; ++w) EXPECT_NEAR(out(2 * f, 2 * h, 2 * w), src(f, h, w), 1e-15);
  }
}

TEST(Resample, OperatorIsLinear) {
  std::mt19937_64 rng(3);
  const Volume a = testing::random_field(rng, 4, 7, 7);
  const Volume b = testing::random_field(rng, 4, 7, 7);
  const double alpha = 2.5, beta = -1.25;
  Volume mix = a;
  for (std::size_t k = 0; k < mix.size(); ++k) mix.data()[k] = alpha * a.data()[k] + beta * b.data()[k];
  for (ResampleMethod method : {ResampleMethod::Trilinear, ResampleMethod::Cubic}) {
    const ResampleSpec spec{{16, 56, 56}, method};
    const Volume ra = resample(a, spec), rb = resample(b, spec), rm = resample(mix, spec);
    for (std::size_t k = 0; k < rm.size(); ++k) {
      ASSERT_NEAR(rm.data()[k], alpha * ra.data()[k] + beta * rb.data()[k], 1e-10);
    }
  }
}

TEST(Resample, SeparableTrilinearMatchesDirectInterpolation) {
  std::mt19937_64 rng(4);
  const Volume src = testing::random_field(rng, 4, 5, 6);
  const Volume out = resample(src, {{9, 12, 10}, ResampleMethod::Trilinear});
  for (std::size_t f = 0; f < 9; ++f)
    for (std::size_t h = 0; h < 12; ++h)
      for (std::size_t w = 0; w < 10; ++w) {
        const double direct =
            testing::trilinear_at(src, source_coord(f, 4, 9), source_coord(h, 5, 12), source_coord(w, 6, 10));
        ASSERT_NEAR(out(f, h, w), direct, 1e-12);
      }
}

TEST(Resample, AxisOrderDoesNotMatter) {
  std::mt19937_64 rng(5);
  const Volume src = testing::random_field(rng, 3, 4, 5);
  for (ResampleMethod method : {ResampleMethod::Trilinear, ResampleMethod::Cubic}) {
    const Volume fhw = resample(src, {{8, 9, 10}, method});
    const Volume whf = resample_axis(resample_axis(resample_axis(src, Axis::Width, 10, method), Axis::Height, 9, method),
                                     Axis::Frames, 8, method);
    EXPECT_LE(max_abs_error(fhw.data(), whf.data()), 1e-12);
  }
}

TEST(Resample, CubicOvershootIsBounded) {
  // monotone step: the sharpest case for Catmull-Rom ringing
  Volume step(1, 1, 8);
  for (std::size_t w = 0; w < 8; ++w) step(0, 0, w) = w < 4 ? 0.0 : 1.0;
  const Volume out = resample(step, {{1, 1, 71}, ResampleMethod::Cubic});
  const auto [lo, hi] = std::ranges::minmax(out.data());
  EXPECT_LT(lo, 0.0);  // it does overshoot, and is not clamped
  EXPECT_GE(lo, -0.25);
  EXPECT_LE(hi, 1.25);

  std::mt19937_64 rng(6);
  for (int c = 0; c < 20; ++c) {
    Volume mono(1, 1, 9);
    double acc = 0.0;
    for (std::size_t w = 0; w < 9; ++w) mono(0, 0, w) = acc += std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Volume up = resample(mono, {{1, 1, 64}, ResampleMethod::Cubic});
    const double range = mono(0, 0, 8) - mono(0, 0, 0);
    const auto [a, b] = std::ranges::minmax(up.data());
    EXPECT_GE(a, mono(0, 0, 0) - 0.25 * range);
    EXPECT_LE(b, mono(0, 0, 8) + 0.25 * range);
  }
}

TEST(Resample, CubicKernelValues) {
  EXPECT_EQ(cubic_kernel(0.0, -0.5), 1.0);
  EXPECT_EQ(cubic_kernel(1.0, -0.5), 0.0);
  EXPECT_EQ(cubic_kernel(2.0, -0.5), 0.0);
  EXPECT_EQ(cubic_kernel(-2.5, -0.5), 0.0);
  EXPECT_DOUBLE_EQ(cubic_kernel(0.5, -0.5), 0.5625);
  EXPECT_DOUBLE_EQ(cubic_kernel(-1.5, -0.5), -0.0625);
  for (double t = 0.0; t <= 1.0; t += 0.125) {
    const double sum = cubic_kernel(t + 1, -0.5) + cubic_kernel(t, -0.5) + cubic_kernel(1 - t, -0.5) +
                       cubic_kernel(2 - t, -0.5);
    EXPECT_NEAR(sum, 1.0, 1e-15);
  }
}

TEST(Resample, SingleSampleAxisReplicates) {
  const Volume src(1, 1, 1, 0.4);
  EXPECT_EQ(resample(src, {{3, 2, 2}, ResampleMethod::Cubic}), Volume(3, 2, 2, 0.4));
}

TEST(Resample, DownscaleRuns) {
  std::mt19937_64 rng(7);
  const Volume src = testing::random_field(rng, 8, 9, 10);
  const Volume out = resample(src, {{3, 4, 5}, ResampleMethod::Cubic});
  EXPECT_EQ(out.dims(), (std::array<std::size_t, 3>{3, 4, 5}));
  EXPECT_EQ(out(0, 0, 0), src(0, 0, 0));
  EXPECT_EQ(out(2, 3, 4), src(7, 8, 9));
}

TEST(Resample, ZeroTargetRejected) {
  try {
    resample(Volume(2, 2, 2), {{0, 4, 4}, ResampleMethod::Trilinear});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(Resample, ParseMethod) {
  EXPECT_EQ(parse_method("trilinear"), ResampleMethod::Trilinear);
  EXPECT_EQ(parse_method("cubic"), ResampleMethod::Cubic);
  EXPECT_THROW(parse_method("lanczos"), Error);
}

TEST(Upsample, RenormalizesAfterResampling) {
  SaliencyTube tube;
  tube.raw = Volume(1, 1, 8);
  for (std::size_t w = 0; w < 8; ++w) tube.raw(0, 0, w) = w < 4 ? 0.0 : 1.0;
  tube.normalized = tube.raw;
  const SaliencyTube up = upsample(tube, {{1, 1, 71}, ResampleMethod::Cubic});
  EXPECT_EQ(up.resolution, Resolution::Video);
  ASSERT_TRUE(up.normalized.has_value());
  const auto [lo, hi] = std::ranges::minmax(up.normalized->data());
  EXPECT_EQ(lo, 0.0);
  EXPECT_EQ(hi, 1.0);
  EXPECT_LT(*std::ranges::min_element(up.raw.data()), 0.0);
}

TEST(TemporalMarginal, FrameMeans) {
  Volume v(3, 2, 2);
  for (std::size_t f = 0; f < 3; ++f)
    for (std::size_t k = 0; k < 4; ++k) v.data()[f * 4 + k] = static_cast<double>(f * 4 + k);
  EXPECT_EQ(temporal_marginal(v), (std::vector<double>{1.5, 5.5, 9.5}));
}

}  // namespace
}  // namespace saltubes
