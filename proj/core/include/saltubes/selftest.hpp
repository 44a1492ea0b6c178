// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "saltubes/fixture.hpp"
#include "saltubes/resample.hpp"

namespace saltubes {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<PropertyResult> results;
  bool passed() const;
};

struct SelftestOptions {
  /// Check an existing fixture directory (manifest.json + logits.npy) instead
  /// of generating a fresh one.
  std::optional<std::filesystem::path> fixture_dir;
  std::size_t random_cases = 100;
  std::size_t seeded_nets = 20;
};

/// Properties checked, in order: fixture-load, brute-force, cam-gap,
/// constant-preservation, endpoint-preservation, exclusion, and (generated
/// fixture only) blob-localization.
SelftestReport run_selftest(const SelftestOptions& options = {});

/// |a - b| / max(|a|, |b|), or 0 when both are zero.
double relative_error(double a, double b);

/// Outcome of the full blob pipeline: compute, upsample to the video grid.
struct BlobCheck {
  std::size_t argmax_frame = 0, argmax_row = 0, argmax_col = 0;
  bool argmax_in_support = false;
  std::size_t marginal_peak_frame = 0;
  bool marginal_peak_in_blob = false;
  double peak_to_mean = 0.0;
};

/// `tube` must be at video resolution on `layout`'s grid. The support test
/// maps the argmax voxel back to activation coordinates (align-corners) and
/// accepts it within one activation cell of the blob.
BlobCheck check_blob_localization(const BlobLayout& layout, const SaliencyTube& tube);

}  // namespace saltubes
