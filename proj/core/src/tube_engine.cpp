// SPDX-License-Identifier: Apache-2.0
#include "saltubes/tube_engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "saltubes/error.hpp"

namespace saltubes {

namespace {

double parse_number(std::string_view text, std::string_view policy) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorKind::InvalidArgument,
                "tau policy '" + std::string(policy) + "' has a non-numeric argument");
  }
  return value;
}

// Channel indices ordered by weight descending, ties by ascending index.
std::vector<std::size_t> rank_by_weight(std::span<const double> row) {
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  return order;
}

double percentile_of(std::span<const double> row, double p) {
  std::vector<double> sorted(row.begin(), row.end());
  std::ranges::sort(sorted);
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

TauPolicy TauPolicy::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const bool has_arg = colon != std::string_view::npos;
  const std::string_view arg = has_arg ? text.substr(colon + 1) : std::string_view{};

  if (name == "nonneg") {
    if (has_arg) throw Error(ErrorKind::InvalidArgument, "tau policy 'nonneg' takes no argument");
    return nonneg();
  }
  if (!has_arg) {
    throw Error(ErrorKind::InvalidArgument,
                "tau policy '" + std::string(text) +
                    "' must be one of nonneg, absolute:T, percentile:P, topk:K");
  }
  const double value = parse_number(arg, text);
  TauPolicy policy;
  if (name == "absolute") {
    policy = absolute(value);
  } else if (name == "percentile") {
    policy = percentile(value);
  } else if (name == "topk") {
    if (value != std::floor(value) || value < 1) {
      throw Error(ErrorKind::InvalidArgument, "topk needs an integer k >= 1");
    }
    policy = {Kind::TopK, value};
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown tau policy '" + std::string(name) + "'");
  }
  if (policy.kind == Kind::Percentile && (value < 0.0 || value > 100.0)) {
    throw Error(ErrorKind::InvalidArgument, "percentile must lie in [0, 100]");
  }
  return policy;
}

std::string TauPolicy::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::NonNeg: return "nonneg";
    case Kind::Absolute: out << "absolute:" << value; break;
    case Kind::Percentile: out << "percentile:" << value; break;
    case Kind::TopK: out << "topk:" << static_cast<std::size_t>(value); break;
  }
  return out.str();
}

void TauPolicy::validate(std::size_t channels) const {
  switch (kind) {
    case Kind::NonNeg:
      return;
    case Kind::Absolute:
      if (!std::isfinite(value)) throw Error(ErrorKind::InvalidArgument, "tau must be finite");
      return;
    case Kind::Percentile:
      if (!(value >= 0.0 && value <= 100.0)) {
        throw Error(ErrorKind::InvalidArgument, "percentile must lie in [0, 100]");
      }
      return;
    case Kind::TopK:
      if (value != std::floor(value) || value < 1.0 || value > static_cast<double>(channels)) {
        throw Error(ErrorKind::InvalidArgument,
                    "topk k must be an integer in [1, " + std::to_string(channels) + "]");
      }
      return;
  }
}

std::string_view to_string(Resolution r) {
  return r == Resolution::Activation ? "activation" : "video";
}

FeatureSelection select_features(const ClassifierWeights& weights, std::size_t class_index,
                                 const TauPolicy& policy) {
  const auto row = weights.row(class_index);
  policy.validate(row.size());

  FeatureSelection selection{class_index, row.size(), {}};
  auto keep_at_least = [&](double tau) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] >= tau) selection.selected.push_back(j);
    }
  };
  switch (policy.kind) {
    case TauPolicy::Kind::NonNeg: keep_at_least(0.0); break;
    case TauPolicy::Kind::Absolute: keep_at_least(policy.value); break;
    case TauPolicy::Kind::Percentile: keep_at_least(percentile_of(row, policy.value)); break;
    case TauPolicy::Kind::TopK: {
      auto ranked = rank_by_weight(row);
      ranked.resize(static_cast<std::size_t>(policy.value));
      std::ranges::sort(ranked);
      selection.selected = std::move(ranked);
      break;
    }
  }
  if (selection.selected.empty()) {
    throw Error(ErrorKind::EmptySelection,
                "policy " + policy.to_string() + " keeps no channel of class " +
                    std::to_string(class_index) + "; try a looser policy");
  }
  return selection;
}

WeightedFeatureMaps weight_activations(const ActivationVolume& acts,
                                       const ClassifierWeights& weights,
                                       const FeatureSelection& selection) {
  weights.require_compatible(acts);
  if (selection.selected.empty()) {
    throw Error(ErrorKind::EmptySelection, "cannot weight an empty feature selection");
  }
  if (selection.channels != acts.channels()) {
    throw Error(ErrorKind::Shape, "feature selection was made for a different channel count");
  }
  const auto row = weights.row(selection.class_index);
  const std::size_t channels = acts.channels();
  const auto src = acts.data();

  WeightedFeatureMaps out{selection.class_index, {}};
  out.maps.reserve(selection.selected.size());
  for (std::size_t j : selection.selected) {
    if (j >= channels) throw Error(ErrorKind::Index, "selected channel out of range");
    FeatureMap map{j, row[j], Volume(acts.frames(), acts.height(), acts.width())};
    auto dst = map.values.data();
    for (std::size_t v = 0; v < acts.voxels(); ++v) dst[v] = row[j] * src[v * channels + j];
    out.maps.push_back(std::move(map));
  }
  return out;
}

SaliencyTube sum_tube(const WeightedFeatureMaps& maps) {
  if (maps.maps.empty()) throw Error(ErrorKind::EmptySelection, "no feature maps to sum");
  const auto [f, h, w] = maps.maps.front().values.dims();
  SaliencyTube tube{maps.class_index, Volume(f, h, w), std::nullopt, Resolution::Activation};
  auto acc = tube.raw.data();
  for (const FeatureMap& map : maps.maps) {
    if (map.values.dims() != tube.raw.dims()) {
      throw Error(ErrorKind::Shape, "feature maps have differing dimensions");
    }
    auto src = map.values.data();
    for (std::size_t v = 0; v < acc.size(); ++v) acc[v] += src[v];
  }
  return tube;
}

std::vector<std::pair<std::size_t, SaliencyTube>> per_feature_tubes(const WeightedFeatureMaps& maps,
                                                                    std::size_t top_m) {
  if (top_m < 1 || top_m > maps.maps.size()) {
    throw Error(ErrorKind::Index, "top_m must lie in [1, " + std::to_string(maps.maps.size()) + "]");
  }
  std::vector<double> weights;
  weights.reserve(maps.maps.size());
  for (const FeatureMap& m : maps.maps) weights.push_back(m.weight);
  // maps are in ascending channel order, so ranking positions preserves the
  // lower-index tie break
  const auto ranked = rank_by_weight(weights);

  std::vector<std::pair<std::size_t, SaliencyTube>> out;
  out.reserve(top_m);
  for (std::size_t r = 0; r < top_m; ++r) {
    const FeatureMap& m = maps.maps[ranked[r]];
    out.emplace_back(m.channel,
                     SaliencyTube{maps.class_index, m.values, std::nullopt, Resolution::Activation});
  }
  return out;
}

Volume min_max_normalize(const Volume& raw) {
  Volume out(raw.frames(), raw.height(), raw.width());
  const auto [lo, hi] = std::ranges::minmax(raw.data());
  if (hi == lo) return out;
  const double range = hi - lo;
  auto src = raw.data();
  auto dst = out.data();
  for (std::size_t v = 0; v < src.size(); ++v) dst[v] = (src[v] - lo) / range;
  return out;
}

SaliencyTube normalize_tube(SaliencyTube tube) {
  tube.normalized = min_max_normalize(tube.raw);
  return tube;
}

SaliencyTube compute_tube(const ActivationVolume& acts, const ClassifierWeights& weights,
                          std::size_t class_index, const TauPolicy& policy) {
  return sum_tube(weight_activations(acts, weights, select_features(weights, class_index, policy)));
}

SaliencyTube cam2d_per_frame(const std::vector<ActivationVolume>& frame_acts,
                             const ClassifierWeights& weights, std::size_t class_index,
                             const TauPolicy& policy) {
  if (frame_acts.empty()) throw Error(ErrorKind::EmptyInput, "no frames given to the 2D path");
  const ActivationVolume& first = frame_acts.front();
  for (std::size_t t = 0; t < frame_acts.size(); ++t) {
    const ActivationVolume& a = frame_acts[t];
    if (a.frames() != 1 || a.height() != first.height() || a.width() != first.width() ||
        a.channels() != first.channels()) {
      throw Error(ErrorKind::Shape, "frame " + std::to_string(t) +
                                        " activations do not match the first frame's 1 x H' x W' x D' shape");
    }
  }
  const FeatureSelection selection = select_features(weights, class_index, policy);

  const std::size_t plane = first.height() * first.width();
  SaliencyTube tube{class_index, Volume(frame_acts.size(), first.height(), first.width()),
                    std::nullopt, Resolution::Activation};
  for (std::size_t t = 0; t < frame_acts.size(); ++t) {
    const SaliencyTube slice = sum_tube(weight_activations(frame_acts[t], weights, selection));
    std::ranges::copy(slice.raw.data(), tube.raw.data().begin() + static_cast<std::ptrdiff_t>(t * plane));
  }
  return tube;
}

std::size_t argmax(const Volume& volume) {
  const auto data = volume.data();
  return static_cast<std::size_t>(std::ranges::max_element(data) - data.begin());
}

}  // namespace saltubes
