// SPDX-License-Identifier: Apache-2.0
#include "saltubes/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "saltubes/error.hpp"
#include "saltubes/npy.hpp"

namespace saltubes {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const json& required(const json& doc, const char* field) {
  if (!doc.contains(field)) throw ManifestError(field, "missing required field");
  return doc.at(field);
}

std::string string_field(const json& value, const char* field) {
  if (!value.is_string()) throw ManifestError(field, "expected a string");
  return value.get<std::string>();
}

fs::path existing_path(const json& value, const char* field, const fs::path& base) {
  fs::path p = string_field(value, field);
  if (p.empty()) throw ManifestError(field, "empty path");
  if (p.is_relative()) p = base / p;
  p = p.lexically_normal();
  if (!fs::exists(p)) throw ManifestError(field, "path does not exist: " + p.string());
  return p;
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  const fs::path rel = p.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.string();
}

}  // namespace

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ManifestError("<file>", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ManifestError("<file>", "top level must be an object");

  const fs::path base = fs::absolute(path).parent_path();
  Manifest m;
  m.version = string_field(required(doc, "version"), "version");
  m.activations_path = existing_path(required(doc, "activations_path"), "activations_path", base);
  m.weights_path = existing_path(required(doc, "weights_path"), "weights_path", base);
  if (doc.contains("bias_path") && !doc["bias_path"].is_null()) {
    m.bias_path = existing_path(doc["bias_path"], "bias_path", base);
  }

  m.axis_order = string_field(required(doc, "axis_order"), "axis_order");
  if (!AxisOrder::is_valid(m.axis_order)) {
    throw ManifestError("axis_order", "'" + m.axis_order + "' is not a permutation of F, H, W, D");
  }

  const json& labels = required(doc, "class_labels");
  if (!labels.is_array()) throw ManifestError("class_labels", "expected an array of strings");
  for (const json& label : labels) {
    m.class_labels.push_back(string_field(label, "class_labels"));
  }

  if (doc.contains("frames_dir") && !doc["frames_dir"].is_null()) {
    m.frames_dir = existing_path(doc["frames_dir"], "frames_dir", base);
    if (!fs::is_directory(*m.frames_dir)) throw ManifestError("frames_dir", "not a directory");
  }
  if (doc.contains("video_dims") && !doc["video_dims"].is_null()) {
    const json& dims = doc["video_dims"];
    if (!dims.is_array() || dims.size() != 3) {
      throw ManifestError("video_dims", "expected [F, H, W]");
    }
    std::array<std::size_t, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!dims[i].is_number_integer() || dims[i].get<long long>() <= 0) {
        throw ManifestError("video_dims", "entries must be positive integers");
      }
      out[i] = dims[i].get<std::size_t>();
    }
    m.video_dims = out;
  }
  if (doc.contains("frame_activations_paths")) {
    const json& list = doc["frame_activations_paths"];
    if (!list.is_array()) throw ManifestError("frame_activations_paths", "expected an array");
    for (const json& item : list) {
      m.frame_activations_paths.push_back(existing_path(item, "frame_activations_paths", base));
    }
  }
  return m;
}

void save_manifest(const Manifest& m, const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path();
  json doc;
  doc["version"] = m.version;
  doc["activations_path"] = relative_to(fs::absolute(m.activations_path), base);
  doc["weights_path"] = relative_to(fs::absolute(m.weights_path), base);
  if (m.bias_path) doc["bias_path"] = relative_to(fs::absolute(*m.bias_path), base);
  doc["axis_order"] = m.axis_order;
  doc["class_labels"] = m.class_labels;
  if (m.frames_dir) doc["frames_dir"] = relative_to(fs::absolute(*m.frames_dir), base);
  if (m.video_dims) doc["video_dims"] = *m.video_dims;
  if (!m.frame_activations_paths.empty()) {
    json list = json::array();
    for (const auto& p : m.frame_activations_paths) list.push_back(relative_to(fs::absolute(p), base));
    doc["frame_activations_paths"] = list;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

ClassifierWeights load_weights(const Manifest& m) {
  ClassifierWeights weights = ClassifierWeights::from_tensor(read_npy(m.weights_path));
  if (m.bias_path) {
    const DenseTensor bias = read_npy(*m.bias_path);
    if (bias.rank() != 1) {
      throw Error(ErrorKind::Shape, "bias must be rank 1, got shape " + shape_to_string(bias.shape()));
    }
    weights.bias = std::vector<double>(bias.data().begin(), bias.data().end());
  }
  weights.class_labels = m.class_labels;
  weights.validate();
  return weights;
}

ModelInputs load_inputs(const Manifest& m) {
  ModelInputs inputs{canonicalize(read_npy(m.activations_path), AxisOrder(m.axis_order)),
                     load_weights(m)};
  inputs.weights.require_compatible(inputs.activations);
  return inputs;
}

std::vector<ActivationVolume> load_frame_activations(const Manifest& m) {
  const AxisOrder order(m.axis_order);
  std::vector<ActivationVolume> frames;
  if (m.frame_activations_paths.empty()) {
    const ActivationVolume volume = canonicalize(read_npy(m.activations_path), order);
    for (std::size_t f = 0; f < volume.frames(); ++f) frames.push_back(volume.slice_frame(f));
    return frames;
  }
  for (const auto& p : m.frame_activations_paths) {
    frames.push_back(canonicalize(read_npy(p), order));
  }
  return frames;
}

}  // namespace saltubes
