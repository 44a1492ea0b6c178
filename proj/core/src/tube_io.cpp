// SPDX-License-Identifier: Apache-2.0
#include "saltubes/tube_io.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "saltubes/error.hpp"
#include "saltubes/npy.hpp"
#include "saltubes/output_guard.hpp"

namespace saltubes {

namespace fs = std::filesystem;

TubeOutputPaths tube_output_paths(const fs::path& out) {
  fs::path stem = out;
  if (stem.extension() == ".npy") stem.replace_extension();
  const std::string base = stem.string();
  return {base + ".npy", base + ".raw.npy", base + ".json"};
}

std::string sidecar_json(const SaliencyTube& tube, const TubeMetadata& meta) {
  nlohmann::json doc;
  doc["class_index"] = meta.class_index;
  doc["class_label"] = meta.class_label;
  doc["policy"] = meta.policy;
  doc["selected_features"] = meta.selected_features;
  doc["excluded_count"] = meta.excluded_count;
  doc["path"] = meta.path_kind;
  doc["resolution_tag"] = std::string(to_string(tube.resolution));
  doc["dims"] = tube.raw.dims();
  doc["activation_dims"] = meta.activation_dims;
  doc["activation_raw_sum"] = meta.activation_raw_sum;
  if (!meta.method.empty()) doc["method"] = meta.method;
  return doc.dump(2) + "\n";
}

TubeOutputPaths write_tube(const SaliencyTube& tube, const TubeMetadata& meta, const fs::path& out) {
  const TubeOutputPaths paths = tube_output_paths(out);
  const Volume normalized = tube.normalized ? *tube.normalized : min_max_normalize(tube.raw);

  if (paths.normalized.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(paths.normalized.parent_path(), ec);
  }
  OutputGuard guard;
  guard.track(paths.normalized);
  write_npy(normalized.to_tensor(), paths.normalized);
  guard.track(paths.raw);
  write_npy(tube.raw.to_tensor(), paths.raw);
  guard.track(paths.sidecar);
  std::ofstream sidecar(paths.sidecar, std::ios::trunc);
  if (!sidecar) throw Error(ErrorKind::Io, "cannot open " + paths.sidecar.string() + " for writing");
  sidecar << sidecar_json(tube, meta);
  sidecar.close();
  if (!sidecar) throw Error(ErrorKind::Io, "write failed for " + paths.sidecar.string());
  guard.commit();
  return paths;
}

SaliencyTube read_normalized_tube(const fs::path& path) {
  Volume v = Volume::from_tensor(read_npy(path));
  if (std::ranges::any_of(v.data(), [](double x) { return x < 0.0 || x > 1.0; })) {
    throw Error(ErrorKind::Data, path.string() + " holds values outside [0, 1]; pass the normalized tube");
  }
  SaliencyTube tube;
  tube.raw = v;
  tube.normalized = std::move(v);
  tube.resolution = Resolution::Video;
  return tube;
}

}  // namespace saltubes
