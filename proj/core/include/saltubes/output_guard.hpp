// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <system_error>
#include <vector>

namespace saltubes {

/// Removes every tracked file on destruction unless commit() was called.
class OutputGuard {
 public:
  OutputGuard() = default;
  OutputGuard(const OutputGuard&) = delete;
  OutputGuard& operator=(const OutputGuard&) = delete;

  ~OutputGuard() {
    if (committed_) return;
    for (const auto& path : paths_) {
      std::error_code ec;
      std::filesystem::remove(path, ec);
    }
  }

  void track(std::filesystem::path path) { paths_.push_back(std::move(path)); }

  std::vector<std::filesystem::path> commit() {
    committed_ = true;
    return paths_;
  }

 private:
  std::vector<std::filesystem::path> paths_;
  bool committed_ = false;
};

}  // namespace saltubes
