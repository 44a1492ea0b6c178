// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "saltubes/tensor.hpp"

namespace saltubes {

// NPY v1.0 only: little-endian, C order, '<f4' or '<f8'. f4 payloads are
// widened to double on load.

DenseTensor read_npy(const std::filesystem::path& path);

/// Always writes '<f8'. The header is space-padded so magic + length +
/// header is a multiple of 64 bytes.
void write_npy(const DenseTensor& tensor, const std::filesystem::path& path);

}  // namespace saltubes
