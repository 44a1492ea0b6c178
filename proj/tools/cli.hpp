// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace saltubes::cli {

// Process exit codes. These are a stable contract for scripts.
enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDataError = 2,
  kEmptySelection = 3,
  kSelftestFailure = 4,
};

int run(int argc, char** argv);

}  // namespace saltubes::cli
