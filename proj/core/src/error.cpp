// SPDX-License-Identifier: Apache-2.0
#include "saltubes/error.hpp"

namespace saltubes {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Format: return "format error";
    case ErrorKind::UnsupportedLayout: return "unsupported layout";
    case ErrorKind::UnsupportedDtype: return "unsupported dtype";
    case ErrorKind::CorruptFile: return "corrupt file";
    case ErrorKind::Data: return "data error";
    case ErrorKind::InvalidShape: return "invalid shape";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Index: return "index error";
    case ErrorKind::EmptySelection: return "empty selection";
    case ErrorKind::EmptyInput: return "empty input";
    case ErrorKind::Manifest: return "manifest error";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Range: return "range error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

}  // namespace saltubes
