// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace saltubes {

enum class ErrorKind {
  Format,             // bad magic, malformed header, undecodable image
  UnsupportedLayout,  // fortran_order arrays
  UnsupportedDtype,
  CorruptFile,        // payload length disagrees with header
  Data,               // non-finite values, out-of-range tube values
  InvalidShape,
  Shape,              // dimension mismatch between paired inputs
  Index,
  EmptySelection,
  EmptyInput,
  Manifest,
  InvalidArgument,    // policy / config values outside their domain
  Range,
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by load_manifest; `field()` names the offending manifest key.
class ManifestError : public Error {
 public:
  ManifestError(std::string field, const std::string& message)
      : Error(ErrorKind::Manifest, "manifest field '" + field + "': " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace saltubes
