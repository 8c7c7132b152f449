// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/error.hpp"

namespace cbr {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kNotFound: return "not found";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kIo: return "io error";
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kUnminable: return "unminable";
    case ErrorKind::kTraining: return "training error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kContract: return "contract error";
    case ErrorKind::kInvariant: return "invariant violation";
  }
  return "error";
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kConfig:
      return 3;
    case ErrorKind::kContract:
    case ErrorKind::kInvariant:
      return 4;
    default:
      return 2;
  }
}

void throw_error(ErrorKind kind, const std::string& message) {
  throw Error(kind, std::string(to_string(kind)) + ": " + message);
}

}  // namespace cbr
