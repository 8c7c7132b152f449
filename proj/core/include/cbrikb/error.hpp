// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cbr {

enum class ErrorKind {
  kParse,       // malformed input text (line/column in message)
  kValidation,  // well-formed but inconsistent input
  kNotFound,    // unknown entity / relation / key
  kFormat,      // binary container errors
  kIo,
  kInput,       // bad user request (e.g. question without mentions)
  kUnminable,
  kTraining,
  kConfig,
  kContract,    // API precondition violated by the caller
  kInvariant,   // internal invariant broken
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit code for an error kind: 2 input, 3 config, 4 internal.
int exit_code_for(ErrorKind kind) noexcept;

[[noreturn]] void throw_error(ErrorKind kind, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) throw_error(ErrorKind::kContract, message);
}

}  // namespace cbr
