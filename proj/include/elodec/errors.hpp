#pragma once

#include <stdexcept>
#include <string>

namespace elodec {

// Invalid arguments are reported with std::invalid_argument throughout.

class NotFound : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Timeouts, transport failures, malformed or missing verdicts. Callers discard
// the affected comparison and record the message.
class JudgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or structurally invalid document.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Document written by an incompatible format version.
class VersionMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace elodec
