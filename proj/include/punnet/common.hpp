#pragma once

#include <stdexcept>
#include <string>

namespace punnet {

// Error taxonomy shared by the whole library. The CLI maps these onto exit
// codes: ArgumentError/FormatError/LookupError -> 1, IoError -> 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid values or incompatible shapes passed by the caller.
struct ArgumentError : Error {
  using Error::Error;
};

// A file or stream violates its expected format or schema.
struct FormatError : Error {
  using Error::Error;
};

// The underlying stream could not be read or written.
struct IoError : Error {
  using Error::Error;
};

// A key (example id, word, config key) is not present.
struct LookupError : Error {
  using Error::Error;
};

// Numerical failure (division by ~0 in the raw-ratio attention variant).
struct NumericError : Error {
  using Error::Error;
};

inline std::string to_upper_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return s;
}

inline std::string to_lower_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

}  // namespace punnet
