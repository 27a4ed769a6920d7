// reslstm/error.h

// Copyright 2026  The reslstm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef RESLSTM_ERROR_H_
#define RESLSTM_ERROR_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace reslstm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a precondition that is not a plain shape mismatch
/// (label out of range, trace from the wrong variant, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary file. offset() is the byte position where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string &what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Unknown model-file version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace reslstm

#endif  // RESLSTM_ERROR_H_
