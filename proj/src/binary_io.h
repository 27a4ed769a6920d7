// binary_io.h

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

// Little-endian byte encoding shared by the model, feature and label files.

#ifndef RESLSTM_SRC_BINARY_IO_H_
#define RESLSTM_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "reslstm/error.h"

namespace reslstm::internal {

class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) buf_.push_back(static_cast<char>(v >> (8 * k)));
  }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) buf_.push_back(static_cast<char>(v >> (8 * k)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  const std::vector<char> &buffer() const { return buf_; }
  std::vector<char> release() { return std::move(buf_); }

 private:
  std::vector<char> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<char> &buf, std::string what)
      : buf_(buf), what_(std::move(what)) {}

  std::uint64_t offset() const { return pos_; }
  std::uint64_t remaining() const { return buf_.size() - pos_; }

  void expect_magic(std::string_view magic) {
    need(magic.size(), "magic");
    if (std::memcmp(buf_.data() + pos_, magic.data(), magic.size()) != 0)
      throw FormatError(what_ + ": bad magic, expected '" + std::string(magic) +
                            "'",
                        pos_);
    pos_ += magic.size();
  }
  std::uint32_t u32(std::string_view field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + k]))
           << (8 * k);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(std::string_view field) {
    need(8, field);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + k]))
           << (8 * k);
    pos_ += 8;
    return v;
  }
  double f64(std::string_view field) { return std::bit_cast<double>(u64(field)); }
  float f32(std::string_view field) { return std::bit_cast<float>(u32(field)); }

  /// Throws unless `count` items of `width` bytes are still available.
  void need_items(std::uint64_t count, std::uint64_t width,
                  std::string_view field) {
    if (width != 0 && count > remaining() / width)
      throw FormatError(what_ + ": truncated " + std::string(field) + " (need " +
                            std::to_string(count * width) + " bytes, have " +
                            std::to_string(remaining()) + ")",
                        pos_);
  }
  void expect_end() {
    if (pos_ != buf_.size())
      throw FormatError(what_ + ": " + std::to_string(remaining()) +
                            " trailing bytes",
                        pos_);
  }
  [[noreturn]] void fail(const std::string &msg) const {
    throw FormatError(what_ + ": " + msg, pos_);
  }

 private:
  void need(std::uint64_t n, std::string_view field) {
    if (remaining() < n)
      throw FormatError(what_ + ": truncated while reading " +
                            std::string(field),
                        pos_);
  }

  const std::vector<char> &buf_;
  std::string what_;
  std::uint64_t pos_ = 0;
};

/// Whole-file read; throws IoError.
std::vector<char> read_file(const std::string &path);
/// Writes to a sibling temporary and renames it over `path` on success, so a
/// failed write never leaves a partial file behind. Throws IoError.
void write_file_atomic(const std::string &path, const std::vector<char> &bytes);

}  // namespace reslstm::internal

#endif  // RESLSTM_SRC_BINARY_IO_H_
