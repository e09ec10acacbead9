// Copyright 2026 The Spanfield Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian writers and a bounds-checked reader for the binary
// containers. Private to the library.

#ifndef SPANFIELD_UTIL_BYTE_IO_H_
#define SPANFIELD_UTIL_BYTE_IO_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "spanfield/errors.h"

namespace spanfield::internal {

inline void PutU32(std::string* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void PutU64(std::string* out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void PutBytes(std::string* out, std::string_view bytes) {
  PutU32(out, static_cast<uint32_t>(bytes.size()));
  out->append(bytes);
}

class Reader {
 public:
  Reader(std::string_view bytes, std::string_view source) : bytes_(bytes), source_(source) {}

  uint32_t U32(const char* what) {
    const std::string_view b = Take(4, what);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(b[i]);
    return v;
  }

  uint64_t U64(const char* what) {
    const std::string_view b = Take(8, what);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(b[i]);
    return v;
  }

  std::string_view Bytes(const char* what) {
    const uint32_t n = U32(what);
    return Take(n, what);
  }

  std::string_view Take(uint64_t n, const char* what) {
    if (n > bytes_.size() - pos_) {
      Fail(std::string("truncated while reading ") + what + " at byte " + std::to_string(pos_));
    }
    const std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool AtEnd() const { return pos_ == bytes_.size(); }
  size_t position() const { return pos_; }

  [[noreturn]] void Fail(const std::string& message) const {
    throw DataError(std::string(source_) + ": " + message);
  }

 private:
  std::string_view bytes_;
  std::string_view source_;
  size_t pos_ = 0;
};

}  // namespace spanfield::internal

#endif  // SPANFIELD_UTIL_BYTE_IO_H_
