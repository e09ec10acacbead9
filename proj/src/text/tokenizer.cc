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

#include "spanfield/text/tokenizer.h"

#include <algorithm>

#include "spanfield/errors.h"

namespace spanfield {

namespace {

[[noreturn]] void BadUtf8(int64_t byte) {
  throw DataError("invalid UTF-8 at byte " + std::to_string(byte));
}

}  // namespace

Utf8Text::Utf8Text(std::string_view text) : text_(text) {
  const auto* s = reinterpret_cast<const unsigned char*>(text_.data());
  const int64_t n = static_cast<int64_t>(text_.size());
  int64_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    int len = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      len = 1;
      cp = c;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      BadUtf8(i);
    }
    if (i + len > n) BadUtf8(i);
    for (int k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) BadUtf8(i + k);
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) BadUtf8(i);
    chars_.push_back(cp);
    byte_offsets_.push_back(i);
    i += len;
  }
  byte_offsets_.push_back(n);
}

int64_t Utf8Text::CharIndexOfByte(int64_t byte) const {
  auto it = std::lower_bound(byte_offsets_.begin(), byte_offsets_.end(), byte);
  if (it == byte_offsets_.end() || *it != byte) {
    throw DataError("byte offset " + std::to_string(byte) + " is not a character boundary");
  }
  return it - byte_offsets_.begin();
}

std::string Utf8Text::Substr(CharRange range) const {
  if (range.begin < 0 || range.end < range.begin || range.end > char_count()) {
    throw DataError("character range [" + std::to_string(range.begin) + "," +
                    std::to_string(range.end) + ") outside text of length " +
                    std::to_string(char_count()));
  }
  const int64_t b = byte_offsets_[range.begin];
  return text_.substr(b, byte_offsets_[range.end] - b);
}

bool IsSpaceChar(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
    case 0x205F: case 0x3000: case 0xFEFF:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool IsDigitChar(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= 0xFF10 && c <= 0xFF19);
}

bool IsPunctChar(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0x3014 && c <= 0x301F) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
         (c >= 0xFF5B && c <= 0xFF65) || c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 ||
         c == 0xB7 || c == 0xBB || c == 0xBF;
}

std::vector<Token> Tokenize(std::string_view text) { return Tokenize(Utf8Text(text)); }

std::vector<Token> Tokenize(const Utf8Text& text) {
  enum class Kind { kSpace, kDigit, kPunct, kWord };
  auto kind_of = [](char32_t c) {
    if (IsSpaceChar(c)) return Kind::kSpace;
    if (IsDigitChar(c)) return Kind::kDigit;
    if (IsPunctChar(c)) return Kind::kPunct;
    return Kind::kWord;
  };

  std::vector<Token> tokens;
  const int64_t n = text.char_count();
  int64_t i = 0;
  while (i < n) {
    const Kind kind = kind_of(text.char_at(i));
    if (kind == Kind::kSpace) {
      ++i;
      continue;
    }
    int64_t j = i + 1;
    if (kind != Kind::kPunct) {
      while (j < n && kind_of(text.char_at(j)) == kind) ++j;
    }
    const CharRange range{i, j};
    tokens.push_back(Token{text.Substr(range), range});
    i = j;
  }
  return tokens;
}

}  // namespace spanfield
