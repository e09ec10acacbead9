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

#ifndef SPANFIELD_TEXT_TOKENIZER_H_
#define SPANFIELD_TEXT_TOKENIZER_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace spanfield {

// Half-open range [begin, end) of Unicode scalar values (not bytes).
struct CharRange {
  int64_t begin = 0;
  int64_t end = 0;

  int64_t length() const { return end - begin; }
  bool operator==(const CharRange&) const = default;
};

struct Token {
  std::string text;
  CharRange range;

  bool operator==(const Token&) const = default;
};

// UTF-8 text with a scalar-value index. All character offsets in the library
// are indices into this decoding.
class Utf8Text {
 public:
  // Throws DataError on malformed UTF-8.
  explicit Utf8Text(std::string_view text);

  int64_t char_count() const { return static_cast<int64_t>(chars_.size()); }
  char32_t char_at(int64_t i) const { return chars_[i]; }

  // Byte offset of scalar i; i == char_count() maps to the byte length.
  int64_t ByteOffset(int64_t i) const { return byte_offsets_[i]; }
  // Scalar index of a byte offset that starts a character.
  int64_t CharIndexOfByte(int64_t byte) const;

  std::string_view bytes() const { return text_; }
  std::string Substr(CharRange range) const;

 private:
  std::string text_;
  std::vector<char32_t> chars_;
  std::vector<int64_t> byte_offsets_;
};

bool IsSpaceChar(char32_t c);
bool IsDigitChar(char32_t c);
bool IsPunctChar(char32_t c);

// Splits on whitespace, then within each chunk emits digit runs, single
// punctuation characters and runs of everything else as separate tokens.
// Offsets are strictly increasing and cover every non-whitespace character.
std::vector<Token> Tokenize(std::string_view text);
std::vector<Token> Tokenize(const Utf8Text& text);

}  // namespace spanfield

#endif  // SPANFIELD_TEXT_TOKENIZER_H_
