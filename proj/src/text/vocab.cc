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

#include "spanfield/text/vocab.h"

#include <algorithm>
#include <map>

#include "spanfield/errors.h"

namespace spanfield {

namespace {

const char* const kReserved[kNumReservedIds] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};

}  // namespace

Vocab::Vocab() {
  for (const char* t : kReserved) Append(t);
}

void Vocab::Append(const std::string& token) {
  if (!ids_.emplace(token, size()).second) throw DataError("duplicate vocabulary token: " + token);
  tokens_.push_back(token);
}

Vocab Vocab::FromTokens(const std::vector<std::string>& tokens) {
  Vocab vocab;
  for (const auto& t : tokens) vocab.Append(t);
  return vocab;
}

Vocab Vocab::Build(const std::vector<std::vector<Token>>& texts, int64_t min_count) {
  std::map<std::string, int64_t> counts;
  for (const auto& text : texts) {
    for (const auto& tok : text) ++counts[tok.text];
  }
  for (const char* t : kReserved) counts.erase(t);
  std::vector<std::pair<std::string, int64_t>> ordered;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) ordered.emplace_back(tok, n);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab vocab;
  for (const auto& [tok, n] : ordered) vocab.Append(tok);
  return vocab;
}

int32_t Vocab::IdOf(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocab::TokenOf(int32_t id) const {
  if (id < 0 || id >= size()) {
    throw DataError("token id " + std::to_string(id) + " outside vocabulary of size " +
                    std::to_string(size()));
  }
  return tokens_[id];
}

bool Vocab::Contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

std::vector<int32_t> Vocab::Encode(std::span<const Token> tokens) const {
  std::vector<int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(IdOf(t.text));
  return ids;
}

}  // namespace spanfield
