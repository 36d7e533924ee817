/* Copyright 2026 The mfnd Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfnd/corpus.hpp"
#include "mfnd/matrix.hpp"
#include "mfnd/rng.hpp"

namespace mfnd {

using TokenId = std::int32_t;

// Lowercased segmentation: runs of letters/digits form one token, every CJK
// code point is its own token, any other non-space symbol is a one-character
// token.
std::vector<std::string> tokenize(std::string_view content);

class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kCls = 1;
  static constexpr TokenId kSep = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr std::size_t kNumReserved = 4;

  // Reserved tokens only.
  Vocabulary();
  // Restores a vocabulary from tokens in id order; the first four entries
  // must be the reserved names.
  explicit Vocabulary(std::vector<std::string> tokens_by_id);

  std::size_t size() const { return tokens_.size(); }
  std::optional<TokenId> find(std::string_view token) const;
  // Unknown tokens map to kUnk.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::map<std::string, TokenId, std::less<>> ids_;
};

// Tokens with frequency >= min_count, most frequent first, ties by byte order.
Vocabulary build_vocab(std::span<const NewsItem> items, std::size_t min_count = 1);

struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> mask;
  std::size_t length = 0;

  std::size_t max_len() const { return ids.size(); }
  bool operator==(const TokenSequence&) const = default;
};

// [CLS] + first max_len-2 tokens + [SEP], padded with [PAD].
TokenSequence encode(std::span<const std::string> tokens, const Vocabulary& vocab,
                     std::size_t max_len);

TokenSequence encode_text(std::string_view content, const Vocabulary& vocab,
                          std::size_t max_len);

// Gathers table rows; the result has max_len rows. Row 0 of the table is the
// pinned all-zero [PAD] embedding.
Matrix embed(const TokenSequence& seq, const Matrix& table);

void zero_pad_row(Matrix& table);

// N(0, 1) rows with the [PAD] row zeroed.
Matrix random_embedding_table(std::size_t vocab_size, std::size_t dim, Rng& rng);

struct PretrainedLoad {
  Matrix table;
  // Per vocabulary row: true when the row came from the vector file.
  std::vector<bool> from_file;
  std::size_t rows_from_file = 0;
};

// Text format "token v1 ... vd". A leading "<count> <dim>" header line is
// skipped. Rows absent from the file keep random initialization.
PretrainedLoad parse_pretrained_vectors(std::istream& in, const Vocabulary& vocab,
                                        std::size_t dim, Rng& rng,
                                        std::string_view source_name = "<stream>");
PretrainedLoad load_pretrained_vectors(const std::filesystem::path& path,
                                       const Vocabulary& vocab, std::size_t dim,
                                       Rng& rng);

}  // namespace mfnd
