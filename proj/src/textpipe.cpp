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

#include "mfnd/textpipe.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

#include "mfnd/error.hpp"
#include "mfnd/utf8.hpp"

namespace mfnd {

// --- tokenize --------------------------------------------------------------

namespace {

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v' || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200B) || c == 0x2028 || c == 0x2029 ||
         c == 0x202F || c == 0x205F || c == 0x3000 || c == 0xFEFF;
}

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) ||    // unified ideographs
         (c >= 0x3400 && c <= 0x4DBF) ||    // extension A
         (c >= 0x20000 && c <= 0x2EBEF) ||  // extensions B-F
         (c >= 0x30000 && c <= 0x3134F) ||  // extension G
         (c >= 0xF900 && c <= 0xFAFF) ||    // compatibility ideographs
         (c >= 0x3040 && c <= 0x30FF) ||    // kana
         (c >= 0xAC00 && c <= 0xD7AF);      // hangul syllables
}

// Symbol blocks outside ASCII that must not glue onto words.
bool is_symbol_block(char32_t c) {
  return (c >= 0xA1 && c <= 0xBF) || c == 0xD7 || c == 0xF7 ||
         (c >= 0x2000 && c <= 0x2BFF) ||  // punctuation, arrows, math, boxes
         (c >= 0x3000 && c <= 0x303F) ||  // CJK symbols and punctuation
         (c >= 0xFE30 && c <= 0xFE4F) ||  // CJK compatibility forms
         (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65) ||
         (c >= 0x1F000 && c <= 0x1FAFF) || c == 0xFFFD;
}

bool is_word_char(char32_t c) {
  if (c < 0x80) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
           (c >= 'A' && c <= 'Z');
  }
  return !is_space(c) && !is_cjk(c) && !is_symbol_block(c);
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if ((c >= 0xC0 && c <= 0xDE && c != 0xD7)) return c + 32;     // Latin-1
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;    // Greek
  if (c >= 0x410 && c <= 0x42F) return c + 32;                  // Cyrillic
  if (c >= 0x400 && c <= 0x40F) return c + 80;                  // Cyrillic Ѐ-Џ
  if (c >= 0xFF21 && c <= 0xFF3A) return c + 32;                // fullwidth
  return c;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view content) {
  const std::u32string cps = utf8::decode(content);
  std::vector<std::string> tokens;
  std::u32string word;
  auto flush = [&] {
    if (!word.empty()) {
      tokens.push_back(utf8::encode(word));
      word.clear();
    }
  };
  for (char32_t c : cps) {
    if (is_space(c)) {
      flush();
    } else if (is_cjk(c)) {
      flush();
      tokens.push_back(utf8::encode(std::u32string(1, c)));
    } else if (is_word_char(c)) {
      word.push_back(to_lower(c));
    } else {
      flush();
      tokens.push_back(utf8::encode(std::u32string(1, c)));
    }
  }
  flush();
  return tokens;
}

// --- Vocabulary ------------------------------------------------------------

namespace {
const char* const kReservedNames[] = {"[PAD]", "[CLS]", "[SEP]", "[UNK]"};
}

Vocabulary::Vocabulary() {
  for (const char* name : kReservedNames) add(name);
}

Vocabulary::Vocabulary(std::vector<std::string> tokens_by_id) {
  if (tokens_by_id.size() < kNumReserved) {
    throw DataError("vocabulary is missing reserved tokens");
  }
  for (std::size_t i = 0; i < kNumReserved; ++i) {
    if (tokens_by_id[i] != kReservedNames[i]) {
      throw DataError("vocabulary entry " + std::to_string(i) + " must be " +
                      kReservedNames[i]);
    }
  }
  for (auto& t : tokens_by_id) {
    if (ids_.contains(t)) throw DataError("duplicate vocabulary token '" + t + "'");
    add(std::move(t));
  }
}

void Vocabulary::add(std::string token) {
  const auto id = static_cast<TokenId>(tokens_.size());
  ids_.emplace(token, id);
  tokens_.push_back(std::move(token));
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  return std::nullopt;
}

TokenId Vocabulary::id(std::string_view token) const {
  return find(token).value_or(kUnk);
}

Vocabulary build_vocab(std::span<const NewsItem> items, std::size_t min_count) {
  if (min_count < 1) throw UsageError("min_count must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& item : items) {
    for (auto& tok : tokenize(item.content)) ++counts[std::move(tok)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts) {
    if (n >= min_count) ranked.emplace_back(tok, n);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens(std::begin(kReservedNames), std::end(kReservedNames));
  for (auto& [tok, n] : ranked) {
    // A tokenizer never emits the bracketed reserved names as one token.
    tokens.push_back(std::move(tok));
  }
  return Vocabulary(std::move(tokens));
}

// --- encode / embed --------------------------------------------------------

TokenSequence encode(std::span<const std::string> tokens, const Vocabulary& vocab,
                     std::size_t max_len) {
  if (max_len < 2) throw UsageError("max_len must be >= 2");
  TokenSequence seq;
  seq.ids.assign(max_len, Vocabulary::kPad);
  seq.mask.assign(max_len, 0);
  const std::size_t kept = std::min(tokens.size(), max_len - 2);
  seq.ids[0] = Vocabulary::kCls;
  for (std::size_t i = 0; i < kept; ++i) seq.ids[i + 1] = vocab.id(tokens[i]);
  seq.ids[kept + 1] = Vocabulary::kSep;
  seq.length = kept + 2;
  std::fill(seq.mask.begin(), seq.mask.begin() + static_cast<std::ptrdiff_t>(seq.length), 1);
  return seq;
}

TokenSequence encode_text(std::string_view content, const Vocabulary& vocab,
                          std::size_t max_len) {
  const auto tokens = tokenize(content);
  return encode(tokens, vocab, max_len);
}

Matrix embed(const TokenSequence& seq, const Matrix& table) {
  Matrix out(seq.max_len(), table.cols);
  for (std::size_t t = 0; t < seq.ids.size(); ++t) {
    const TokenId id = seq.ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= table.rows) {
      throw DataError("token id " + std::to_string(id) +
                      " out of range for embedding table with " +
                      std::to_string(table.rows) + " rows");
    }
    if (id == Vocabulary::kPad) continue;
    const auto src = table.row(static_cast<std::size_t>(id));
    std::copy(src.begin(), src.end(), out.row(t).begin());
  }
  return out;
}

void zero_pad_row(Matrix& table) {
  if (table.rows == 0) return;
  auto pad = table.row(Vocabulary::kPad);
  std::fill(pad.begin(), pad.end(), 0.0);
}

Matrix random_embedding_table(std::size_t vocab_size, std::size_t dim, Rng& rng) {
  Matrix table(vocab_size, dim);
  for (double& x : table.data) x = rng.normal(0.0, 1.0);
  zero_pad_row(table);
  return table;
}

// --- pretrained vectors ----------------------------------------------------

PretrainedLoad parse_pretrained_vectors(std::istream& in, const Vocabulary& vocab,
                                        std::size_t dim, Rng& rng,
                                        std::string_view source_name) {
  if (dim < 1) throw UsageError("embedding dimension must be >= 1");
  PretrainedLoad load;
  load.table = random_embedding_table(vocab.size(), dim, rng);
  load.from_file.assign(vocab.size(), false);

  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    values.clear();
    std::string field;
    bool numeric = true;
    while (fields >> field) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
    if (!numeric) throw DataError(where + ": non-numeric vector component");
    if (line_no == 1 && values.size() == 1 && dim != 1 &&
        token.find_first_not_of("0123456789") == std::string::npos) {
      continue;  // word2vec "<count> <dim>" header
    }
    if (values.size() != dim) {
      throw DataError(where + ": vector has " + std::to_string(values.size()) +
                      " components, expected " + std::to_string(dim));
    }
    const auto id = vocab.find(token);
    if (!id || *id == Vocabulary::kPad) continue;
    std::copy(values.begin(), values.end(), load.table.row(static_cast<std::size_t>(*id)).begin());
    if (!load.from_file[static_cast<std::size_t>(*id)]) {
      load.from_file[static_cast<std::size_t>(*id)] = true;
      ++load.rows_from_file;
    }
  }
  zero_pad_row(load.table);
  return load;
}

PretrainedLoad load_pretrained_vectors(const std::filesystem::path& path,
                                       const Vocabulary& vocab, std::size_t dim,
                                       Rng& rng) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vector file " + path.string());
  return parse_pretrained_vectors(in, vocab, dim, rng, path.string());
}

}  // namespace mfnd
