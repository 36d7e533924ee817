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

#include <array>
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

namespace mfnd {

using DomainId = std::size_t;

inline constexpr int kLabelReal = 0;
inline constexpr int kLabelFake = 1;

// Ordered set of domain names; a domain's id is its position.
class DomainRegistry {
 public:
  DomainRegistry() = default;
  explicit DomainRegistry(std::vector<std::string> names,
                          std::map<std::string, std::string> aliases = {});

  // The nine-domain schema of the Weibo21 corpus. "Accidents" is accepted as
  // an alias of "Disasters".
  static DomainRegistry weibo21();
  // Names "synth0" .. "synth{k-1}".
  static DomainRegistry synthetic(std::size_t k);

  std::size_t size() const { return names_.size(); }
  const std::string& name(DomainId id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }

  // Resolves a canonical name or an alias.
  std::optional<DomainId> find(std::string_view name) const;

  bool operator==(const DomainRegistry& other) const {
    return names_ == other.names_;
  }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::string, std::less<>> aliases_;
  std::map<std::string, DomainId, std::less<>> ids_;
};

struct NewsItem {
  std::string id;
  std::string content;
  DomainId domain = 0;
  int label = kLabelReal;
  std::optional<std::int64_t> timestamp;
  std::vector<std::string> comments;

  bool operator==(const NewsItem&) const = default;
};

// --- JSONL ingestion -------------------------------------------------------

// One JSON object per line: id, content, domain (name or integer id),
// label (0 real / 1 fake), optional timestamp and comments. Blank lines are
// skipped. Errors carry "<source>:<line>".
std::vector<NewsItem> parse_corpus(std::istream& in,
                                   const DomainRegistry& registry,
                                   std::string_view source_name = "<stream>");
std::vector<NewsItem> load_corpus(const std::filesystem::path& path,
                                  const DomainRegistry& registry);

// Domains are written by canonical name.
std::string item_to_json_line(const NewsItem& item,
                              const DomainRegistry& registry);
void write_corpus(std::ostream& out, std::span<const NewsItem> items,
                  const DomainRegistry& registry);
void save_corpus(const std::filesystem::path& path,
                 std::span<const NewsItem> items,
                 const DomainRegistry& registry);

// --- Near-duplicate removal ------------------------------------------------

// Sorted set of character 3-gram codes over code points. Texts shorter than
// three code points yield one padded shingle; the empty text yields none.
std::vector<std::uint64_t> char_trigram_set(std::string_view text);

// Jaccard similarity of two sorted shingle sets; two empty sets give 1.
double jaccard(std::span<const std::uint64_t> a,
               std::span<const std::uint64_t> b);

double trigram_jaccard(std::string_view a, std::string_view b);

// Greedy single pass: each item joins the first cluster whose representative
// reaches `threshold` similarity, else starts a new cluster. Returns, for each
// item, the index of its cluster's representative.
std::vector<std::size_t> one_pass_clusters(std::span<const NewsItem> items,
                                           double threshold);

// Cluster representatives in input order. Thresholds above 1 disable merging.
std::vector<NewsItem> dedup_one_pass(std::span<const NewsItem> items,
                                     double threshold = 0.8);

// --- Stratified split ------------------------------------------------------

struct SplitSpec {
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
  std::uint64_t seed = 0;
};

struct SplitResult {
  std::vector<NewsItem> train;
  std::vector<NewsItem> val;
  std::vector<NewsItem> test;
  std::vector<std::string> warnings;
};

// Cell sizes for `n` items: largest-remainder rounding of n * ratio (ties to
// the earlier split), adjusted so every split with a non-zero ratio gets at
// least one item whenever n allows it.
std::array<std::size_t, 3> split_sizes(std::size_t n,
                                       const std::array<double, 3>& ratios);

// Stratified by (domain, label). Each split keeps input order.
SplitResult stratified_split(std::span<const NewsItem> items,
                             const SplitSpec& spec);

// --- Statistics ------------------------------------------------------------

struct LabelCounts {
  std::size_t real = 0;
  std::size_t fake = 0;
  std::size_t all() const { return real + fake; }
  bool operator==(const LabelCounts&) const = default;
};

struct CorpusStats {
  std::vector<std::string> domains;
  std::vector<LabelCounts> per_domain;
  LabelCounts total;

  std::string render_text() const;
  // Header "domain,real,fake,all"; the last row is "All".
  std::string render_csv() const;
};

CorpusStats corpus_stats(std::span<const NewsItem> items,
                         const DomainRegistry& registry);

// --- Synthetic corpora -----------------------------------------------------

enum class SynthMode { kSeparable, kDomainFlip };

std::optional<SynthMode> parse_synth_mode(std::string_view name);
std::string_view synth_mode_name(SynthMode mode);

struct SynthSpec {
  std::size_t num_domains = 2;
  std::size_t items_per_domain = 1000;
  std::size_t vocab_size = 16;
  SynthMode mode = SynthMode::kDomainFlip;
  std::uint64_t seed = 0;
  std::size_t min_tokens = 3;
  std::size_t max_tokens = 10;
};

// Token k of the synthetic vocabulary.
std::string synth_token(std::size_t k);

// Each domain holds items_per_domain / 2 real and fake items, alternating.
// Fake items in even domains (and in every domain for kSeparable) draw tokens
// uniformly from the lower half of the vocabulary, real items from the upper
// half; odd domains swap the halves under kDomainFlip.
std::vector<NewsItem> synth_corpus(const SynthSpec& spec);

}  // namespace mfnd
