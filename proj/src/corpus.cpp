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

#include "mfnd/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mfnd/error.hpp"
#include "mfnd/rng.hpp"
#include "mfnd/utf8.hpp"

namespace mfnd {

using nlohmann::json;

// --- DomainRegistry --------------------------------------------------------

DomainRegistry::DomainRegistry(std::vector<std::string> names,
                               std::map<std::string, std::string> aliases)
    : names_(std::move(names)) {
  if (names_.empty()) throw UsageError("domain registry needs at least one name");
  for (DomainId i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw UsageError("empty domain name");
    if (!ids_.emplace(names_[i], i).second) {
      throw UsageError("duplicate domain name: " + names_[i]);
    }
  }
  for (auto& [alias, target] : aliases) {
    if (!ids_.contains(target)) {
      throw UsageError("alias '" + alias + "' targets unknown domain '" +
                       target + "'");
    }
    if (ids_.contains(alias)) {
      throw UsageError("alias '" + alias + "' shadows a domain name");
    }
    aliases_.emplace(alias, target);
  }
}

DomainRegistry DomainRegistry::weibo21() {
  return DomainRegistry({"Science", "Military", "Education", "Disasters",
                         "Politics", "Health", "Finance", "Entertainment",
                         "Society"},
                        {{"Accidents", "Disasters"}});
}

DomainRegistry DomainRegistry::synthetic(std::size_t k) {
  std::vector<std::string> names;
  names.reserve(k);
  for (std::size_t i = 0; i < k; ++i) names.push_back("synth" + std::to_string(i));
  return DomainRegistry(std::move(names));
}

std::optional<DomainId> DomainRegistry::find(std::string_view name) const {
  if (auto it = ids_.find(name); it != ids_.end()) return it->second;
  if (auto it = aliases_.find(name); it != aliases_.end()) {
    return ids_.find(it->second)->second;
  }
  return std::nullopt;
}

// --- JSONL -----------------------------------------------------------------

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
           c == '\v';
  });
}

NewsItem parse_record(const json& obj, const DomainRegistry& registry,
                      const std::string& where) {
  auto fail = [&](const std::string& what) -> DataError {
    return DataError(where + ": " + what);
  };
  if (!obj.is_object()) throw fail("record is not a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    static const std::set<std::string> kKnown = {"id",        "content",
                                                 "domain",    "label",
                                                 "timestamp", "comments"};
    if (!kKnown.contains(it.key())) throw fail("unknown key '" + it.key() + "'");
  }
  NewsItem item;
  if (!obj.contains("id") || !obj["id"].is_string()) {
    throw fail("missing or non-string 'id'");
  }
  item.id = obj["id"].get<std::string>();
  if (!obj.contains("content") || !obj["content"].is_string()) {
    throw fail("missing or non-string 'content'");
  }
  item.content = obj["content"].get<std::string>();
  if (blank(item.content)) throw fail("empty content in record '" + item.id + "'");

  if (!obj.contains("domain")) throw fail("missing 'domain'");
  const json& dom = obj["domain"];
  if (dom.is_string()) {
    const auto name = dom.get<std::string>();
    const auto id = registry.find(name);
    if (!id) throw fail("unknown domain '" + name + "'");
    item.domain = *id;
  } else if (dom.is_number_integer()) {
    const auto id = dom.get<std::int64_t>();
    if (id < 0 || static_cast<std::size_t>(id) >= registry.size()) {
      throw fail("unknown domain id " + std::to_string(id));
    }
    item.domain = static_cast<DomainId>(id);
  } else {
    throw fail("'domain' must be a name or an integer id");
  }

  if (!obj.contains("label") || !obj["label"].is_number_integer()) {
    throw fail("missing or non-integer 'label'");
  }
  const auto label = obj["label"].get<std::int64_t>();
  if (label != 0 && label != 1) {
    throw fail("label must be 0 or 1, got " + std::to_string(label));
  }
  item.label = static_cast<int>(label);

  if (obj.contains("timestamp") && !obj["timestamp"].is_null()) {
    if (!obj["timestamp"].is_number_integer()) {
      throw fail("'timestamp' must be an integer");
    }
    item.timestamp = obj["timestamp"].get<std::int64_t>();
  }
  if (obj.contains("comments") && !obj["comments"].is_null()) {
    const json& comments = obj["comments"];
    if (!comments.is_array()) throw fail("'comments' must be an array");
    for (const auto& c : comments) {
      if (!c.is_string()) throw fail("'comments' entries must be strings");
      item.comments.push_back(c.get<std::string>());
    }
  }
  return item;
}

}  // namespace

std::vector<NewsItem> parse_corpus(std::istream& in,
                                   const DomainRegistry& registry,
                                   std::string_view source_name) {
  std::vector<NewsItem> items;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::string where =
        std::string(source_name) + ":" + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": malformed JSON: " + e.what());
    }
    NewsItem item = parse_record(obj, registry, where);
    if (!seen.insert(item.id).second) {
      throw DataError(where + ": duplicate id '" + item.id + "'");
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<NewsItem> load_corpus(const std::filesystem::path& path,
                                  const DomainRegistry& registry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  return parse_corpus(in, registry, path.string());
}

std::string item_to_json_line(const NewsItem& item,
                              const DomainRegistry& registry) {
  nlohmann::ordered_json obj;
  obj["id"] = item.id;
  obj["content"] = item.content;
  obj["domain"] = registry.name(item.domain);
  obj["label"] = item.label;
  if (item.timestamp) obj["timestamp"] = *item.timestamp;
  if (!item.comments.empty()) obj["comments"] = item.comments;
  return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_corpus(std::ostream& out, std::span<const NewsItem> items,
                  const DomainRegistry& registry) {
  for (const auto& item : items) out << item_to_json_line(item, registry) << '\n';
}

void save_corpus(const std::filesystem::path& path,
                 std::span<const NewsItem> items,
                 const DomainRegistry& registry) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_corpus(out, items, registry);
}

// --- Dedup -----------------------------------------------------------------

namespace {

// Code points fit in 21 bits; this value marks an absent position.
constexpr std::uint64_t kNoCodePoint = 0x1FFFFF;

std::uint64_t pack3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return (a << 42) | (b << 21) | c;
}

}  // namespace

std::vector<std::uint64_t> char_trigram_set(std::string_view text) {
  const std::u32string cps = utf8::decode(text);
  std::vector<std::uint64_t> grams;
  if (cps.empty()) return grams;
  if (cps.size() < 3) {
    grams.push_back(pack3(cps[0], cps.size() > 1 ? cps[1] : kNoCodePoint,
                          kNoCodePoint));
    return grams;
  }
  grams.reserve(cps.size() - 2);
  for (std::size_t i = 0; i + 2 < cps.size(); ++i) {
    grams.push_back(pack3(cps[i], cps[i + 1], cps[i + 2]));
  }
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

double jaccard(std::span<const std::uint64_t> a,
               std::span<const std::uint64_t> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  const std::size_t unioned = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(unioned);
}

double trigram_jaccard(std::string_view a, std::string_view b) {
  return jaccard(char_trigram_set(a), char_trigram_set(b));
}

std::vector<std::size_t> one_pass_clusters(std::span<const NewsItem> items,
                                           double threshold) {
  if (!(threshold >= 0.0)) {
    throw UsageError("dedup threshold must be a non-negative number");
  }
  std::vector<std::size_t> assignment(items.size());
  std::vector<std::size_t> representatives;
  std::vector<std::vector<std::uint64_t>> rep_grams;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto grams = char_trigram_set(items[i].content);
    bool joined = false;
    for (std::size_t c = 0; c < representatives.size(); ++c) {
      if (jaccard(grams, rep_grams[c]) >= threshold) {
        assignment[i] = representatives[c];
        joined = true;
        break;
      }
    }
    if (!joined) {
      assignment[i] = i;
      representatives.push_back(i);
      rep_grams.push_back(std::move(grams));
    }
  }
  return assignment;
}

std::vector<NewsItem> dedup_one_pass(std::span<const NewsItem> items,
                                     double threshold) {
  const auto assignment = one_pass_clusters(items, threshold);
  std::vector<NewsItem> kept;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (assignment[i] == i) kept.push_back(items[i]);
  }
  return kept;
}

// --- Split -----------------------------------------------------------------

namespace {

void check_ratios(const std::array<double, 3>& ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw UsageError("split ratios must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw UsageError("split ratios must sum to 1");
  }
}

}  // namespace

std::array<std::size_t, 3> split_sizes(std::size_t n,
                                       const std::array<double, 3>& ratios) {
  check_ratios(ratios);
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double quota = static_cast<double>(n) * ratios[s];
    sizes[s] = static_cast<std::size_t>(std::floor(quota));
    frac[s] = quota - std::floor(quota);
    assigned += sizes[s];
  }
  // Float rounding in the quotas can overshoot by one in degenerate cases.
  while (assigned > n) {
    const auto it = std::max_element(sizes.begin(), sizes.end());
    --*it;
    --assigned;
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frac[a] > frac[b];
  });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3) {
    if (ratios[order[k]] > 0.0) {
      ++sizes[order[k]];
      ++assigned;
    }
  }

  const auto nonzero = static_cast<std::size_t>(
      std::count_if(ratios.begin(), ratios.end(), [](double r) { return r > 0.0; }));
  if (n < nonzero) {
    // Too few items: fill the earliest non-zero splits one each.
    sizes = {0, 0, 0};
    std::size_t left = n;
    for (std::size_t s = 0; s < 3 && left > 0; ++s) {
      if (ratios[s] > 0.0) {
        sizes[s] = 1;
        --left;
      }
    }
    return sizes;
  }
  for (std::size_t s = 0; s < 3; ++s) {
    if (ratios[s] > 0.0 && sizes[s] == 0) {
      const auto donor = std::max_element(sizes.begin(), sizes.end());
      --*donor;
      sizes[s] = 1;
    }
  }
  return sizes;
}

SplitResult stratified_split(std::span<const NewsItem> items,
                             const SplitSpec& spec) {
  check_ratios(spec.ratios);

  std::map<std::pair<DomainId, int>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < items.size(); ++i) {
    cells[{items[i].domain, items[i].label}].push_back(i);
  }

  const auto nonzero = static_cast<std::size_t>(std::count_if(
      spec.ratios.begin(), spec.ratios.end(), [](double r) { return r > 0.0; }));
  Rng rng(spec.seed);
  SplitResult result;
  std::vector<int> destination(items.size(), -1);
  for (auto& [key, members] : cells) {
    rng.shuffle(members);
    if (members.size() < nonzero) {
      result.warnings.push_back(
          "cell (domain " + std::to_string(key.first) + ", label " +
          std::to_string(key.second) + ") has " +
          std::to_string(members.size()) +
          " item(s), fewer than the number of non-empty splits");
    }
    const auto sizes = split_sizes(members.size(), spec.ratios);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < sizes[s]; ++k) destination[members[pos++]] = s;
    }
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    switch (destination[i]) {
      case 0: result.train.push_back(items[i]); break;
      case 1: result.val.push_back(items[i]); break;
      default: result.test.push_back(items[i]); break;
    }
  }
  return result;
}

// --- Stats -----------------------------------------------------------------

CorpusStats corpus_stats(std::span<const NewsItem> items,
                         const DomainRegistry& registry) {
  CorpusStats stats;
  stats.domains = registry.names();
  stats.per_domain.assign(registry.size(), {});
  for (const auto& item : items) {
    auto& row = stats.per_domain.at(item.domain);
    (item.label == kLabelFake ? row.fake : row.real)++;
    (item.label == kLabelFake ? stats.total.fake : stats.total.real)++;
  }
  return stats;
}

std::string CorpusStats::render_text() const {
  std::size_t width = 6;
  for (const auto& d : domains) width = std::max(width, d.size());
  std::ostringstream out;
  auto line = [&](const std::string& name, const std::string& a,
                  const std::string& b, const std::string& c) {
    out << std::left << std::setw(static_cast<int>(width)) << name
        << std::right << std::setw(8) << a << std::setw(8) << b
        << std::setw(8) << c << '\n';
  };
  line("domain", "real", "fake", "all");
  for (std::size_t i = 0; i < domains.size(); ++i) {
    line(domains[i], std::to_string(per_domain[i].real),
         std::to_string(per_domain[i].fake), std::to_string(per_domain[i].all()));
  }
  line("All", std::to_string(total.real), std::to_string(total.fake),
       std::to_string(total.all()));
  return out.str();
}

std::string CorpusStats::render_csv() const {
  std::ostringstream out;
  out << "domain,real,fake,all\n";
  for (std::size_t i = 0; i < domains.size(); ++i) {
    out << domains[i] << ',' << per_domain[i].real << ',' << per_domain[i].fake
        << ',' << per_domain[i].all() << '\n';
  }
  out << "All," << total.real << ',' << total.fake << ',' << total.all() << '\n';
  return out.str();
}

// --- Synthetic -------------------------------------------------------------

std::optional<SynthMode> parse_synth_mode(std::string_view name) {
  if (name == "separable") return SynthMode::kSeparable;
  if (name == "domain_flip") return SynthMode::kDomainFlip;
  return std::nullopt;
}

std::string_view synth_mode_name(SynthMode mode) {
  return mode == SynthMode::kSeparable ? "separable" : "domain_flip";
}

std::string synth_token(std::size_t k) { return "t" + std::to_string(k); }

std::vector<NewsItem> synth_corpus(const SynthSpec& spec) {
  if (spec.num_domains < 1) throw UsageError("num_domains must be >= 1");
  if (spec.items_per_domain < 2 || spec.items_per_domain % 2 != 0) {
    throw UsageError("items_per_domain must be even and >= 2");
  }
  if (spec.vocab_size < 4) throw UsageError("vocab_size must be >= 4");
  if (spec.min_tokens < 1 || spec.max_tokens < spec.min_tokens) {
    throw UsageError("token length range is empty");
  }

  const std::size_t half = spec.vocab_size / 2;
  Rng rng(spec.seed);
  std::vector<NewsItem> items;
  items.reserve(spec.num_domains * spec.items_per_domain);
  for (DomainId d = 0; d < spec.num_domains; ++d) {
    const bool flipped = spec.mode == SynthMode::kDomainFlip && d % 2 == 1;
    for (std::size_t i = 0; i < spec.items_per_domain; ++i) {
      const int label = (i % 2 == 0) ? kLabelReal : kLabelFake;
      const bool lower_half = (label == kLabelFake) != flipped;
      const std::size_t lo = lower_half ? 0 : half;
      const std::size_t width = lower_half ? half : spec.vocab_size - half;
      const std::size_t len =
          spec.min_tokens + rng.below(spec.max_tokens - spec.min_tokens + 1);
      std::string content;
      for (std::size_t t = 0; t < len; ++t) {
        if (t) content.push_back(' ');
        content += synth_token(lo + rng.below(width));
      }
      NewsItem item;
      item.id = "synth-" + std::to_string(d) + "-" + std::to_string(i);
      item.content = std::move(content);
      item.domain = d;
      item.label = label;
      items.push_back(std::move(item));
    }
  }
  return items;
}

}  // namespace mfnd
