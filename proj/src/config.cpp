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

#include "mfnd/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>

#include "mfnd/error.hpp"

namespace mfnd {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string where(std::string_view source, const KeyValueEntry& e) {
  return std::string(source) + ":" + std::to_string(e.line) + ": " + e.key;
}

std::size_t as_size(std::string_view source, const KeyValueEntry& e) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) {
    throw UsageError(where(source, e) + ": expected a non-negative integer, got '" +
                     e.value + "'");
  }
  return v;
}

double as_double(std::string_view source, const KeyValueEntry& e) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) {
    throw UsageError(where(source, e) + ": expected a number, got '" + e.value + "'");
  }
  return v;
}

std::vector<std::size_t> as_size_list(std::string_view source, const KeyValueEntry& e) {
  std::vector<std::size_t> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    KeyValueEntry one{e.key, trim(item), e.line};
    out.push_back(as_size(source, one));
  }
  if (out.empty()) throw UsageError(where(source, e) + ": empty list");
  return out;
}

std::vector<KeyValueEntry> read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  return parse_key_values(in, path.string());
}

}  // namespace

std::vector<KeyValueEntry> parse_key_values(std::istream& in, std::string_view source) {
  std::vector<KeyValueEntry> entries;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError(std::string(source) + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    KeyValueEntry e{trim(body.substr(0, eq)), trim(body.substr(eq + 1)), line_no};
    if (e.key.empty()) {
      throw UsageError(std::string(source) + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!seen.insert(e.key).second) throw UsageError(where(source, e) + ": duplicate key");
    entries.push_back(std::move(e));
  }
  return entries;
}

PipelineConfig pipeline_config_from(const std::vector<KeyValueEntry>& entries,
                                    std::string_view source) {
  PipelineConfig config;
  std::optional<std::size_t> domain_dim;
  std::optional<std::size_t> gate_hidden;
  for (const auto& e : entries) {
    if (e.key == "embed_dim") config.model.embed_dim = as_size(source, e);
    else if (e.key == "domain_dim") domain_dim = as_size(source, e);
    else if (e.key == "num_experts") config.model.num_experts = as_size(source, e);
    else if (e.key == "kernel_sizes") config.model.kernel_sizes = as_size_list(source, e);
    else if (e.key == "filters_per_kernel") config.model.filters_per_kernel = as_size(source, e);
    else if (e.key == "gate_hidden") gate_hidden = as_size(source, e);
    else if (e.key == "head_hidden") config.model.head_hidden = as_size(source, e);
    else if (e.key == "max_len") config.model.max_len = as_size(source, e);
    else if (e.key == "min_count") config.min_count = as_size(source, e);
    else if (e.key == "pretrained_vectors") config.pretrained_vectors = e.value;
    else throw UsageError(where(source, e) + ": unknown model config key");
  }
  config.model.domain_dim = domain_dim.value_or(config.model.embed_dim);
  config.model.gate_hidden =
      gate_hidden.value_or(config.model.domain_dim + config.model.embed_dim);
  if (config.min_count < 1) throw UsageError("min_count: must be >= 1");
  return config;
}

TrainConfig train_config_from(const std::vector<KeyValueEntry>& entries,
                              std::string_view source) {
  TrainConfig config;
  for (const auto& e : entries) {
    if (e.key == "batch_size") config.batch_size = as_size(source, e);
    else if (e.key == "epochs") config.epochs = as_size(source, e);
    else if (e.key == "patience") config.patience = as_size(source, e);
    else if (e.key == "learning_rate") config.learning_rate = as_double(source, e);
    else if (e.key == "seed") config.seed = as_size(source, e);
    else if (e.key == "threads") config.threads = as_size(source, e);
    else if (e.key == "threshold") config.threshold = as_double(source, e);
    else throw UsageError(where(source, e) + ": unknown train config key");
  }
  config.validate();
  return config;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return pipeline_config_from(read_file(path), path.string());
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  return train_config_from(read_file(path), path.string());
}

std::string to_key_values(const PipelineConfig& c) {
  std::ostringstream out;
  out << "embed_dim = " << c.model.embed_dim << '\n'
      << "domain_dim = " << c.model.domain_dim << '\n'
      << "num_experts = " << c.model.num_experts << '\n'
      << "kernel_sizes = ";
  for (std::size_t i = 0; i < c.model.kernel_sizes.size(); ++i) {
    out << (i ? "," : "") << c.model.kernel_sizes[i];
  }
  out << '\n'
      << "filters_per_kernel = " << c.model.filters_per_kernel << '\n'
      << "gate_hidden = " << c.model.gate_hidden << '\n'
      << "head_hidden = " << c.model.head_hidden << '\n'
      << "max_len = " << c.model.max_len << '\n'
      << "min_count = " << c.min_count << '\n';
  if (!c.pretrained_vectors.empty()) out << "pretrained_vectors = " << c.pretrained_vectors << '\n';
  return out.str();
}

std::string to_key_values(const TrainConfig& c) {
  char lr[64];
  char th[64];
  std::snprintf(lr, sizeof lr, "%.17g", c.learning_rate);
  std::snprintf(th, sizeof th, "%.17g", c.threshold);
  std::ostringstream out;
  out << "batch_size = " << c.batch_size << '\n'
      << "epochs = " << c.epochs << '\n'
      << "patience = " << c.patience << '\n'
      << "learning_rate = " << lr << '\n'
      << "seed = " << c.seed << '\n'
      << "threads = " << c.threads << '\n'
      << "threshold = " << th << '\n';
  return out.str();
}

}  // namespace mfnd
