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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mfnd/network.hpp"
#include "mfnd/training.hpp"

namespace mfnd {

// "key = value" lines; '#' starts a comment. Keys may appear once.
struct KeyValueEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

std::vector<KeyValueEntry> parse_key_values(std::istream& in,
                                            std::string_view source = "<stream>");

// Model config file. Keys:
//   embed_dim, domain_dim, num_experts, kernel_sizes (comma list),
//   filters_per_kernel, gate_hidden, head_hidden, max_len,
//   min_count, pretrained_vectors (path)
// domain_dim defaults to embed_dim and gate_hidden to domain_dim + embed_dim.
// num_domains and regime are not file keys; they come from the data and the
// command line.
struct PipelineConfig {
  ModelConfig model;
  std::size_t min_count = 1;
  std::string pretrained_vectors;
};

// Train config file. Keys:
//   batch_size, epochs, patience, learning_rate, seed, threads, threshold
PipelineConfig pipeline_config_from(const std::vector<KeyValueEntry>& entries,
                                    std::string_view source = "<config>");
TrainConfig train_config_from(const std::vector<KeyValueEntry>& entries,
                              std::string_view source = "<config>");

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
TrainConfig load_train_config(const std::filesystem::path& path);

std::string to_key_values(const PipelineConfig& config);
std::string to_key_values(const TrainConfig& config);

}  // namespace mfnd
