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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfnd/corpus.hpp"
#include "mfnd/metrics.hpp"
#include "mfnd/network.hpp"
#include "mfnd/textpipe.hpp"
#include "mfnd/training.hpp"

namespace mfnd {

// Everything needed to score raw news items: architecture, domain names,
// vocabulary and weights.
struct Model {
  ModelConfig config;
  DomainRegistry registry;
  Vocabulary vocab;
  ModelParams params;
};

std::vector<Example> make_examples(std::span<const NewsItem> items,
                                   const Vocabulary& vocab, std::size_t max_len);

double predict_fake(const Model& model, const NewsItem& item);

EvalReport evaluate(const Model& model, std::span<const NewsItem> test_items,
                    std::string model_name, double threshold = 0.5,
                    F1Variant variant = F1Variant::kMacro);

nlohmann::json config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& j);

// JSON container: config, registry, vocabulary and every tensor with its name
// and shape. Doubles are written in shortest round-trip form, so a reloaded
// model reproduces forward outputs bit for bit.
nlohmann::json checkpoint_to_json(const Model& model);
Model checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

// Throws DataError naming the first field that differs.
void require_same_config(const ModelConfig& expected, const ModelConfig& actual);

}  // namespace mfnd
