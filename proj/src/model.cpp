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

#include "mfnd/model.hpp"

#include <fstream>

#include "mfnd/error.hpp"

namespace mfnd {

using nlohmann::json;

std::vector<Example> make_examples(std::span<const NewsItem> items,
                                   const Vocabulary& vocab, std::size_t max_len) {
  std::vector<Example> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    out.push_back({encode_text(item.content, vocab, max_len), item.domain, item.label});
  }
  return out;
}

double predict_fake(const Model& model, const NewsItem& item) {
  const auto seq = encode_text(item.content, model.vocab, model.config.max_len);
  return forward_cached(seq, item.domain, model.params, model.config).p_fake;
}

EvalReport evaluate(const Model& model, std::span<const NewsItem> test_items,
                    std::string model_name, double threshold, F1Variant variant) {
  if (test_items.empty()) throw DataError("test set is empty");
  std::vector<double> p;
  std::vector<DomainId> domains;
  std::vector<int> labels;
  for (const auto& item : test_items) {
    p.push_back(predict_fake(model, item));
    domains.push_back(item.domain);
    labels.push_back(item.label);
  }
  return evaluate_predictions(std::move(model_name), model.registry.names(), p, domains,
                              labels, threshold, variant);
}

json config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["embed_dim"] = c.embed_dim;
  j["num_domains"] = c.num_domains;
  j["domain_dim"] = c.domain_dim;
  j["num_experts"] = c.num_experts;
  j["kernel_sizes"] = c.kernel_sizes;
  j["filters_per_kernel"] = c.filters_per_kernel;
  j["gate_hidden"] = c.gate_hidden;
  j["head_hidden"] = c.head_hidden;
  j["max_len"] = c.max_len;
  j["regime"] = regime_name(c.regime);
  return json(j);
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  try {
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.num_domains = j.at("num_domains").get<std::size_t>();
    c.domain_dim = j.at("domain_dim").get<std::size_t>();
    c.num_experts = j.at("num_experts").get<std::size_t>();
    c.kernel_sizes = j.at("kernel_sizes").get<std::vector<std::size_t>>();
    c.filters_per_kernel = j.at("filters_per_kernel").get<std::size_t>();
    c.gate_hidden = j.at("gate_hidden").get<std::size_t>();
    c.head_hidden = j.at("head_hidden").get<std::size_t>();
    c.max_len = j.at("max_len").get<std::size_t>();
    const auto regime = parse_regime(j.at("regime").get<std::string>());
    if (!regime) throw DataError("checkpoint: unknown regime");
    c.regime = *regime;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const UsageError& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
  return c;
}

json checkpoint_to_json(const Model& model) {
  nlohmann::ordered_json j;
  j["format"] = "mfnd-checkpoint";
  j["version"] = 1;
  j["config"] = config_to_json(model.config);
  j["registry"] = model.registry.names();
  j["vocabulary"] = model.vocab.tokens();
  auto tensors = nlohmann::ordered_json::array();
  for (const auto& view : tensor_views(model.params)) {
    nlohmann::ordered_json t;
    t["name"] = view.name;
    t["shape"] = view.shape;
    t["data"] = std::vector<double>(view.values.begin(), view.values.end());
    tensors.push_back(std::move(t));
  }
  j["tensors"] = std::move(tensors);
  return json(j);
}

Model checkpoint_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "mfnd-checkpoint") {
    throw DataError("not an mfnd checkpoint");
  }
  if (j.value("version", 0) != 1) throw DataError("unsupported checkpoint version");
  Model model;
  try {
    model.config = config_from_json(j.at("config"));
    auto names = j.at("registry").get<std::vector<std::string>>();
    model.registry = names == DomainRegistry::weibo21().names()
                         ? DomainRegistry::weibo21()
                         : DomainRegistry(std::move(names));
    model.vocab = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  if (model.registry.size() != model.config.num_domains) {
    throw DataError("checkpoint: num_domains does not match the registry");
  }

  Rng unused(0);
  model.params = zeros_like(init_params(model.config, model.vocab.size(), unused));
  auto views = tensor_views(model.params);
  const auto& tensors = j.at("tensors");
  if (!tensors.is_array() || tensors.size() != views.size()) {
    throw DataError("checkpoint: expected " + std::to_string(views.size()) + " tensors");
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& t = tensors[i];
    const auto name = t.at("name").get<std::string>();
    if (name != views[i].name) {
      throw DataError("checkpoint: expected tensor " + views[i].name + ", found " + name);
    }
    if (t.at("shape").get<std::vector<std::size_t>>() != views[i].shape) {
      throw DataError("checkpoint: tensor " + name + " has the wrong shape");
    }
    const auto& data = t.at("data");
    if (!data.is_array() || data.size() != views[i].values.size()) {
      throw DataError("checkpoint: tensor " + name + " has the wrong element count");
    }
    for (std::size_t k = 0; k < data.size(); ++k) {
      if (!data[k].is_number()) {
        throw DataError("checkpoint: tensor " + name + " holds a non-finite value");
      }
      views[i].values[k] = data[k].get<double>();
    }
  }
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(model).dump() << '\n';
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

void require_same_config(const ModelConfig& expected, const ModelConfig& actual) {
  auto check = [](bool same, const char* field) {
    if (!same) throw DataError(std::string("model config mismatch in field '") + field + "'");
  };
  check(expected.embed_dim == actual.embed_dim, "embed_dim");
  check(expected.num_domains == actual.num_domains, "num_domains");
  check(expected.domain_dim == actual.domain_dim, "domain_dim");
  check(expected.num_experts == actual.num_experts, "num_experts");
  check(expected.kernel_sizes == actual.kernel_sizes, "kernel_sizes");
  check(expected.filters_per_kernel == actual.filters_per_kernel, "filters_per_kernel");
  check(expected.gate_hidden == actual.gate_hidden, "gate_hidden");
  check(expected.head_hidden == actual.head_hidden, "head_hidden");
  check(expected.max_len == actual.max_len, "max_len");
  check(expected.regime == actual.regime, "regime");
}

}  // namespace mfnd
