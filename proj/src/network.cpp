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

#include "mfnd/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfnd/error.hpp"

namespace mfnd {

std::optional<Regime> parse_regime(std::string_view name) {
  if (name == "mdfend") return Regime::kMdfend;
  if (name == "mixed_single_expert") return Regime::kMixedSingleExpert;
  return std::nullopt;
}

std::string_view regime_name(Regime regime) {
  return regime == Regime::kMdfend ? "mdfend" : "mixed_single_expert";
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* field, const std::string& what) {
    if (!ok) throw UsageError(std::string(field) + ": " + what);
  };
  require(embed_dim >= 1, "embed_dim", "must be >= 1");
  require(num_domains >= 1, "num_domains", "must be >= 1");
  require(domain_dim >= 1, "domain_dim", "must be >= 1");
  require(num_experts >= 1, "num_experts", "must be >= 1");
  require(!kernel_sizes.empty(), "kernel_sizes", "must not be empty");
  require(filters_per_kernel >= 1, "filters_per_kernel", "must be >= 1");
  require(gate_hidden >= 1, "gate_hidden", "must be >= 1");
  require(head_hidden >= 1, "head_hidden", "must be >= 1");
  require(max_len >= 3, "max_len", "must be >= 3");
  for (std::size_t k : kernel_sizes) {
    require(k >= 1 && k <= max_len - 2, "kernel_sizes",
            "every kernel size must lie in [1, max_len - 2]");
  }
  require(regime == Regime::kMdfend || num_experts == 1, "num_experts",
          "the mixed_single_expert regime uses exactly one expert");
}

// --- parameters ------------------------------------------------------------

namespace {

AffineLayer shaped_affine(std::size_t out, std::size_t in) {
  return AffineLayer{Matrix(out, in), std::vector<double>(out, 0.0)};
}

ModelParams shaped_params(const ModelConfig& config, std::size_t vocab_size) {
  ModelParams p;
  p.embedding = Matrix(vocab_size, config.embed_dim);
  p.domain_table = Matrix(config.num_domains, config.domain_dim);
  p.attn_query.assign(config.embed_dim, 0.0);
  p.experts.resize(config.num_experts);
  for (auto& expert : p.experts) {
    for (std::size_t k : config.kernel_sizes) {
      expert.banks.push_back(ConvBank{
          k, Matrix(config.filters_per_kernel, k * config.embed_dim),
          std::vector<double>(config.filters_per_kernel, 0.0)});
    }
  }
  p.gate_hidden = shaped_affine(config.gate_hidden, config.gate_input_dim());
  p.gate_out = shaped_affine(config.num_experts, config.gate_hidden);
  p.head_hidden = shaped_affine(config.head_hidden, config.expert_dim());
  p.head_out = shaped_affine(2, config.head_hidden);
  return p;
}

void fill_uniform(std::span<double> values, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (double& x : values) x = rng.uniform(-bound, bound);
}

template <typename Params, typename View>
std::vector<View> collect_views(Params& p) {
  std::vector<View> views;
  auto add = [&](std::string name, std::string group,
                 std::vector<std::size_t> shape, auto& container) {
    views.push_back(View{std::move(name), std::move(group), std::move(shape),
                         {container.data(), container.size()}});
  };
  add("embedding", "embedding", {p.embedding.rows, p.embedding.cols}, p.embedding.data);
  add("domain_table", "domain_table", {p.domain_table.rows, p.domain_table.cols},
      p.domain_table.data);
  add("attn_query", "attn_query", {p.attn_query.size()}, p.attn_query);
  for (std::size_t i = 0; i < p.experts.size(); ++i) {
    const std::string group = "expert" + std::to_string(i);
    for (std::size_t b = 0; b < p.experts[i].banks.size(); ++b) {
      auto& bank = p.experts[i].banks[b];
      const std::string prefix = group + ".conv" + std::to_string(b);
      add(prefix + ".weight", group, {bank.weight.rows, bank.weight.cols},
          bank.weight.data);
      add(prefix + ".bias", group, {bank.bias.size()}, bank.bias);
    }
  }
  auto add_affine = [&](const std::string& name, const std::string& group,
                        auto& layer) {
    add(name + ".weight", group, {layer.weight.rows, layer.weight.cols},
        layer.weight.data);
    add(name + ".bias", group, {layer.bias.size()}, layer.bias);
  };
  add_affine("gate.hidden", "gate", p.gate_hidden);
  add_affine("gate.out", "gate", p.gate_out);
  add_affine("head.hidden", "head", p.head_hidden);
  add_affine("head.out", "head", p.head_out);
  return views;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, std::size_t vocab_size, Rng& rng) {
  config.validate();
  if (vocab_size < Vocabulary::kNumReserved) {
    throw UsageError("vocabulary must contain the reserved tokens");
  }
  ModelParams p = shaped_params(config, vocab_size);
  p.embedding = random_embedding_table(vocab_size, config.embed_dim, rng);
  for (double& x : p.domain_table.data) x = rng.normal(0.0, 0.02);
  fill_uniform(p.attn_query, config.embed_dim, rng);
  for (auto& expert : p.experts) {
    for (auto& bank : expert.banks) fill_uniform(bank.weight.data, bank.weight.cols, rng);
  }
  for (AffineLayer* layer : {&p.gate_hidden, &p.gate_out, &p.head_hidden, &p.head_out}) {
    fill_uniform(layer->weight.data, layer->weight.cols, rng);
  }
  return p;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = params;
  for (auto& view : tensor_views(z)) std::fill(view.values.begin(), view.values.end(), 0.0);
  return z;
}

std::vector<TensorView> tensor_views(ModelParams& params) {
  return collect_views<ModelParams, TensorView>(params);
}

std::vector<ConstTensorView> tensor_views(const ModelParams& params) {
  return collect_views<const ModelParams, ConstTensorView>(params);
}

void check_shapes(const ModelParams& params, const ModelConfig& config,
                  std::size_t vocab_size) {
  const ModelParams expected = shaped_params(config, vocab_size);
  const auto want = tensor_views(expected);
  const auto have = tensor_views(params);
  if (want.size() != have.size()) {
    throw DataError("parameter set has " + std::to_string(have.size()) +
                    " tensors, config implies " + std::to_string(want.size()));
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].name != have[i].name || want[i].shape != have[i].shape ||
        want[i].values.size() != have[i].values.size()) {
      throw DataError("tensor " + want[i].name + " does not match the model config");
    }
  }
  for (const auto& expert : params.experts) {
    for (std::size_t b = 0; b < expert.banks.size(); ++b) {
      if (expert.banks[b].width != config.kernel_sizes[b]) {
        throw DataError("kernel width mismatch in expert bank " + std::to_string(b));
      }
    }
  }
}

// --- forward internals -----------------------------------------------------

namespace {

void softmax_inplace(std::vector<double>& x) {
  const double m = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double& v : x) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : x) v /= sum;
}

void affine(const AffineLayer& layer, std::span<const double> x,
            std::vector<double>& y) {
  if (x.size() != layer.weight.cols) {
    throw UsageError("affine input width " + std::to_string(x.size()) +
                     " != " + std::to_string(layer.weight.cols));
  }
  y.resize(layer.weight.rows);
  for (std::size_t o = 0; o < layer.weight.rows; ++o) {
    y[o] = layer.bias[o] + dot(layer.weight.row(o), x);
  }
}

std::vector<double> relu(std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (double& v : y) v = v > 0.0 ? v : 0.0;
  return y;
}

std::vector<std::size_t> valid_positions(std::span<const std::uint8_t> mask) {
  std::vector<std::size_t> valid;
  for (std::size_t t = 0; t < mask.size(); ++t) {
    if (mask[t]) valid.push_back(t);
  }
  return valid;
}

void attention_into(const Matrix& words, std::span<const std::size_t> valid,
                    std::span<const double> query, std::vector<double>& weights,
                    std::vector<double>& pooled) {
  if (valid.empty()) throw DataError("mask has no valid positions");
  if (query.size() != words.cols) throw UsageError("attention query width mismatch");
  weights.resize(valid.size());
  for (std::size_t i = 0; i < valid.size(); ++i) {
    weights[i] = dot(query, words.row(valid[i]));
  }
  softmax_inplace(weights);
  pooled.assign(words.cols, 0.0);
  for (std::size_t i = 0; i < valid.size(); ++i) {
    const auto row = words.row(valid[i]);
    for (std::size_t c = 0; c < words.cols; ++c) pooled[c] += weights[i] * row[c];
  }
}

void expert_into(const Matrix& words, std::span<const std::uint8_t> mask,
                 const ExpertParams& expert, ExpertCache& cache) {
  if (mask.size() != words.rows) throw UsageError("mask length != sequence length");
  // masked_before[t] = number of mask-0 positions in [0, t).
  std::vector<std::size_t> masked_before(words.rows + 1, 0);
  for (std::size_t t = 0; t < words.rows; ++t) {
    masked_before[t + 1] = masked_before[t] + (mask[t] ? 0 : 1);
  }
  const std::size_t d = words.cols;
  cache.banks.resize(expert.banks.size());
  cache.output.clear();
  for (std::size_t b = 0; b < expert.banks.size(); ++b) {
    const ConvBank& bank = expert.banks[b];
    const std::size_t k = bank.width;
    if (bank.weight.cols != k * d) throw UsageError("conv filter width mismatch");
    auto& bc = cache.banks[b];
    bc.argmax.assign(bank.weight.rows, kNoWindow);
    bc.max_pre.assign(bank.weight.rows, -std::numeric_limits<double>::infinity());
    for (std::size_t t = 0; t + k <= words.rows; ++t) {
      if (masked_before[t + k] != masked_before[t]) continue;
      const std::span<const double> window(words.data.data() + t * d, k * d);
      for (std::size_t f = 0; f < bank.weight.rows; ++f) {
        const double pre = bank.bias[f] + dot(bank.weight.row(f), window);
        if (bc.argmax[f] == kNoWindow || pre > bc.max_pre[f]) {
          bc.max_pre[f] = pre;
          bc.argmax[f] = t;
        }
      }
    }
    for (std::size_t f = 0; f < bank.weight.rows; ++f) {
      const bool on = bc.argmax[f] != kNoWindow && bc.max_pre[f] > 0.0;
      cache.output.push_back(on ? bc.max_pre[f] : 0.0);
    }
  }
}

void gate_into(std::span<const double> e_d, std::span<const double> e_s,
               const AffineLayer& hidden, const AffineLayer& out,
               ForwardCache& cache) {
  cache.gate_input.assign(e_d.begin(), e_d.end());
  cache.gate_input.insert(cache.gate_input.end(), e_s.begin(), e_s.end());
  affine(hidden, cache.gate_input, cache.gate_pre);
  const auto h = relu(cache.gate_pre);
  affine(out, h, cache.gate_logits);
  cache.a = cache.gate_logits;
  softmax_inplace(cache.a);
}

void aggregate_into(std::span<const double> a, std::span<const std::vector<double>> reps,
                    std::vector<double>& v) {
  if (a.size() != reps.size() || reps.empty()) {
    throw UsageError("gate width does not match the number of experts");
  }
  v.assign(reps[0].size(), 0.0);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (reps[i].size() != v.size()) throw UsageError("expert widths differ");
    for (std::size_t c = 0; c < v.size(); ++c) v[c] += a[i] * reps[i][c];
  }
}

double fake_probability(std::span<const double> logits) {
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  return e1 / (e0 + e1);
}

void head_into(std::span<const double> v, const AffineLayer& hidden,
               const AffineLayer& out, std::vector<double>& pre,
               std::vector<double>& logits, double& p_fake) {
  affine(hidden, v, pre);
  const auto h = relu(pre);
  affine(out, h, logits);
  if (logits.size() != 2) throw UsageError("classifier must emit two logits");
  p_fake = fake_probability(logits);
}

}  // namespace

// --- component operations --------------------------------------------------

std::vector<double> mask_attention_pool(const Matrix& words,
                                        std::span<const std::uint8_t> mask,
                                        std::span<const double> query) {
  if (mask.size() != words.rows) throw UsageError("mask length != sequence length");
  std::vector<double> weights;
  std::vector<double> pooled;
  attention_into(words, valid_positions(mask), query, weights, pooled);
  return pooled;
}

std::vector<double> expert_forward(const Matrix& words,
                                   std::span<const std::uint8_t> mask,
                                   const ExpertParams& expert) {
  ExpertCache cache;
  expert_into(words, mask, expert, cache);
  return cache.output;
}

GateWeights gate_forward(std::span<const double> domain_embedding,
                         std::span<const double> sentence_embedding,
                         const AffineLayer& hidden, const AffineLayer& out) {
  ForwardCache cache;
  gate_into(domain_embedding, sentence_embedding, hidden, out, cache);
  return GateWeights{std::move(cache.a)};
}

std::vector<double> aggregate(const GateWeights& gate,
                              std::span<const std::vector<double>> reps) {
  std::vector<double> v;
  aggregate_into(gate.a, reps, v);
  return v;
}

double classify(std::span<const double> v, const AffineLayer& hidden,
                const AffineLayer& out) {
  std::vector<double> pre;
  std::vector<double> logits;
  double p = 0.5;
  head_into(v, hidden, out, pre, logits, p);
  return p;
}

ForwardCache forward_cached(const TokenSequence& seq, DomainId domain,
                            const ModelParams& params, const ModelConfig& config) {
  if (domain >= params.domain_table.rows) {
    throw DataError("domain id " + std::to_string(domain) + " out of range");
  }
  ForwardCache cache;
  cache.words = embed(seq, params.embedding);
  cache.valid = valid_positions(seq.mask);
  attention_into(cache.words, cache.valid, params.attn_query, cache.attention, cache.e_s);

  cache.experts.resize(params.experts.size());
  std::vector<std::vector<double>> reps(params.experts.size());
  for (std::size_t i = 0; i < params.experts.size(); ++i) {
    expert_into(cache.words, seq.mask, params.experts[i], cache.experts[i]);
    reps[i] = cache.experts[i].output;
  }

  if (config.regime == Regime::kMixedSingleExpert) {
    cache.a.assign(1, 1.0);
  } else {
    gate_into(params.domain_table.row(domain), cache.e_s, params.gate_hidden,
              params.gate_out, cache);
  }
  aggregate_into(cache.a, reps, cache.v);
  head_into(cache.v, params.head_hidden, params.head_out, cache.head_pre,
            cache.logits, cache.p_fake);
  return cache;
}

ForwardTrace to_trace(const ForwardCache& cache) {
  ForwardTrace trace;
  trace.e_s = cache.e_s;
  trace.a.a = cache.a;
  for (const auto& e : cache.experts) trace.r.push_back(e.output);
  trace.v = cache.v;
  trace.p_fake = cache.p_fake;
  return trace;
}

ForwardTrace model_forward(const TokenSequence& seq, DomainId domain,
                           const ModelParams& params, const ModelConfig& config) {
  return to_trace(forward_cached(seq, domain, params, config));
}

std::vector<std::int64_t> activation_pattern(const ForwardCache& cache) {
  std::vector<std::int64_t> pattern;
  for (const auto& expert : cache.experts) {
    for (const auto& bank : expert.banks) {
      for (std::size_t f = 0; f < bank.argmax.size(); ++f) {
        const bool on = bank.argmax[f] != kNoWindow && bank.max_pre[f] > 0.0;
        pattern.push_back(on ? static_cast<std::int64_t>(bank.argmax[f]) : -1);
      }
    }
  }
  for (double x : cache.gate_pre) pattern.push_back(x > 0.0);
  for (double x : cache.head_pre) pattern.push_back(x > 0.0);
  return pattern;
}

}  // namespace mfnd
