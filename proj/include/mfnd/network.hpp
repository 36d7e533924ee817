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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfnd/corpus.hpp"
#include "mfnd/matrix.hpp"
#include "mfnd/rng.hpp"
#include "mfnd/textpipe.hpp"

namespace mfnd {

// kMixedSingleExpert is the domain-blind baseline: one expert, no gate, so
// neither the domain table nor the sentence embedding reaches the output.
enum class Regime { kMdfend, kMixedSingleExpert };

std::optional<Regime> parse_regime(std::string_view name);
std::string_view regime_name(Regime regime);

struct ModelConfig {
  std::size_t embed_dim = 32;
  std::size_t num_domains = 9;
  std::size_t domain_dim = 32;
  std::size_t num_experts = 5;
  std::vector<std::size_t> kernel_sizes{2, 3, 4};
  std::size_t filters_per_kernel = 64;
  std::size_t gate_hidden = 64;
  std::size_t head_hidden = 384;
  std::size_t max_len = 170;
  Regime regime = Regime::kMdfend;

  std::size_t expert_dim() const {
    return kernel_sizes.size() * filters_per_kernel;
  }
  std::size_t gate_input_dim() const { return domain_dim + embed_dim; }

  // Throws UsageError naming the offending field.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// y = weight * x + bias, weight is out x in.
struct AffineLayer {
  Matrix weight;
  std::vector<double> bias;
  bool operator==(const AffineLayer&) const = default;
};

// Filters of one kernel width; row f of `weight` is filter f flattened over
// (offset, channel), matching the row-major layout of a window of embeddings.
struct ConvBank {
  std::size_t width = 0;
  Matrix weight;
  std::vector<double> bias;
  bool operator==(const ConvBank&) const = default;
};

struct ExpertParams {
  std::vector<ConvBank> banks;
  bool operator==(const ExpertParams&) const = default;
};

struct ModelParams {
  Matrix embedding;     // V x d, row 0 is [PAD]
  Matrix domain_table;  // K x d_dom
  std::vector<double> attn_query;
  std::vector<ExpertParams> experts;
  AffineLayer gate_hidden;
  AffineLayer gate_out;
  AffineLayer head_hidden;
  AffineLayer head_out;  // two logits: index 0 real, index 1 fake

  bool operator==(const ModelParams&) const = default;
};

// Embedding rows ~ N(0, 1) with [PAD] zeroed; domain rows ~ N(0, 0.02);
// weights ~ U(-sqrt(1/fan_in), sqrt(1/fan_in)); biases zero.
ModelParams init_params(const ModelConfig& config, std::size_t vocab_size, Rng& rng);

ModelParams zeros_like(const ModelParams& params);

// Named flat view of one parameter tensor. `group` is the reporting unit
// (embedding, domain_table, attn_query, expert<i>, gate, head).
template <typename T>
struct BasicTensorView {
  std::string name;
  std::string group;
  std::vector<std::size_t> shape;
  std::span<T> values;
};
using TensorView = BasicTensorView<double>;
using ConstTensorView = BasicTensorView<const double>;

std::vector<TensorView> tensor_views(ModelParams& params);
std::vector<ConstTensorView> tensor_views(const ModelParams& params);

// Throws DataError naming the first tensor whose shape disagrees.
void check_shapes(const ModelParams& params, const ModelConfig& config,
                  std::size_t vocab_size);

struct GateWeights {
  std::vector<double> a;
};

struct ForwardTrace {
  std::vector<double> e_s;
  GateWeights a;
  std::vector<std::vector<double>> r;
  std::vector<double> v;
  double p_fake = 0.5;
};

// --- Component operations --------------------------------------------------

// Softmax attention of `query` over the rows of `words` with mask 1.
std::vector<double> mask_attention_pool(const Matrix& words,
                                        std::span<const std::uint8_t> mask,
                                        std::span<const double> query);

// Convolution + ReLU + max over time per filter. Windows touching a masked
// position are skipped; a filter with no valid window outputs 0.
std::vector<double> expert_forward(const Matrix& words,
                                   std::span<const std::uint8_t> mask,
                                   const ExpertParams& expert);

GateWeights gate_forward(std::span<const double> domain_embedding,
                         std::span<const double> sentence_embedding,
                         const AffineLayer& hidden, const AffineLayer& out);

std::vector<double> aggregate(const GateWeights& gate,
                              std::span<const std::vector<double>> reps);

// Fake-class probability of the two-logit head.
double classify(std::span<const double> v, const AffineLayer& hidden,
                const AffineLayer& out);

ForwardTrace model_forward(const TokenSequence& seq, DomainId domain,
                           const ModelParams& params, const ModelConfig& config);

// --- Cached forward pass for differentiation --------------------------------

struct ConvBankCache {
  // Per filter: start of the best window (npos when none is valid) and the
  // pre-activation there.
  std::vector<std::size_t> argmax;
  std::vector<double> max_pre;
};

struct ExpertCache {
  std::vector<ConvBankCache> banks;
  std::vector<double> output;
};

struct ForwardCache {
  Matrix words;
  std::vector<std::size_t> valid;  // masked-in positions, ascending
  std::vector<double> attention;   // weight per entry of `valid`
  std::vector<double> e_s;
  std::vector<ExpertCache> experts;
  std::vector<double> gate_input;  // e_d followed by e_s; empty when bypassed
  std::vector<double> gate_pre;
  std::vector<double> gate_logits;
  std::vector<double> a;
  std::vector<double> v;
  std::vector<double> head_pre;
  std::vector<double> logits;
  double p_fake = 0.5;
};

inline constexpr std::size_t kNoWindow = static_cast<std::size_t>(-1);

ForwardCache forward_cached(const TokenSequence& seq, DomainId domain,
                            const ModelParams& params, const ModelConfig& config);

ForwardTrace to_trace(const ForwardCache& cache);

// Discrete state of every piecewise-linear unit (ReLU signs, max-over-time
// winners). Two points with equal patterns lie on the same smooth piece.
std::vector<std::int64_t> activation_pattern(const ForwardCache& cache);

}  // namespace mfnd
