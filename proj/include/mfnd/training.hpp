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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfnd/metrics.hpp"
#include "mfnd/network.hpp"

namespace mfnd {

inline constexpr double kProbabilityClamp = 1e-7;

struct Example {
  TokenSequence seq;
  DomainId domain = 0;
  int label = kLabelReal;
};

// Mean binary cross-entropy; probabilities are clamped to
// [1e-7, 1 - 1e-7] before the logarithm.
double bce_loss(std::span<const double> p_fake, std::span<const int> labels);

struct LossAndGrad {
  double loss = 0.0;
  ModelParams grad;
};

// Mean loss over the batch and its exact gradient. Examples are accumulated
// in fixed chunks, so the result does not depend on `threads`. Throws
// NumericalError naming the first tensor with a non-finite gradient.
LossAndGrad backward(std::span<const Example> batch, const ModelParams& params,
                     const ModelConfig& config, std::size_t threads = 1);

double batch_loss(std::span<const Example> batch, const ModelParams& params,
                  const ModelConfig& config);

std::vector<double> predict_batch(std::span<const Example> batch,
                                  const ModelParams& params,
                                  const ModelConfig& config);

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const ModelParams& params, double learning_rate);

// Bias-corrected Adam; the [PAD] embedding row is zeroed afterwards.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state);

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  std::size_t patience = 10;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  double threshold = 0.5;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelParams best_params;
  std::size_t best_epoch = 0;
  double best_val_f1 = 0.0;
  // Row 0 is the untrained model.
  std::vector<EpochRecord> history;
  bool diverged = false;
  std::string stop_reason;
};

// Independent stream `stream` of a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Seed stream 0 initializes parameters, stream 1 shuffles minibatches.
ModelParams initial_params(const ModelConfig& config, std::size_t vocab_size,
                           std::uint64_t seed);

double validation_macro_f1(std::span<const Example> examples,
                           const ModelParams& params, const ModelConfig& config,
                           double threshold = 0.5);

TrainResult train(std::span<const Example> train_set,
                  std::span<const Example> val_set, const ModelConfig& config,
                  const TrainConfig& train_config, ModelParams initial);

// Columns epoch,train_loss,val_macro_f1,wall_seconds.
std::string history_csv(std::span<const EpochRecord> history);

struct LrRun {
  double learning_rate = 0.0;
  double best_val_f1 = 0.0;
  std::size_t best_epoch = 0;
  bool diverged = false;
};

struct LrSearchResult {
  double best_rate = 0.0;
  std::vector<LrRun> runs;
  TrainResult best_run;
};

inline const std::vector<double> kDefaultLrGrid{1e-6, 1e-5, 1e-4, 1e-3, 1e-2};

// Every rate starts from `initial` with the same seed. Highest validation
// macro-F1 wins, ties go to the smaller rate, diverged runs are excluded.
LrSearchResult lr_search(std::span<const double> grid,
                         std::span<const Example> train_set,
                         std::span<const Example> val_set,
                         const ModelConfig& config,
                         const TrainConfig& train_config,
                         const ModelParams& initial);

// --- gradient verification --------------------------------------------------

double relative_error(double analytic, double numeric);

std::vector<double> central_difference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double step);

struct GroupCheck {
  std::string group;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GroupCheck> groups;
  double pad_row_max_abs_grad = 0.0;
  double tolerance = 0.0;
  double step = 1e-5;
  bool passed = false;

  std::string render() const;
};

// All dims <= 8, max_len 8, three experts, two domains.
ModelConfig tiny_gradcheck_config();

// Central differences on every coordinate against backward(). Coordinates
// whose +/- step changes any activation pattern or probability clamp are
// skipped.
GradCheckReport grad_check(const ModelConfig& config, std::uint64_t seed,
                           double tolerance, std::size_t batch_size = 4,
                           double step = 1e-5);

}  // namespace mfnd
