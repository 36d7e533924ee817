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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mfnd/error.hpp"
#include "mfnd/model.hpp"
#include "mfnd/training.hpp"

namespace mfnd {
namespace {

ModelConfig small_config(std::size_t experts = 3, std::size_t domains = 2) {
  ModelConfig c;
  c.embed_dim = 6;
  c.num_domains = domains;
  c.domain_dim = 4;
  c.num_experts = experts;
  c.kernel_sizes = {1, 2};
  c.filters_per_kernel = 4;
  c.gate_hidden = 8;
  c.head_hidden = 8;
  c.max_len = 12;
  return c;
}

struct Data {
  Vocabulary vocab;
  std::vector<Example> train, val;
};

Data synth_data(SynthMode mode, std::size_t domains, std::size_t per_domain, std::uint64_t seed,
                std::size_t max_len) {
  SynthSpec spec;
  spec.mode = mode;
  spec.num_domains = domains;
  spec.items_per_domain = per_domain;
  spec.vocab_size = 16;
  spec.seed = seed;
  const auto items = synth_corpus(spec);
  SplitSpec split;
  split.seed = seed;
  const auto parts = stratified_split(items, split);
  Data d;
  d.vocab = build_vocab(parts.train);
  d.train = make_examples(parts.train, d.vocab, max_len);
  d.val = make_examples(parts.val, d.vocab, max_len);
  return d;
}

TEST(Bce, ClosedForms) {
  EXPECT_NEAR(bce_loss(std::vector<double>{1.0 - 1e-7}, std::vector<int>{1}), 0.0, 2e-7);
  EXPECT_NEAR(bce_loss(std::vector<double>{0.5}, std::vector<int>{1}), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_loss(std::vector<double>{0.5}, std::vector<int>{0}), 0.693147, 1e-6);
  const double want = 0.5 * (-std::log(0.9) - std::log(0.8));
  EXPECT_NEAR(bce_loss(std::vector<double>{0.9, 0.2}, std::vector<int>{1, 0}), want, 1e-15);
  EXPECT_NEAR(want, 0.164252, 1e-6);
}

TEST(Bce, ClampKeepsLossFinite) {
  const double l = bce_loss(std::vector<double>{0.0, 1.0}, std::vector<int>{1, 0});
  EXPECT_NEAR(l, -std::log(1e-7), 1e-9);
  EXPECT_THROW(bce_loss(std::vector<double>{0.5}, std::vector<int>{}), UsageError);
}

TEST(Backward, HeadBiasGradientIsMeanResidual) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kDomainFlip, 2, 20, 1, c.max_len);
  auto p = initial_params(c, data.vocab.size(), 4);
  for (double& w : p.head_out.weight.data) w = 0.0;
  const std::span<const Example> batch(data.train.data(), 6);
  const auto lg = backward(batch, p, c);
  const auto probs = predict_batch(batch, p, c);
  double resid = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) resid += probs[i] - batch[i].label;
  resid /= static_cast<double>(batch.size());
  EXPECT_NEAR(lg.grad.head_out.bias[1], resid, 1e-15);
  EXPECT_NEAR(lg.grad.head_out.bias[0], -resid, 1e-15);

  // Finite differences agree.
  for (int k = 0; k < 2; ++k) {
    const double h = 1e-5;
    auto plus = p, minus = p;
    plus.head_out.bias[k] += h;
    minus.head_out.bias[k] -= h;
    const double fd = (batch_loss(batch, plus, c) - batch_loss(batch, minus, c)) / (2 * h);
    EXPECT_LE(relative_error(lg.grad.head_out.bias[k], fd), 1e-8);
  }
}

TEST(Backward, AbsentDomainRowHasZeroGradient) {
  const auto c = small_config(3, 3);
  auto data = synth_data(SynthMode::kDomainFlip, 2, 20, 2, c.max_len);
  const auto p = initial_params(c, data.vocab.size(), 1);
  std::vector<Example> only0;
  for (const auto& e : data.train) {
    if (e.domain == 0) only0.push_back(e);
  }
  const auto lg = backward(only0, p, c);
  for (std::size_t d = 1; d < 3; ++d) {
    for (double g : lg.grad.domain_table.row(d)) EXPECT_EQ(g, 0.0);
  }
  double used = 0.0;
  for (double g : lg.grad.domain_table.row(0)) used += std::abs(g);
  EXPECT_GT(used, 0.0);
  for (double g : lg.grad.embedding.row(0)) EXPECT_EQ(g, 0.0);
}

TEST(Backward, ThreadCountDoesNotChangeResult) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kDomainFlip, 2, 60, 3, c.max_len);
  const auto p = initial_params(c, data.vocab.size(), 2);
  const auto one = backward(data.train, p, c, 1);
  const auto three = backward(data.train, p, c, 3);
  EXPECT_EQ(one.loss, three.loss);
  EXPECT_EQ(one.grad, three.grad);
}

TEST(Backward, NonFiniteOutputRaises) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kDomainFlip, 2, 10, 3, c.max_len);
  auto p = initial_params(c, data.vocab.size(), 2);
  // A dead ReLU unit swallows a NaN weight; nothing non-finite escapes.
  p.head_hidden.bias[0] = -1e6;
  p.head_hidden.weight.data[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_NO_THROW(backward(data.train, p, c));
  p.head_hidden.bias[0] = 0.0;
  p.head_out.bias[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(backward(data.train, p, c), NumericalError);
}

// --- Adam ---------------------------------------------------------------------

TEST(Adam, ZeroGradientLeavesParams) {
  const auto c = small_config();
  const auto p0 = initial_params(c, 10, 3);
  auto p = p0;
  auto state = make_adam_state(p, 0.01);
  adam_step(p, zeros_like(p), state);
  EXPECT_EQ(p, p0);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, FirstStepClosedForm) {
  const auto c = small_config();
  auto p = initial_params(c, 10, 3);
  const double before = p.head_out.bias[1];
  auto g = zeros_like(p);
  g.head_out.bias[1] = 1.0;
  auto state = make_adam_state(p, 0.01);
  adam_step(p, g, state);
  // m_hat = 1, v_hat = 1, step = lr / (1 + eps)
  EXPECT_NEAR(before - p.head_out.bias[1], 0.01 / (1.0 + 1e-8), 1e-17);
  EXPECT_NEAR(before - p.head_out.bias[1], 0.01, 1e-9);
}

TEST(Adam, ThreeStepScalarOracle) {
  const auto c = small_config();
  auto p = initial_params(c, 10, 3);
  auto state = make_adam_state(p, 0.05);
  const double gs[] = {0.5, -1.2, 2.0};
  double x = p.head_hidden.bias[2], m = 0, v = 0;
  for (int t = 1; t <= 3; ++t) {
    const double g = gs[t - 1];
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    x -= 0.05 * mh / (std::sqrt(vh) + 1e-8);

    auto grad = zeros_like(p);
    grad.head_hidden.bias[2] = g;
    adam_step(p, grad, state);
    EXPECT_NEAR(p.head_hidden.bias[2], x, 1e-12) << "step " << t;
  }
}

TEST(Adam, PadRowStaysZero) {
  const auto c = small_config();
  auto p = initial_params(c, 10, 3);
  auto g = zeros_like(p);
  for (double& x : g.embedding.row(0)) x = 1.0;
  auto state = make_adam_state(p, 0.1);
  adam_step(p, g, state);
  for (double x : p.embedding.row(0)) EXPECT_EQ(x, 0.0);
}

// --- gradient verification ------------------------------------------------------

TEST(GradCheck, CentralDifferenceOnQuadratic) {
  // f(x) = 0.5 x'Ax + b'x, grad = Ax + b
  const double A[3][3] = {{2.0, 0.5, -1.0}, {0.5, 3.0, 0.25}, {-1.0, 0.25, 1.5}};
  const double b[3] = {0.1, -0.4, 2.0};
  auto f = [&](std::span<const double> x) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      s += b[i] * x[i];
      for (int j = 0; j < 3; ++j) s += 0.5 * x[i] * A[i][j] * x[j];
    }
    return s;
  };
  const std::vector<double> x{0.3, -1.1, 0.7};
  const auto num = central_difference(f, x, 1e-5);
  for (int i = 0; i < 3; ++i) {
    double g = b[i];
    for (int j = 0; j < 3; ++j) g += A[i][j] * x[j];
    EXPECT_NEAR(num[i], g, 1e-10);
  }
}

TEST(GradCheck, HeadOnFixedInputLinearCase) {
  // With zero hidden bias and a one-unit hidden layer the logits are linear in
  // the output bias; the gradient is exact up to rounding.
  const auto c = small_config();
  auto data = synth_data(SynthMode::kSeparable, 1, 20, 9, c.max_len);
  const auto p = initial_params(c, data.vocab.size(), 5);
  const auto lg = backward(data.train, p, c);
  const double h = 1e-5;
  for (std::size_t k = 0; k < 2; ++k) {
    auto plus = p, minus = p;
    plus.head_out.bias[k] += h;
    minus.head_out.bias[k] -= h;
    const double fd = (batch_loss(data.train, plus, c) - batch_loss(data.train, minus, c)) / (2 * h);
    EXPECT_NEAR(lg.grad.head_out.bias[k], fd, 1e-10);
  }
}

TEST(GradCheck, TinyModelAllGroupsPass) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto report = grad_check(tiny_gradcheck_config(), seed, 1e-4);
    EXPECT_TRUE(report.passed) << report.render();
    EXPECT_EQ(report.pad_row_max_abs_grad, 0.0);
    std::vector<std::string> groups;
    for (const auto& g : report.groups) {
      groups.push_back(g.group);
      EXPECT_LE(g.max_rel_error, 1e-4) << g.group;
      EXPECT_GT(g.checked, 0u) << g.group;
    }
    EXPECT_EQ(groups, (std::vector<std::string>{"embedding", "domain_table", "attn_query", "expert0",
                                                "expert1", "expert2", "gate", "head"}));
  }
}

TEST(GradCheck, ZeroToleranceFails) {
  const auto report = grad_check(tiny_gradcheck_config(), 0, 0.0);
  EXPECT_FALSE(report.passed);
  EXPECT_NE(report.render().find("FAIL"), std::string::npos);
}

TEST(GradCheck, TinyConfigIsSmall) {
  const auto c = tiny_gradcheck_config();
  for (std::size_t dim : {c.embed_dim, c.domain_dim, c.num_experts, c.filters_per_kernel,
                          c.gate_hidden, c.head_hidden, c.max_len}) {
    EXPECT_LE(dim, 8u);
  }
}

// --- training loop --------------------------------------------------------------

TrainConfig quick(std::size_t epochs, double lr = 1e-2) {
  TrainConfig tc;
  tc.epochs = epochs;
  tc.patience = epochs;
  tc.batch_size = 16;
  tc.learning_rate = lr;
  tc.seed = 3;
  return tc;
}

TEST(Train, LossDropsOnSeparableData) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kSeparable, 1, 100, 4, c.max_len);
  const auto r = train(data.train, data.val, c, quick(5), initial_params(c, data.vocab.size(), 3));
  ASSERT_EQ(r.history.size(), 6u);
  EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
  EXPECT_FALSE(r.diverged);
}

TEST(Train, Deterministic) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kDomainFlip, 2, 60, 4, c.max_len);
  const auto init = initial_params(c, data.vocab.size(), 3);
  const auto a = train(data.train, data.val, c, quick(6), init);
  const auto b = train(data.train, data.val, c, quick(6), init);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].val_macro_f1, b.history[i].val_macro_f1);
  }
  EXPECT_EQ(a.best_params, b.best_params);
}

TEST(Train, ZeroLearningRateKeepsParams) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kSeparable, 1, 40, 4, c.max_len);
  const auto init = initial_params(c, data.vocab.size(), 3);
  auto tc = quick(3, 0.0);
  const auto r = train(data.train, data.val, c, tc, init);
  EXPECT_EQ(r.best_params, init);
  EXPECT_EQ(r.best_epoch, 0u);
}

TEST(Train, EarlyStopping) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kSeparable, 1, 40, 4, c.max_len);
  auto tc = quick(50, 0.0);
  tc.patience = 3;
  const auto r = train(data.train, data.val, c, tc, initial_params(c, data.vocab.size(), 3));
  EXPECT_EQ(r.history.size(), 4u);
}

TEST(Train, DivergenceIsReported) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kSeparable, 1, 40, 4, c.max_len);
  auto init = initial_params(c, data.vocab.size(), 3);
  init.head_out.bias[0] = std::numeric_limits<double>::infinity();
  const auto r = train(data.train, data.val, c, quick(3), init);
  EXPECT_TRUE(r.diverged);
  EXPECT_FALSE(r.stop_reason.empty());
}

TEST(Train, MixedRegimeEqualsSingleExpertMdfend) {
  auto mixed = small_config(1);
  mixed.regime = Regime::kMixedSingleExpert;
  auto single = small_config(1);
  auto data = synth_data(SynthMode::kDomainFlip, 2, 60, 5, mixed.max_len);
  const auto a = train(data.train, data.val, mixed, quick(8),
                       initial_params(mixed, data.vocab.size(), 9));
  auto init = initial_params(single, data.vocab.size(), 9);
  // Constant domain table.
  for (double& x : init.domain_table.data) x = 0.25;
  const auto b = train(data.train, data.val, single, quick(8), init);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss) << i;
  }
}

TEST(Train, HistoryCsv) {
  std::vector<EpochRecord> h{{0, 0.5, 0.25, 0.0}, {1, 0.1, 1.0, 1.5}};
  const auto csv = history_csv(h);
  EXPECT_EQ(csv, "epoch,train_loss,val_macro_f1,wall_seconds\n0,0.5,0.25,0.000\n1,0.10000000000000001,1,1.500\n");
}

TEST(Seeds, StreamsDiffer) {
  EXPECT_NE(derive_seed(7, 0), derive_seed(7, 1));
  EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
  EXPECT_EQ(derive_seed(7, 1), derive_seed(7, 1));
}

// --- learning-rate search -------------------------------------------------------------

TEST(LrSearch, SingleRate) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kSeparable, 1, 40, 4, c.max_len);
  const std::vector<double> grid{3e-3};
  const auto r = lr_search(grid, data.train, data.val, c, quick(3),
                           initial_params(c, data.vocab.size(), 3));
  EXPECT_EQ(r.best_rate, 3e-3);
  EXPECT_EQ(r.runs.size(), 1u);
}

TEST(LrSearch, ZeroRateLoses) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kSeparable, 1, 100, 4, c.max_len);
  const auto init = initial_params(c, data.vocab.size(), 3);
  const double untrained = validation_macro_f1(data.val, init, c);
  ASSERT_LT(untrained, 1.0);
  const std::vector<double> grid{0.0, 1e-3};
  const auto r = lr_search(grid, data.train, data.val, c, quick(30), init);
  EXPECT_EQ(r.best_rate, 1e-3);
}

TEST(LrSearch, TiesGoToSmallerRate) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kSeparable, 1, 40, 4, c.max_len);
  const std::vector<double> grid{1e-12, 1e-13};
  const auto r = lr_search(grid, data.train, data.val, c, quick(2),
                           initial_params(c, data.vocab.size(), 3));
  ASSERT_EQ(r.runs[0].best_val_f1, r.runs[1].best_val_f1);
  EXPECT_EQ(r.best_rate, 1e-13);
}

TEST(LrSearch, AllDivergedThrows) {
  const auto c = small_config();
  auto data = synth_data(SynthMode::kSeparable, 1, 40, 4, c.max_len);
  auto init = initial_params(c, data.vocab.size(), 3);
  init.head_out.weight.data[0] = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> grid{1e-3, 1e-2};
  EXPECT_THROW(lr_search(grid, data.train, data.val, c, quick(2), init), NumericalError);
}

}  // namespace
}  // namespace mfnd
