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

#include "mfnd/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "mfnd/error.hpp"

namespace mfnd {

double bce_loss(std::span<const double> p_fake, std::span<const int> labels) {
  if (p_fake.empty()) throw UsageError("bce_loss of an empty batch");
  if (p_fake.size() != labels.size()) {
    throw UsageError("bce_loss: probabilities and labels differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p_fake.size(); ++i) {
    const double p = std::clamp(p_fake[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    sum -= labels[i] == kLabelFake ? std::log(p) : std::log(1.0 - p);
  }
  return sum / static_cast<double>(p_fake.size());
}

// --- backward --------------------------------------------------------------

namespace {

constexpr std::size_t kChunk = 16;

void add_outer(Matrix& grad, std::span<const double> dy, std::span<const double> x) {
  for (std::size_t o = 0; o < dy.size(); ++o) {
    if (dy[o] == 0.0) continue;
    auto row = grad.row(o);
    for (std::size_t i = 0; i < x.size(); ++i) row[i] += dy[o] * x[i];
  }
}

// dx = W^T dy
std::vector<double> transpose_times(const Matrix& w, std::span<const double> dy) {
  std::vector<double> dx(w.cols, 0.0);
  for (std::size_t o = 0; o < w.rows; ++o) {
    if (dy[o] == 0.0) continue;
    const auto row = w.row(o);
    for (std::size_t i = 0; i < w.cols; ++i) dx[i] += dy[o] * row[i];
  }
  return dx;
}

// Backpropagates an affine + ReLU + affine block. Returns d(input).
std::vector<double> two_layer_backward(const AffineLayer& hidden, const AffineLayer& out,
                                       std::span<const double> input,
                                       std::span<const double> pre,
                                       std::span<const double> d_logits,
                                       AffineLayer& g_hidden, AffineLayer& g_out) {
  std::vector<double> h(pre.begin(), pre.end());
  for (double& x : h) x = x > 0.0 ? x : 0.0;
  add_outer(g_out.weight, d_logits, h);
  for (std::size_t o = 0; o < d_logits.size(); ++o) g_out.bias[o] += d_logits[o];
  auto d_pre = transpose_times(out.weight, d_logits);
  for (std::size_t j = 0; j < d_pre.size(); ++j) {
    if (!(pre[j] > 0.0)) d_pre[j] = 0.0;
  }
  add_outer(g_hidden.weight, d_pre, input);
  for (std::size_t j = 0; j < d_pre.size(); ++j) g_hidden.bias[j] += d_pre[j];
  return transpose_times(hidden.weight, d_pre);
}

// Adds scale * d(loss_i) for one example into `grad`; returns loss_i.
double accumulate_example(const Example& ex, const ModelParams& params,
                          const ModelConfig& config, double scale, ModelParams& grad) {
  const ForwardCache c = forward_cached(ex.seq, ex.domain, params, config);
  const double p_raw = c.p_fake;
  if (std::isnan(p_raw)) return p_raw;
  const double p = std::clamp(p_raw, kProbabilityClamp, 1.0 - kProbabilityClamp);
  const double loss = ex.label == kLabelFake ? -std::log(p) : -std::log(1.0 - p);
  if (p != p_raw) return loss;  // clamped: flat

  const double dz1 = scale * (p_raw - static_cast<double>(ex.label));
  const double d_logits[2] = {-dz1, dz1};

  const auto dv = two_layer_backward(params.head_hidden, params.head_out, c.v,
                                     c.head_pre, d_logits, grad.head_hidden,
                                     grad.head_out);

  const std::size_t d = config.embed_dim;
  Matrix d_words(c.words.rows, d);

  std::vector<double> da(c.a.size(), 0.0);
  for (std::size_t i = 0; i < c.experts.size(); ++i) {
    const auto& rep = c.experts[i].output;
    da[i] = dot(dv, rep);
    // Expert i receives a_i * dv.
    std::size_t idx = 0;
    for (std::size_t b = 0; b < c.experts[i].banks.size(); ++b) {
      const auto& bank = params.experts[i].banks[b];
      auto& g_bank = grad.experts[i].banks[b];
      const auto& bc = c.experts[i].banks[b];
      const std::size_t span_len = bank.width * d;
      for (std::size_t f = 0; f < bank.weight.rows; ++f, ++idx) {
        if (bc.argmax[f] == kNoWindow || !(bc.max_pre[f] > 0.0)) continue;
        const double g = c.a[i] * dv[idx];
        if (g == 0.0) continue;
        const std::size_t t = bc.argmax[f];
        const double* window = c.words.data.data() + t * d;
        double* d_window = d_words.data.data() + t * d;
        auto g_row = g_bank.weight.row(f);
        const auto w_row = bank.weight.row(f);
        for (std::size_t j = 0; j < span_len; ++j) {
          g_row[j] += g * window[j];
          d_window[j] += g * w_row[j];
        }
        g_bank.bias[f] += g;
      }
    }
  }

  if (config.regime == Regime::kMdfend) {
    const double mean_da = dot(c.a, da);
    std::vector<double> d_gate_logits(c.a.size());
    for (std::size_t i = 0; i < c.a.size(); ++i) d_gate_logits[i] = c.a[i] * (da[i] - mean_da);
    const auto d_input = two_layer_backward(params.gate_hidden, params.gate_out,
                                            c.gate_input, c.gate_pre, d_gate_logits,
                                            grad.gate_hidden, grad.gate_out);
    auto g_dom = grad.domain_table.row(ex.domain);
    for (std::size_t j = 0; j < config.domain_dim; ++j) g_dom[j] += d_input[j];
    const std::span<const double> d_es(d_input.data() + config.domain_dim, d);

    // Attention pooling.
    std::vector<double> d_alpha(c.valid.size());
    for (std::size_t k = 0; k < c.valid.size(); ++k) {
      d_alpha[k] = dot(d_es, c.words.row(c.valid[k]));
    }
    const double mean_alpha = dot(c.attention, d_alpha);
    for (std::size_t k = 0; k < c.valid.size(); ++k) {
      const double ds = c.attention[k] * (d_alpha[k] - mean_alpha);
      const auto w_row = c.words.row(c.valid[k]);
      auto dw_row = d_words.row(c.valid[k]);
      for (std::size_t j = 0; j < d; ++j) {
        grad.attn_query[j] += ds * w_row[j];
        dw_row[j] += c.attention[k] * d_es[j] + ds * params.attn_query[j];
      }
    }
  }

  for (std::size_t t = 0; t < ex.seq.ids.size(); ++t) {
    const TokenId id = ex.seq.ids[t];
    if (id == Vocabulary::kPad) continue;
    const auto src = d_words.row(t);
    auto dst = grad.embedding.row(static_cast<std::size_t>(id));
    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
  }
  return loss;
}

void add_into(ModelParams& acc, const ModelParams& part) {
  auto dst = tensor_views(acc);
  const auto src = tensor_views(part);
  for (std::size_t i = 0; i < dst.size(); ++i) {
    for (std::size_t k = 0; k < dst[i].values.size(); ++k) dst[i].values[k] += src[i].values[k];
  }
}

}  // namespace

LossAndGrad backward(std::span<const Example> batch, const ModelParams& params,
                     const ModelConfig& config, std::size_t threads) {
  if (batch.empty()) throw UsageError("backward of an empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  const ModelParams zero = zeros_like(params);

  std::vector<ModelParams> chunk_grads(chunks, zero);
  std::vector<double> chunk_loss(chunks, 0.0);
  auto run_chunk = [&](std::size_t ci) {
    const std::size_t lo = ci * kChunk;
    const std::size_t hi = std::min(batch.size(), lo + kChunk);
    double loss = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      loss += accumulate_example(batch[i], params, config, scale, chunk_grads[ci]);
    }
    chunk_loss[ci] = loss;
  };

  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), chunks);
  if (workers <= 1) {
    for (std::size_t ci = 0; ci < chunks; ++ci) run_chunk(ci);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t ci = next++; ci < chunks; ci = next++) run_chunk(ci);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  LossAndGrad out{0.0, std::move(chunk_grads[0])};
  double loss = chunk_loss[0];
  for (std::size_t ci = 1; ci < chunks; ++ci) {
    add_into(out.grad, chunk_grads[ci]);
    loss += chunk_loss[ci];
  }
  out.loss = loss * scale;
  zero_pad_row(out.grad.embedding);
  if (!std::isfinite(out.loss)) throw NumericalError("non-finite loss");
  for (const auto& view : tensor_views(out.grad)) {
    for (double g : view.values) {
      if (!std::isfinite(g)) throw NumericalError("non-finite gradient in tensor " + view.name);
    }
  }
  return out;
}

std::vector<double> predict_batch(std::span<const Example> batch,
                                  const ModelParams& params, const ModelConfig& config) {
  std::vector<double> p;
  p.reserve(batch.size());
  for (const auto& ex : batch) {
    p.push_back(forward_cached(ex.seq, ex.domain, params, config).p_fake);
  }
  return p;
}

double batch_loss(std::span<const Example> batch, const ModelParams& params,
                  const ModelConfig& config) {
  const auto p = predict_batch(batch, params, config);
  std::vector<int> y;
  y.reserve(batch.size());
  for (const auto& ex : batch) y.push_back(ex.label);
  return bce_loss(p, y);
}

// --- Adam ------------------------------------------------------------------

AdamState make_adam_state(const ModelParams& params, double learning_rate) {
  AdamState state;
  state.m = zeros_like(params);
  state.v = zeros_like(params);
  state.learning_rate = learning_rate;
  return state;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state) {
  auto p = tensor_views(params);
  const auto g = tensor_views(grads);
  auto m = tensor_views(state.m);
  auto v = tensor_views(state.v);
  if (p.size() != g.size() || p.size() != m.size()) {
    throw UsageError("adam_step: parameter and gradient sets differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].values.size() != g[i].values.size()) {
      throw UsageError("adam_step: shape mismatch in " + p[i].name);
    }
    for (std::size_t k = 0; k < p[i].values.size(); ++k) {
      const double gk = g[i].values[k];
      double& mk = m[i].values[k];
      double& vk = v[i].values[k];
      mk = state.beta1 * mk + (1.0 - state.beta1) * gk;
      vk = state.beta2 * vk + (1.0 - state.beta2) * gk * gk;
      const double m_hat = mk / bc1;
      const double v_hat = vk / bc2;
      p[i].values[k] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
  zero_pad_row(params.embedding);
}

// --- training loop ---------------------------------------------------------

void TrainConfig::validate() const {
  if (batch_size < 1) throw UsageError("batch_size: must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("learning_rate: must be a finite non-negative number");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw UsageError("threshold: must lie in [0, 1]");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ModelParams initial_params(const ModelConfig& config, std::size_t vocab_size,
                           std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  return init_params(config, vocab_size, rng);
}

double validation_macro_f1(std::span<const Example> examples,
                           const ModelParams& params, const ModelConfig& config,
                           double threshold) {
  std::vector<int> preds;
  std::vector<int> labels;
  for (const auto& ex : examples) {
    const double p = forward_cached(ex.seq, ex.domain, params, config).p_fake;
    preds.push_back(p >= threshold ? kLabelFake : kLabelReal);
    labels.push_back(ex.label);
  }
  return macro_f1(preds, labels);
}

TrainResult train(std::span<const Example> train_set, std::span<const Example> val_set,
                  const ModelConfig& config, const TrainConfig& train_config,
                  ModelParams initial) {
  config.validate();
  train_config.validate();
  if (train_set.empty()) throw UsageError("training split is empty");
  if (val_set.empty()) throw UsageError("validation split is empty");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  TrainResult result;
  ModelParams params = std::move(initial);
  zero_pad_row(params.embedding);
  AdamState adam = make_adam_state(params, train_config.learning_rate);
  Rng shuffler(derive_seed(train_config.seed, 1));

  result.best_params = params;
  result.best_val_f1 = validation_macro_f1(val_set, params, config, train_config.threshold);
  result.history.push_back(
      {0, batch_loss(train_set, params, config), result.best_val_f1, elapsed()});

  std::vector<std::size_t> order(train_set.size());
  std::vector<Example> batch;
  std::size_t since_best = 0;
  result.stop_reason = "epoch limit";
  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffler.shuffle(order);
    double loss_sum = 0.0;
    bool diverged = false;
    for (std::size_t lo = 0; lo < order.size(); lo += train_config.batch_size) {
      const std::size_t hi = std::min(order.size(), lo + train_config.batch_size);
      batch.clear();
      for (std::size_t k = lo; k < hi; ++k) batch.push_back(train_set[order[k]]);
      try {
        LossAndGrad lg = backward(batch, params, config, train_config.threads);
        loss_sum += lg.loss * static_cast<double>(batch.size());
        adam_step(params, lg.grad, adam);
      } catch (const NumericalError& e) {
        result.stop_reason = std::string("diverged: ") + e.what();
        diverged = true;
        break;
      }
    }
    if (diverged) {
      result.diverged = true;
      break;
    }
    const double val_f1 = validation_macro_f1(val_set, params, config, train_config.threshold);
    result.history.push_back(
        {epoch, loss_sum / static_cast<double>(order.size()), val_f1, elapsed()});
    if (val_f1 > result.best_val_f1) {
      result.best_val_f1 = val_f1;
      result.best_epoch = epoch;
      result.best_params = params;
      since_best = 0;
    } else if (++since_best >= train_config.patience) {
      result.stop_reason = "early stop";
      break;
    }
  }
  return result;
}

std::string history_csv(std::span<const EpochRecord> history) {
  std::ostringstream out;
  out << "epoch,train_loss,val_macro_f1,wall_seconds\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.3f\n", r.epoch, r.train_loss,
                  r.val_macro_f1, r.wall_seconds);
    out << buf;
  }
  return out.str();
}

LrSearchResult lr_search(std::span<const double> grid, std::span<const Example> train_set,
                         std::span<const Example> val_set, const ModelConfig& config,
                         const TrainConfig& train_config, const ModelParams& initial) {
  if (grid.empty()) throw UsageError("learning-rate grid is empty");
  LrSearchResult result;
  std::optional<std::size_t> best;
  for (double rate : grid) {
    TrainConfig tc = train_config;
    tc.learning_rate = rate;
    TrainResult run = train(train_set, val_set, config, tc, initial);
    result.runs.push_back({rate, run.best_val_f1, run.best_epoch, run.diverged});
    if (run.diverged) continue;
    const auto& cur = result.runs.back();
    bool better = !best;
    if (best) {
      const auto& b = result.runs[*best];
      better = cur.best_val_f1 > b.best_val_f1 ||
               (cur.best_val_f1 == b.best_val_f1 && cur.learning_rate < b.learning_rate);
    }
    if (better) {
      best = result.runs.size() - 1;
      result.best_run = std::move(run);
    }
  }
  if (!best) throw NumericalError("every learning rate in the grid diverged");
  result.best_rate = result.runs[*best].learning_rate;
  return result;
}

// --- gradient check --------------------------------------------------------

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

std::vector<double> central_difference(
    const std::function<double(std::span<const double>)>& f, std::span<const double> x,
    double step) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = point[i];
    point[i] = orig + step;
    const double up = f(point);
    point[i] = orig - step;
    const double down = f(point);
    point[i] = orig;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

ModelConfig tiny_gradcheck_config() {
  ModelConfig c;
  c.embed_dim = 4;
  c.num_domains = 2;
  c.domain_dim = 3;
  c.num_experts = 3;
  c.kernel_sizes = {1, 2};
  c.filters_per_kernel = 3;
  c.gate_hidden = 6;
  c.head_hidden = 8;
  c.max_len = 8;
  return c;
}

namespace {

struct Probe {
  double loss = 0.0;
  std::vector<std::int64_t> pattern;
};

Probe probe(std::span<const Example> batch, const ModelParams& params,
            const ModelConfig& config) {
  Probe out;
  std::vector<double> p;
  std::vector<int> y;
  for (const auto& ex : batch) {
    const ForwardCache c = forward_cached(ex.seq, ex.domain, params, config);
    auto pat = activation_pattern(c);
    out.pattern.insert(out.pattern.end(), pat.begin(), pat.end());
    out.pattern.push_back(c.p_fake < kProbabilityClamp ? -1
                          : c.p_fake > 1.0 - kProbabilityClamp ? 1 : 0);
    p.push_back(c.p_fake);
    y.push_back(ex.label);
  }
  out.loss = bce_loss(p, y);
  return out;
}

}  // namespace

GradCheckReport grad_check(const ModelConfig& config, std::uint64_t seed,
                           double tolerance, std::size_t batch_size, double step) {
  config.validate();
  constexpr std::size_t kVocab = 12;
  Rng rng(derive_seed(seed, 7));
  ModelParams params = initial_params(config, kVocab, seed);

  std::vector<Example> batch;
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t n = 1 + rng.below(config.max_len - 2);
    std::vector<std::string> tokens;
    Example ex;
    ex.seq.ids.assign(config.max_len, Vocabulary::kPad);
    ex.seq.mask.assign(config.max_len, 0);
    ex.seq.ids[0] = Vocabulary::kCls;
    for (std::size_t t = 1; t <= n; ++t) {
      ex.seq.ids[t] = static_cast<TokenId>(Vocabulary::kUnk + rng.below(kVocab - Vocabulary::kUnk));
    }
    ex.seq.ids[n + 1] = Vocabulary::kSep;
    ex.seq.length = n + 2;
    std::fill(ex.seq.mask.begin(), ex.seq.mask.begin() + static_cast<std::ptrdiff_t>(n + 2), 1);
    ex.domain = static_cast<DomainId>(rng.below(config.num_domains));
    ex.label = static_cast<int>(rng.below(2));
    batch.push_back(std::move(ex));
  }

  const LossAndGrad analytic = backward(batch, params, config);
  const Probe base = probe(batch, params, config);

  GradCheckReport report;
  report.tolerance = tolerance;
  report.step = step;
  {
    const auto pad = analytic.grad.embedding.row(Vocabulary::kPad);
    for (double g : pad) report.pad_row_max_abs_grad = std::max(report.pad_row_max_abs_grad, std::abs(g));
  }

  auto views = tensor_views(params);
  const auto grads = tensor_views(analytic.grad);
  for (std::size_t vi = 0; vi < views.size(); ++vi) {
    auto& view = views[vi];
    auto it = std::find_if(report.groups.begin(), report.groups.end(),
                           [&](const GroupCheck& g) { return g.group == view.group; });
    if (it == report.groups.end()) {
      report.groups.push_back({view.group, 0.0, 0, 0, false});
      it = report.groups.end() - 1;
    }
    for (std::size_t k = 0; k < view.values.size(); ++k) {
      const double orig = view.values[k];
      view.values[k] = orig + step;
      const Probe up = probe(batch, params, config);
      view.values[k] = orig - step;
      const Probe down = probe(batch, params, config);
      view.values[k] = orig;
      if (up.pattern != base.pattern || down.pattern != base.pattern) {
        ++it->skipped;
        continue;
      }
      const double numeric = (up.loss - down.loss) / (2.0 * step);
      it->max_rel_error = std::max(it->max_rel_error, relative_error(grads[vi].values[k], numeric));
      ++it->checked;
    }
  }
  report.passed = report.pad_row_max_abs_grad == 0.0;
  for (auto& g : report.groups) {
    g.passed = g.max_rel_error <= tolerance;
    report.passed = report.passed && g.passed;
  }
  return report;
}

std::string GradCheckReport::render() const {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %14s %8s %8s  %s\n", "group", "max_rel_error",
                "checked", "skipped", "status");
  out << buf;
  for (const auto& g : groups) {
    std::snprintf(buf, sizeof buf, "%-14s %14.3e %8zu %8zu  %s\n", g.group.c_str(),
                  g.max_rel_error, g.checked, g.skipped, g.passed ? "ok" : "FAIL");
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "pad row |grad| max = %g; tolerance %g; step %g: %s\n",
                pad_row_max_abs_grad, tolerance, step, passed ? "PASS" : "FAIL");
  out << buf;
  return out.str();
}

}  // namespace mfnd
