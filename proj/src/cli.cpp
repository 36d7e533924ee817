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

#include "mfnd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "mfnd/config.hpp"
#include "mfnd/error.hpp"
#include "mfnd/manifest.hpp"
#include "mfnd/model.hpp"

namespace mfnd {

namespace fs = std::filesystem;

DomainRegistry parse_registry_spec(std::string_view spec) {
  if (spec == "weibo21") return DomainRegistry::weibo21();
  if (spec.starts_with("synthetic:")) {
    const std::string k(spec.substr(10));
    std::size_t pos = 0;
    unsigned long value = 0;
    try {
      value = std::stoul(k, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != k.size() || value < 1) throw UsageError("bad registry spec '" + std::string(spec) + "'");
    return DomainRegistry::synthetic(value);
  }
  if (spec.starts_with("list:")) {
    std::vector<std::string> names;
    std::stringstream ss{std::string(spec.substr(5))};
    std::string name;
    while (std::getline(ss, name, ',')) names.push_back(name);
    return DomainRegistry(std::move(names));
  }
  throw UsageError("bad registry spec '" + std::string(spec) +
                   "' (expected weibo21, synthetic:K or list:A,B,...)");
}

DomainRegistry read_registry_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open registry file " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  if (names == DomainRegistry::weibo21().names()) return DomainRegistry::weibo21();
  try {
    return DomainRegistry(std::move(names));
  } catch (const UsageError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_registry_file(const fs::path& path, const DomainRegistry& registry) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& n : registry.names()) out << n << '\n';
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size()) {
      throw UsageError(std::string(what) + ": bad number '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(what) + ": empty list");
  return out;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string output;
  std::string mode = "domain_flip";
  std::size_t domains = 2;
  std::size_t items = 1000;
  std::size_t vocab = 16;
  std::uint64_t seed = 0;
  std::size_t min_tokens = 3;
  std::size_t max_tokens = 10;
};

int cmd_synth(const SynthArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const auto mode = parse_synth_mode(a.mode);
  if (!mode) throw UsageError("--mode must be separable or domain_flip");
  SynthSpec spec;
  spec.num_domains = a.domains;
  spec.items_per_domain = a.items;
  spec.vocab_size = a.vocab;
  spec.mode = *mode;
  spec.seed = a.seed;
  spec.min_tokens = a.min_tokens;
  spec.max_tokens = a.max_tokens;
  const auto items = synth_corpus(spec);
  const auto registry = DomainRegistry::synthetic(a.domains);

  RunManifest manifest("synth", argv);
  manifest.add_seed(a.seed);
  manifest.config()["mode"] = a.mode;
  manifest.config()["num_domains"] = a.domains;
  manifest.config()["items_per_domain"] = a.items;
  manifest.config()["vocab_size"] = a.vocab;
  manifest.config()["min_tokens"] = a.min_tokens;
  manifest.config()["max_tokens"] = a.max_tokens;
  manifest.config()["registry"] = "synthetic:" + std::to_string(a.domains);

  const fs::path path(a.output);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_corpus(path, items, registry);
  manifest.add_output(path);
  manifest.write(path.string() + ".manifest.json");
  out << "wrote " << items.size() << " items to " << path.string() << '\n';
  return kExitOk;
}

// --- prepare ---------------------------------------------------------------

struct PrepareArgs {
  std::string input;
  std::string out_dir;
  std::string registry = "weibo21";
  double dedup_threshold = 0.8;
  std::string ratios = "0.6,0.2,0.2";
  std::uint64_t seed = 0;
  std::string domain;
};

int cmd_prepare(const PrepareArgs& a, const std::vector<std::string>& argv,
                std::ostream& out, std::ostream& err) {
  const auto registry = parse_registry_spec(a.registry);
  const auto ratio_list = parse_double_list(a.ratios, "--ratios");
  if (ratio_list.size() != 3) throw UsageError("--ratios needs three values");
  SplitSpec spec;
  std::copy(ratio_list.begin(), ratio_list.end(), spec.ratios.begin());
  spec.seed = a.seed;

  auto items = load_corpus(a.input, registry);
  const CorpusStats input_stats = corpus_stats(items, registry);
  if (!a.domain.empty()) {
    const auto id = registry.find(a.domain);
    if (!id) throw UsageError("--domain '" + a.domain + "' is not in the registry");
    std::erase_if(items, [&](const NewsItem& it) { return it.domain != *id; });
  }
  const auto kept = dedup_one_pass(items, a.dedup_threshold);
  const CorpusStats kept_stats = corpus_stats(kept, registry);
  const SplitResult split = stratified_split(kept, spec);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  RunManifest manifest("prepare", argv);
  manifest.add_input(a.input);
  manifest.add_seed(a.seed);
  manifest.config()["registry"] = a.registry;
  manifest.config()["dedup_threshold"] = a.dedup_threshold;
  manifest.config()["ratios"] = ratio_list;
  manifest.config()["domain_filter"] = a.domain;

  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    manifest.add_output(dir / name);
  };
  emit("stats.txt", input_stats.render_text());
  emit("stats.csv", input_stats.render_csv());
  emit("stats_dedup.txt", kept_stats.render_text());
  emit("stats_dedup.csv", kept_stats.render_csv());
  for (const auto& [name, part] :
       {std::pair{"train.jsonl", &split.train}, std::pair{"val.jsonl", &split.val},
        std::pair{"test.jsonl", &split.test}}) {
    save_corpus(dir / name, *part, registry);
    manifest.add_output(dir / name);
  }
  write_registry_file(dir / "registry.txt", registry);
  manifest.add_output(dir / "registry.txt");

  manifest.notes()["input_items"] = input_stats.total.all();
  manifest.notes()["after_filter"] = items.size();
  manifest.notes()["after_dedup"] = kept.size();
  manifest.notes()["split_sizes"] = {split.train.size(), split.val.size(), split.test.size()};
  manifest.notes()["warnings"] = split.warnings;
  manifest.write(dir / "manifest.json");

  for (const auto& w : split.warnings) err << "warning: " << w << '\n';
  out << input_stats.render_text();
  out << "dedup kept " << kept.size() << " of " << items.size() << " items; split "
      << split.train.size() << "/" << split.val.size() << "/" << split.test.size() << '\n';
  return kExitOk;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string data_dir;
  std::string out_dir;
  std::string model_config;
  std::string train_config;
  std::string regime = "mdfend";
  std::size_t repeats = 1;
  std::optional<std::uint64_t> seed;
  std::string lr_grid;
  std::optional<std::size_t> threads;
  std::optional<double> threshold;
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv, std::ostream& out,
              std::ostream& err) {
  const auto regime = parse_regime(a.regime);
  if (!regime) throw UsageError("--regime must be mdfend or mixed_single_expert");
  if (a.repeats < 1) throw UsageError("--repeats must be >= 1");

  PipelineConfig pipeline = a.model_config.empty() ? PipelineConfig{} : load_pipeline_config(a.model_config);
  TrainConfig train_config = a.train_config.empty() ? TrainConfig{} : load_train_config(a.train_config);
  if (a.seed) train_config.seed = *a.seed;
  if (a.threads) train_config.threads = *a.threads;
  if (a.threshold) train_config.threshold = *a.threshold;
  train_config.validate();
  std::vector<double> grid;
  if (!a.lr_grid.empty()) grid = parse_double_list(a.lr_grid, "--lr-grid");

  const fs::path data(a.data_dir);
  const auto registry = read_registry_file(data / "registry.txt");
  const auto train_items = load_corpus(data / "train.jsonl", registry);
  const auto val_items = load_corpus(data / "val.jsonl", registry);
  if (train_items.empty() || val_items.empty()) {
    throw DataError("training and validation splits must be non-empty");
  }

  ModelConfig config = pipeline.model;
  config.num_domains = registry.size();
  config.regime = *regime;
  if (*regime == Regime::kMixedSingleExpert) config.num_experts = 1;
  config.validate();

  const Vocabulary vocab = build_vocab(train_items, pipeline.min_count);
  const auto train_set = make_examples(train_items, vocab, config.max_len);
  const auto val_set = make_examples(val_items, vocab, config.max_len);

  auto initial_for = [&](std::uint64_t seed) {
    ModelParams p = initial_params(config, vocab.size(), seed);
    if (!pipeline.pretrained_vectors.empty()) {
      Rng rng(derive_seed(seed, 2));
      p.embedding = load_pretrained_vectors(pipeline.pretrained_vectors, vocab,
                                            config.embed_dim, rng).table;
    }
    return p;
  };

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  RunManifest manifest("train", argv);
  manifest.add_input(data / "registry.txt");
  manifest.add_input(data / "train.jsonl");
  manifest.add_input(data / "val.jsonl");
  if (!pipeline.pretrained_vectors.empty()) manifest.add_input(pipeline.pretrained_vectors);
  manifest.config()["regime"] = a.regime;
  manifest.config()["repeats"] = a.repeats;
  manifest.config()["model_config"] = to_key_values(pipeline);
  manifest.config()["train_config"] = to_key_values(train_config);
  manifest.config()["lr_grid"] = grid;

  std::optional<TrainResult> first_run;
  if (!grid.empty()) {
    auto search = lr_search(grid, train_set, val_set, config, train_config,
                            initial_for(train_config.seed));
    std::ostringstream csv;
    csv << "learning_rate,best_val_macro_f1,best_epoch,diverged\n";
    for (const auto& r : search.runs) {
      csv << fmt17(r.learning_rate) << ',' << fmt17(r.best_val_f1) << ',' << r.best_epoch
          << ',' << (r.diverged ? 1 : 0) << '\n';
    }
    write_text(dir / "lr_search.csv", csv.str());
    manifest.add_output(dir / "lr_search.csv");
    manifest.notes()["selected_learning_rate"] = search.best_rate;
    out << "learning-rate search selected " << search.best_rate << '\n';
    train_config.learning_rate = search.best_rate;
    first_run = std::move(search.best_run);
  }

  std::ostringstream summary;
  summary << "repeat,seed,learning_rate,best_epoch,best_val_macro_f1,stop_reason\n";
  double f1_sum = 0.0;
  bool any_diverged = false;
  for (std::size_t r = 0; r < a.repeats; ++r) {
    TrainConfig tc = train_config;
    tc.seed = train_config.seed + r;
    manifest.add_seed(tc.seed);
    TrainResult result = (r == 0 && first_run)
                             ? std::move(*first_run)
                             : train(train_set, val_set, config, tc, initial_for(tc.seed));
    if (result.diverged) {
      any_diverged = true;
      err << "repeat " << r << ": " << result.stop_reason << '\n';
    }
    const fs::path run_dir = dir / ("run_" + std::to_string(r));
    fs::create_directories(run_dir);
    save_checkpoint(Model{config, registry, vocab, result.best_params}, run_dir / "checkpoint.json");
    write_text(run_dir / "history.csv", history_csv(result.history));
    manifest.add_output(run_dir / "checkpoint.json");
    manifest.add_output(run_dir / "history.csv");
    summary << r << ',' << tc.seed << ',' << fmt17(tc.learning_rate) << ',' << result.best_epoch
            << ',' << fmt17(result.best_val_f1) << ',' << result.stop_reason << '\n';
    f1_sum += result.best_val_f1;
    out << "repeat " << r << " seed " << tc.seed << ": best validation macro-F1 "
        << format_score(result.best_val_f1) << " at epoch " << result.best_epoch << '\n';
  }
  const double mean_f1 = f1_sum / static_cast<double>(a.repeats);
  summary << "mean,,,," << fmt17(mean_f1) << ",\n";
  write_text(dir / "summary.csv", summary.str());
  manifest.add_output(dir / "summary.csv");
  manifest.notes()["mean_best_val_macro_f1"] = mean_f1;
  manifest.write(dir / "manifest.json");
  out << "mean validation macro-F1 over " << a.repeats << " repeat(s): " << format_score(mean_f1)
      << '\n';
  return any_diverged ? kExitNumerical : kExitOk;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string test_file;
  std::string report_dir;
  double threshold = 0.5;
  std::string f1 = "macro";
  std::string name;
  std::string model_config;
};

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const auto variant = parse_f1_variant(a.f1);
  if (!variant) throw UsageError("--f1 must be macro or positive");
  if (!(a.threshold >= 0.0 && a.threshold <= 1.0)) throw UsageError("--threshold must lie in [0, 1]");
  const Model model = load_checkpoint(a.checkpoint);
  if (!a.model_config.empty()) {
    ModelConfig expected = load_pipeline_config(a.model_config).model;
    expected.num_domains = model.config.num_domains;
    expected.regime = model.config.regime;
    if (expected.regime == Regime::kMixedSingleExpert) expected.num_experts = 1;
    require_same_config(expected, model.config);
  }
  const auto items = load_corpus(a.test_file, model.registry);
  const std::string name = a.name.empty() ? std::string(regime_name(model.config.regime)) : a.name;
  const EvalReport report = evaluate(model, items, name, a.threshold, *variant);
  const EvalReport reports[] = {present_domains(report)};
  const ReportTable table = to_table(reports);

  const fs::path dir(a.report_dir);
  fs::create_directories(dir);
  RunManifest manifest("eval", argv);
  manifest.add_input(a.checkpoint);
  manifest.add_input(a.test_file);
  manifest.config()["threshold"] = a.threshold;
  manifest.config()["f1"] = a.f1;
  manifest.config()["name"] = name;
  write_text(dir / "report.txt", render_report_text(table));
  write_text(dir / "report.csv", render_report_csv(table));
  manifest.add_output(dir / "report.txt");
  manifest.add_output(dir / "report.csv");
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (std::size_t d = 0; d < report.domains.size(); ++d) {
    const auto& c = report.domain_counts[d];
    counts[report.domains[d]] = {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
  }
  manifest.notes()["confusion"] = counts;
  manifest.write(dir / "manifest.json");
  out << render_report_text(table);
  return kExitOk;
}

// --- gradcheck -------------------------------------------------------------

int cmd_gradcheck(double tolerance, std::uint64_t seed, std::size_t batch, std::ostream& out) {
  if (batch < 1 || batch > 4) throw UsageError("--batch must lie in [1, 4]");
  const auto report = grad_check(tiny_gradcheck_config(), seed, tolerance, batch);
  out << report.render();
  return report.passed ? kExitOk : kExitNumerical;
}

// --- report ----------------------------------------------------------------

int cmd_report(const std::vector<std::string>& csvs, const std::string& single_domain,
               const std::string& csv_out, std::ostream& out) {
  // Columns are the union of all inputs in order of first appearance.
  ReportTable merged;
  std::vector<ReportTable> tables;
  for (const auto& path : csvs) {
    tables.push_back(parse_report_csv(read_text(path)));
    for (const auto& d : tables.back().domains) {
      if (std::find(merged.domains.begin(), merged.domains.end(), d) == merged.domains.end()) {
        merged.domains.push_back(d);
      }
    }
  }
  const std::size_t k = merged.domains.size();
  for (const auto& t : tables) {
    for (const auto& row : t.rows) {
      ReportRow out_row{row.model, std::vector<std::optional<double>>(k + 1)};
      for (std::size_t d = 0; d < t.domains.size(); ++d) {
        const auto at = std::find(merged.domains.begin(), merged.domains.end(), t.domains[d]);
        out_row.values[at - merged.domains.begin()] = row.values[d];
      }
      out_row.values[k] = row.values.back();
      merged.rows.push_back(std::move(out_row));
    }
  }
  if (!single_domain.empty()) {
    // Each row scores one domain; collect the cells into one row.
    std::vector<std::optional<double>> cells(merged.domains.size());
    for (const auto& row : merged.rows) {
      for (std::size_t d = 0; d < merged.domains.size(); ++d) {
        if (!row.values[d]) continue;
        if (cells[d]) throw DataError("domain " + merged.domains[d] + " is scored twice");
        cells[d] = row.values[d];
      }
    }
    merged.rows = {single_domain_row(single_domain, std::move(cells))};
  }
  if (!csv_out.empty()) write_text(csv_out, render_report_csv(merged));
  out << render_report_text(merged);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-domain fake news detection with a domain-gated mixture of experts"};
  app.require_subcommand(1);
  std::vector<std::string> argv = args;

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labelled corpus");
  synth_cmd->add_option("output,--output", synth.output, "Output JSONL path")->required();
  synth_cmd->add_option("--mode", synth.mode, "separable | domain_flip");
  synth_cmd->add_option("--domains", synth.domains, "Number of domains");
  synth_cmd->add_option("--items", synth.items, "Items per domain (even)");
  synth_cmd->add_option("--vocab", synth.vocab, "Synthetic vocabulary size");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--min-tokens", synth.min_tokens, "Shortest item in tokens");
  synth_cmd->add_option("--max-tokens", synth.max_tokens, "Longest item in tokens");

  PrepareArgs prep;
  auto* prep_cmd = app.add_subcommand("prepare", "Validate, deduplicate and split a corpus");
  prep_cmd->add_option("input,--input", prep.input, "Corpus JSONL")->required();
  prep_cmd->add_option("out_dir,--out-dir", prep.out_dir, "Output directory")->required();
  prep_cmd->add_option("--registry", prep.registry, "weibo21 | synthetic:K | list:A,B,...");
  prep_cmd->add_option("--dedup-threshold", prep.dedup_threshold,
                       "Trigram Jaccard threshold; above 1 disables dedup");
  prep_cmd->add_option("--ratios", prep.ratios, "train,val,test fractions");
  prep_cmd->add_option("--seed", prep.seed, "Split seed");
  prep_cmd->add_option("--domain", prep.domain, "Keep only this domain");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train models on prepared splits");
  train_cmd->add_option("data_dir,--data-dir", tr.data_dir, "Directory written by prepare")->required();
  train_cmd->add_option("out_dir,--out-dir", tr.out_dir, "Run output directory")->required();
  train_cmd->add_option("--model-config", tr.model_config, "Model config file");
  train_cmd->add_option("--train-config", tr.train_config, "Train config file");
  train_cmd->add_option("--regime", tr.regime, "mdfend | mixed_single_expert");
  train_cmd->add_option("--repeats", tr.repeats, "Runs with seeds seed..seed+N-1");
  train_cmd->add_option("--seed", tr.seed, "Overrides the train config seed");
  train_cmd->add_option("--lr-grid", tr.lr_grid, "Comma-separated learning rates to search");
  train_cmd->add_option("--threshold", tr.threshold, "Decision threshold for validation F1");
  train_cmd->add_option("--threads", tr.threads, "Worker threads for gradient accumulation");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on a test file");
  eval_cmd->add_option("checkpoint,--checkpoint", ev.checkpoint, "checkpoint.json")->required();
  eval_cmd->add_option("test_file,--test-file", ev.test_file, "Test JSONL")->required();
  eval_cmd->add_option("--report", ev.report_dir, "Report output directory")->required();
  eval_cmd->add_option("--threshold", ev.threshold, "Fake-probability decision threshold");
  eval_cmd->add_option("--f1", ev.f1, "macro | positive");
  eval_cmd->add_option("--name", ev.name, "Model name in the report row");
  eval_cmd->add_option("--model-config", ev.model_config, "Expected model config");

  double tolerance = 1e-4;
  std::uint64_t gc_seed = 0;
  std::size_t gc_batch = 4;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of all gradients");
  gc_cmd->add_option("--tolerance", tolerance, "Maximum relative error per group");
  gc_cmd->add_option("--seed", gc_seed, "Seed for parameters and batch");
  gc_cmd->add_option("--batch", gc_batch, "Batch size (1-4)");

  std::vector<std::string> report_csvs;
  std::string single_domain;
  std::string report_csv_out;
  auto* report_cmd = app.add_subcommand("report", "Combine report CSVs into one table");
  report_cmd->add_option("csv,--csv", report_csvs, "Report CSV files")->required();
  report_cmd->add_option("--single-domain", single_domain,
                         "Merge per-domain runs into one row with this name");
  report_cmd->add_option("--csv-out", report_csv_out, "Write the merged CSV here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth, argv, out);
    if (*prep_cmd) return cmd_prepare(prep, argv, out, err);
    if (*train_cmd) return cmd_train(tr, argv, out, err);
    if (*eval_cmd) return cmd_eval(ev, argv, out);
    if (*gc_cmd) return cmd_gradcheck(tolerance, gc_seed, gc_batch, out);
    if (*report_cmd) return cmd_report(report_csvs, single_domain, report_csv_out, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace mfnd
