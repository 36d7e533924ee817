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

#include <sstream>

#include "json.hpp"
#include "mfnd/cli.hpp"
#include "mfnd/error.hpp"
#include "mfnd/manifest.hpp"
#include "mfnd/metrics.hpp"
#include "test_util.hpp"

namespace mfnd {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const fs::path& p) {
  const auto text = testing::slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

const char* kModelCfg =
    "embed_dim = 8\nnum_experts = 3\nkernel_sizes = 1,2\nfilters_per_kernel = 4\n"
    "gate_hidden = 16\nhead_hidden = 16\nmax_len = 12\n";
const char* kTrainCfg = "epochs = 15\npatience = 15\nbatch_size = 16\nlearning_rate = 0.01\n";

class Pipeline : public ::testing::Test {
 protected:
  testing::TempDir dir{"cli"};
  std::string p(const std::string& name) const { return (dir / name).string(); }

  void SetUp() override {
    testing::spit(dir / "model.cfg", kModelCfg);
    testing::spit(dir / "train.cfg", kTrainCfg);
  }

  void make_data(const std::string& mode, std::size_t domains, std::size_t items,
                 const std::string& out_dir) {
    ASSERT_EQ(cli({"synth", p(out_dir + ".jsonl"), "--mode", mode, "--domains",
                   std::to_string(domains), "--items", std::to_string(items), "--seed", "3"})
                  .code,
              0);
    const auto r = cli({"prepare", p(out_dir + ".jsonl"), p(out_dir), "--registry",
                        "synthetic:" + std::to_string(domains), "--dedup-threshold", "2",
                        "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
};

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"synth"}).code, kExitUsage);
  EXPECT_EQ(cli({"synth", "x.jsonl", "--mode", "weird"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, RegistrySpecs) {
  EXPECT_EQ(parse_registry_spec("weibo21").size(), 9u);
  EXPECT_EQ(parse_registry_spec("synthetic:4").name(3), "synth3");
  EXPECT_EQ(parse_registry_spec("list:a,b").names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(parse_registry_spec("synthetic:x"), UsageError);
  EXPECT_THROW(parse_registry_spec("nope"), UsageError);
}

TEST_F(Pipeline, SynthFiles) {
  ASSERT_EQ(cli({"synth", p("a.jsonl"), "--mode", "domain_flip", "--domains", "2", "--items", "1000",
                 "--seed", "7"})
                .code,
            0);
  EXPECT_EQ(count_lines(dir / "a.jsonl"), 2000u);
  EXPECT_TRUE(fs::exists(dir / "a.jsonl.manifest.json"));
  ASSERT_EQ(cli({"synth", "--output", p("b.jsonl"), "--mode", "domain_flip", "--domains", "2",
                 "--items", "1000", "--seed", "7"})
                .code,
            0);
  EXPECT_EQ(sha256_file(dir / "a.jsonl"), sha256_file(dir / "b.jsonl"));

  ASSERT_EQ(cli({"synth", p("s.jsonl"), "--mode", "separable", "--domains", "1", "--items", "50"}).code, 0);
  const auto text = testing::slurp(dir / "s.jsonl");
  EXPECT_EQ(count_lines(dir / "s.jsonl"), 50u);
  std::size_t fake = 0, pos = 0;
  while ((pos = text.find("\"label\":1", pos)) != std::string::npos) ++fake, ++pos;
  EXPECT_EQ(fake, 25u);
}

TEST_F(Pipeline, PrepareIsDeterministicAndDeduplicates) {
  // Duplicate-heavy input: every content appears three times.
  std::string corpus;
  const char* texts[] = {"rising flood waters close the main road", "new study links diet and sleep",
                         "army drills start next week", "students protest tuition increase"};
  for (int i = 0; i < 24; ++i) {
    nlohmann::ordered_json j{{"id", "n" + std::to_string(i)},
                             {"content", std::string(texts[i % 4]) + (i >= 12 ? "!" : "")},
                             {"domain", i % 2 ? "Health" : "Science"},
                             {"label", (i / 2) % 2}};
    corpus += j.dump() + "\n";
  }
  testing::spit(dir / "dups.jsonl", corpus);
  ASSERT_EQ(cli({"prepare", p("dups.jsonl"), p("o1"), "--seed", "1"}).code, 0);
  ASSERT_EQ(cli({"prepare", "--input", p("dups.jsonl"), "--out-dir", p("o2"), "--seed", "1"}).code, 0);
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "stats.csv", "stats_dedup.csv"}) {
    EXPECT_EQ(testing::slurp(dir / "o1" / f), testing::slurp(dir / "o2" / f)) << f;
  }
  const auto reg = DomainRegistry::weibo21();
  const auto items = load_corpus(dir / "dups.jsonl", reg);
  const auto kept = dedup_one_pass(items, 0.8);
  ASSERT_LT(kept.size(), items.size());
  const std::size_t written = count_lines(dir / "o1" / "train.jsonl") +
                              count_lines(dir / "o1" / "val.jsonl") +
                              count_lines(dir / "o1" / "test.jsonl");
  EXPECT_EQ(written, kept.size());
  EXPECT_NE(testing::slurp(dir / "o1" / "stats.csv").find("All,12,12,24"), std::string::npos);
  const auto manifest = nlohmann::json::parse(testing::slurp(dir / "o1" / "manifest.json"));
  EXPECT_EQ(manifest["inputs"][0]["sha256"], sha256_file(dir / "dups.jsonl"));
  EXPECT_EQ(manifest["notes"]["after_dedup"], kept.size());
}

TEST_F(Pipeline, PrepareErrors) {
  EXPECT_EQ(cli({"prepare", p("missing.jsonl"), p("o")}).code, kExitData);
  testing::spit(dir / "bad.jsonl", "{\"id\":\"1\",\"content\":\"x\",\"domain\":\"Nowhere\",\"label\":0}\n");
  const auto r = cli({"prepare", p("bad.jsonl"), p("o")});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("bad.jsonl:1"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"prepare", p("bad.jsonl"), p("o"), "--registry", "bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"prepare", p("bad.jsonl"), p("o"), "--ratios", "0.5,0.5"}).code, kExitUsage);
}

TEST_F(Pipeline, TrainEvalReport) {
  make_data("separable", 2, 60, "sep");
  auto r = cli({"train", p("sep"), p("run"), "--model-config", p("model.cfg"), "--train-config",
                p("train.cfg"), "--regime", "mdfend", "--repeats", "2", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"run_0/checkpoint.json", "run_0/history.csv", "run_1/checkpoint.json",
                        "summary.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  }
  EXPECT_EQ(count_lines(dir / "run" / "run_0" / "history.csv"), 17u);
  EXPECT_NE(testing::slurp(dir / "run" / "summary.csv").find("mean,"), std::string::npos);

  // Same inputs and seed reproduce the checkpoint byte for byte.
  ASSERT_EQ(cli({"train", p("sep"), p("run2"), "--model-config", p("model.cfg"), "--train-config",
                 p("train.cfg"), "--repeats", "1", "--seed", "5"})
                .code,
            0);
  EXPECT_EQ(testing::slurp(dir / "run" / "run_0" / "checkpoint.json"),
            testing::slurp(dir / "run2" / "run_0" / "checkpoint.json"));

  const std::string ckpt = p("run/run_0/checkpoint.json");
  r = cli({"eval", ckpt, p("sep/test.jsonl"), "--report", p("rep1"), "--name", "gated"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(cli({"eval", ckpt, p("sep/test.jsonl"), "--report", p("rep2"), "--name", "gated"}).code, 0);
  EXPECT_EQ(testing::slurp(dir / "rep1" / "report.csv"), testing::slurp(dir / "rep2" / "report.csv"));
  EXPECT_EQ(testing::slurp(dir / "rep1" / "report.txt"), testing::slurp(dir / "rep2" / "report.txt"));
  const auto table = parse_report_csv(testing::slurp(dir / "rep1" / "report.csv"));
  EXPECT_EQ(table.domains, (std::vector<std::string>{"synth0", "synth1"}));
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].model, "gated");
  EXPECT_TRUE(fs::exists(dir / "rep1" / "manifest.json"));

  // One-domain slice -> one column, All equal to it.
  std::string slice;
  {
    std::istringstream in(testing::slurp(dir / "sep" / "test.jsonl"));
    for (std::string line; std::getline(in, line);) {
      if (line.find("\"synth1\"") != std::string::npos) slice += line + "\n";
    }
  }
  testing::spit(dir / "slice.jsonl", slice);
  ASSERT_EQ(cli({"eval", ckpt, p("slice.jsonl"), "--report", p("rep3")}).code, 0);
  const auto one = parse_report_csv(testing::slurp(dir / "rep3" / "report.csv"));
  EXPECT_EQ(one.domains, std::vector<std::string>{"synth1"});
  EXPECT_EQ(one.rows[0].values[0], one.rows[0].values[1]);

  // Merge the two reports; the slice row has no synth0 cell.
  r = cli({"report", p("rep1/report.csv"), p("rep3/report.csv"), "--csv-out", p("merged.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto merged = parse_report_csv(testing::slurp(dir / "merged.csv"));
  ASSERT_EQ(merged.rows.size(), 2u);
  EXPECT_FALSE(merged.rows[1].values[0]);

  // A model config that disagrees with the checkpoint.
  testing::spit(dir / "other.cfg", "embed_dim = 8\nhead_hidden = 32\n");
  r = cli({"eval", ckpt, p("sep/test.jsonl"), "--report", p("rep4"), "--model-config", p("other.cfg")});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("mismatch"), std::string::npos) << r.err;
  ASSERT_EQ(cli({"eval", ckpt, p("sep/test.jsonl"), "--report", p("rep5"), "--model-config",
                 p("model.cfg")})
                .code,
            0);
  EXPECT_EQ(cli({"eval", ckpt, p("sep/test.jsonl"), "--report", p("rep6"), "--f1", "micro"}).code,
            kExitUsage);
}

TEST_F(Pipeline, MixedRegimeAndLrGrid) {
  make_data("domain_flip", 2, 60, "flip");
  const auto r = cli({"train", p("flip"), p("mixed"), "--model-config", p("model.cfg"),
                      "--train-config", p("train.cfg"), "--regime", "mixed_single_expert",
                      "--lr-grid", "0.001,0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(dir / "mixed" / "lr_search.csv"), 3u);
  const auto ck = nlohmann::json::parse(testing::slurp(dir / "mixed" / "run_0" / "checkpoint.json"));
  EXPECT_EQ(ck["config"]["num_experts"], 1);
  EXPECT_EQ(ck["config"]["regime"], "mixed_single_expert");
  EXPECT_EQ(cli({"train", p("flip"), p("x"), "--regime", "both"}).code, kExitUsage);
  EXPECT_EQ(cli({"train", p("nodata"), p("x")}).code, kExitData);
}

TEST_F(Pipeline, SingleDomainRecipe) {
  make_data("separable", 2, 60, "all");
  ASSERT_EQ(cli({"prepare", p("all.jsonl"), p("only1"), "--registry", "synthetic:2", "--domain",
                 "synth1", "--dedup-threshold", "2", "--seed", "3"})
                .code,
            0);
  EXPECT_EQ(testing::slurp(dir / "only1" / "train.jsonl").find("synth0"), std::string::npos);
  ASSERT_EQ(cli({"train", p("only1"), p("r1"), "--model-config", p("model.cfg"), "--train-config",
                 p("train.cfg"), "--regime", "mixed_single_expert"})
                .code,
            0);
  ASSERT_EQ(cli({"eval", p("r1/run_0/checkpoint.json"), p("only1/test.jsonl"), "--report", p("e1")}).code, 0);
  const auto r = cli({"report", p("e1/report.csv"), "--single-domain", "single"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("single"), std::string::npos);
}

TEST(Cli, Gradcheck) {
  auto r = cli({"gradcheck"});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  for (const char* g : {"embedding", "domain_table", "attn_query", "expert0", "gate", "head"}) {
    EXPECT_NE(r.out.find(g), std::string::npos) << g;
  }
  EXPECT_EQ(cli({"gradcheck", "--tolerance", "0"}).code, kExitNumerical);
  EXPECT_EQ(cli({"gradcheck", "--batch", "9"}).code, kExitUsage);
}

}  // namespace
}  // namespace mfnd
