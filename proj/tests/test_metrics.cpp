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

#include "mfnd/corpus.hpp"
#include "mfnd/error.hpp"
#include "mfnd/metrics.hpp"
#include "mfnd/rng.hpp"

namespace mfnd {
namespace {

using Ints = std::vector<int>;

double oracle_class_f1(const Ints& p, const Ints& y, int cls) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    tp += p[i] == cls && y[i] == cls;
    fp += p[i] == cls && y[i] != cls;
    fn += p[i] != cls && y[i] == cls;
  }
  if (tp + fp + fn == 0) return 1.0;
  const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
}

TEST(Confusion, Examples) {
  EXPECT_EQ(confusion(Ints{1, 0, 1}, Ints{1, 0, 1}), (Confusion{2, 0, 1, 0}));
  EXPECT_EQ(confusion(Ints{1, 1}, Ints{1, 0}), (Confusion{1, 1, 0, 0}));
  EXPECT_THROW(confusion(Ints{1}, Ints{1, 0}), UsageError);
  EXPECT_THROW(confusion(Ints{}, Ints{}), UsageError);
}

TEST(Confusion, MatchesTally) {
  Rng rng(50);
  Ints p(50), y(50);
  for (int i = 0; i < 50; ++i) {
    p[i] = static_cast<int>(rng.below(2));
    y[i] = static_cast<int>(rng.below(2));
  }
  Confusion want;
  for (int i = 0; i < 50; ++i) {
    if (p[i] == 1 && y[i] == 1) ++want.tp;
    if (p[i] == 1 && y[i] == 0) ++want.fp;
    if (p[i] == 0 && y[i] == 0) ++want.tn;
    if (p[i] == 0 && y[i] == 1) ++want.fn;
  }
  EXPECT_EQ(confusion(p, y), want);
  EXPECT_EQ(confusion(p, y).total(), 50u);
}

TEST(F1, ClosedForms) {
  EXPECT_DOUBLE_EQ(macro_f1(Ints{1, 0, 0, 1}, Ints{1, 0, 0, 1}), 1.0);
  const Confusion c{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(f1_fake(c), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(f1_real(c), 0.0);
  EXPECT_DOUBLE_EQ(macro_f1(c), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(f1_score(c, F1Variant::kPositive), 2.0 / 3.0);
  // single-class perfect prediction: the absent class does not count against it
  EXPECT_DOUBLE_EQ(macro_f1(Ints{1, 1}, Ints{1, 1}), 1.0);
}

TEST(F1, MatchesHarmonicMeanOracle) {
  Rng rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(30);
    Ints p(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng.below(2));
      y[i] = static_cast<int>(rng.below(2));
    }
    const double want = 0.5 * (oracle_class_f1(p, y, 0) + oracle_class_f1(p, y, 1));
    EXPECT_NEAR(macro_f1(p, y), want, 1e-15);
  }
}

TEST(F1, ClassSwapInvariance) {
  Rng rng(7);
  Ints p(40), y(40);
  for (int i = 0; i < 40; ++i) {
    p[i] = static_cast<int>(rng.below(2));
    y[i] = static_cast<int>(rng.below(2));
  }
  Ints ps(p), ys(y);
  for (int& v : ps) v = 1 - v;
  for (int& v : ys) v = 1 - v;
  EXPECT_NEAR(macro_f1(p, y), macro_f1(ps, ys), 1e-15);
}

TEST(F1, VariantNames) {
  EXPECT_EQ(parse_f1_variant("macro"), F1Variant::kMacro);
  EXPECT_EQ(parse_f1_variant("positive"), F1Variant::kPositive);
  EXPECT_FALSE(parse_f1_variant("micro"));
  EXPECT_EQ(f1_variant_name(F1Variant::kMacro), "macro");
}

TEST(Evaluate, AllFakeModelOnAllFakeSet) {
  const std::vector<double> p(6, 1.0);
  const std::vector<DomainId> d{0, 0, 1, 1, 2, 2};
  const Ints y(6, kLabelFake);
  const auto r = evaluate_predictions("m", {"a", "b", "c"}, p, d, y);
  for (const auto& f : r.domain_f1) EXPECT_EQ(*f, 1.0);
  EXPECT_EQ(r.overall_f1, 1.0);
}

TEST(Evaluate, HandComputedTwoDomains) {
  //          p     y   pred
  // dom 0:  0.9   1    1   tp
  //         0.4   1    0   fn
  //         0.2   0    0   tn
  // dom 1:  0.7   0    1   fp
  //         0.6   1    1   tp
  //         0.1   0    0   tn
  //         0.5   0    1   fp   (threshold is inclusive)
  const std::vector<double> p{0.9, 0.4, 0.2, 0.7, 0.6, 0.1, 0.5};
  const std::vector<DomainId> d{0, 0, 0, 1, 1, 1, 1};
  const Ints y{1, 1, 0, 0, 1, 0, 0};
  const auto r = evaluate_predictions("m", {"x", "y"}, p, d, y);
  EXPECT_EQ(r.domain_counts[0], (Confusion{1, 0, 1, 1}));
  EXPECT_EQ(r.domain_counts[1], (Confusion{1, 2, 1, 0}));
  // dom 0: fake F1 = 2/3, real F1 = 2/3
  EXPECT_NEAR(*r.domain_f1[0], 2.0 / 3.0, 1e-15);
  // dom 1: fake P=1/3 R=1 -> 0.5; real P=1 R=1/3 -> 0.5
  EXPECT_NEAR(*r.domain_f1[1], 0.5, 1e-15);
  // pooled: tp 2, fp 2, tn 2, fn 1. fake 4/7, real 4/7.
  EXPECT_EQ(r.overall_counts, (Confusion{2, 2, 2, 1}));
  EXPECT_NEAR(r.overall_f1, 4.0 / 7.0, 1e-15);
}

TEST(Evaluate, ThresholdMonotonicity) {
  Rng rng(11);
  std::vector<double> p(60);
  std::vector<DomainId> d(60, 0);
  Ints y(60);
  for (int i = 0; i < 60; ++i) {
    p[i] = rng.uniform();
    y[i] = static_cast<int>(rng.below(2));
  }
  std::size_t prev = 61;
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    const auto r = evaluate_predictions("m", {"a"}, p, d, y, t);
    const std::size_t predicted_fake = r.overall_counts.tp + r.overall_counts.fp;
    EXPECT_LE(predicted_fake, prev);
    prev = predicted_fake;
  }
}

TEST(Evaluate, AbsentDomainIsEmptyCell) {
  const std::vector<double> p{0.9, 0.1};
  const std::vector<DomainId> d{0, 0};
  const Ints y{1, 0};
  const auto r = evaluate_predictions("m", {"a", "b"}, p, d, y);
  EXPECT_FALSE(r.domain_f1[1]);
  const auto present = present_domains(r);
  EXPECT_EQ(present.domains, std::vector<std::string>{"a"});
  const EvalReport reports[] = {present};
  const auto csv = render_report_csv(to_table(reports));
  EXPECT_EQ(csv, "model,a,all\nm,1.0000,1.0000\n");
  const EvalReport full[] = {r};
  EXPECT_EQ(render_report_csv(to_table(full)), "model,a,b,all\nm,1.0000,,1.0000\n");
}

// --- reports ---------------------------------------------------------------------

EvalReport random_report(const std::string& name, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back("D" + std::to_string(i));
  std::vector<double> p;
  std::vector<DomainId> d;
  Ints y;
  for (std::size_t i = 0; i < 40 * k; ++i) {
    p.push_back(rng.uniform());
    d.push_back(i % k);
    y.push_back(static_cast<int>(rng.below(2)));
  }
  return evaluate_predictions(name, names, p, d, y);
}

TEST(Report, NineDomainsGiveTenColumns) {
  const auto reg = DomainRegistry::weibo21();
  auto r = random_report("model", 9, 1);
  r.domains = reg.names();
  const EvalReport reports[] = {r};
  const auto table = to_table(reports);
  const auto csv = render_report_csv(table);
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header,
            "model,Science,Military,Education,Disasters,Politics,Health,Finance,Entertainment,"
            "Society,all");
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 10);
  // four decimals in every cell
  std::istringstream cells(row);
  std::string cell;
  std::getline(cells, cell, ',');
  while (std::getline(cells, cell, ',')) {
    ASSERT_EQ(cell.size(), 6u) << cell;
    EXPECT_EQ(cell[1], '.');
  }
  const auto text = render_report_text(table);
  EXPECT_NE(text.find("Entertainment"), std::string::npos);
  EXPECT_NE(text.find("All"), std::string::npos);
}

TEST(Report, SingleDomainOneColumn) {
  const auto r = random_report("solo", 1, 2);
  const EvalReport reports[] = {r};
  const auto table = to_table(reports);
  ASSERT_EQ(table.domains.size(), 1u);
  ASSERT_EQ(table.rows[0].values.size(), 2u);
  EXPECT_EQ(table.rows[0].values[0], table.rows[0].values[1]);
}

TEST(Report, CsvRoundTripIsLossless) {
  const EvalReport reports[] = {random_report("a", 4, 3), random_report("b,\"quoted\"", 4, 4)};
  auto table = to_table(reports);
  table.rows[1].values[2].reset();
  const std::string csv = render_report_csv(table);
  const auto parsed = parse_report_csv(csv);
  EXPECT_EQ(render_report_csv(parsed), csv);
  EXPECT_EQ(parse_report_csv(render_report_csv(parsed)), parsed);
  EXPECT_EQ(parsed.domains, table.domains);
  EXPECT_EQ(parsed.rows[1].model, "b,\"quoted\"");
  EXPECT_FALSE(parsed.rows[1].values[2]);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < parsed.rows[r].values.size(); ++c) {
      if (!table.rows[r].values[c]) continue;
      EXPECT_EQ(format_score(*parsed.rows[r].values[c]), format_score(*table.rows[r].values[c]));
    }
  }
}

TEST(Report, BadCsv) {
  EXPECT_THROW(parse_report_csv("x,a,all\n"), DataError);
  EXPECT_THROW(parse_report_csv("model,a,all\nm,0.5\n"), DataError);
  EXPECT_THROW(parse_report_csv("model,a,all\nm,abc,0.5\n"), DataError);
}

TEST(Report, SingleDomainRowAveragesPresentCells) {
  const auto row = single_domain_row("single", {0.5, std::nullopt, 0.75});
  ASSERT_EQ(row.values.size(), 4u);
  EXPECT_DOUBLE_EQ(*row.values[3], 0.625);
  EXPECT_FALSE(row.values[1]);
}

TEST(Report, FormatScore) {
  EXPECT_EQ(format_score(0.91374), "0.9137");
  EXPECT_EQ(format_score(1.0), "1.0000");
}

}  // namespace
}  // namespace mfnd
