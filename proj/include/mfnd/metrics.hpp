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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfnd/corpus.hpp"

namespace mfnd {

// Fake (label 1) is the positive class.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  bool operator==(const Confusion&) const = default;
};

Confusion confusion(std::span<const int> preds, std::span<const int> labels);

// A class absent from both predictions and labels scores 1.
double f1_fake(const Confusion& c);
double f1_real(const Confusion& c);
double macro_f1(const Confusion& c);
double macro_f1(std::span<const int> preds, std::span<const int> labels);

enum class F1Variant { kMacro, kPositive };

std::optional<F1Variant> parse_f1_variant(std::string_view name);
std::string_view f1_variant_name(F1Variant variant);

double f1_score(const Confusion& c, F1Variant variant);

struct EvalReport {
  std::string model;
  std::vector<std::string> domains;
  std::vector<Confusion> domain_counts;
  // nullopt for domains without test items.
  std::vector<std::optional<double>> domain_f1;
  Confusion overall_counts;
  // Scored over the pooled items, not averaged over domains.
  double overall_f1 = 0.0;
  double threshold = 0.5;
  F1Variant variant = F1Variant::kMacro;
};

// p_fake >= threshold predicts fake.
EvalReport evaluate_predictions(std::string model,
                                std::vector<std::string> domain_names,
                                std::span<const double> p_fake,
                                std::span<const DomainId> domains,
                                std::span<const int> labels,
                                double threshold = 0.5,
                                F1Variant variant = F1Variant::kMacro);

// Drops domains without test items.
EvalReport present_domains(const EvalReport& report);

// --- Report tables ----------------------------------------------------------

struct ReportRow {
  std::string model;
  // One entry per domain followed by "all"; nullopt renders as an empty cell.
  std::vector<std::optional<double>> values;
  bool operator==(const ReportRow&) const = default;
};

struct ReportTable {
  std::vector<std::string> domains;
  std::vector<ReportRow> rows;
  bool operator==(const ReportTable&) const = default;
};

ReportRow to_row(const EvalReport& report);
ReportTable to_table(std::span<const EvalReport> reports);

// Rows built from single-domain runs: "all" is the unweighted mean of the
// present domain cells.
ReportRow single_domain_row(std::string model,
                            std::vector<std::optional<double>> domain_values);

// Values are rounded to four decimals.
std::string render_report_text(const ReportTable& table);
// Header "model,<domains...>,all".
std::string render_report_csv(const ReportTable& table);
ReportTable parse_report_csv(std::string_view csv);

std::string format_score(double value);

}  // namespace mfnd
