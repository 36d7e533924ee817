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

#include "mfnd/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "mfnd/error.hpp"

namespace mfnd {

Confusion confusion(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) {
    throw UsageError("predictions and labels differ in length (" +
                     std::to_string(preds.size()) + " vs " +
                     std::to_string(labels.size()) + ")");
  }
  if (preds.empty()) throw UsageError("confusion of an empty set");
  Confusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == kLabelFake;
    const bool y = labels[i] == kLabelFake;
    if (p && y) ++c.tp;
    else if (p) ++c.fp;
    else if (y) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {
double class_f1(std::size_t hit, std::size_t wrong_a, std::size_t wrong_b) {
  const std::size_t denom = 2 * hit + wrong_a + wrong_b;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(hit) / static_cast<double>(denom);
}
}  // namespace

double f1_fake(const Confusion& c) { return class_f1(c.tp, c.fp, c.fn); }
double f1_real(const Confusion& c) { return class_f1(c.tn, c.fn, c.fp); }
double macro_f1(const Confusion& c) { return 0.5 * (f1_fake(c) + f1_real(c)); }

double macro_f1(std::span<const int> preds, std::span<const int> labels) {
  return macro_f1(confusion(preds, labels));
}

std::optional<F1Variant> parse_f1_variant(std::string_view name) {
  if (name == "macro") return F1Variant::kMacro;
  if (name == "positive") return F1Variant::kPositive;
  return std::nullopt;
}

std::string_view f1_variant_name(F1Variant variant) {
  return variant == F1Variant::kMacro ? "macro" : "positive";
}

double f1_score(const Confusion& c, F1Variant variant) {
  return variant == F1Variant::kMacro ? macro_f1(c) : f1_fake(c);
}

EvalReport evaluate_predictions(std::string model,
                                std::vector<std::string> domain_names,
                                std::span<const double> p_fake,
                                std::span<const DomainId> domains,
                                std::span<const int> labels, double threshold,
                                F1Variant variant) {
  if (p_fake.empty()) throw UsageError("evaluation needs at least one item");
  if (p_fake.size() != domains.size() || p_fake.size() != labels.size()) {
    throw UsageError("evaluation inputs differ in length");
  }
  EvalReport report;
  report.model = std::move(model);
  report.domains = std::move(domain_names);
  report.threshold = threshold;
  report.variant = variant;
  report.domain_counts.assign(report.domains.size(), {});
  for (std::size_t i = 0; i < p_fake.size(); ++i) {
    if (domains[i] >= report.domains.size()) {
      throw DataError("domain id " + std::to_string(domains[i]) + " out of range");
    }
    const int pred = p_fake[i] >= threshold ? kLabelFake : kLabelReal;
    const int one_pred[] = {pred};
    const int one_label[] = {labels[i]};
    const Confusion c = confusion(one_pred, one_label);
    report.domain_counts[domains[i]] += c;
    report.overall_counts += c;
  }
  for (const auto& c : report.domain_counts) {
    report.domain_f1.push_back(c.total() == 0 ? std::nullopt
                                              : std::optional(f1_score(c, variant)));
  }
  report.overall_f1 = f1_score(report.overall_counts, variant);
  return report;
}

// --- tables ----------------------------------------------------------------

EvalReport present_domains(const EvalReport& report) {
  EvalReport out = report;
  out.domains.clear();
  out.domain_counts.clear();
  out.domain_f1.clear();
  for (std::size_t d = 0; d < report.domains.size(); ++d) {
    if (report.domain_counts[d].total() == 0) continue;
    out.domains.push_back(report.domains[d]);
    out.domain_counts.push_back(report.domain_counts[d]);
    out.domain_f1.push_back(report.domain_f1[d]);
  }
  return out;
}

ReportRow to_row(const EvalReport& report) {
  ReportRow row;
  row.model = report.model;
  row.values = report.domain_f1;
  row.values.push_back(report.overall_f1);
  return row;
}

ReportTable to_table(std::span<const EvalReport> reports) {
  ReportTable table;
  if (reports.empty()) return table;
  table.domains = reports.front().domains;
  for (const auto& r : reports) {
    if (r.domains != table.domains) {
      throw UsageError("reports disagree on domain columns");
    }
    table.rows.push_back(to_row(r));
  }
  return table;
}

ReportRow single_domain_row(std::string model,
                            std::vector<std::optional<double>> domain_values) {
  double sum = 0.0;
  std::size_t present = 0;
  for (const auto& v : domain_values) {
    if (v) {
      sum += *v;
      ++present;
    }
  }
  ReportRow row{std::move(model), std::move(domain_values)};
  row.values.push_back(present ? std::optional(sum / static_cast<double>(present))
                               : std::nullopt);
  return row;
}

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

namespace {

std::string cell(const std::optional<double>& v) {
  return v ? format_score(*v) : std::string();
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of("\r\n") != std::string_view::npos) {
    throw UsageError("report field contains a line break");
  }
  if (text.find_first_of(",\"") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch != '"') {
        fields.back() += ch;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (ch == '"' && fields.back().empty()) {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back() += ch;
    }
  }
  if (quoted) throw DataError("report CSV line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

}  // namespace

std::string render_report_text(const ReportTable& table) {
  std::size_t model_width = 5;
  for (const auto& r : table.rows) model_width = std::max(model_width, r.model.size());
  std::vector<std::size_t> widths;
  for (const auto& d : table.domains) widths.push_back(std::max<std::size_t>(d.size(), 6));
  widths.push_back(6);

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(model_width)) << "model";
  for (std::size_t i = 0; i < table.domains.size(); ++i) {
    out << "  " << std::right << std::setw(static_cast<int>(widths[i])) << table.domains[i];
  }
  out << "  " << std::setw(static_cast<int>(widths.back())) << "All" << '\n';
  for (const auto& r : table.rows) {
    out << std::left << std::setw(static_cast<int>(model_width)) << r.model;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      const std::string text = r.values[i] ? format_score(*r.values[i]) : "-";
      out << "  " << std::right << std::setw(static_cast<int>(widths[i])) << text;
    }
    out << '\n';
  }
  return out.str();
}

std::string render_report_csv(const ReportTable& table) {
  std::ostringstream out;
  out << "model";
  for (const auto& d : table.domains) out << ',' << csv_field(d);
  out << ",all\n";
  for (const auto& r : table.rows) {
    out << csv_field(r.model);
    for (const auto& v : r.values) out << ',' << cell(v);
    out << '\n';
  }
  return out.str();
}

ReportTable parse_report_csv(std::string_view csv) {
  ReportTable table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  while (pos < csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split_csv_line(line, line_no);
    if (!have_header) {
      if (fields.size() < 2 || fields.front() != "model" || fields.back() != "all") {
        throw DataError("report CSV header must be model,<domains...>,all");
      }
      table.domains.assign(fields.begin() + 1, fields.end() - 1);
      have_header = true;
      continue;
    }
    if (fields.size() != table.domains.size() + 2) {
      throw DataError("report CSV line " + std::to_string(line_no) +
                      ": wrong number of fields");
    }
    ReportRow row;
    row.model = fields[0];
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i].empty()) {
        row.values.emplace_back();
        continue;
      }
      double v = 0.0;
      const auto& f = fields[i];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw DataError("report CSV line " + std::to_string(line_no) +
                        ": bad number '" + f + "'");
      }
      row.values.emplace_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw DataError("report CSV is empty");
  return table;
}

}  // namespace mfnd
