// Copyright 2026 The QDT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qdt/error.hpp"
#include "qdt/eval.hpp"

namespace qdt {

using nlohmann::json;

void RunReport::recompute() {
  errors = 0;
  fallbacks = 0;
  class_counts = {};
  std::vector<Outcome> scored;
  for (const auto& r : records) {
    if (!r.error.empty()) ++errors;
    if (r.fallback_used) ++fallbacks;
    if (r.true_label) ++(*r.true_label == 1 ? class_counts.true_positive : class_counts.true_negative);
    if (r.predicted) ++(*r.predicted == 1 ? class_counts.predicted_positive : class_counts.predicted_negative);
    if (r.predicted && r.true_label) scored.push_back({*r.predicted, *r.true_label});
  }
  if (scored.empty()) {
    confusion.reset();
    metrics.reset();
  } else {
    confusion = tally(scored);
    metrics = metrics_from(*confusion);
  }
}

const std::vector<ReferenceResult>& reference_results() {
  static const std::vector<ReferenceResult> rows = {
      {"TabPFN", 0.63, 0.76, 0.69},
      {"XGBoost", 0.65, 0.68, 0.66},
      {"LLM only", 0.54, 0.51, 0.52},
      {"QDT", 0.68, 0.73, 0.70},
      {"QDT (30% fewer features)", 0.65, 0.69, 0.67},
      {"QDT (70% fewer features)", 0.62, 0.65, 0.64},
  };
  return rows;
}

json RunReport::summary_json() const {
  json refs = json::array();
  for (const auto& r : reference_results()) {
    refs.push_back({{"method", r.method}, {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}});
  }
  std::size_t issued = 0, approved = 0;
  for (const auto& r : records) {
    issued += r.queries_issued;
    approved += r.queries_approved;
  }
  const auto evaluated = records.size();
  return {{"records_requested", records_requested},
          {"records_evaluated", evaluated},
          {"errors", errors},
          {"aborted", aborted},
          {"abort_reason", abort_reason},
          {"confusion", confusion ? confusion->to_json() : json(nullptr)},
          {"metrics", metrics ? metrics->to_json() : json(nullptr)},
          {"class_counts",
           {{"true_positive", class_counts.true_positive},
            {"true_negative", class_counts.true_negative},
            {"predicted_positive", class_counts.predicted_positive},
            {"predicted_negative", class_counts.predicted_negative}}},
          {"fallbacks", fallbacks},
          {"fallback_rate", evaluated ? static_cast<double>(fallbacks) / static_cast<double>(evaluated) : 0.0},
          {"queries", {{"issued", issued}, {"approved", approved}}},
          {"config", config},
          {"wall_clock_ms", wall_clock_ms},
          {"reference_results", std::move(refs)}};
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace

std::string render_comparison(const RunReport& report) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-32s %9s %9s %9s\n", "method", "precision", "recall", "f1");
  out << line;
  std::string label = "this run";
  if (report.config.contains("mode")) label += " (" + report.config.at("mode").get<std::string>();
  if (report.config.contains("ablation")) {
    const double f = report.config.at("ablation").value("mask_fraction", 0.0);
    if (f > 0) label += ", mask " + fixed(f);
  }
  if (report.config.contains("mode")) label += ")";
  if (report.metrics) {
    std::snprintf(line, sizeof line, "%-32s %9s %9s %9s\n", label.c_str(), fixed(report.metrics->precision).c_str(),
                  fixed(report.metrics->recall).c_str(), fixed(report.metrics->f1).c_str());
  } else {
    std::snprintf(line, sizeof line, "%-32s %9s %9s %9s\n", label.c_str(), "n/a", "n/a", "n/a");
  }
  out << line;
  for (const auto& r : reference_results()) {
    std::snprintf(line, sizeof line, "%-32s %9s %9s %9s\n", ("ref: " + r.method).c_str(), fixed(r.precision).c_str(),
                  fixed(r.recall).c_str(), fixed(r.f1).c_str());
    out << line;
  }
  return out.str();
}

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  std::ostringstream csv;
  csv << "record_id,predicted,true_label,fallback_used,queries_issued,queries_approved,error\n";
  for (const auto& r : report.records) {
    csv << csv_field(r.record_id) << ',' << (r.predicted ? std::to_string(*r.predicted) : "") << ','
        << (r.true_label ? std::to_string(*r.true_label) : "") << ',' << (r.fallback_used ? 1 : 0) << ','
        << r.queries_issued << ',' << r.queries_approved << ',' << csv_field(r.error) << '\n';
  }
  write_file(dir / "records.csv", csv.str());
  write_file(dir / "summary.json", report.summary_json().dump(2) + "\n");
  write_file(dir / "comparison.txt", render_comparison(report));
}

}  // namespace qdt
