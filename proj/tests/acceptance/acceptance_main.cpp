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

// Acceptance suite: one [PASS]/[FAIL] line per gating criterion, plus a
// report-only line for the optional live comparison.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "httplib.h"
#include "qdt/cli.hpp"
#include "qdt/eval.hpp"
#include "qdt/gateway.hpp"
#include "qdt/policy.hpp"
#include "test_support.hpp"

namespace {

using nlohmann::json;
using qdt::testing::TempDir;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string row_text(const qdt::Row& row) {
  std::string s = "(";
  for (std::size_t i = 0; i < row.size(); ++i) s += (i ? ", " : "") + qdt::format_value(row[i]);
  return s + ")";
}

int cli(const std::vector<std::string>& args, std::string* output = nullptr) {
  std::ostringstream out, err;
  const int code = qdt::run_cli(args, out, err);
  if (output) *output = out.str() + err.str();
  return code;
}

struct Workspace {
  TempDir dir;
  std::filesystem::path store = dir / "store.db";

  Workspace() {
    std::string log;
    if (cli({"ingest", "--csv", (qdt::testing::source_dir() / "data" / "diabetes_synthetic.csv").string(), "--schema",
             (qdt::testing::source_dir() / "config" / "diabetes_schema.json").string(), "--store", store.string()},
            &log) != 0) {
      throw std::runtime_error("ingest failed: " + log);
    }
  }
};

std::vector<std::string> evaluate_args(const Workspace& ws, const std::filesystem::path& out, int parallelism) {
  return {"evaluate",
          "--store", ws.store.string(),
          "--policy", (qdt::testing::source_dir() / "config" / "policy.json").string(),
          "--backend", qdt::testing::data_path("backend_qdt_scripted.json").string(),
          "--split-seed", "7",
          "--test-size", "50",
          "--parallelism", std::to_string(parallelism),
          "--out-dir", out.string()};
}

// 1 ---------------------------------------------------------------------------
std::string policy_corpus_exactness(const Workspace&) {
  const json corpus = json::parse(qdt::testing::read_file(qdt::testing::data_path("policy_corpus.json")));
  const auto catalog = qdt::SchemaConfig::load(qdt::testing::source_dir() / "config" / "diabetes_schema.json").catalog();
  const qdt::PolicyEngine engine(catalog, qdt::PolicyConfig{}, qdt::ApprovalAuthority::generate());
  std::size_t approve = 0, reject = 0;
  std::set<std::string> codes_seen;
  std::ostringstream failures;
  const auto start = Clock::now();
  for (const auto& e : corpus.at("entries")) {
    const auto decision = engine.decide(e.at("sql").get<std::string>());
    std::set<std::string> got;
    for (const auto& v : decision.violations) got.insert(std::string(qdt::to_string(v.code)));
    const auto want_vec = e.at("codes").get<std::vector<std::string>>();
    const std::set<std::string> want(want_vec.begin(), want_vec.end());
    const bool want_approve = e.at("expect") == "approve";
    (want_approve ? approve : reject)++;
    codes_seen.insert(want.begin(), want.end());
    if (decision.is_approved() != want_approve || got != want) failures << e.at("id").get<std::string>() << ' ';
  }
  const double elapsed = seconds_since(start);
  if (!failures.str().empty()) return "disagreement on: " + failures.str();
  if (approve < 15 || reject < 25) return "corpus too small";
  if (codes_seen.size() != qdt::all_violation_codes().size()) return "corpus does not cover every violation code";
  if (elapsed >= 1.0) return "took " + std::to_string(elapsed) + " s";
  std::ostringstream ok;
  ok << approve + reject << " queries (" << approve << " approve, " << reject << " reject, " << codes_seen.size()
     << " codes) in " << elapsed << " s";
  return "ok: " + ok.str();
}

// 2 ---------------------------------------------------------------------------
std::string threshold_soundness(const Workspace&) {
  TempDir dir;
  const auto fixture = qdt::testing::write_group_fixture(dir.path());
  auto store = std::make_shared<qdt::DatasetStore>(qdt::DatasetStore::create(dir / "groups.db"));
  store->ingest_csv(fixture.csv, qdt::SchemaConfig::load(fixture.schema));
  qdt::PolicyConfig policy;
  policy.k_min = 2;
  qdt::QueryGateway gateway(store, policy, std::make_shared<qdt::AuditLog>(dir / "audit.ndjson"));

  std::map<std::string, std::size_t> direct_sizes;  // independent scan of the fixture rows
  for (const auto& r : fixture.rows) ++direct_sizes[r.grp];

  const std::vector<std::string> queries = {
      "SELECT grp, COUNT(*) FROM cohort GROUP BY grp",
      "SELECT grp, AVG(score) AS s FROM cohort GROUP BY grp ORDER BY s",
      "SELECT grp, SUM(outcome), COUNT(*) AS n FROM cohort GROUP BY 1",
      "SELECT grp AS g, STDDEV(score) FROM cohort WHERE score >= 0 GROUP BY g",
      "SELECT grp, COUNT(DISTINCT rec_id) FROM cohort GROUP BY grp HAVING COUNT(*) > 0",
  };
  for (const auto& sql : queries) {
    const auto response = gateway.handle_query({"acceptance", sql});
    if (response.status != qdt::QueryResponse::Status::kApproved) return "rejected: " + sql;
    if (response.execution_error) return "execution failed: " + response.execution_error->message;
    std::set<std::string> seen;
    for (const auto& row : response.rows) {
      const auto key = std::get<std::string>(row.at(0));
      if (direct_sizes.at(key) < 2) return "group " + key + " of size " + std::to_string(direct_sizes.at(key)) +
                                            " leaked by: " + sql;
      seen.insert(key);
    }
    if (seen != std::set<std::string>{"g3", "g4", "g5"}) return "unexpected groups for: " + sql;
    if (response.suppressed_groups != 2) {
      return "suppressed_groups = " + std::to_string(response.suppressed_groups) + " for: " + sql;
    }
  }
  return "ok: " + std::to_string(queries.size()) + " grouped queries, groups {g3,g4,g5} only, suppressed_groups = 2";
}

// 3 ---------------------------------------------------------------------------
std::string rewrite_preservation(const Workspace& ws) {
  const json corpus = json::parse(qdt::testing::read_file(qdt::testing::data_path("policy_corpus.json")));
  const auto k = corpus.at("k_min").get<std::int64_t>();
  const qdt::testing::RawDatabase raw(ws.store);
  const auto store = qdt::DatasetStore::open(ws.store);
  qdt::PolicyConfig policy;
  policy.k_min = static_cast<int>(k);
  const qdt::PolicyEngine engine(store.catalog(), policy, qdt::ApprovalAuthority::generate());
  std::size_t checked = 0, filtered_rows = 0;
  for (const auto& e : corpus.at("entries")) {
    if (e.at("expect") != "approve") continue;
    const auto decision = engine.decide(e.at("sql").get<std::string>());
    if (!decision.is_approved()) return "not approved: " + e.at("id").get<std::string>();
    // Original query plus a trailing group-size column, filtered by hand.
    std::vector<qdt::Row> expected;
    for (auto row : raw.query(e.at("oracle_sql").get<std::string>())) {
      const auto size = std::get<std::int64_t>(row.back());
      row.pop_back();
      if (size >= k) {
        expected.push_back(std::move(row));
      } else {
        ++filtered_rows;
      }
    }
    if (e.contains("limit") && expected.size() > e.at("limit").get<std::size_t>()) {
      expected.resize(e.at("limit").get<std::size_t>());
    }
    auto actual = raw.query(decision.rewritten_sql());
    if (!e.value("ordered", false)) {
      std::sort(expected.begin(), expected.end());
      std::sort(actual.begin(), actual.end());
    }
    if (expected != actual) {
      std::ostringstream msg;
      msg << e.at("id").get<std::string>() << ": " << expected.size() << " expected rows vs " << actual.size()
          << " rewritten rows";
      for (std::size_t i = 0; i < std::min(expected.size(), actual.size()); ++i) {
        if (expected[i] != actual[i]) {
          msg << "; first difference " << row_text(expected[i]) << " vs " << row_text(actual[i]);
          break;
        }
      }
      return msg.str();
    }
    ++checked;
  }
  return "ok: " + std::to_string(checked) + " approved queries identical; " + std::to_string(filtered_rows) +
         " sub-threshold rows removed by the oracle";
}

// 4 ---------------------------------------------------------------------------
std::string firewall_property(const Workspace& ws) {
  TempDir dir;
  const auto out = dir / "run";
  std::string log;
  if (cli(evaluate_args(ws, out, 4), &log) != 0) return "evaluate failed: " + log;
  std::size_t requests = 0;
  {
    std::istringstream csv(qdt::testing::read_file(out / "records.csv"));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      requests += std::stoul(fields.at(4));
    }
  }

  // Direct HTTP traffic against the same audit log, including malformed input.
  {
    auto store = std::make_shared<qdt::DatasetStore>(qdt::DatasetStore::open(out / "train.db"));
    auto gateway = std::make_shared<qdt::QueryGateway>(store, qdt::PolicyConfig{},
                                                       std::make_shared<qdt::AuditLog>(out / "audit.ndjson"));
    qdt::GatewayServer server(gateway);
    const int port = server.start("127.0.0.1", 0);
    httplib::Client client("127.0.0.1", port);
    const std::vector<std::string> bodies = {
        json{{"sql", "SELECT age, COUNT(*) FROM patients GROUP BY age"}}.dump(),
        json{{"sql", "SELECT encounter_id, readmitted_30d FROM patients"}}.dump(),
        json{{"sql", "SELECT COUNT(*) FROM patients; DROP TABLE patients"}}.dump(),
        json{{"sql", "SELECT * FROM patients p JOIN patients q ON p.encounter_id = q.encounter_id"}}.dump(),
        "{not json",
        json{{"query", "SELECT 1"}}.dump(),
    };
    for (const auto& body : bodies) {
      if (!client.Post("/v1/query", body, "application/json")) return "gateway unreachable";
      ++requests;
    }
    server.stop();
  }

  const auto entries = qdt::AuditLog::load(out / "audit.ndjson");
  if (entries.size() != requests) {
    return std::to_string(entries.size()) + " audit entries for " + std::to_string(requests) + " requests";
  }
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].seq != i + 1) return "sequence gap at entry " + std::to_string(i);
    if (entries[i].verdict == "rejected") {
      ++rejected;
      if (entries[i].row_count != 0) return "rejected entry " + std::to_string(entries[i].seq) + " has result rows";
    }
  }
  if (rejected == 0) return "suite produced no rejected requests";
  return "ok: " + std::to_string(entries.size()) + " requests, " + std::to_string(entries.size()) +
         " gapless audit entries, " + std::to_string(rejected) + " rejected with zero rows";
}

// 5 ---------------------------------------------------------------------------
std::string deterministic_replay(const Workspace& ws) {
  TempDir dir;
  json metrics[2];
  std::string csv[2];
  double slowest = 0;
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / ("run" + std::to_string(run));
    const auto start = Clock::now();
    std::string log;
    if (cli(evaluate_args(ws, out, run == 0 ? 1 : 4), &log) != 0) return "evaluate failed: " + log;
    slowest = std::max(slowest, seconds_since(start));
    csv[run] = qdt::testing::read_file(out / "records.csv");
    const json summary = json::parse(qdt::testing::read_file(out / "summary.json"));
    metrics[run] = {summary.at("metrics"), summary.at("confusion")};
    if (summary.at("records_evaluated") != 50) return "expected 50 records";
  }
  if (csv[0] != csv[1]) return "records.csv differs between runs";
  if (metrics[0] != metrics[1]) return "metrics differ between runs";
  if (slowest >= 30.0) return "a run took " + std::to_string(slowest) + " s";
  std::ostringstream ok;
  ok << "50 records twice (parallelism 1 and 4), byte-identical CSV, metrics " << metrics[0][0].dump()
     << ", slowest run " << slowest << " s";
  return "ok: " + ok.str();
}

// 6 ---------------------------------------------------------------------------
std::string metrics_oracle(const Workspace&) {
  std::mt19937_64 rng(20260601);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 500;
    std::vector<qdt::Outcome> outcomes(n);
    // Vary class balance so degenerate (0/0) cases occur.
    const unsigned p_pred = rng() % 101, p_true = rng() % 101;
    for (auto& o : outcomes) {
      o.predicted = (rng() % 100) < p_pred ? 1 : 0;
      o.truth = (rng() % 100) < p_true ? 1 : 0;
    }
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (const auto& o : outcomes) {
      if (o.predicted && o.truth) ++tp;
      else if (o.predicted && !o.truth) ++fp;
      else if (!o.predicted && o.truth) ++fn;
      else ++tn;
    }
    const double precision = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
    const double recall = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
    const double f1 = precision + recall == 0 ? 0.0 : 2 * precision * recall / (precision + recall);
    const auto cm = qdt::tally(outcomes);
    const auto m = qdt::compute_metrics(outcomes);
    if (cm.tp != tp || cm.fp != fp || cm.tn != tn || cm.fn != fn) return "confusion mismatch at trial " + std::to_string(trial);
    if (m.precision != precision || m.recall != recall || m.f1 != f1) {
      return "metrics mismatch at trial " + std::to_string(trial);
    }
  }
  return "ok: 1000 randomized outcome vectors (sizes 1-500) match the brute-force tally";
}

// 7 ---------------------------------------------------------------------------
std::string ablation_mechanics(const Workspace&) {
  std::mt19937_64 rng(77);
  const int tenths[] = {0, 3, 7};
  for (int i = 0; i < 200; ++i) {
    qdt::TestRecord record;
    record.record_id = "r" + std::to_string(i);
    record.true_label = i % 2;
    const std::size_t p = rng() % 50;
    for (std::size_t f = 0; f < p; ++f) record.present_features["f" + std::to_string(f)] = static_cast<std::int64_t>(f);
    for (int t : tenths) {
      const qdt::AblationConfig cfg{t / 10.0, 1234};
      const auto masked = qdt::mask_features(record, cfg);
      const std::size_t removed = p - masked.present_features.size();
      const std::size_t expected = static_cast<std::size_t>(t) * p / 10;  // integer floor
      if (removed != expected) {
        return "record " + record.record_id + ": removed " + std::to_string(removed) + " of " + std::to_string(p) +
               ", expected " + std::to_string(expected);
      }
      for (const auto& [key, value] : masked.present_features) {
        if (record.present_features.at(key) != value) return "masking changed a kept value";
      }
      if (masked.true_label != record.true_label) return "masking touched the label";
      if (qdt::mask_features(record, cfg).present_features != masked.present_features) return "not reproducible";
    }
  }
  return "ok: 200 records x fractions {0, 0.3, 0.7}: exact floor counts, reproducible per seed";
}

// 8 (report only) ------------------------------------------------------------
void live_comparison(const Workspace& ws) {
  const char* backend = std::getenv("QDT_LIVE_BACKEND");
  if (!backend || !*backend) {
    std::cout << "[REPORT] 8 Live comparison: skipped (set QDT_LIVE_BACKEND to a live backend config to run it)\n";
    return;
  }
  TempDir dir;
  std::cout << "[REPORT] 8 Live comparison over 200 records (not gating)\n";
  for (const char* fraction : {"0", "0.3", "0.7"}) {
    const auto out = dir / (std::string("live_") + fraction);
    std::string log;
    const int code = cli({"evaluate", "--store", ws.store.string(), "--backend", backend, "--test-size", "200",
                          "--parallelism", "4", "--mask-fraction", fraction, "--out-dir", out.string()},
                         &log);
    std::cout << "  mask_fraction " << fraction << " (exit " << code << ")\n" << log;
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string(const Workspace&)>>> criteria = {
      {"1 Policy corpus exactness", policy_corpus_exactness},
      {"2 Threshold soundness oracle", threshold_soundness},
      {"3 Rewrite semantic preservation", rewrite_preservation},
      {"4 Firewall property", firewall_property},
      {"5 Deterministic end-to-end replay", deterministic_replay},
      {"6 Metrics oracle", metrics_oracle},
      {"7 Ablation mechanics", ablation_mechanics},
  };
  std::unique_ptr<Workspace> ws;
  try {
    ws = std::make_unique<Workspace>();
  } catch (const std::exception& e) {
    std::cout << "[FAIL] setup: " << e.what() << '\n';
    return 1;
  }
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    std::string detail;
    try {
      detail = check(*ws);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const bool pass = detail.rfind("ok: ", 0) == 0;
    if (!pass) ++failed;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << " -- " << (pass ? detail.substr(4) : detail) << std::endl;
  }
  live_comparison(*ws);
  return failed == 0 ? 0 : 1;
}
