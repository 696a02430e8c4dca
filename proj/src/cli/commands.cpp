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

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "qdt/agent.hpp"
#include "qdt/cli.hpp"
#include "qdt/error.hpp"
#include "qdt/eval.hpp"
#include "qdt/gateway.hpp"
#include "qdt/llm.hpp"
#include "qdt/policy.hpp"
#include "qdt/sql/lexer.hpp"
#include "qdt/store.hpp"

namespace qdt {

using nlohmann::json;

namespace {

volatile std::sig_atomic_t g_stop_requested = 0;

extern "C" void on_stop_signal(int) { g_stop_requested = 1; }

PolicyConfig load_policy(const Settings& s) {
  return s.has("policy") ? PolicyConfig::load(s.get("policy")) : PolicyConfig{};
}

std::unique_ptr<ChatBackend> load_backend(const Settings& s) {
  return make_backend(BackendConfig::load(s.get("backend")));
}

std::size_t get_count(const Settings& s, const std::string& key) {
  const long long v = s.get_int(key);
  if (v < 0) throw Error(ErrorCode::kInvalidArgument, "setting '" + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

/// Catalog from the schema config when given, else from an ingested store.
SchemaCatalog local_catalog(const Settings& s) {
  if (s.has("schema")) return SchemaConfig::load(s.get("schema")).catalog();
  if (s.has("store") && std::filesystem::exists(s.get("store"))) return DatasetStore::open(s.get("store")).catalog();
  throw Error(ErrorCode::kInvalidArgument, "a catalog is required: pass --schema or --store");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string one_line(std::string_view text, std::size_t limit) {
  std::string flat;
  for (char c : text) flat += (c == '\n' || c == '\r') ? ' ' : c;
  if (flat.size() > limit) flat = flat.substr(0, limit) + "...";
  return flat;
}

// ---- ingest ---------------------------------------------------------------

int cmd_ingest(const Settings& s, bool force, std::ostream& out) {
  const auto config = SchemaConfig::load(s.get("schema"));
  const std::filesystem::path store_path = s.get("store");
  IngestReport report;
  try {
    auto store = DatasetStore::create(store_path, force);
    report = store.ingest_csv(s.get("csv"), config);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAlreadyExists) std::filesystem::remove(store_path);
    throw;
  }
  out << report.to_json().dump(2) << '\n' << "store written to " << store_path.string() << '\n';
  return kExitOk;
}

// ---- serve ----------------------------------------------------------------

int cmd_serve(const Settings& s, std::ostream& out, std::ostream& err) {
  const std::filesystem::path store_path = s.get("store");
  if (!std::filesystem::exists(store_path)) {
    throw Error(ErrorCode::kNotFound, "store file not found: " + store_path.string());
  }
  auto store = std::make_shared<DatasetStore>(DatasetStore::open(store_path));
  if (!store->ready()) err << "warning: store " << store_path.string() << " holds no data; serving in not-ready state\n";
  const long long port = s.get_int("port");
  if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "port must be in [0, 65535]");
  auto audit = std::make_shared<AuditLog>(s.get("audit_log"));
  auto gateway = std::make_shared<QueryGateway>(store, load_policy(s), audit,
                                                std::chrono::milliseconds(s.get_int("query_timeout_ms")));
  GatewayServer server(gateway);
  g_stop_requested = 0;
  auto previous_int = std::signal(SIGINT, on_stop_signal);
  auto previous_term = std::signal(SIGTERM, on_stop_signal);
  auto restore = [&] {
    std::signal(SIGINT, previous_int);
    std::signal(SIGTERM, previous_term);
  };
  int bound = 0;
  try {
    bound = server.start(s.get("bind"), static_cast<int>(port));
  } catch (...) {
    restore();
    throw;
  }
  out << "gateway listening on http://" << s.get("bind") << ':' << bound << (gateway->ready() ? "" : " (not ready)")
      << std::endl;
  while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  restore();
  server.stop();
  out << "gateway stopped; audit log at " << s.get("audit_log") << std::endl;
  return kExitOk;
}

// ---- lint -----------------------------------------------------------------

int cmd_lint(const Settings& s, const std::string& sql_file, std::ostream& out) {
  const std::string text = read_text(sql_file);
  PolicyEngine engine(local_catalog(s), load_policy(s), ApprovalAuthority::generate());
  const auto statements = sql::split_statements(text);
  std::size_t approved = 0;
  for (std::size_t i = 0; i < statements.size(); ++i) {
    const auto decision = engine.decide(statements[i]);
    out << '[' << i + 1 << "] ";
    if (decision.is_approved()) {
      ++approved;
      out << "APPROVED\n    " << decision.rewritten_sql() << '\n';
      continue;
    }
    out << "REJECTED";
    for (const auto& v : decision.violations) out << ' ' << to_string(v.code);
    out << "\n    " << one_line(statements[i], 200) << '\n';
    for (const auto& v : decision.violations) {
      out << "    - " << to_string(v.code) << " (line " << v.location.line << ", column " << v.location.column
          << "): " << v.message << '\n';
    }
  }
  out << statements.size() << (statements.size() == 1 ? " statement, " : " statements, ") << approved
      << " approved, " << statements.size() - approved << " rejected\n";
  return approved == statements.size() ? kExitOk : kExitUser;
}

// ---- predict --------------------------------------------------------------

Value typed_value(const ColumnMeta& column, const std::string& raw) {
  try {
    std::size_t used = 0;
    if (column.value_type == ValueType::kInteger) {
      const long long v = std::stoll(raw, &used);
      if (used == raw.size()) return static_cast<std::int64_t>(v);
    } else if (column.value_type == ValueType::kReal) {
      const double v = std::stod(raw, &used);
      if (used == raw.size()) return v;
    } else {
      return raw;
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument,
              "feature '" + column.name + "' expects " + std::string(to_string(column.value_type)) + ", got '" + raw + "'");
}

TestRecord build_record(const TableMeta& table, const std::string& record_file,
                        const std::vector<std::string>& assignments, const std::string& record_id) {
  TestRecord record;
  record.record_id = record_id;
  std::map<std::string, std::string> raw;
  if (!record_file.empty()) {
    json j;
    try {
      j = json::parse(read_text(record_file));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, record_file + ": " + e.what());
    }
    record = test_record_from_json(j);
    if (record.record_id.empty()) record.record_id = record_id;
  }
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kInvalidArgument, "feature '" + a + "' must look like key=value");
    }
    raw[a.substr(0, eq)] = a.substr(eq + 1);
  }
  const auto features = table.names_with_role(ColumnRole::kFeature);
  auto check_key = [&](const std::string& key) -> const ColumnMeta& {
    const ColumnMeta* column = table.find(key);
    if (!column || column->role != ColumnRole::kFeature) {
      std::string valid;
      for (const auto& f : features) valid += (valid.empty() ? "" : ", ") + f;
      throw Error(ErrorCode::kInvalidArgument, "unknown feature '" + key + "'; valid features: " + valid);
    }
    return *column;
  };
  std::map<std::string, Value> present;
  for (const auto& [key, value] : record.present_features) present[check_key(key).name] = value;
  for (const auto& [key, value] : raw) {
    const ColumnMeta& column = check_key(key);
    present[column.name] = typed_value(column, value);
  }
  record.present_features = std::move(present);
  return record;
}

int cmd_predict(const Settings& s, const std::string& record_file, const std::vector<std::string>& features,
                const std::string& record_id, std::ostream& out) {
  const Mode mode = mode_from_string(s.get("mode"));
  const auto backend = load_backend(s);
  const std::size_t budget = get_count(s, "budget");
  Prediction prediction;
  if (mode == Mode::kQdt) {
    HttpGatewayClient client(s.get("gateway_url"));
    const auto catalog = catalog_from_json(client.schema().at("catalog"));
    const auto task = readmission_task(catalog.primary());
    prediction = run_episode(build_record(catalog.primary(), record_file, features, record_id), task, client,
                             *backend, budget);
  } else {
    const auto catalog = local_catalog(s);
    const auto task = readmission_task(catalog.primary());
    prediction = run_llm_only(build_record(catalog.primary(), record_file, features, record_id), task, *backend);
  }
  const std::string transcript = s.get_or("transcript", "qdt_transcript_" + prediction.record_id + ".json");
  prediction.write_transcript(transcript);
  out << "record: " << prediction.record_id << '\n'
      << "mode: " << to_string(prediction.mode) << '\n'
      << "label: " << prediction.label << '\n'
      << "fallback_used: " << (prediction.fallback_used ? "true" : "false") << '\n'
      << "queries_issued: " << prediction.queries_issued << " (approved " << prediction.queries_approved << ")\n"
      << "rationale: " << one_line(prediction.rationale, 300) << '\n'
      << "transcript: " << transcript << '\n';
  return kExitOk;
}

// ---- evaluate -------------------------------------------------------------

int cmd_evaluate(const Settings& s, std::ostream& out) {
  const std::filesystem::path source = s.get("store");
  if (!std::filesystem::exists(source)) throw Error(ErrorCode::kNotFound, "store " + source.string() + " not found");
  const std::filesystem::path out_dir = s.get("out_dir");
  std::filesystem::create_directories(out_dir);

  BatchConfig config;
  config.mode = mode_from_string(s.get("mode"));
  config.parallelism = get_count(s, "parallelism");
  config.budget = get_count(s, "budget");
  config.ablation = {s.get_double("mask_fraction"), static_cast<std::uint64_t>(s.get_int("mask_seed"))};
  config.max_error_fraction = s.get_double("max_error_fraction");
  config.transcript_dir = out_dir / "transcripts";
  config.validate();
  const auto backend = load_backend(s);
  const auto split_seed = static_cast<std::uint64_t>(s.get_int("split_seed"));
  const std::size_t test_size = get_count(s, "test_size");

  const auto train = out_dir / "train.db";
  std::filesystem::copy_file(source, train, std::filesystem::copy_options::overwrite_existing);
  auto store = std::make_shared<DatasetStore>(DatasetStore::open(train));
  const auto records = store->split_dataset(split_seed, test_size);
  {
    std::ofstream jsonl(out_dir / "test_records.jsonl", std::ios::binary | std::ios::trunc);
    for (const auto& r : records) jsonl << test_record_to_json(r).dump() << '\n';
  }
  const auto task = readmission_task(store->catalog().primary());

  RunReport report;
  if (config.mode == Mode::kQdt) {
    auto audit = std::make_shared<AuditLog>(out_dir / "audit.ndjson");
    auto gateway = std::make_shared<QueryGateway>(store, load_policy(s), audit,
                                                  std::chrono::milliseconds(s.get_int("query_timeout_ms")));
    GatewayServer server(gateway);
    const int port = server.start("127.0.0.1", 0);
    HttpGatewayClient client("http://127.0.0.1:" + std::to_string(port));
    report = run_batch(records, task, config, *backend, &client);
    server.stop();
  } else {
    report = run_batch(records, task, config, *backend, nullptr);
  }
  report.config["split"] = {{"seed", split_seed}, {"test_size", test_size}};
  report.config["store"] = source.string();
  emit_report(report, out_dir);

  out << render_comparison(report) << "records: " << report.records.size() << '/' << report.records_requested
      << ", errors: " << report.errors << ", fallbacks: " << report.fallbacks << '\n'
      << "reports written to " << out_dir.string() << '\n';
  if (report.aborted) {
    out << "run aborted: " << report.abort_reason << '\n';
    return kExitUser;
  }
  return kExitOk;
}

// ---- wiring ---------------------------------------------------------------

struct SettingFlags {
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    std::string flag = "--" + key;
    for (auto& c : flag) {
      if (c == '_') c = '-';
    }
    const auto& fallback = Settings::known_keys().at(key);
    std::string text = help + " [env " + Settings::env_name(key) + (fallback.empty() ? "" : ", default " + fallback) + "]";
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, text);
  }
};

std::optional<std::string> getenv_lookup(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

int exit_code_for(const Error& e) { return e.code() == ErrorCode::kInternal ? kExitInternal : kExitUser; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qdt: tabular prediction from privacy-filtered aggregate SQL"};
  app.name("qdt");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  bool verbose = false;
  app.add_option("--config", config_path, "Root JSON config file [env QDT_CONFIG]");
  app.add_flag("-v,--verbose", verbose, "Print every effective setting with its source");

  SettingFlags flags;

  auto* ingest = app.add_subcommand("ingest", "Load a CSV into a new store file");
  bool force = false;
  flags.add(ingest, "csv", "Source CSV file");
  flags.add(ingest, "schema", "Schema config (JSON)");
  flags.add(ingest, "store", "Store file to create");
  ingest->add_flag("--force", force, "Overwrite an existing store");

  auto* serve = app.add_subcommand("serve", "Run the query gateway until SIGINT/SIGTERM");
  flags.add(serve, "store", "Ingested store file");
  flags.add(serve, "policy", "Policy config (JSON); built-in defaults when omitted");
  flags.add(serve, "bind", "Address to bind");
  flags.add(serve, "port", "TCP port (0 picks a free port)");
  flags.add(serve, "audit_log", "Append-only audit log (NDJSON)");
  flags.add(serve, "query_timeout_ms", "Per-query execution timeout");

  auto* lint = app.add_subcommand("lint", "Check SQL statements against the policy");
  std::string sql_file;
  lint->add_option("sql_file", sql_file, "File of ';'-separated SQL statements")->required();
  flags.add(lint, "policy", "Policy config (JSON); built-in defaults when omitted");
  flags.add(lint, "schema", "Schema config (JSON) supplying the catalog");
  flags.add(lint, "store", "Ingested store supplying the catalog when --schema is absent");

  auto* predict = app.add_subcommand("predict", "Predict one record");
  std::string record_file;
  std::vector<std::string> features;
  std::string record_id = "cli";
  predict->add_option("--record", record_file, "Record JSON file {record_id, features}");
  predict->add_option("--feature", features, "Feature as key=value (repeatable)");
  predict->add_option("--record-id", record_id, "Record id used in the transcript and audit log [default cli]");
  flags.add(predict, "mode", "qdt or llm_only");
  flags.add(predict, "backend", "Backend config (JSON)");
  flags.add(predict, "gateway_url", "Gateway base URL (qdt mode)");
  flags.add(predict, "budget", "Query budget per episode");
  flags.add(predict, "schema", "Schema config used to check feature keys (llm_only mode)");
  flags.add(predict, "store", "Store used to check feature keys when --schema is absent (llm_only mode)");
  flags.add(predict, "transcript", "Transcript output path [default qdt_transcript_<record>.json]");

  auto* evaluate = app.add_subcommand("evaluate", "Split the store and evaluate the held-out records");
  flags.add(evaluate, "store", "Ingested store file (copied, never modified)");
  flags.add(evaluate, "policy", "Policy config (JSON); built-in defaults when omitted");
  flags.add(evaluate, "backend", "Backend config (JSON)");
  flags.add(evaluate, "mode", "qdt or llm_only");
  flags.add(evaluate, "split_seed", "Seed of the train/test split");
  flags.add(evaluate, "test_size", "Number of held-out records");
  flags.add(evaluate, "mask_fraction", "Fraction of each record's present features to remove");
  flags.add(evaluate, "mask_seed", "Seed of the feature masking");
  flags.add(evaluate, "parallelism", "Concurrent episodes");
  flags.add(evaluate, "budget", "Query budget per episode");
  flags.add(evaluate, "max_error_fraction", "Abort once episode errors exceed this share of records");
  flags.add(evaluate, "query_timeout_ms", "Per-query execution timeout");
  flags.add(evaluate, "out_dir", "Output directory for reports and transcripts");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUser;
  }

  try {
    std::string config_source;
    if (config_path.empty()) {
      if (auto env = getenv_lookup("QDT_CONFIG")) {
        config_path = *env;
        config_source = " via QDT_CONFIG";
      }
    }
    const auto settings = Settings::resolve(flags.values, getenv_lookup, config_path, config_source);
    if (verbose) {
      err << "effective settings:\n";
      settings.print(err);
    }
    if (ingest->parsed()) return cmd_ingest(settings, force, out);
    if (serve->parsed()) return cmd_serve(settings, out, err);
    if (lint->parsed()) return cmd_lint(settings, sql_file, out);
    if (predict->parsed()) return cmd_predict(settings, record_file, features, record_id, out);
    if (evaluate->parsed()) return cmd_evaluate(settings, out);
    return kExitUser;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const json::exception& e) {
    err << "error (parse): " << e.what() << '\n';
    return kExitUser;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error (io): " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace qdt
