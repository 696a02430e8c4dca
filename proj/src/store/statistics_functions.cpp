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

#include <sqlite3.h>

#include <cmath>
#include <cstdint>

#include "qdt/store.hpp"

namespace qdt {
namespace {

// Welford running moments.
struct Moments {
  std::int64_t n;
  double mean;
  double m2;
};

enum Kind : std::intptr_t { kVarSample, kVarPopulation, kStdSample, kStdPopulation };

void step(sqlite3_context* ctx, int, sqlite3_value** argv) {
  if (sqlite3_value_type(argv[0]) == SQLITE_NULL) return;
  auto* m = static_cast<Moments*>(sqlite3_aggregate_context(ctx, sizeof(Moments)));
  if (!m) {
    sqlite3_result_error_nomem(ctx);
    return;
  }
  const double x = sqlite3_value_double(argv[0]);
  ++m->n;
  const double delta = x - m->mean;
  m->mean += delta / static_cast<double>(m->n);
  m->m2 += delta * (x - m->mean);
}

void finish(sqlite3_context* ctx) {
  const auto kind = static_cast<Kind>(reinterpret_cast<std::intptr_t>(sqlite3_user_data(ctx)));
  auto* m = static_cast<Moments*>(sqlite3_aggregate_context(ctx, 0));
  const bool sample = kind == kVarSample || kind == kStdSample;
  if (!m || m->n == 0 || (sample && m->n < 2)) {
    sqlite3_result_null(ctx);
    return;
  }
  const double variance = m->m2 / static_cast<double>(sample ? m->n - 1 : m->n);
  sqlite3_result_double(ctx, kind == kStdSample || kind == kStdPopulation ? std::sqrt(variance) : variance);
}

void add(sqlite3* db, const char* name, Kind kind) {
  sqlite3_create_function_v2(db, name, 1, SQLITE_UTF8 | SQLITE_DETERMINISTIC,
                             reinterpret_cast<void*>(static_cast<std::intptr_t>(kind)), nullptr, step, finish,
                             nullptr);
}

}  // namespace

void register_statistics_functions(sqlite3* db) {
  add(db, "variance", kVarSample);
  add(db, "var_samp", kVarSample);
  add(db, "var_pop", kVarPopulation);
  add(db, "stddev", kStdSample);
  add(db, "stddev_samp", kStdSample);
  add(db, "stddev_pop", kStdPopulation);
}

}  // namespace qdt
