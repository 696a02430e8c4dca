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

#include "qdt/error.hpp"
#include "qdt/eval.hpp"

namespace qdt {

using nlohmann::json;

json ConfusionMatrix::to_json() const { return {{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}}; }

json Metrics::to_json() const { return {{"precision", precision}, {"recall", recall}, {"f1", f1}}; }

ConfusionMatrix tally(const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot compute metrics over zero outcomes");
  ConfusionMatrix cm;
  for (const auto& o : outcomes) {
    if ((o.predicted != 0 && o.predicted != 1) || (o.truth != 0 && o.truth != 1)) {
      throw Error(ErrorCode::kInvalidArgument, "outcome labels must be 0 or 1");
    }
    if (o.predicted == 1) {
      ++(o.truth == 1 ? cm.tp : cm.fp);
    } else {
      ++(o.truth == 1 ? cm.fn : cm.tn);
    }
  }
  return cm;
}

namespace {

double ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

}  // namespace

Metrics metrics_from(const ConfusionMatrix& cm) {
  Metrics m;
  m.precision = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
  m.recall = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
  m.f1 = ratio(2 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

Metrics compute_metrics(const std::vector<Outcome>& outcomes) { return metrics_from(tally(outcomes)); }

}  // namespace qdt
