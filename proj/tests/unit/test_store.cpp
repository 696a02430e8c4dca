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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <set>

#include "qdt/error.hpp"
#include "qdt/store.hpp"
#include "test_support.hpp"

namespace qdt {
namespace {

using testing::TempDir;
using testing::write_file;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no qdt::Error thrown";
  return ErrorCode::kInternal;
}

class GroupStore : public ::testing::Test {
 protected:
  void SetUp() override {
    fixture_ = testing::write_group_fixture(dir_.path());
    store_ = std::make_unique<DatasetStore>(DatasetStore::create(dir_ / "g.db"));
    report_ = store_->ingest_csv(fixture_.csv, SchemaConfig::load(fixture_.schema));
    authority_ = ApprovalAuthority::generate();
    store_->trust(authority_);
  }

  PolicyDecision decide(const std::string& sql) const {
    const PolicyEngine engine(store_->catalog(), PolicyConfig{}, authority_);
    return engine.decide(sql);
  }

  TempDir dir_;
  testing::GroupFixture fixture_;
  std::unique_ptr<DatasetStore> store_;
  IngestReport report_;
  std::shared_ptr<const ApprovalAuthority> authority_;
};

TEST_F(GroupStore, IngestReportCountsLabels) {
  EXPECT_EQ(report_.rows_ingested, 12u);
  EXPECT_EQ(report_.rejected_rows, 0u);
  std::size_t positive = 0;
  for (const auto& r : fixture_.rows) positive += r.outcome;
  EXPECT_EQ(report_.label_positive_count, positive);
  EXPECT_EQ(report_.label_negative_count, 12u - positive);
  EXPECT_TRUE(store_->ready());
  EXPECT_EQ(store_->row_count(), 12u);
}

TEST_F(GroupStore, ExecutesOnlyTrustedApprovals) {
  const auto d = decide("SELECT grp, COUNT(*) FROM cohort GROUP BY grp");
  ASSERT_TRUE(d.is_approved());
  const auto result = store_->execute_approved(*d.approved, {});
  EXPECT_EQ(result.rows.size(), 3u);

  const PolicyEngine foreign(store_->catalog(), PolicyConfig{}, ApprovalAuthority::generate());
  const auto other = foreign.decide("SELECT grp, COUNT(*) FROM cohort GROUP BY grp");
  EXPECT_EQ(code_of([&] { store_->execute_approved(*other.approved, {}); }), ErrorCode::kUnauthorized);
}

TEST_F(GroupStore, RowCapMarksTruncation) {
  const auto d = decide("SELECT grp, COUNT(*) FROM cohort GROUP BY grp");
  ASSERT_TRUE(d.is_approved());
  ExecutionLimits limits;
  limits.max_rows = 1;
  const auto result = store_->execute_approved(*d.approved, limits);
  EXPECT_EQ(result.rows.size(), 1u);
  EXPECT_TRUE(result.truncated);
}

TEST_F(GroupStore, EngineErrorsSurfaceAsExecution) {
  const auto d = decide("SELECT grp, AVG(no_such_column) FROM cohort GROUP BY grp");
  ASSERT_TRUE(d.is_approved());
  EXPECT_EQ(code_of([&] { store_->execute_approved(*d.approved, {}); }), ErrorCode::kExecution);
}

TEST_F(GroupStore, StatisticsAggregatesMatchClosedForm) {
  const auto d = decide("SELECT STDDEV(score), VARIANCE(score) FROM cohort WHERE grp = 'g5'");
  ASSERT_TRUE(d.is_approved());
  const auto result = store_->execute_approved(*d.approved, {});
  ASSERT_EQ(result.rows.size(), 1u);

  std::vector<double> xs;
  for (const auto& r : fixture_.rows) {
    if (r.grp == "g5") xs.push_back(r.score);
  }
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double variance = ss / static_cast<double>(xs.size() - 1);

  EXPECT_NEAR(std::get<double>(result.rows[0][0]), std::sqrt(variance), 1e-9);
  EXPECT_NEAR(std::get<double>(result.rows[0][1]), variance, 1e-9);
}

TEST_F(GroupStore, SplitRemovesRowsDeterministically) {
  TempDir other_dir;
  auto other = DatasetStore::create(other_dir / "g.db");
  other.ingest_csv(fixture_.csv, SchemaConfig::load(fixture_.schema));

  const auto a = store_->split_dataset(3, 4);
  const auto b = other.split_dataset(3, 4);
  ASSERT_EQ(a.size(), 4u);
  ASSERT_EQ(b.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(test_record_to_json(a[i]), test_record_to_json(b[i]));
    EXPECT_EQ(a[i].present_features.count("rec_id"), 0u);
    EXPECT_EQ(a[i].present_features.count("outcome"), 0u);
    EXPECT_TRUE(a[i].true_label.has_value());
  }
  EXPECT_EQ(store_->row_count(), 8u);

  std::set<std::string> ids;
  for (const auto& r : a) ids.insert(r.record_id);
  EXPECT_EQ(ids.size(), 4u);
}

TEST_F(GroupStore, SplitOfZeroIsANoOp) {
  EXPECT_TRUE(store_->split_dataset(1, 0).empty());
  EXPECT_EQ(store_->row_count(), 12u);
}

TEST_F(GroupStore, SplitLargerThanTableFails) {
  EXPECT_EQ(code_of([&] { store_->split_dataset(1, 13); }), ErrorCode::kInvalidArgument);
}

TEST_F(GroupStore, SecondIngestIsRefused) {
  EXPECT_EQ(code_of([&] { store_->ingest_csv(fixture_.csv, SchemaConfig::load(fixture_.schema)); }),
            ErrorCode::kAlreadyExists);
}

TEST_F(GroupStore, ReopenKeepsCatalog) {
  const auto path = store_->path();
  store_.reset();
  const auto reopened = DatasetStore::open(path);
  EXPECT_TRUE(reopened.ready());
  EXPECT_EQ(reopened.catalog().primary().name, "cohort");
  EXPECT_EQ(reopened.row_count(), 12u);
}

TEST(Store, OpenMissingFileIsNotFound) {
  TempDir dir;
  EXPECT_EQ(code_of([&] { DatasetStore::open(dir / "absent.db"); }), ErrorCode::kNotFound);
}

TEST(Store, CreateRefusesExistingFile) {
  TempDir dir;
  write_file(dir / "x.db", "");
  EXPECT_EQ(code_of([&] { DatasetStore::create(dir / "x.db"); }), ErrorCode::kAlreadyExists);
}

TEST(Store, CatalogBeforeIngestIsNotReady) {
  TempDir dir;
  const auto store = DatasetStore::create(dir / "x.db");
  EXPECT_FALSE(store.ready());
  EXPECT_EQ(code_of([&] { (void)store.catalog(); }), ErrorCode::kNotReady);
}

TEST(Store, HeaderMismatchIsReported) {
  TempDir dir;
  const auto fixture = testing::write_group_fixture(dir.path());
  write_file(dir / "bad.csv", "rec_id,group,score,outcome\n1,g1,2,0\n");
  auto store = DatasetStore::create(dir / "x.db");
  try {
    store.ingest_csv(dir / "bad.csv", SchemaConfig::load(fixture.schema));
    FAIL() << "expected a schema mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
    EXPECT_NE(std::string(e.what()).find("grp"), std::string::npos);
  }
  EXPECT_FALSE(store.ready());
}

TEST(Store, SentinelBecomesNull) {
  TempDir dir;
  const auto fixture = testing::write_group_fixture(dir.path());
  write_file(dir / "nulls.csv", "rec_id,grp,score,outcome\n1,?,3,0\n2,g1,?,1\n3,g1,4,0\n");
  auto store = DatasetStore::create(dir / "x.db");
  const auto report = store.ingest_csv(dir / "nulls.csv", SchemaConfig::load(fixture.schema));
  EXPECT_EQ(report.nulls_normalized, 2u);
  const testing::RawDatabase raw(dir / "x.db");
  const auto rows = raw.query("SELECT COUNT(*) FROM cohort WHERE grp IS NULL OR score IS NULL");
  EXPECT_EQ(std::get<std::int64_t>(rows.at(0).at(0)), 2);
}

TEST(Store, BadLabelRejectsRowWithinBudget) {
  TempDir dir;
  const auto fixture = testing::write_group_fixture(dir.path());
  write_file(dir / "labels.csv", "rec_id,grp,score,outcome\n1,g1,3,0\n2,g1,2,maybe\n");
  auto store = DatasetStore::create(dir / "x.db");
  EXPECT_THROW(store.ingest_csv(dir / "labels.csv", SchemaConfig::load(fixture.schema)), Error);
}

TEST(Store, BundledCohortCounts) {
  TempDir dir;
  auto store = DatasetStore::create(dir / "d.db");
  const auto report = store.ingest_csv(testing::source_dir() / "data" / "diabetes_synthetic.csv",
                                       SchemaConfig::load(testing::source_dir() / "config" / "diabetes_schema.json"));
  EXPECT_EQ(report.rows_ingested, 6000u);
  EXPECT_EQ(report.label_positive_count, 899u);
  EXPECT_EQ(report.label_negative_count, 5101u);
  EXPECT_EQ(report.label_positive_count + report.label_negative_count + report.rejected_rows, 6000u);
}

TEST(SchemaDoc, DescribesLabelAndPolicyDeterministically) {
  TempDir dir;
  const auto fixture = testing::write_group_fixture(dir.path());
  const auto catalog = SchemaConfig::load(fixture.schema).catalog();
  PolicyConfig policy;
  policy.k_min = 4;
  const auto doc = export_schema_doc(catalog, policy);
  EXPECT_EQ(doc, export_schema_doc(catalog, policy));
  EXPECT_NE(doc.find("cohort"), std::string::npos);
  EXPECT_NE(doc.find("outcome"), std::string::npos);
  EXPECT_NE(doc.find("label"), std::string::npos);
  EXPECT_NE(doc.find("k_min = 4"), std::string::npos);
  EXPECT_EQ(export_catalog_doc(catalog).find("k_min"), std::string::npos);
}

TEST(TestRecordJson, RoundTrip) {
  TestRecord r;
  r.record_id = "7";
  r.present_features = {{"a", std::int64_t{3}}, {"b", 1.5}, {"c", std::string("x")}};
  r.true_label = 1;
  const auto back = test_record_from_json(test_record_to_json(r));
  EXPECT_EQ(test_record_to_json(back), test_record_to_json(r));

  auto with_null = test_record_to_json(r);
  with_null["features"]["d"] = nullptr;
  EXPECT_EQ(test_record_from_json(with_null).present_features.count("d"), 0u);
}

}  // namespace
}  // namespace qdt
