/*
 * Copyright 2026 The CFIRE Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cfire/dataset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace cfire {
namespace {

class TempFile {
 public:
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("cfire_dataset_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".csv"))
                .string();
    std::ofstream(path_, std::ios::binary) << contents;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::string ErrorOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(DatasetTest, FromRowsShapeAndAccess) {
  const auto ds = Dataset::FromRows({{1, 2, 3}, {4, 5, 6}}, std::vector<ClassId>{0, 1});
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.dim(), 3u);
  EXPECT_EQ(ds.at(1, 2), 6.0);
  EXPECT_EQ(ds.row(0)[1], 2.0);
  EXPECT_EQ(ds.feature_names(), (std::vector<std::string>{"x0", "x1", "x2"}));
  EXPECT_EQ(ds.labels(), (std::vector<ClassId>{0, 1}));
}

TEST(DatasetTest, RejectsMalformedInput) {
  EXPECT_THROW(Dataset::FromRows({{1, 2}, {3}}), Error);
  EXPECT_THROW(Dataset::FromRows({{1, NAN}}), Error);
  EXPECT_THROW(Dataset::FromRows({{1, 2}}, std::vector<ClassId>{0, 1}), Error);
  EXPECT_THROW(Dataset::FromRows({{1, 2}}, std::nullopt, {"a", "a"}), Error);
  EXPECT_THROW(Dataset::FromRows({{1, 2}}).labels(), Error);
}

TEST(DatasetTest, MeanAndPopulationStd) {
  const auto ds = Dataset::FromRows({{1, 10}, {3, 10}});
  EXPECT_EQ(ds.Mean(), (std::vector<double>{2, 10}));
  EXPECT_EQ(ds.StdDev(), (std::vector<double>{1, 0}));
}

TEST(DatasetTest, FingerprintTracksContent) {
  const auto a = Dataset::FromRows({{1, 2}});
  const auto b = Dataset::FromRows({{1, 2}});
  const auto c = Dataset::FromRows({{1, 2.0000001}});
  EXPECT_EQ(a.Fingerprint(), b.Fingerprint());
  EXPECT_NE(a.Fingerprint(), c.Fingerprint());
}

TEST(LoadCsvTest, ParsesHeaderLabelsAndLineEndings) {
  TempFile f("\xEF\xBB\xBF" "a,label,b\r\n1.5,1,2\r\n\r\n-3,0,4e1\r\n");
  const auto ds = LoadCsv(f.path(), std::string("label"));
  EXPECT_EQ(ds.feature_names(), (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.at(0, 0), 1.5);
  EXPECT_EQ(ds.at(1, 1), 40.0);
  EXPECT_EQ(ds.labels(), (std::vector<ClassId>{1, 0}));
}

TEST(LoadCsvTest, WithoutLabelColumnEverythingIsAFeature) {
  TempFile f("a,b\n1,2\n");
  const auto ds = LoadCsv(f.path());
  EXPECT_EQ(ds.dim(), 2u);
  EXPECT_FALSE(ds.has_labels());
}

TEST(LoadCsvTest, ErrorsNameRowAndColumn) {
  TempFile f("a,b,y\n1,2,0\n1,oops,1\n");
  const auto msg = ErrorOf([&] { LoadCsv(f.path(), std::string("y")); });
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 'b'"), std::string::npos) << msg;
}

TEST(LoadCsvTest, RejectsBadFiles) {
  TempFile empty("");
  TempFile header_only("a,y\n");
  TempFile ragged("a,y\n1,0\n1\n");
  TempFile dup("a,a\n1,2\n");
  TempFile bad_label("a,y\n1,0.5\n");
  TempFile neg_label("a,y\n1,-1\n");
  TempFile inf("a,y\n1e999,0\n");
  for (const auto* f : {&empty, &header_only, &ragged, &dup, &bad_label, &neg_label, &inf}) {
    try {
      LoadCsv(f->path(), std::string("y"));
      ADD_FAILURE() << "accepted " << f->path();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kData);
    }
  }
  EXPECT_THROW(LoadCsv("/nonexistent/file.csv"), Error);
  TempFile ok("a,b\n1,2\n");
  EXPECT_THROW(LoadCsv(ok.path(), std::string("missing")), Error);
}

TEST(LoadCsvTest, WriteCsvRoundTripsExactly) {
  const auto ds = Dataset::FromRows({{0.1, 1.0 / 3.0}, {-2.5e-300, 7}}, std::vector<ClassId>{2, 0});
  std::ostringstream out;
  WriteCsv(ds, out, "cls");
  TempFile f(out.str());
  const auto back = LoadCsv(f.path(), std::string("cls"));
  EXPECT_EQ(back.values(), ds.values());
  EXPECT_EQ(back.labels(), ds.labels());
  EXPECT_EQ(back.Fingerprint(), ds.Fingerprint());
}

Dataset Numbered(std::size_t n) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back({static_cast<double>(i)});
  return Dataset::FromRows(rows);
}

TEST(SplitTest, SizesAreFlooredAndPartsDisjoint) {
  const auto ds = Numbered(1000);
  const auto s = Split(ds, {0.8, 0.1, 0.1, 7});
  EXPECT_EQ(s.train.size(), 800u);
  EXPECT_EQ(s.input.size(), 100u);
  EXPECT_EQ(s.test.size(), 100u);
  std::set<std::size_t> all;
  for (const auto* part : {&s.train_indices, &s.input_indices, &s.test_indices})
    all.insert(part->begin(), part->end());
  EXPECT_EQ(all.size(), 1000u);
  for (std::size_t k = 0; k < s.input_indices.size(); ++k)
    EXPECT_EQ(s.input.at(k, 0), static_cast<double>(s.input_indices[k]));
}

TEST(SplitTest, RoundingGivesRemainderToTrain) {
  const auto s = Split(Numbered(15), {0.7, 0.15, 0.15, 1});
  EXPECT_EQ(s.input.size(), 2u);
  EXPECT_EQ(s.test.size(), 2u);
  EXPECT_EQ(s.train.size(), 11u);
}

TEST(SplitTest, DeterministicPerSeed) {
  const auto ds = Numbered(200);
  const auto a = Split(ds, {0.6, 0.2, 0.2, 42});
  const auto b = Split(ds, {0.6, 0.2, 0.2, 42});
  const auto c = Split(ds, {0.6, 0.2, 0.2, 43});
  EXPECT_EQ(a.input_indices, b.input_indices);
  EXPECT_EQ(a.train_indices, b.train_indices);
  EXPECT_NE(a.input_indices, c.input_indices);
}

TEST(SplitTest, RejectsBadFractions) {
  const auto ds = Numbered(100);
  for (const SplitSpec& bad : {SplitSpec{0.5, 0.2, 0.2, 0}, SplitSpec{1.0, 0.0, 0.0, 0},
                               SplitSpec{0.9, 0.2, -0.1, 0}}) {
    try {
      Split(ds, bad);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    }
  }
  EXPECT_THROW(Split(Numbered(5), {0.8, 0.1, 0.1, 0}), Error);
}

TEST(ClassBlockTest, SelectsByPrediction) {
  const auto ds = Numbered(5);
  const std::vector<ClassId> pred = {1, 0, 1, 1, 0};
  EXPECT_EQ(MakeClassBlock(ds, pred, 1).indices, (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_TRUE(MakeClassBlock(ds, pred, 2).indices.empty());
  EXPECT_THROW(MakeClassBlock(ds, std::vector<ClassId>{0}, 0), Error);
}

}  // namespace
}  // namespace cfire
