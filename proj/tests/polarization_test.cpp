// Copyright 2026 The Apunim Authors
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

#include <random>

#include "apunim/polarization.hpp"
#include "test_util.hpp"

namespace apunim {
namespace {

using testing::naive_ndfu;

double score(std::vector<std::uint32_t> counts) { return ndfu_value(counts); }

TEST(BuildHistogramTest, CountsEveryLabel) {
  auto scale = LabelScale::numeric(5);
  std::vector<AnnotationRecord> single = {{0, 0, LabelSet::single(1)},
                                          {0, 1, LabelSet::single(1)},
                                          {0, 2, LabelSet::single(3)}};
  auto h = build_histogram(single, scale);
  EXPECT_EQ(std::vector<std::uint32_t>(h.counts().begin(), h.counts().end()),
            (std::vector<std::uint32_t>{0, 2, 0, 1, 0}));
  LabelSet both = LabelSet::single(0);
  both.add(4);
  std::vector<AnnotationRecord> multi = {{0, 0, both}, {0, 1, LabelSet::single(4)}};
  auto m = build_histogram(multi, scale);
  EXPECT_EQ(std::vector<std::uint32_t>(m.counts().begin(), m.counts().end()),
            (std::vector<std::uint32_t>{1, 0, 0, 0, 2}));
  EXPECT_EQ(m.total(), 3u);
  EXPECT_THROW(build_histogram({}, scale), ValidationError);
}

TEST(NdfuTest, CoreExamples) {
  EXPECT_EQ(score({3, 0, 0, 0, 3}), 1.0);
  EXPECT_EQ(score({0, 5, 0}), 0.0);
  EXPECT_NEAR(score({2, 0, 0, 0, 3}), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(score({0, 0, 0}), ValidationError);
}

TEST(NdfuTest, MatchesOracleValues) {
  for (const auto& c : testing::oracle()["ndfu"]) {
    auto counts = c["counts"].get<std::vector<std::uint32_t>>();
    EXPECT_NEAR(score(counts), c["value"].get<double>(), 1e-12) << c["counts"].dump();
  }
}

TEST(NdfuProperty, OptimizedEqualsPairwiseOracle) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 5000; ++trial) {
    const std::size_t k = 2 + gen() % 9;
    std::vector<std::uint32_t> counts(k);
    for (auto& c : counts) c = gen() % 51;
    if (std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; })) counts[0] = 1;
    ASSERT_NEAR(score(counts), naive_ndfu(counts), 1e-12);
  }
}

TEST(NdfuProperty, UnimodalShapesScoreZero) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 2 + gen() % 12;
    const std::size_t peak = gen() % k;
    std::vector<std::uint32_t> counts(k);
    counts[peak] = 1 + gen() % 60;
    for (std::size_t j = peak; j-- > 0;) counts[j] = gen() % (counts[j + 1] + 1);
    for (std::size_t j = peak + 1; j < k; ++j) counts[j] = gen() % (counts[j - 1] + 1);
    ASSERT_EQ(score(counts), 0.0);
  }
}

TEST(NdfuProperty, BoundedScaleAndOrderInvariant) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 2 + gen() % 9;
    std::vector<std::uint32_t> counts(k);
    for (auto& c : counts) c = gen() % 20;
    counts[gen() % k] += 1;
    const double v = score(counts);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    auto scaled = counts;
    const std::uint32_t factor = 2 + gen() % 5;
    for (auto& c : scaled) c *= factor;
    ASSERT_DOUBLE_EQ(score(scaled), v);
  }
  // Same multiset in a different annotation order.
  auto scale = LabelScale::numeric(4);
  std::vector<AnnotationRecord> a = {{0, 0, LabelSet::single(0)}, {0, 1, LabelSet::single(3)},
                                     {0, 2, LabelSet::single(3)}, {0, 3, LabelSet::single(1)}};
  auto b = a;
  std::reverse(b.begin(), b.end());
  EXPECT_EQ(ndfu(build_histogram(a, scale)).value, ndfu(build_histogram(b, scale)).value);
}

Dataset filter_fixture() {
  using testing::Rating;
  // c1: [3,2,0,0,0] -> 0 (no rise), c2: [2,0,0,0,3] -> 0.667, c3: [3,0,0,0,3] -> 1
  // c4: zero nDFU, c5: polarized but single group.
  return testing::make_dataset(
      {{"c1", {{"a", "X", 0}, {"b", "Y", 0}, {"c", "X", 0}, {"d", "Y", 1}, {"e", "X", 1}}},
       {"c2", {{"a", "X", 0}, {"b", "Y", 0}, {"c", "X", 4}, {"d", "Y", 4}, {"e", "X", 4}}},
       {"c3", {{"a", "X", 0}, {"b", "Y", 0}, {"c", "X", 0}, {"d", "Y", 4}, {"e", "X", 4},
               {"f", "Y", 4}}},
       {"c4", {{"a", "X", 2}, {"b", "Y", 2}}},
       {"c5", {{"a", "X", 0}, {"c", "X", 4}}}},
      {"X", "Y"});
}

TEST(ItemNdfuTest, Examples) {
  auto ds = filter_fixture();
  EXPECT_EQ(item_ndfu(ds, "c4").value, 0.0);
  EXPECT_EQ(item_ndfu(ds, "c3").value, 1.0);
  EXPECT_NEAR(item_ndfu(ds, "c2").value, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(item_ndfu(ds, "c2").n_annotations, 5u);
  EXPECT_THROW(item_ndfu(ds, "zz"), ValidationError);
}

std::vector<std::string> ids(const Dataset& ds, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(ds.item_id(i));
  return out;
}

TEST(FilterItemsTest, ThresholdAndGroupClause) {
  auto ds = filter_fixture();
  EXPECT_EQ(ids(ds, filter_items(ds, "g", 0.2)), (std::vector<std::string>{"c2", "c3"}));
  // Strict inequality: zero-nDFU items never pass, not even at alpha = 0.
  EXPECT_EQ(ids(ds, filter_items(ds, "g", 0.0)), (std::vector<std::string>{"c2", "c3"}));
  EXPECT_EQ(ids(ds, filter_items(ds, "g", 0.7)), (std::vector<std::string>{"c3"}));
  EXPECT_TRUE(filter_items(ds, "g", 1.0).empty());
  EXPECT_THROW(filter_items(ds, "g", 1.5), ValidationError);
  EXPECT_THROW(filter_items(ds, "nope", 0.2), ValidationError);
}

TEST(FilterItemsProperty, MonotoneInAlpha) {
  auto ds = testing::load_fixture();
  for (std::size_t d = 0; d < ds.dimensions().size(); ++d) {
    std::vector<std::size_t> prev = filter_items(ds, d, 0.0);
    for (double alpha = 0.05; alpha <= 1.0; alpha += 0.05) {
      auto cur = filter_items(ds, d, alpha);
      EXPECT_TRUE(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
      prev = cur;
    }
  }
}

}  // namespace
}  // namespace apunim
