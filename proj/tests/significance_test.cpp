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

#include "apunim/significance.hpp"
#include "test_util.hpp"

namespace apunim {
namespace {

NullSample null_of(std::vector<double> v) { return NullSample{std::move(v), true}; }

TEST(StudentTTest, MatchesReferenceTails) {
  for (const auto& c : testing::oracle()["student_t"]) {
    EXPECT_NEAR(student_t_two_sided(c["t"].get<double>(), c["df"].get<double>()),
                c["p"].get<double>(), 1e-12)
        << c.dump();
  }
}

TEST(TTest, OneSampleMatchesReference) {
  const auto& o = testing::oracle()["t_test"];
  auto r = t_test(o["observed"].get<double>(), null_of(o["null"].get<std::vector<double>>()),
                  SignificanceTest::kOneSample);
  EXPECT_NEAR(r.p_value, o["p_one_sample"].get<double>(), 1e-12);
  EXPECT_NEAR(r.t_statistic, o["t_one_sample"].get<double>(), 1e-12);
  EXPECT_EQ(r.degrees_of_freedom, 6u);
}

TEST(TTest, PredictiveStandardError) {
  // mean 0.2, sd 0.1, n 3: T = (0.5 - 0.2) / (0.1 * sqrt(4/3))
  auto r = t_test(0.5, null_of({0.1, 0.2, 0.3}), SignificanceTest::kPseudoGroup);
  EXPECT_NEAR(r.t_statistic, 0.3 / (0.1 * std::sqrt(4.0 / 3.0)), 1e-12);
  EXPECT_NEAR(r.p_value, student_t_two_sided(r.t_statistic, 2), 1e-15);
}

TEST(TTest, CentreGivesOne) {
  for (auto test : {SignificanceTest::kOneSample, SignificanceTest::kPseudoGroup}) {
    auto r = t_test(0.2, null_of({0.1, 0.2, 0.3}), test);
    EXPECT_NEAR(r.t_statistic, 0.0, 1e-15);
    EXPECT_NEAR(r.p_value, 1.0, 1e-12);
    EXPECT_FALSE(r.degenerate_variance);
  }
}

TEST(TTest, ZeroVariance) {
  auto off = t_test(0.5, null_of({0.0, 0.0, 0.0, 0.0}));
  EXPECT_EQ(off.p_value, 0.0);
  EXPECT_TRUE(off.degenerate_variance);
  auto on = t_test(0.0, null_of({0.0, 0.0, 0.0, 0.0}));
  EXPECT_EQ(on.p_value, 1.0);
  EXPECT_TRUE(on.degenerate_variance);
  EXPECT_THROW(t_test(0.0, null_of({0.3})), ValidationError);
}

TEST(TTestProperty, SymmetricAroundNullMean) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(10);
    for (auto& v : x) v = u(gen);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double obs = u(gen);
    for (auto test : {SignificanceTest::kOneSample, SignificanceTest::kPseudoGroup}) {
      EXPECT_NEAR(t_test(obs, null_of(x), test).p_value,
                  t_test(2 * mean - obs, null_of(x), test).p_value, 1e-9);
    }
  }
}

TEST(HolmTest, MatchesReference) {
  for (const char* key : {"holm", "holm6"}) {
    const auto& o = testing::oracle()[key];
    auto p = o["p"].get<std::vector<double>>();
    auto r = holm_correct(p, 0.95);
    auto expected = o["corrected"].get<std::vector<double>>();
    auto reject = o["reject"].get<std::vector<bool>>();
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_NEAR(r.corrected[i], expected[i], 1e-15);
      EXPECT_EQ(r.reject[i], reject[i]);
    }
    EXPECT_NEAR(r.level, 0.05, 1e-15);
  }
}

TEST(HolmTest, Edges) {
  const std::vector<double> one = {0.013};
  EXPECT_EQ(holm_correct(one, 0.95).corrected[0], 0.013);
  const std::vector<double> ones = {1.0, 1.0, 1.0};
  for (double c : holm_correct(ones, 0.95).corrected) EXPECT_EQ(c, 1.0);
  EXPECT_THROW(holm_correct(std::vector<double>{}, 0.95), ValidationError);
  EXPECT_THROW(holm_correct(std::vector<double>{1.2}, 0.95), ValidationError);
  EXPECT_THROW(holm_correct(std::vector<double>{0.2}, 1.0), ValidationError);
}

TEST(HolmProperty, EquivariantAndDominating) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(1 + gen() % 8);
    for (auto& v : p) v = u(gen);
    auto base = holm_correct(p, 0.95);
    std::vector<std::size_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<double> q(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[perm[i]];
    auto permuted = holm_correct(q, 0.95);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_EQ(permuted.corrected[i], base.corrected[perm[i]]);
      EXPECT_GE(base.corrected[i], p[i]);
      EXPECT_LE(base.corrected[i], 1.0);
    }
  }
}

}  // namespace
}  // namespace apunim
