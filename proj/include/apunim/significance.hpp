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

#ifndef APUNIM_SIGNIFICANCE_HPP_
#define APUNIM_SIGNIFICANCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "apunim/error.hpp"

namespace apunim {

// How the observed apunim of a group is compared with apunims of random
// partitions.
//
// kPseudoGroup: the null values are the apunims of the pseudo-group whose
//   size matches the group in each partition, and the statistic uses the
//   predictive standard error sd * sqrt(1 + 1/t). The observed group is then
//   exchangeable with its null values when group labels carry no signal.
// kOneSample: one-sample Student-t of the mean of whole-partition apunims
//   against the observed value, standard error sd / sqrt(t). Rejects far
//   more often than its nominal level on null data.
enum class SignificanceTest { kPseudoGroup, kOneSample };

inline std::string_view to_string(SignificanceTest test) {
  return test == SignificanceTest::kPseudoGroup ? "pseudo-group" : "one-sample";
}

struct NullSample {
  std::vector<double> rand_apunims;  // one per partition index
  bool reused_partitions = true;     // same partitions as the apriori estimate
};

struct TTestResult {
  double p_value = 1.0;
  double t_statistic = 0.0;
  std::uint32_t degrees_of_freedom = 0;
  bool degenerate_variance = false;
};

// Two-sided tail probability of Student's t with `df` degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

// Student-t comparison of `observed` with the null sample's mean,
// T = (mean - observed) / se with df = t - 1.
// A zero-variance null gives p = 1 when its mean equals `observed` exactly
// and p = 0 otherwise, flagged as degenerate.
inline TTestResult t_test(double observed, const NullSample& null,
                          SignificanceTest test = SignificanceTest::kOneSample) {
  const auto& x = null.rand_apunims;
  if (x.size() < 2) throw ValidationError("t-test needs at least 2 null values");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  TTestResult r;
  r.degrees_of_freedom = static_cast<std::uint32_t>(x.size() - 1);
  if (sd == 0.0) {
    r.degenerate_variance = true;
    if (mean == observed) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = observed > mean ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  const double se = test == SignificanceTest::kOneSample ? sd / std::sqrt(n)
                                                        : sd * std::sqrt(1.0 + 1.0 / n);
  r.t_statistic = (observed - mean) / se;
  r.p_value = student_t_two_sided(r.t_statistic, n - 1.0);
  return r;
}

struct HolmResult {
  std::vector<double> corrected;
  std::vector<bool> reject;
  double level = 0.05;  // rejection threshold, 1 - fwer
};

// Holm step-down adjustment. `fwer` uses the 0.95-style convention: a
// hypothesis is rejected when its adjusted p-value is below 1 - fwer.
inline HolmResult holm_correct(std::span<const double> p_values, double fwer) {
  if (p_values.empty()) throw ValidationError("holm correction of an empty list");
  if (!(fwer > 0.0 && fwer < 1.0)) throw ValidationError("fwer must lie in (0, 1)");
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p-value outside [0, 1]");
  }
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p_values[a] < p_values[b];
  });
  HolmResult r{std::vector<double>(m), std::vector<bool>(m), 1.0 - fwer};
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double scaled = static_cast<double>(m - k) * p_values[order[k]];
    running = std::max(running, std::min(1.0, scaled));
    r.corrected[order[k]] = running;
  }
  for (std::size_t i = 0; i < m; ++i) r.reject[i] = r.corrected[i] < r.level;
  return r;
}

}  // namespace apunim

#endif  // APUNIM_SIGNIFICANCE_HPP_
