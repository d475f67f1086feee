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

#ifndef APUNIM_POLARIZATION_HPP_
#define APUNIM_POLARIZATION_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "apunim/error.hpp"
#include "apunim/model.hpp"

namespace apunim {

// Raw per-level counts over a label scale. Fixed capacity, no allocation.
class Histogram {
 public:
  explicit Histogram(std::size_t levels) : levels_(static_cast<std::uint8_t>(levels)) {
    if (levels < 1 || levels > kMaxLevels) {
      throw ValidationError("histogram level count out of range");
    }
  }

  static Histogram from_counts(std::span<const std::uint32_t> counts) {
    Histogram h(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) h.add_level(i, counts[i]);
    return h;
  }

  void add(LabelSet values) {
    values.for_each([this](std::size_t level) { add_level(level); });
  }

  void add_level(std::size_t level, std::uint32_t n = 1) {
    counts_[level] += n;
    total_ += n;
  }

  std::span<const std::uint32_t> counts() const { return {counts_.data(), levels_}; }
  std::size_t levels() const { return levels_; }
  std::uint64_t total() const { return total_; }

 private:
  std::array<std::uint32_t, kMaxLevels> counts_{};
  std::uint8_t levels_;
  std::uint64_t total_ = 0;
};

struct PolarizationScore {
  double value = 0.0;              // in [0, 1]
  std::uint64_t n_annotations = 0;
};

// Every label of every annotation contributes one count.
inline Histogram build_histogram(std::span<const AnnotationRecord> annotations,
                                 const LabelScale& scale) {
  if (annotations.empty()) {
    throw ValidationError("cannot build a histogram from an empty annotation list");
  }
  Histogram h(scale.level_count());
  for (const auto& r : annotations) h.add(r.values);
  return h;
}

// Normalized distance from unimodality of raw counts.
//
// Walking away from the mode m (lowest index on ties) in either direction,
// DFU is the largest rise f[j] - f[i] with i between m and j. The result is
// DFU / f[m]. Frequencies share the denominator, so the ratio is computed
// on integer counts directly. Linear in the number of levels.
inline double ndfu_value(std::span<const std::uint32_t> counts) {
  const std::size_t k = counts.size();
  std::size_t mode = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (counts[i] > counts[mode]) mode = i;
  }
  const std::uint32_t peak = counts[mode];
  if (peak == 0) throw ValidationError("nDFU of an empty histogram");

  std::uint32_t worst = 0;
  std::uint32_t low = peak;
  for (std::size_t j = mode + 1; j < k; ++j) {
    low = std::min(low, counts[j]);
    worst = std::max(worst, counts[j] - low);
  }
  low = peak;
  for (std::size_t j = mode; j-- > 0;) {
    low = std::min(low, counts[j]);
    worst = std::max(worst, counts[j] - low);
  }
  return static_cast<double>(worst) / static_cast<double>(peak);
}

inline PolarizationScore ndfu(const Histogram& h) {
  if (h.total() == 0) throw ValidationError("nDFU of an empty histogram");
  return {ndfu_value(h.counts()), h.total()};
}

inline PolarizationScore item_ndfu(const Dataset& dataset, std::size_t item) {
  auto records = dataset.annotations(item);
  return {ndfu(build_histogram(records, dataset.scale())).value, records.size()};
}

inline PolarizationScore item_ndfu(const Dataset& dataset, std::string_view item_id) {
  return item_ndfu(dataset, dataset.item_index(item_id));
}

// Number of distinct non-missing groups of `dimension` among an item's
// annotators.
inline std::size_t distinct_groups(const Dataset& dataset, std::size_t item,
                                   std::size_t dimension) {
  std::uint64_t seen_small = 0;
  std::vector<bool> seen_large;
  const std::size_t n_groups = dataset.dimensions()[dimension].groups.size();
  std::size_t count = 0;
  for (const auto& r : dataset.annotations(item)) {
    int g = dataset.membership(r.annotator, dimension);
    if (g == kMissingGroup) continue;
    auto ug = static_cast<std::size_t>(g);
    if (n_groups <= 64) {
      if (!((seen_small >> ug) & 1u)) {
        seen_small |= std::uint64_t{1} << ug;
        ++count;
      }
    } else {
      if (seen_large.empty()) seen_large.resize(n_groups);
      if (!seen_large[ug]) {
        seen_large[ug] = true;
        ++count;
      }
    }
  }
  return count;
}

// Items whose overall nDFU strictly exceeds `alpha` and whose annotators
// span at least two groups of the dimension. Returns item indices in
// dataset order.
inline std::vector<std::size_t> filter_items(const Dataset& dataset,
                                             std::size_t dimension, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in [0, 1]");
  }
  if (dimension >= dataset.dimensions().size()) {
    throw ValidationError("unknown dimension index");
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < dataset.item_count(); ++c) {
    if (item_ndfu(dataset, c).value > alpha &&
        distinct_groups(dataset, c, dimension) > 1) {
      out.push_back(c);
    }
  }
  return out;
}

inline std::vector<std::size_t> filter_items(const Dataset& dataset,
                                             std::string_view dimension, double alpha) {
  return filter_items(dataset, dataset.dimension_index(dimension), alpha);
}

}  // namespace apunim

#endif  // APUNIM_POLARIZATION_HPP_
