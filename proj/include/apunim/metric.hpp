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

#ifndef APUNIM_METRIC_HPP_
#define APUNIM_METRIC_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apunim/error.hpp"
#include "apunim/model.hpp"
#include "apunim/parallel.hpp"
#include "apunim/partition.hpp"
#include "apunim/polarization.hpp"
#include "apunim/random.hpp"
#include "apunim/significance.hpp"

namespace apunim {

// How one random partition collapses to a single polarization value.
// kMean: unweighted mean over qualifying pseudo-groups; one apriori
//   baseline per dimension.
// kSizeMatched: each group is scored against the pseudo-group of its own
//   size, which gives every group its own baseline.
enum class PartitionScoreMode { kMean, kSizeMatched };

inline std::string_view to_string(PartitionScoreMode mode) {
  return mode == PartitionScoreMode::kMean ? "mean" : "size_matched";
}

struct AnalysisConfig {
  double alpha = 0.2;             // item filter: overall nDFU must exceed it
  std::uint32_t partitions = 100;  // t
  double fwer = 0.95;             // 0.95-style; rejection level is 1 - fwer
  std::uint64_t master_seed = 0;
  std::uint32_t min_group = 2;
  PartitionScoreMode partition_score_mode = PartitionScoreMode::kMean;
  SignificanceTest test = SignificanceTest::kPseudoGroup;

  double significance_level() const { return 1.0 - fwer; }

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
    if (partitions < 1) throw ValidationError("partitions must be positive");
    if (!(fwer > 0.0 && fwer < 1.0)) throw ValidationError("fwer must lie in (0, 1)");
    if (min_group < 2) throw ValidationError("min_group must be at least 2");
  }
};

struct GroupResult {
  std::string dimension;
  std::string group;
  std::optional<double> apunim;  // empty when the baseline is degenerate
  std::optional<double> p_raw;
  std::optional<double> p_corrected;
  std::optional<double> t_statistic;
  std::uint32_t degrees_of_freedom = 0;
  bool reject = false;
  bool degenerate_variance = false;
  std::uint64_t support = 0;  // annotations by the group over its items
  std::uint64_t n_items = 0;  // items entering the group's p_obs
  double p_obs = 0.0;
  double p_apr = 0.0;
};

struct DimensionReport {
  std::string dimension;
  std::size_t filtered_items = 0;  // items passing the nDFU / group filter
  std::size_t used_items = 0;      // filtered items with a qualifying pseudo-group
  std::optional<double> p_apr;     // dimension baseline under kMean scoring
  std::vector<GroupResult> groups;
  std::vector<std::string> diagnostics;
};

struct ApunimReport {
  AnalysisConfig config;
  LabelScale scale = LabelScale::numeric(2);
  bool nominal_scale_warning = false;
  std::vector<DimensionReport> dimensions;
};

// (p_obs - p_apr) / (1 - p_apr). The result is only bounded below by
// -p_apr / (1 - p_apr), which is below -1 once p_apr exceeds 0.5.
inline double apunim(double p_obs, double p_apr) {
  if (!(p_apr >= 0.0 && p_apr < 1.0)) {
    throw ValidationError("apunim needs an apriori polarization in [0, 1)");
  }
  return (p_obs - p_apr) / (1.0 - p_apr);
}

// Sums over the used items of one dimension. Everything the metric and its
// significance test need is derived from these.
struct DimensionStatistics {
  struct Group {
    double obs_sum = 0.0;              // sum of the group's own nDFU
    std::uint64_t n_items = 0;         // items where the group qualifies
    std::uint64_t support = 0;         // annotations by the group on them
    std::vector<double> pseudo_sum;    // per partition: size-matched pseudo-group nDFU
  };

  std::size_t filtered_items = 0;
  std::size_t used_items = 0;
  std::size_t missing_annotations = 0;  // excluded sentinel-group annotations
  double apr_sum = 0.0;                 // sum of per-item apriori polarization
  std::vector<double> score_sum;        // per partition: sum of whole-partition scores
  std::vector<Group> groups;

  void merge(const DimensionStatistics& o) {
    filtered_items += o.filtered_items;
    used_items += o.used_items;
    missing_annotations += o.missing_annotations;
    apr_sum += o.apr_sum;
    for (std::size_t i = 0; i < score_sum.size(); ++i) score_sum[i] += o.score_sum[i];
    for (std::size_t g = 0; g < groups.size(); ++g) {
      groups[g].obs_sum += o.groups[g].obs_sum;
      groups[g].n_items += o.groups[g].n_items;
      groups[g].support += o.groups[g].support;
      for (std::size_t i = 0; i < score_sum.size(); ++i) {
        groups[g].pseudo_sum[i] += o.groups[g].pseudo_sum[i];
      }
    }
  }
};

namespace detail {

inline DimensionStatistics empty_statistics(std::size_t n_groups, std::uint32_t t) {
  DimensionStatistics s;
  s.score_sum.assign(t, 0.0);
  s.groups.resize(n_groups);
  for (auto& g : s.groups) g.pseudo_sum.assign(t, 0.0);
  return s;
}

// Reused per-chunk buffers.
struct ItemScratch {
  std::vector<LabelSet> values;       // non-missing annotations, item order
  std::vector<int> group_of;          // parallel to values
  std::vector<std::uint32_t> sizes;   // per declared group
  std::vector<std::uint32_t> order;   // partition permutation
};

inline void accumulate_item(const Dataset& ds, std::size_t item, std::size_t dimension,
                            const AnalysisConfig& config, ItemScratch& scratch,
                            DimensionStatistics& out) {
  const std::size_t n_groups = ds.dimensions()[dimension].groups.size();
  const std::size_t levels = ds.scale().level_count();
  const std::uint32_t t = config.partitions;

  scratch.values.clear();
  scratch.group_of.clear();
  scratch.sizes.assign(n_groups, 0);
  for (const auto& r : ds.annotations(item)) {
    int g = ds.membership(r.annotator, dimension);
    if (g == kMissingGroup) {
      ++out.missing_annotations;
      continue;
    }
    scratch.values.push_back(r.values);
    scratch.group_of.push_back(g);
    ++scratch.sizes[static_cast<std::size_t>(g)];
  }
  ++out.filtered_items;

  bool any_qualifying = false;
  for (auto s : scratch.sizes) any_qualifying |= s >= config.min_group;
  if (!any_qualifying) return;
  ++out.used_items;

  for (std::size_t g = 0; g < n_groups; ++g) {
    if (scratch.sizes[g] < config.min_group) continue;
    Histogram h(levels);
    for (std::size_t k = 0; k < scratch.values.size(); ++k) {
      if (scratch.group_of[k] == static_cast<int>(g)) h.add(scratch.values[k]);
    }
    out.groups[g].obs_sum += ndfu_value(h.counts());
    out.groups[g].n_items += 1;
    out.groups[g].support += scratch.sizes[g];
  }

  const SeededStream stream(config.master_seed, ds.item_id(item));
  scratch.order.resize(scratch.values.size());
  double item_apr = 0.0;
  for (std::uint32_t i = 0; i < t; ++i) {
    partition_order(scratch.order, stream, i);
    std::size_t pos = 0;
    double sum = 0.0;
    std::size_t qualifying = 0;
    for (std::size_t g = 0; g < n_groups; ++g) {
      const std::uint32_t size = scratch.sizes[g];
      if (size == 0) continue;
      if (size >= config.min_group) {
        Histogram h(levels);
        for (std::size_t k = pos; k < pos + size; ++k) h.add(scratch.values[scratch.order[k]]);
        const double v = ndfu_value(h.counts());
        out.groups[g].pseudo_sum[i] += v;
        sum += v;
        ++qualifying;
      }
      pos += size;
    }
    const double score = sum / static_cast<double>(qualifying);
    out.score_sum[i] += score;
    item_apr += score;
  }
  out.apr_sum += item_apr / static_cast<double>(t);
}

}  // namespace detail

// Runs every reused partition over the filtered items in one pass.
// Partitions split an item's non-missing annotations into pseudo-groups with
// the item's own group sizes, in dimension declaration order.
inline DimensionStatistics collect_statistics(const Dataset& ds, std::size_t dimension,
                                              std::span<const std::size_t> filtered,
                                              const AnalysisConfig& config,
                                              unsigned workers = 1) {
  config.validate();
  const std::size_t n_groups = ds.dimensions()[dimension].groups.size();
  const std::size_t chunks = chunk_count(filtered.size());
  std::vector<DimensionStatistics> partial(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    DimensionStatistics s = detail::empty_statistics(n_groups, config.partitions);
    detail::ItemScratch scratch;
    const std::size_t end = std::min(filtered.size(), (c + 1) * kChunkSize);
    for (std::size_t k = c * kChunkSize; k < end; ++k) {
      detail::accumulate_item(ds, filtered[k], dimension, config, scratch, s);
    }
    partial[c] = std::move(s);
  });
  DimensionStatistics total = detail::empty_statistics(n_groups, config.partitions);
  for (const auto& p : partial) total.merge(p);
  return total;
}

struct AprioriEstimate {
  double value = 0.0;
  std::size_t skipped_partitions = 0;
};

// Mean partition nDFU of one item over t seeded partitions of its full
// annotation list with the given pseudo-group sizes.
inline AprioriEstimate apriori_item(const Dataset& ds, std::string_view item_id,
                                    std::span<const std::uint32_t> sizes,
                                    const AnalysisConfig& config) {
  config.validate();
  const std::size_t item = ds.item_index(item_id);
  auto records = ds.annotations(item);
  const SeededStream stream(config.master_seed, ds.item_id(item));
  AprioriEstimate est;
  double sum = 0.0;
  for (std::uint32_t i = 0; i < config.partitions; ++i) {
    auto p = random_partition(records, sizes, stream, i);
    auto v = partition_ndfu(p, records, ds.scale(), config.min_group);
    if (v) {
      sum += *v;
    } else {
      ++est.skipped_partitions;
    }
  }
  if (est.skipped_partitions == config.partitions) {
    throw ValidationError("no partition of item '" + std::string(item_id) +
                          "' has a pseudo-group of at least min_group annotations");
  }
  est.value = sum / static_cast<double>(config.partitions - est.skipped_partitions);
  return est;
}

struct ObservedPolarization {
  double p_obs = 0.0;
  std::uint64_t support = 0;
  std::uint64_t n_items = 0;
};

// Mean nDFU of the group's own annotations over the filtered items where it
// has at least min_group annotations.
inline ObservedPolarization observed_group(const Dataset& ds,
                                           std::span<const std::size_t> filtered,
                                           std::string_view dimension, std::string_view group,
                                           const AnalysisConfig& config) {
  const std::size_t d = ds.dimension_index(dimension);
  auto g = ds.dimensions()[d].index_of(group);
  if (!g) {
    throw ValidationError("unknown group '" + std::string(group) + "' in dimension '" +
                          std::string(dimension) + "'");
  }
  ObservedPolarization out;
  double sum = 0.0;
  for (std::size_t item : filtered) {
    Histogram h(ds.scale().level_count());
    std::uint64_t n = 0;
    for (const auto& r : ds.annotations(item)) {
      if (ds.membership(r.annotator, d) == static_cast<int>(*g)) {
        h.add(r.values);
        ++n;
      }
    }
    if (n < config.min_group) continue;
    sum += ndfu(h).value;
    out.support += n;
    ++out.n_items;
  }
  if (out.n_items == 0) {
    throw ValidationError("group '" + std::string(group) +
                          "' has no filtered item with at least min_group annotations");
  }
  out.p_obs = sum / static_cast<double>(out.n_items);
  return out;
}

namespace detail {

inline double group_baseline(const DimensionStatistics& s, std::size_t g,
                             const AnalysisConfig& config) {
  if (config.partition_score_mode == PartitionScoreMode::kMean) {
    return s.apr_sum / static_cast<double>(s.used_items);
  }
  double sum = 0.0;
  for (double v : s.groups[g].pseudo_sum) sum += v;
  return sum / (static_cast<double>(config.partitions) *
                static_cast<double>(s.groups[g].n_items));
}

// Per-partition observed polarization of the null model for group g.
inline std::vector<double> null_observations(const DimensionStatistics& s, std::size_t g,
                                             const AnalysisConfig& config) {
  std::vector<double> out(config.partitions);
  const bool per_group = config.test == SignificanceTest::kPseudoGroup ||
                         config.partition_score_mode == PartitionScoreMode::kSizeMatched;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = per_group ? s.groups[g].pseudo_sum[i] / static_cast<double>(s.groups[g].n_items)
                       : s.score_sum[i] / static_cast<double>(s.used_items);
  }
  return out;
}

inline NullSample make_null_sample(const DimensionStatistics& s, std::size_t g,
                                   const AnalysisConfig& config) {
  const double baseline = group_baseline(s, g, config);
  if (!(baseline < 1.0)) {
    throw ValidationError("degenerate apriori polarization of 1");
  }
  NullSample null;
  null.rand_apunims = null_observations(s, g, config);
  for (double& v : null.rand_apunims) v = (v - baseline) / (1.0 - baseline);
  return null;
}

}  // namespace detail

// Apunim values of the reused random partitions, against which `group` is
// tested (see SignificanceTest for how the null differs between tests).
inline NullSample null_sample(const Dataset& ds, std::span<const std::size_t> filtered,
                              std::string_view dimension, std::string_view group,
                              const AnalysisConfig& config) {
  if (filtered.empty()) throw ValidationError("null sample of an empty item set");
  const std::size_t d = ds.dimension_index(dimension);
  auto g = ds.dimensions()[d].index_of(group);
  if (!g) throw ValidationError("unknown group '" + std::string(group) + "'");
  auto stats = collect_statistics(ds, d, filtered, config);
  if (stats.groups[*g].n_items == 0) {
    throw ValidationError("group '" + std::string(group) + "' has no qualifying items");
  }
  return detail::make_null_sample(stats, *g, config);
}

inline DimensionReport analyze_dimension(const Dataset& ds, std::size_t dimension,
                                         const AnalysisConfig& config, unsigned workers = 1) {
  config.validate();
  const Dimension& dim = ds.dimensions()[dimension];
  DimensionReport report;
  report.dimension = dim.name;

  const auto filtered = filter_items(ds, dimension, config.alpha);
  report.filtered_items = filtered.size();
  if (filtered.empty()) {
    report.diagnostics.push_back(
        "no item has nDFU above alpha with annotators from at least two groups");
    return report;
  }
  const auto stats = collect_statistics(ds, dimension, filtered, config, workers);
  report.used_items = stats.used_items;
  if (stats.missing_annotations > 0) {
    report.diagnostics.push_back(std::to_string(stats.missing_annotations) +
                                 " annotations by annotators without a '" + dim.name +
                                 "' value were excluded");
  }
  if (stats.used_items < filtered.size()) {
    report.diagnostics.push_back(
        std::to_string(filtered.size() - stats.used_items) +
        " filtered items dropped: no group has at least min_group annotations");
  }
  if (stats.used_items == 0) return report;
  if (config.partition_score_mode == PartitionScoreMode::kMean) {
    report.p_apr = stats.apr_sum / static_cast<double>(stats.used_items);
  }

  std::vector<std::size_t> tested;  // indices into report.groups
  std::vector<double> p_values;
  for (std::size_t g = 0; g < dim.groups.size(); ++g) {
    const auto& gs = stats.groups[g];
    if (gs.n_items == 0) {
      report.diagnostics.push_back("group '" + dim.groups[g] +
                                   "' omitted: no filtered item with at least min_group "
                                   "annotations from it");
      continue;
    }
    GroupResult r;
    r.dimension = dim.name;
    r.group = dim.groups[g];
    r.support = gs.support;
    r.n_items = gs.n_items;
    r.p_obs = gs.obs_sum / static_cast<double>(gs.n_items);
    r.p_apr = detail::group_baseline(stats, g, config);
    if (r.p_apr < 1.0) {
      r.apunim = apunim(r.p_obs, r.p_apr);
      if (config.partitions >= 2) {
        const auto tt =
            t_test(*r.apunim, detail::make_null_sample(stats, g, config), config.test);
        r.p_raw = tt.p_value;
        r.t_statistic = tt.t_statistic;
        r.degrees_of_freedom = tt.degrees_of_freedom;
        r.degenerate_variance = tt.degenerate_variance;
        if (tt.degenerate_variance) {
          report.diagnostics.push_back("group '" + r.group +
                                       "': null sample has zero variance");
        }
        tested.push_back(report.groups.size());
        p_values.push_back(tt.p_value);
      }
    } else {
      report.diagnostics.push_back("group '" + r.group +
                                   "': apriori polarization is 1, apunim not available");
    }
    report.groups.push_back(std::move(r));
  }
  if (config.partitions < 2) {
    report.diagnostics.push_back("significance needs at least 2 partitions");
  }
  if (!p_values.empty()) {
    const auto holm = holm_correct(p_values, config.fwer);
    for (std::size_t k = 0; k < tested.size(); ++k) {
      report.groups[tested[k]].p_corrected = holm.corrected[k];
      report.groups[tested[k]].reject = holm.reject[k];
    }
  }
  return report;
}

inline DimensionReport analyze_dimension(const Dataset& ds, std::string_view dimension,
                                         const AnalysisConfig& config, unsigned workers = 1) {
  return analyze_dimension(ds, ds.dimension_index(dimension), config, workers);
}

// Analyzes the named dimensions, or all of them when `dimensions` is empty.
inline ApunimReport analyze_all(const Dataset& ds, const AnalysisConfig& config,
                                std::span<const std::string> dimensions = {},
                                unsigned workers = 1) {
  config.validate();
  ApunimReport report;
  report.config = config;
  report.scale = ds.scale();
  report.nominal_scale_warning = ds.scale().kind() == ScaleKind::kNominal;
  std::vector<std::size_t> selected;
  if (dimensions.empty()) {
    for (std::size_t d = 0; d < ds.dimensions().size(); ++d) selected.push_back(d);
  } else {
    for (const auto& name : dimensions) selected.push_back(ds.dimension_index(name));
  }
  for (std::size_t d : selected) {
    report.dimensions.push_back(analyze_dimension(ds, d, config, workers));
  }
  return report;
}

}  // namespace apunim

#endif  // APUNIM_METRIC_HPP_
