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

#ifndef APUNIM_SYNTH_HPP_
#define APUNIM_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apunim/error.hpp"
#include "apunim/model.hpp"
#include "apunim/parallel.hpp"
#include "apunim/polarization.hpp"
#include "apunim/random.hpp"

namespace apunim {

struct SyntheticDimension {
  std::string name;
  std::vector<std::string> groups;
  std::vector<double> proportions;  // parallel to groups, sums to 1
};

// Items where group_low annotates the lowest level and group_high the
// highest one. `strength` is the exact fraction of such items.
struct PlantedEffect {
  std::string dimension;
  std::string group_low;
  std::string group_high;
  double strength = 1.0;
};

struct SyntheticSpec {
  std::size_t n_items = 500;
  std::size_t annotators_per_item = 10;
  std::vector<SyntheticDimension> dimensions;
  std::optional<PlantedEffect> effect;  // nullopt: no effect
  LabelScale scale = LabelScale::numeric(5);
  double noise = 0.0;       // chance of replacing a label by a uniform one
  double bell_width = 0.7;  // std of the per-item bell, in levels
  std::uint64_t seed = 0;

  void validate() const {
    if (n_items == 0) throw ValidationError("n_items must be positive");
    if (annotators_per_item == 0) throw ValidationError("annotators_per_item must be positive");
    if (dimensions.empty()) throw ValidationError("at least one dimension is required");
    for (const auto& d : dimensions) {
      if (d.groups.empty() || d.groups.size() != d.proportions.size()) {
        throw ValidationError("dimension '" + d.name + "' needs one proportion per group");
      }
      double sum = 0.0;
      for (double p : d.proportions) {
        if (!(p >= 0.0)) throw ValidationError("negative proportion in '" + d.name + "'");
        sum += p;
      }
      if (std::fabs(sum - 1.0) > 1e-9) {
        throw ValidationError("proportions of '" + d.name + "' do not sum to 1");
      }
      Dimension{d.name, d.groups, std::nullopt}.validate();
    }
    if (!(noise >= 0.0 && noise <= 1.0)) throw ValidationError("noise must lie in [0, 1]");
    if (!(bell_width > 0.0)) throw ValidationError("bell_width must be positive");
    if (effect) {
      if (!(effect->strength >= 0.0 && effect->strength <= 1.0)) {
        throw ValidationError("strength must lie in [0, 1]");
      }
      auto it = std::find_if(dimensions.begin(), dimensions.end(),
                             [&](const auto& d) { return d.name == effect->dimension; });
      if (it == dimensions.end()) {
        throw ValidationError("planted dimension '" + effect->dimension + "' is not declared");
      }
      auto has = [&](const std::string& g) {
        return std::find(it->groups.begin(), it->groups.end(), g) != it->groups.end();
      };
      if (!has(effect->group_low) || !has(effect->group_high) ||
          effect->group_low == effect->group_high) {
        throw ValidationError("planted groups must be two distinct groups of '" +
                              effect->dimension + "'");
      }
    }
  }
};

namespace detail {

// Largest-remainder split of n seats by proportion; ties go to the earlier group.
inline std::vector<std::size_t> apportion(std::size_t n, std::span<const double> proportions) {
  std::vector<std::size_t> seats(proportions.size());
  std::vector<double> rest(proportions.size());
  std::size_t used = 0;
  for (std::size_t g = 0; g < proportions.size(); ++g) {
    const double exact = proportions[g] * static_cast<double>(n);
    seats[g] = static_cast<std::size_t>(std::floor(exact));
    rest[g] = exact - static_cast<double>(seats[g]);
    used += seats[g];
  }
  std::vector<std::size_t> order(proportions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rest[a] > rest[b]; });
  for (std::size_t k = 0; used < n; ++k, ++used) ++seats[order[k % order.size()]];
  return seats;
}

inline std::size_t sample_level(std::span<const double> cumulative, CounterRng& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

}  // namespace detail

// Every item gets fresh annotators. Their groups follow the proportions
// exactly (largest remainder), in shuffled order. Labels come from a
// discretized bell around a per-item centre drawn uniformly over the levels.
inline Dataset generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t levels = spec.scale.level_count();
  std::vector<Dimension> dims;
  for (const auto& d : spec.dimensions) dims.push_back({d.name, d.groups, std::nullopt});
  DatasetBuilder builder(spec.scale, dims);

  std::vector<bool> planted(spec.n_items, false);
  std::size_t planted_dim = 0, low = 0, high = 0;
  if (spec.effect) {
    for (std::size_t d = 0; d < dims.size(); ++d) {
      if (dims[d].name == spec.effect->dimension) planted_dim = d;
    }
    low = *dims[planted_dim].index_of(spec.effect->group_low);
    high = *dims[planted_dim].index_of(spec.effect->group_high);
    const auto n_planted = static_cast<std::size_t>(
        std::llround(spec.effect->strength * static_cast<double>(spec.n_items)));
    std::vector<std::size_t> items(spec.n_items);
    std::iota(items.begin(), items.end(), 0);
    CounterRng rng = SeededStream(spec.seed, "planted-items").generator(0);
    shuffle(std::span<std::size_t>(items), rng);
    for (std::size_t k = 0; k < n_planted; ++k) planted[items[k]] = true;
  }

  const std::size_t n = spec.annotators_per_item;
  std::vector<std::vector<std::size_t>> seats;
  for (const auto& d : spec.dimensions) seats.push_back(detail::apportion(n, d.proportions));

  const std::size_t width = std::to_string(spec.n_items - 1).size();
  auto padded = [](std::size_t v, std::size_t w) {
    std::string s = std::to_string(v);
    return std::string(w > s.size() ? w - s.size() : 0, '0') + s;
  };

  std::vector<double> cumulative(levels);
  std::vector<std::vector<std::size_t>> membership(dims.size(), std::vector<std::size_t>(n));
  std::vector<std::optional<std::string>> groups(dims.size());
  for (std::size_t c = 0; c < spec.n_items; ++c) {
    const std::string item_id = "item" + padded(c, width);
    const SeededStream stream(spec.seed, static_cast<std::uint64_t>(c));

    CounterRng groups_rng = stream.generator(0);
    for (std::size_t d = 0; d < dims.size(); ++d) {
      auto& m = membership[d];
      std::size_t pos = 0;
      for (std::size_t g = 0; g < seats[d].size(); ++g) {
        for (std::size_t k = 0; k < seats[d][g]; ++k) m[pos++] = g;
      }
      shuffle(std::span<std::size_t>(m), groups_rng);
    }

    CounterRng rng = stream.generator(1);
    const double centre = rng.uniform() * static_cast<double>(levels - 1);
    double acc = 0.0;
    for (std::size_t l = 0; l < levels; ++l) {
      const double z = (static_cast<double>(l) - centre) / spec.bell_width;
      acc += std::exp(-0.5 * z * z);
      cumulative[l] = acc;
    }

    for (std::size_t j = 0; j < n; ++j) {
      const std::string annotator_id = item_id + "_a" + padded(j, std::to_string(n - 1).size());
      for (std::size_t d = 0; d < dims.size(); ++d) groups[d] = dims[d].groups[membership[d][j]];
      builder.add_profile(annotator_id, groups);

      std::size_t level = detail::sample_level(cumulative, rng);
      if (planted[c]) {
        const std::size_t g = membership[planted_dim][j];
        if (g == low) level = 0;
        if (g == high) level = levels - 1;
      }
      if (rng.uniform() < spec.noise) level = rng.bounded(levels);
      builder.add_annotation(item_id, annotator_id, LabelSet::single(level));
    }
  }
  return std::move(builder).build();
}

// Two items rated by the same twelve annotators on a 0..4 toxicity scale.
// On item t1 group "M" rates high ([0,0,0,1,5]) and "F" low ([5,1,0,0,0]);
// on t2 the groups swap. Each item is bimodal overall while every group is
// unimodal within an item, and pooled over both items each group looks
// bimodal. The seed only permutes annotation order within items.
inline Dataset cancellation_fixture(std::uint64_t seed) {
  DatasetBuilder builder(LabelScale::numeric(5), {Dimension{"gender", {"M", "F"}, std::nullopt}});
  std::vector<std::string> ids;
  for (int k = 0; k < 6; ++k) {
    ids.push_back("m" + std::to_string(k));
    builder.add_profile(AnnotatorProfile{ids.back(), {{"gender", "M"}}});
  }
  for (int k = 0; k < 6; ++k) {
    ids.push_back("f" + std::to_string(k));
    builder.add_profile(AnnotatorProfile{ids.back(), {{"gender", "F"}}});
  }
  // Label of annotator k (M first) on the item where M rates high.
  const std::size_t high[12] = {4, 4, 4, 4, 4, 3, 0, 0, 0, 0, 0, 1};
  for (std::size_t item = 0; item < 2; ++item) {
    std::vector<std::size_t> order(12);
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng = SeededStream(seed, static_cast<std::uint64_t>(item)).generator(0);
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t k : order) {
      const std::size_t level = item == 0 ? high[k] : 4 - high[k];
      builder.add_annotation("t" + std::to_string(item + 1), ids[k], LabelSet::single(level));
    }
  }
  return std::move(builder).build();
}

// How one annotator count k turns 30-odd resampled nDFUs into a single std.
// kPerItem: std over the resamples of each item, averaged over items.
// kDataset: std over resamples of the dataset-level mean nDFU.
enum class SensitivityAggregate { kPerItem, kDataset };

inline std::string_view to_string(SensitivityAggregate a) {
  return a == SensitivityAggregate::kPerItem ? "per-item" : "dataset";
}

struct SensitivityOptions {
  std::optional<std::size_t> max_k;  // default: largest sufficient k
  std::size_t resamples = 30;
  std::uint64_t seed = 0;
  double sufficiency = 0.5;  // share of items that must have k annotators
  SensitivityAggregate aggregate = SensitivityAggregate::kPerItem;
  std::optional<std::string> dimension;  // with `group`: resample that group only
  std::optional<std::string> group;
  unsigned workers = 1;
};

struct SensitivityPoint {
  std::size_t k = 0;
  double std = 0.0;
  std::size_t n_items_used = 0;
};

struct SensitivityCurve {
  std::vector<SensitivityPoint> points;
  std::size_t resamples = 0;
};

inline constexpr std::size_t kMinSensitivityK = 3;

namespace detail {

inline double sample_std(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace detail

// Annotator-count sensitivity of observed polarization. For every k from 3
// to max_k, each item with at least k annotations is resampled (k draws
// with replacement) `resamples` times and the nDFU of every resample is
// recorded.
inline SensitivityCurve sensitivity(const Dataset& ds, const SensitivityOptions& options) {
  if (options.resamples < 2) throw ValidationError("sensitivity needs at least 2 resamples");
  if (!(options.sufficiency > 0.0 && options.sufficiency <= 1.0)) {
    throw ValidationError("sufficiency must lie in (0, 1]");
  }
  if (options.dimension.has_value() != options.group.has_value()) {
    throw ValidationError("per-group sensitivity needs both a dimension and a group");
  }
  std::optional<std::size_t> dim;
  int group = kMissingGroup;
  if (options.dimension) {
    dim = ds.dimension_index(*options.dimension);
    auto g = ds.dimensions()[*dim].index_of(*options.group);
    if (!g) throw ValidationError("unknown group '" + *options.group + "'");
    group = static_cast<int>(*g);
  }

  // Resampling pool of each item.
  std::vector<std::vector<LabelSet>> pools(ds.item_count());
  std::size_t largest = 0;
  for (std::size_t i = 0; i < ds.item_count(); ++i) {
    for (const auto& r : ds.annotations(i)) {
      if (!dim || ds.membership(r.annotator, *dim) == group) pools[i].push_back(r.values);
    }
    largest = std::max(largest, pools[i].size());
  }
  std::vector<std::size_t> at_least(largest + 2, 0);
  for (const auto& p : pools) ++at_least[p.size()];
  for (std::size_t k = largest; k-- > 0;) at_least[k] += at_least[k + 1];

  std::size_t max_k = 0;
  if (options.max_k) {
    max_k = *options.max_k;
    if (max_k > largest) {
      throw ValidationError("no item has " + std::to_string(max_k) + " annotations");
    }
  } else {
    const double needed = options.sufficiency * static_cast<double>(ds.item_count());
    for (std::size_t k = 1; k <= largest; ++k) {
      if (static_cast<double>(at_least[k]) >= needed) max_k = k;
    }
  }
  if (max_k < kMinSensitivityK) {
    throw ValidationError("max_k must be at least 3, got " + std::to_string(max_k));
  }

  const std::size_t n_k = max_k - kMinSensitivityK + 1;
  const std::size_t r_count = options.resamples;
  const std::size_t levels = ds.scale().level_count();
  // Per chunk: per k, the sum of per-item stds and per-resample nDFU sums.
  struct Partial {
    std::vector<double> std_sum;
    std::vector<double> resample_sum;  // n_k x resamples
    std::vector<std::size_t> used;
  };
  const std::size_t chunks = chunk_count(ds.item_count());
  std::vector<Partial> partial(chunks);
  parallel_for(chunks, options.workers, [&](std::size_t c) {
    Partial p{std::vector<double>(n_k, 0.0), std::vector<double>(n_k * r_count, 0.0),
              std::vector<std::size_t>(n_k, 0)};
    std::vector<double> values(r_count);
    const std::size_t end = std::min(ds.item_count(), (c + 1) * kChunkSize);
    for (std::size_t i = c * kChunkSize; i < end; ++i) {
      const auto& pool = pools[i];
      const SeededStream stream(options.seed, ds.item_id(i));
      for (std::size_t k = kMinSensitivityK; k <= max_k && k <= pool.size(); ++k) {
        const std::size_t slot = k - kMinSensitivityK;
        const SeededStream sub = stream.derive(k);
        for (std::size_t r = 0; r < r_count; ++r) {
          CounterRng rng = sub.generator(r);
          Histogram h(levels);
          for (std::size_t draw = 0; draw < k; ++draw) h.add(pool[rng.bounded(pool.size())]);
          values[r] = ndfu_value(h.counts());
          p.resample_sum[slot * r_count + r] += values[r];
        }
        p.std_sum[slot] += detail::sample_std(values);
        ++p.used[slot];
      }
    }
    partial[c] = std::move(p);
  });

  Partial total{std::vector<double>(n_k, 0.0), std::vector<double>(n_k * r_count, 0.0),
                std::vector<std::size_t>(n_k, 0)};
  for (const auto& p : partial) {
    for (std::size_t s = 0; s < n_k; ++s) {
      total.std_sum[s] += p.std_sum[s];
      total.used[s] += p.used[s];
    }
    for (std::size_t s = 0; s < n_k * r_count; ++s) total.resample_sum[s] += p.resample_sum[s];
  }

  SensitivityCurve curve;
  curve.resamples = r_count;
  for (std::size_t s = 0; s < n_k; ++s) {
    SensitivityPoint point{s + kMinSensitivityK, 0.0, total.used[s]};
    if (point.n_items_used > 0) {
      if (options.aggregate == SensitivityAggregate::kPerItem) {
        point.std = total.std_sum[s] / static_cast<double>(point.n_items_used);
      } else {
        std::vector<double> means(r_count);
        for (std::size_t r = 0; r < r_count; ++r) {
          means[r] = total.resample_sum[s * r_count + r] / static_cast<double>(point.n_items_used);
        }
        point.std = detail::sample_std(means);
      }
    }
    curve.points.push_back(point);
  }
  return curve;
}

// Spearman rank correlation with average ranks for ties.
inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("spearman_rho needs two equally long series of length >= 2");
  }
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("spearman_rho of a constant series");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace apunim

#endif  // APUNIM_SYNTH_HPP_
