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

#ifndef APUNIM_MODEL_HPP_
#define APUNIM_MODEL_HPP_

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "apunim/error.hpp"

namespace apunim {

// Label sets are stored as bit masks, which bounds the scale size.
inline constexpr std::size_t kMaxLevels = 64;

// Group index used for annotators whose profile has no value for a
// dimension. Such annotators are excluded from metric computation.
inline constexpr int kMissingGroup = -1;

enum class ScaleKind { kOrdinal, kNominal };

inline std::string_view to_string(ScaleKind kind) {
  return kind == ScaleKind::kOrdinal ? "ordinal" : "nominal";
}

// Ordered list of level identifiers. For nominal scales the declared order
// is only the canonical bin layout.
class LabelScale {
 public:
  LabelScale(ScaleKind kind, std::vector<std::string> levels)
      : kind_(kind), levels_(std::move(levels)) {
    if (levels_.size() < 2) {
      throw ValidationError("label scale needs at least 2 levels");
    }
    if (levels_.size() > kMaxLevels) {
      throw ValidationError("label scale supports at most " +
                            std::to_string(kMaxLevels) + " levels");
    }
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      if (!index_.emplace(levels_[i], i).second) {
        throw ValidationError("duplicate scale level '" + levels_[i] + "'");
      }
    }
  }

  // Ordinal scale with levels "0", "1", ..., "n-1".
  static LabelScale numeric(std::size_t n) {
    std::vector<std::string> levels;
    for (std::size_t i = 0; i < n; ++i) levels.push_back(std::to_string(i));
    return LabelScale(ScaleKind::kOrdinal, std::move(levels));
  }

  ScaleKind kind() const { return kind_; }
  std::span<const std::string> levels() const { return levels_; }
  std::size_t level_count() const { return levels_.size(); }

  std::optional<std::size_t> index_of(std::string_view level) const {
    auto it = index_.find(std::string(level));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const LabelScale& a, const LabelScale& b) {
    return a.kind_ == b.kind_ && a.levels_ == b.levels_;
  }

 private:
  ScaleKind kind_;
  std::vector<std::string> levels_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Non-empty set of bin indices chosen by one annotator for one item.
class LabelSet {
 public:
  constexpr LabelSet() = default;

  static constexpr LabelSet single(std::size_t level) {
    LabelSet s;
    s.add(level);
    return s;
  }

  constexpr void add(std::size_t level) { bits_ |= std::uint64_t{1} << level; }
  constexpr bool contains(std::size_t level) const {
    return (bits_ >> level) & 1u;
  }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(std::popcount(bits_));
  }
  constexpr std::uint64_t bits() const { return bits_; }

  // Largest contained level; undefined on an empty set.
  constexpr std::size_t max_level() const {
    return 63 - static_cast<std::size_t>(std::countl_zero(bits_));
  }

  template <typename Fn>
  constexpr void for_each(Fn&& fn) const {
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
      fn(static_cast<std::size_t>(std::countr_zero(b)));
    }
  }

  friend constexpr bool operator==(LabelSet, LabelSet) = default;

 private:
  std::uint64_t bits_ = 0;
};

struct AnnotationRecord {
  std::uint32_t item = 0;       // index into Dataset items
  std::uint32_t annotator = 0;  // index into Dataset annotators
  LabelSet values;

  friend bool operator==(const AnnotationRecord&,
                         const AnnotationRecord&) = default;
};

// A personal-characteristic axis, e.g. gender, split into groups.
struct Dimension {
  std::string name;
  std::vector<std::string> groups;
  // Present for ordinal dimensions; a permutation of `groups`.
  std::optional<std::vector<std::string>> ordinal_order;

  std::optional<std::size_t> index_of(std::string_view group) const {
    auto it = std::find(groups.begin(), groups.end(), group);
    if (it == groups.end()) return std::nullopt;
    return static_cast<std::size_t>(it - groups.begin());
  }

  bool is_ordinal() const { return ordinal_order.has_value(); }

  void validate() const {
    if (name.empty()) throw ValidationError("dimension with empty name");
    std::vector<std::string> sorted = groups;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ValidationError("dimension '" + name + "' has duplicate groups");
    }
    if (ordinal_order) {
      std::vector<std::string> order = *ordinal_order;
      std::sort(order.begin(), order.end());
      if (order != sorted) {
        throw ValidationError("ordinal_order of dimension '" + name +
                              "' is not a permutation of its groups");
      }
    }
  }

  friend bool operator==(const Dimension&, const Dimension&) = default;
};

struct AnnotatorProfile {
  std::string annotator_id;
  // Dimension name -> group; dimensions with a missing value are absent.
  std::map<std::string, std::string> memberships;
};

class DatasetBuilder;

// Immutable store of items, annotations and annotator profiles.
class Dataset {
 public:
  const LabelScale& scale() const { return scale_; }
  std::span<const Dimension> dimensions() const { return dimensions_; }

  std::optional<std::size_t> find_dimension(std::string_view name) const {
    for (std::size_t i = 0; i < dimensions_.size(); ++i) {
      if (dimensions_[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::size_t dimension_index(std::string_view name) const {
    auto d = find_dimension(name);
    if (!d) throw ValidationError("unknown dimension '" + std::string(name) + "'");
    return *d;
  }

  std::size_t item_count() const { return item_ids_.size(); }
  const std::string& item_id(std::size_t item) const { return item_ids_[item]; }
  std::optional<std::size_t> find_item(std::string_view id) const {
    auto it = item_index_.find(std::string(id));
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t item_index(std::string_view id) const {
    auto i = find_item(id);
    if (!i) throw ValidationError("unknown item '" + std::string(id) + "'");
    return *i;
  }

  std::span<const AnnotationRecord> annotations(std::size_t item) const {
    return std::span<const AnnotationRecord>(records_).subspan(
        offsets_[item], offsets_[item + 1] - offsets_[item]);
  }
  std::size_t annotation_count() const { return records_.size(); }

  std::size_t annotator_count() const { return annotator_ids_.size(); }
  const std::string& annotator_id(std::size_t a) const {
    return annotator_ids_[a];
  }
  std::optional<std::size_t> find_annotator(std::string_view id) const {
    auto it = annotator_index_.find(std::string(id));
    if (it == annotator_index_.end()) return std::nullopt;
    return it->second;
  }

  // Group index of `annotator` in `dimension`, or kMissingGroup.
  int membership(std::size_t annotator, std::size_t dimension) const {
    return memberships_[annotator * dimensions_.size() + dimension];
  }

  AnnotatorProfile profile(std::size_t annotator) const {
    AnnotatorProfile p{annotator_ids_[annotator], {}};
    for (std::size_t d = 0; d < dimensions_.size(); ++d) {
      int g = membership(annotator, d);
      if (g != kMissingGroup) {
        p.memberships.emplace(dimensions_[d].name,
                              dimensions_[d].groups[static_cast<std::size_t>(g)]);
      }
    }
    return p;
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.scale_ == b.scale_ && a.dimensions_ == b.dimensions_ &&
           a.item_ids_ == b.item_ids_ && a.annotator_ids_ == b.annotator_ids_ &&
           a.offsets_ == b.offsets_ && a.records_ == b.records_ &&
           a.memberships_ == b.memberships_;
  }

 private:
  friend class DatasetBuilder;
  explicit Dataset(LabelScale scale) : scale_(std::move(scale)) {}

  LabelScale scale_;
  std::vector<Dimension> dimensions_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, std::size_t> item_index_;
  std::vector<std::size_t> offsets_;  // CSR offsets into records_
  std::vector<AnnotationRecord> records_;
  std::vector<std::string> annotator_ids_;
  std::unordered_map<std::string, std::size_t> annotator_index_;
  std::vector<int> memberships_;  // annotator-major, one entry per dimension
};

// Accumulates profiles and annotations, then freezes them into a Dataset.
// Items and annotators keep first-appearance order so that identical input
// produces identical datasets.
class DatasetBuilder {
 public:
  DatasetBuilder(LabelScale scale, std::vector<Dimension> dimensions)
      : scale_(std::move(scale)), dimensions_(std::move(dimensions)) {
    for (const auto& d : dimensions_) d.validate();
    for (std::size_t i = 0; i < dimensions_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (dimensions_[i].name == dimensions_[j].name) {
          throw ValidationError("duplicate dimension '" + dimensions_[i].name + "'");
        }
      }
    }
  }

  const LabelScale& scale() const { return scale_; }
  std::span<const Dimension> dimensions() const { return dimensions_; }

  bool has_profile(std::string_view annotator_id) const {
    return annotator_index_.contains(std::string(annotator_id));
  }

  // `groups[d]` is the group of dimension d, or nullopt for a missing value.
  void add_profile(const std::string& annotator_id,
                   std::span<const std::optional<std::string>> groups) {
    if (groups.size() != dimensions_.size()) {
      throw ValidationError("profile of '" + annotator_id +
                            "' has wrong number of dimensions");
    }
    std::vector<int> row(dimensions_.size(), kMissingGroup);
    for (std::size_t d = 0; d < dimensions_.size(); ++d) {
      if (!groups[d]) continue;
      auto g = dimensions_[d].index_of(*groups[d]);
      if (!g) {
        throw ValidationError("unknown group '" + *groups[d] + "' in dimension '" +
                              dimensions_[d].name + "'");
      }
      row[d] = static_cast<int>(*g);
    }
    auto [it, inserted] =
        annotator_index_.emplace(annotator_id, annotator_ids_.size());
    if (!inserted) {
      std::span<const int> existing(memberships_.data() + it->second * dimensions_.size(),
                                    dimensions_.size());
      if (!std::equal(existing.begin(), existing.end(), row.begin())) {
        throw ValidationError("conflicting duplicate profile for annotator '" +
                              annotator_id + "'");
      }
      return;
    }
    annotator_ids_.push_back(annotator_id);
    memberships_.insert(memberships_.end(), row.begin(), row.end());
  }

  void add_profile(const AnnotatorProfile& profile) {
    std::vector<std::optional<std::string>> groups(dimensions_.size());
    for (std::size_t d = 0; d < dimensions_.size(); ++d) {
      auto it = profile.memberships.find(dimensions_[d].name);
      if (it != profile.memberships.end()) groups[d] = it->second;
    }
    add_profile(profile.annotator_id, groups);
  }

  // Identical duplicates are ignored; conflicting ones are an error.
  void add_annotation(const std::string& item_id, const std::string& annotator_id,
                      LabelSet values) {
    if (values.empty()) throw ValidationError("empty annotation value");
    if (values.max_level() >= scale_.level_count()) {
      throw ValidationError("value out of scale");
    }
    auto a = annotator_index_.find(annotator_id);
    if (a == annotator_index_.end()) {
      throw ValidationError("annotator '" + annotator_id + "' has no profile");
    }
    auto [it, inserted] = item_index_.emplace(item_id, item_ids_.size());
    if (inserted) {
      item_ids_.push_back(item_id);
      pending_.emplace_back();
    }
    auto& list = pending_[it->second];
    auto key = static_cast<std::uint32_t>(a->second);
    for (const auto& r : list) {
      if (r.annotator == key) {
        if (r.values == values) return;
        throw ValidationError("conflicting duplicate annotation for item '" +
                              item_id + "' by annotator '" + annotator_id + "'");
      }
    }
    list.push_back({static_cast<std::uint32_t>(it->second), key, values});
  }

  Dataset build() && {
    Dataset ds(std::move(scale_));
    ds.dimensions_ = std::move(dimensions_);
    ds.item_ids_ = std::move(item_ids_);
    ds.item_index_ = std::move(item_index_);
    ds.annotator_ids_ = std::move(annotator_ids_);
    ds.annotator_index_ = std::move(annotator_index_);
    ds.memberships_ = std::move(memberships_);
    ds.offsets_.reserve(pending_.size() + 1);
    ds.offsets_.push_back(0);
    for (auto& list : pending_) {
      ds.records_.insert(ds.records_.end(), list.begin(), list.end());
      ds.offsets_.push_back(ds.records_.size());
    }
    return ds;
  }

 private:
  LabelScale scale_;
  std::vector<Dimension> dimensions_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, std::size_t> item_index_;
  std::vector<std::vector<AnnotationRecord>> pending_;
  std::vector<std::string> annotator_ids_;
  std::unordered_map<std::string, std::size_t> annotator_index_;
  std::vector<int> memberships_;
};

// Annotations of one item split by the annotators' group in a dimension.
// Only groups with at least one annotation appear in `groups`.
struct GroupedAnnotations {
  std::map<std::string, std::vector<AnnotationRecord>> groups;
  std::vector<AnnotationRecord> unknown;  // annotators missing the dimension
};

inline GroupedAnnotations group_annotations(const Dataset& dataset,
                                            std::string_view item_id,
                                            std::string_view dimension) {
  const std::size_t item = dataset.item_index(item_id);
  const std::size_t d = dataset.dimension_index(dimension);
  const Dimension& dim = dataset.dimensions()[d];
  GroupedAnnotations out;
  for (const auto& r : dataset.annotations(item)) {
    int g = dataset.membership(r.annotator, d);
    if (g == kMissingGroup) {
      out.unknown.push_back(r);
    } else {
      out.groups[dim.groups[static_cast<std::size_t>(g)]].push_back(r);
    }
  }
  return out;
}

}  // namespace apunim

#endif  // APUNIM_MODEL_HPP_
