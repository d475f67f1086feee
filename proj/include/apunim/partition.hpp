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

#ifndef APUNIM_PARTITION_HPP_
#define APUNIM_PARTITION_HPP_

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "apunim/error.hpp"
#include "apunim/model.hpp"
#include "apunim/polarization.hpp"
#include "apunim/random.hpp"

namespace apunim {

// A split of an annotation list into pseudo-groups of prescribed sizes.
struct PartitionScheme {
  std::vector<std::uint32_t> sizes;
  std::vector<std::uint32_t> assignment;  // annotation index -> pseudo-group

  std::vector<std::uint32_t> members(std::uint32_t group) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i] == group) out.push_back(i);
    }
    return out;
  }
};

inline void check_sizes(std::size_t n, std::span<const std::uint32_t> sizes) {
  std::size_t sum = 0;
  for (auto s : sizes) {
    if (s == 0) throw ValidationError("partition sizes must be positive");
    sum += s;
  }
  if (sum != n) {
    throw ValidationError("partition sizes sum to " + std::to_string(sum) + " but " +
                          std::to_string(n) + " annotations were given");
  }
}

// Writes the seeded permutation of annotation indices for one iteration.
// Pseudo-group g is the contiguous slice of `order` after the first g sizes.
inline void partition_order(std::span<std::uint32_t> order, const SeededStream& stream,
                            std::uint64_t iteration) {
  std::iota(order.begin(), order.end(), 0u);
  CounterRng rng = stream.generator(iteration);
  shuffle(order, rng);
}

inline PartitionScheme random_partition(std::size_t n_annotations,
                                        std::span<const std::uint32_t> sizes,
                                        const SeededStream& stream,
                                        std::uint64_t iteration) {
  check_sizes(n_annotations, sizes);
  std::vector<std::uint32_t> order(n_annotations);
  partition_order(order, stream, iteration);
  PartitionScheme p{{sizes.begin(), sizes.end()},
                    std::vector<std::uint32_t>(n_annotations)};
  std::size_t pos = 0;
  for (std::uint32_t g = 0; g < sizes.size(); ++g) {
    for (std::uint32_t k = 0; k < sizes[g]; ++k) p.assignment[order[pos++]] = g;
  }
  return p;
}

inline PartitionScheme random_partition(std::span<const AnnotationRecord> annotations,
                                        std::span<const std::uint32_t> sizes,
                                        const SeededStream& stream,
                                        std::uint64_t iteration) {
  return random_partition(annotations.size(), sizes, stream, iteration);
}

// Unweighted mean nDFU over pseudo-groups holding at least `min_group`
// annotations; nullopt when none qualifies.
inline std::optional<double> partition_ndfu(const PartitionScheme& partition,
                                            std::span<const AnnotationRecord> annotations,
                                            const LabelScale& scale,
                                            std::uint32_t min_group) {
  if (partition.assignment.size() != annotations.size()) {
    throw ValidationError("partition does not match the annotation list");
  }
  std::vector<Histogram> hists(partition.sizes.size(), Histogram(scale.level_count()));
  std::vector<std::uint32_t> seen(partition.sizes.size(), 0);
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const std::uint32_t g = partition.assignment[i];
    if (g >= hists.size()) throw ValidationError("partition assignment out of range");
    hists[g].add(annotations[i].values);
    ++seen[g];
  }
  double sum = 0.0;
  std::size_t qualifying = 0;
  for (std::size_t g = 0; g < hists.size(); ++g) {
    if (seen[g] != partition.sizes[g]) {
      throw ValidationError("partition group sizes do not match its assignment");
    }
    if (seen[g] >= min_group && seen[g] > 0) {
      sum += ndfu(hists[g]).value;
      ++qualifying;
    }
  }
  if (qualifying == 0) return std::nullopt;
  return sum / static_cast<double>(qualifying);
}

}  // namespace apunim

#endif  // APUNIM_PARTITION_HPP_
