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

#ifndef APUNIM_RANDOM_HPP_
#define APUNIM_RANDOM_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace apunim {

// 64-bit FNV-1a. Stable across platforms and runs, unlike std::hash.
constexpr std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// SplitMix64 generator. Satisfies UniformRandomBitGenerator, but callers
// should use bounded()/uniform() below: std distributions are
// implementation-defined and would break cross-platform reproducibility.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // Unbiased integer in [0, n), Lemire's multiply-and-reject.
  std::uint64_t bounded(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Random stream keyed by (master seed, item). Each counter value
// (an iteration or resample index) yields an independent generator, so the
// sequence never depends on evaluation order or thread count.
class SeededStream {
 public:
  constexpr SeededStream(std::uint64_t master_seed, std::string_view item_key)
      : master_seed_(master_seed), item_key_(stable_hash(item_key)) {}
  constexpr SeededStream(std::uint64_t master_seed, std::uint64_t item_key)
      : master_seed_(master_seed), item_key_(item_key) {}

  constexpr std::uint64_t master_seed() const { return master_seed_; }
  constexpr std::uint64_t item_key() const { return item_key_; }

  constexpr CounterRng generator(std::uint64_t counter) const {
    std::uint64_t s = mix64(master_seed_ ^ 0x6a09e667f3bcc909ull);
    s = mix64(s ^ item_key_);
    s = mix64(s ^ (counter * 0x9e3779b97f4a7c15ull + 0x3c6ef372fe94f82bull));
    return CounterRng(s);
  }

  // Stream for a sub-key, e.g. a resample size within one item.
  constexpr SeededStream derive(std::uint64_t sub_key) const {
    return SeededStream(master_seed_, mix64(item_key_ ^ mix64(sub_key + 1)));
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t item_key_;
};

// Fisher-Yates over an existing permutation.
template <typename T>
void shuffle(std::span<T> values, CounterRng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = rng.bounded(i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace apunim

#endif  // APUNIM_RANDOM_HPP_
