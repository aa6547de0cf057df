// Copyright 2026 The MPQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MPQ_RNG_H_
#define MPQ_RNG_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace mpq {

namespace internal {

// splitmix64 finalizer
constexpr uint64_t Mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

// FNV-1a over the label bytes
constexpr uint64_t HashLabel(std::string_view label) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace internal

// Counter-based random stream. The output at position i is a pure function of
// (key, i), where the key is derived from the seed and the chain of substream
// labels. Substreams are independent of how many draws the parent has made, so
// work handed to parallel workers stays reproducible under any scheduling.
//
// Satisfies std::uniform_random_bit_generator. Gaussian and uniform variates
// are produced here rather than through <random> distributions, whose output
// differs between standard library implementations.
class RngStream {
 public:
  using result_type = uint64_t;

  explicit RngStream(uint64_t seed = 0)
      : seed_(seed), key_(internal::Mix64(seed ^ 0x6A09E667F3BCC909ULL)) {}

  // derived stream, keyed by a name
  RngStream Substream(std::string_view label) const {
    return Derive(internal::HashLabel(label));
  }

  // derived stream, keyed by an index (episode, timestep, sample, ...)
  RngStream Substream(uint64_t index) const {
    return Derive(internal::Mix64(index + 0x3C6EF372FE94F82BULL));
  }

  uint64_t NextU64() {
    uint64_t x = key_ + (counter_ + 1) * 0x9E3779B97F4A7C15ULL;
    ++counter_;
    return internal::Mix64(internal::Mix64(x) ^ key_);
  }

  // uniform on [0, 1) with 53 random bits
  double Uniform01() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  // uniform on [low, high); returns low exactly when low == high
  double Uniform(double low, double high) {
    return low + (high - low) * Uniform01();
  }

  // standard normal via Box-Muller (one variate per call, no cached state)
  double Normal() {
    double u1 = 1.0 - Uniform01();  // (0, 1]
    double u2 = Uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // uniform integer on [0, n)
  uint64_t Below(uint64_t n) {
    // Lemire rejection
    uint64_t threshold = (0 - n) % n;
    while (true) {
      unsigned __int128 m = static_cast<unsigned __int128>(NextU64()) * n;
      if (static_cast<uint64_t>(m) >= threshold) {
        return static_cast<uint64_t>(m >> 64);
      }
    }
  }

  uint64_t seed() const { return seed_; }
  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return NextU64(); }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  RngStream Derive(uint64_t salt) const {
    RngStream child(*this);
    child.key_ = internal::Mix64(key_ ^ internal::Mix64(salt));
    child.counter_ = 0;
    return child;
  }

  uint64_t seed_;
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace mpq

#endif  // MPQ_RNG_H_
