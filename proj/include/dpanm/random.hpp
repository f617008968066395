//
// Copyright 2026 The dpanm Authors
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
//

// Reproducible randomness.
//
// Every random quantity in the library is drawn from a NoiseStream, a
// counter-based SplitMix64 generator: the i-th output of a stream with key K
// is mix64(K + i * 0x9E3779B97F4A7C15). Streams are never shared between
// calls; independent streams are derived from a master seed and a label with
// derive_seed(), which hashes the label with 64-bit FNV-1a and folds it into
// the seed through the same finalizer. The scheme is fully specified here so
// that any noise draw can be replayed from (seed, label, draw index) on any
// platform, independently of the standard library's distribution code.

#ifndef DPANM_RANDOM_HPP_
#define DPANM_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>

namespace dpanm {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::string_view label) {
  return mix64(master ^ mix64(stable_hash(label) + kGoldenGamma));
}

// Joins the parts with '/' and derives a seed from the resulting label, e.g.
// derive_seed(7, "pairs", "kendall", 2) hashes "pairs/kendall/2".
template <typename... Parts>
  requires(sizeof...(Parts) > 1)
std::uint64_t derive_seed(std::uint64_t master, const Parts&... parts) {
  std::string label;
  auto append = [&label](const auto& part) {
    if (!label.empty()) label.push_back('/');
    if constexpr (std::is_arithmetic_v<std::decay_t<decltype(part)>>) {
      label += std::to_string(part);
    } else {
      label += std::string_view(part);
    }
  };
  (append(parts), ...);
  return derive_seed(master, std::string_view(label));
}

class NoiseStream {
 public:
  using result_type = std::uint64_t;

  explicit NoiseStream(std::uint64_t seed) : key_(mix64(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
  }

  // Uniform on the open interval (0, 1): (k + 1/2) / 2^53 for a 53-bit k.
  double uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>((*this)() >> 11) * 0x1.0p-53);
  }

  // Uniform integer in [0, bound), by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = (*this)();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal by Box-Muller; consumes exactly two draws.
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Independent stream keyed by this stream's key and a label. Does not
  // advance this stream.
  NoiseStream substream(std::string_view label) const {
    return NoiseStream(derive_seed(key_, label));
  }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dpanm

#endif  // DPANM_RANDOM_HPP_
