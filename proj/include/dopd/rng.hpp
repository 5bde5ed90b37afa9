// Copyright 2026 The dopd Authors
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

#ifndef DOPD_RNG_HPP_
#define DOPD_RNG_HPP_

// Counter-based random numbers. A draw is a pure function of
// (seed, stream, counter), so values do not depend on the order in which they
// are requested. The mixing function is the SplitMix64 finalizer applied to a
// chained combination of the key words; uniforms use the top 53 bits.

#include <cstdint>

namespace dopd {

constexpr std::uint64_t SplitMix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t HashKey(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0,
                                std::uint64_t d = 0) {
  std::uint64_t h = SplitMix64(seed);
  h = SplitMix64(h ^ a);
  h = SplitMix64(h ^ b);
  h = SplitMix64(h ^ c);
  return SplitMix64(h ^ d);
}

constexpr double ToUnitInterval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform on [0, 1) keyed by the full tuple.
constexpr double KeyedUniform(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0,
                              std::uint64_t d = 0) {
  return ToUnitInterval(HashKey(seed, a, b, c, d));
}

// Sequential view over one stream: the n-th call returns the draw keyed by
// (seed, stream, n).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t NextBits() { return HashKey(seed_, stream_, counter_++); }
  double Uniform() { return ToUnitInterval(NextBits()); }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n). The modulo bias is below 2^-40 for the small n
  // used here.
  std::uint64_t Below(std::uint64_t n) { return NextBits() % n; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace dopd

#endif  // DOPD_RNG_HPP_
