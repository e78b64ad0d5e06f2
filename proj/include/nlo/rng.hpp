// Copyright 2026 The nlosim Authors
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

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace nlo {

namespace philox {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as
// 1, 2, 3", SC'11). Stateless: the output block is a pure function of
// (key, counter), which is what makes trajectory draws addressable.
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::uint64_t key,
                                          std::array<std::uint32_t, 4> ctr) {
  auto k0 = static_cast<std::uint32_t>(key);
  auto k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
           static_cast<std::uint32_t>(p0)};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

/// SplitMix64 finalizer; used to derive independent sub-seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix64(seed ^ mix64(salt));
}

// Gaussian/uniform draws addressed by (master_seed, trajectory, element,
// draw). Every value is a pure function of that address, so trajectories can
// be evaluated in any order on any number of threads with identical results.
class DrawStream {
 public:
  DrawStream(std::uint64_t master_seed, std::uint64_t trajectory,
             std::uint32_t element)
      : key_(master_seed),
        ctr_lo_(static_cast<std::uint32_t>(trajectory)),
        ctr_hi_(static_cast<std::uint32_t>(trajectory >> 32)),
        element_(element) {}

  /// Standard-normal pair via Box-Muller on one Philox block.
  std::pair<double, double> normal_pair() {
    const auto b = next_block();
    const std::uint64_t a = join(b[0], b[1]);
    const std::uint64_t c = join(b[2], b[3]);
    // u1 in (0, 1] keeps the log finite; u2 in [0, 1).
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(c >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    auto [a, b] = normal_pair();
    spare_ = b;
    have_spare_ = true;
    return a;
  }

  /// Uniform in [0, 1).
  double uniform() {
    const auto b = next_block();
    return static_cast<double>(join(b[0], b[1]) >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
    return static_cast<std::uint64_t>(lo) |
           (static_cast<std::uint64_t>(hi) << 32);
  }

  std::array<std::uint32_t, 4> next_block() {
    return philox::block(key_, {ctr_lo_, ctr_hi_, element_, draw_block_++});
  }

  std::uint64_t key_;
  std::uint32_t ctr_lo_, ctr_hi_, element_;
  std::uint32_t draw_block_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace nlo
