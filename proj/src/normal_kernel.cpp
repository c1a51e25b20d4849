// Copyright 2026 The tumorpic Authors
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

// Vectorised Philox4x32-10 + Box-Muller. Compiled with fast-math so the
// loops below map onto the SIMD variants of log/sin/cos; every lane goes
// through the same instruction sequence, so a block's output depends only
// on its (key, stream, counter).

#include "normal_kernel.hpp"

#include <cmath>

namespace tumorpic::detail {

void normal_kernel(std::uint32_t key0, std::uint32_t key1,
                   std::uint64_t stream, std::uint64_t first_block,
                   double* out) {
  constexpr std::size_t L = kKernelBlocks;
  alignas(64) std::uint32_t c0[L], c1[L], c2[L], c3[L];
  for (std::size_t l = 0; l < L; ++l) {
    const std::uint64_t b = first_block + l;
    c0[l] = static_cast<std::uint32_t>(b);
    c1[l] = static_cast<std::uint32_t>(b >> 32);
    c2[l] = static_cast<std::uint32_t>(stream);
    c3[l] = static_cast<std::uint32_t>(stream >> 32);
  }
  for (int round = 0; round < 10; ++round) {
    for (std::size_t l = 0; l < L; ++l) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0[l];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2[l];
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[l] ^ key0;
      const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[l] ^ key1;
      const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
      c0[l] = n0;
      c1[l] = n1;
      c2[l] = n2;
      c3[l] = n3;
    }
    key0 += 0x9E3779B9u;
    key1 += 0xBB67AE85u;
  }

  // 32-bit uniforms; the radius uniform is offset by half a ulp so it is
  // never zero.
  constexpr double kScale = 0x1.0p-32;
  constexpr double kAngle = 6.283185307179586476925 * 0x1.0p-32;
  alignas(64) double ra[L], ta[L], rb[L], tb[L];
  for (std::size_t l = 0; l < L; ++l) {
    ra[l] = std::sqrt(-2.0 * std::log((static_cast<double>(c0[l]) + 0.5) * kScale));
    ta[l] = static_cast<double>(c1[l]) * kAngle;
    rb[l] = std::sqrt(-2.0 * std::log((static_cast<double>(c2[l]) + 0.5) * kScale));
    tb[l] = static_cast<double>(c3[l]) * kAngle;
  }
  // Separate loops: a fused sin/cos pair is lowered to scalar sincos().
  alignas(64) double z0[L], z1[L], z2[L], z3[L];
  for (std::size_t l = 0; l < L; ++l) z0[l] = ra[l] * std::cos(ta[l]);
  for (std::size_t l = 0; l < L; ++l) z1[l] = ra[l] * std::sin(ta[l]);
  for (std::size_t l = 0; l < L; ++l) z2[l] = rb[l] * std::cos(tb[l]);
  for (std::size_t l = 0; l < L; ++l) z3[l] = rb[l] * std::sin(tb[l]);
  for (std::size_t l = 0; l < L; ++l) {
    out[4 * l + 0] = z0[l];
    out[4 * l + 1] = z1[l];
    out[4 * l + 2] = z2[l];
    out[4 * l + 3] = z3[l];
  }
}

}  // namespace tumorpic::detail
