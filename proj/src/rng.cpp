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

#include "tumorpic/rng.hpp"

#include <algorithm>
#include <stdexcept>

#include "normal_kernel.hpp"

namespace tumorpic {

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
         static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
         static_cast<std::uint32_t>(p0)};
    k[0] += 0x9E3779B9u;
    k[1] += 0xBB67AE85u;
  }
  return c;
}

SeedSpec SeedSpec::child(std::uint64_t tag) const {
  // Hash under a key disjoint from the normal-drawing key schedule by
  // flipping every bit of the master seed.
  const std::uint64_t key = ~master_seed;
  const PhiloxCounter out = philox4x32(
      {static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
       static_cast<std::uint32_t>(stream_id),
       static_cast<std::uint32_t>(stream_id >> 32)},
      {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)});
  return SeedSpec{(std::uint64_t{out[0]} << 32) | out[1],
                  (std::uint64_t{out[2]} << 32) | out[3]};
}

void normal_blocks(const SeedSpec& seed, std::uint64_t first_block,
                   std::span<double> out) {
  if (out.size() % 4 != 0) {
    throw std::invalid_argument("normal_blocks: output size must be a multiple of 4");
  }
  constexpr std::size_t L = detail::kKernelBlocks;
  const auto k0 = static_cast<std::uint32_t>(seed.master_seed);
  const auto k1 = static_cast<std::uint32_t>(seed.master_seed >> 32);
  const std::size_t n_blocks = out.size() / 4;
  std::size_t done = 0;
  while (n_blocks - done >= L) {
    detail::normal_kernel(k0, k1, seed.stream_id, first_block + done,
                          out.data() + 4 * done);
    done += L;
  }
  if (done < n_blocks) {
    std::array<double, 4 * L> tail;
    detail::normal_kernel(k0, k1, seed.stream_id, first_block + done, tail.data());
    std::copy_n(tail.begin(), 4 * (n_blocks - done), out.begin() + 4 * done);
  }
}

void normals(const SeedSpec& seed, std::uint64_t first_block,
             std::span<double> out) {
  const std::size_t whole = out.size() / 4 * 4;
  normal_blocks(seed, first_block, out.first(whole));
  if (whole < out.size()) {
    std::array<double, 4> last;
    normal_blocks(seed, first_block + whole / 4, last);
    std::copy_n(last.begin(), out.size() - whole, out.begin() + whole);
  }
}

}  // namespace tumorpic
