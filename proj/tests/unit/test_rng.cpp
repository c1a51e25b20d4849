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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "tumorpic/rng.hpp"

using namespace tumorpic;

TEST_SUITE("rng") {

TEST_CASE("philox known-answer vectors") {
  const PhiloxCounter zero = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zero == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  const PhiloxCounter ones =
      philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  CHECK(ones == PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  const PhiloxCounter pi = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                      {0xa4093822, 0x299f31d0});
  CHECK(pi == PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normals do not depend on batching") {
  const SeedSpec seed{42, 7};
  std::vector<double> whole(4 * 37);
  normal_blocks(seed, 5, whole);
  for (std::size_t split : {1u, 3u, 8u, 9u, 20u}) {
    std::vector<double> a(4 * split), b(4 * (37 - split));
    normal_blocks(seed, 5, a);
    normal_blocks(seed, 5 + split, b);
    a.insert(a.end(), b.begin(), b.end());
    CHECK(a == whole);
  }
  std::vector<double> odd(13);
  normals(seed, 5, odd);
  CHECK(std::equal(odd.begin(), odd.end(), whole.begin()));
}

TEST_CASE("normal moments") {
  std::vector<double> z(400000);
  normals({1, 2}, 0, z);
  double m1 = 0, m2 = 0, m4 = 0;
  for (double v : z) {
    m1 += v;
    m2 += v * v;
    m4 += v * v * v * v;
  }
  const double n = static_cast<double>(z.size());
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("distinct streams and children differ") {
  std::vector<double> a(8), b(8), c(8);
  normals({1, 0}, 0, a);
  normals({1, 1}, 0, b);
  normals({2, 0}, 0, c);
  CHECK(a != b);
  CHECK(a != c);
  const SeedSpec s{9, 3};
  CHECK(s.child(1) == s.child(1));
  CHECK(!(s.child(1) == s.child(2)));
  CHECK(!(s.child(1) == SeedSpec{9, 4}.child(1)));
}

}
