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

#pragma once

#include <cstddef>
#include <functional>

namespace tumorpic {

// Process-wide worker count used by the library's parallel loops.
// Results never depend on it: every parallel loop writes per-index slots
// and reductions run afterwards in index order.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Calls fn(i) for i in [0, n), split into contiguous ranges over the
// configured workers. Calls made from inside a worker run serially.
// Exceptions are rethrown on the calling thread (the
// one from the lowest failing range wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace tumorpic
