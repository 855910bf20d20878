// Copyright 2026 The evmod Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
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

namespace evmod {

/// Resolve a worker count: `requested <= 0` means hardware concurrency,
/// then the EVMOD_THREADS environment variable (if set and positive) caps it.
int resolve_threads(int requested);

/// Run fn(begin, end) over [0, n) split into contiguous blocks, one per worker.
/// Workers only write to disjoint, index-addressed slots, so results never
/// depend on the worker count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& fn);

/// Run fn(i) for every i in [0, n) from a shared task queue. Task order is
/// unspecified; each task must write only to its own slot.
void parallel_tasks(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace evmod
