// Copyright 2026 The refine-loop Authors
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

#ifndef REFINE_PARALLEL_H_
#define REFINE_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace refine {

// Calls fn(i) for i in [0, n) on up to `threads` workers. Indices are handed
// out dynamically, so callers must write results by index to stay
// deterministic. The first exception thrown by fn is rethrown after all
// workers have stopped.
void ParallelFor(std::size_t n, int threads,
                 const std::function<void(std::size_t)>& fn);

}  // namespace refine

#endif  // REFINE_PARALLEL_H_
