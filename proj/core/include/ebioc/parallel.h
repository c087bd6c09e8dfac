// Copyright 2026 The ebioc Authors
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

#ifndef EBIOC_PARALLEL_H_
#define EBIOC_PARALLEL_H_

#include <functional>

namespace ebioc {

// Runs fn(0) ... fn(n - 1) on up to `workers` threads. Each index is
// processed exactly once; callers write results into per-index slots so the
// outcome does not depend on the worker count. The exception thrown by the
// lowest failing index (if any) is rethrown after all workers join.
void ParallelFor(int n, int workers, const std::function<void(int)>& fn);

}  // namespace ebioc

#endif  // EBIOC_PARALLEL_H_
