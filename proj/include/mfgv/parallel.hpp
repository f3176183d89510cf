// Copyright 2026 The mfgv Authors
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

#ifndef MFGV_PARALLEL_HPP_
#define MFGV_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace mfgv {

/// Worker count used by parallel_for. Defaults to MFG_THREADS from the
/// environment, or 1 when unset.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n). Each index is visited exactly once; results
/// are deterministic as long as body only writes to slot i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mfgv

#endif  // MFGV_PARALLEL_HPP_
