// Copyright 2026 The LCHS Emulator Authors
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
#include <span>

#include "lchs/types.hpp"

namespace lchs {

/// Worker count used by parallel_for. Defaults to LCHS_THREADS, then the
/// hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Iterations must be independent; exceptions
/// are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise summation in index order. The reduction tree depends only on the
/// number of terms, so results do not depend on how the terms were computed.
ComplexVector pairwise_sum(std::span<const ComplexVector> terms);
ComplexMatrix pairwise_sum(std::span<const ComplexMatrix> terms);
double pairwise_sum(std::span<const double> terms);
Complex pairwise_sum(std::span<const Complex> terms);

}  // namespace lchs
