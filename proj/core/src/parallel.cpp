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

#include "lchs/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lchs {
namespace {

std::atomic<std::size_t> g_threads{0};

std::size_t default_threads() {
  if (const char* env = std::getenv("LCHS_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
      // fall through to hardware concurrency
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

template <typename T, typename Zero>
T pairwise(std::span<const T> terms, Zero zero) {
  if (terms.empty()) return zero();
  if (terms.size() == 1) return terms[0];
  if (terms.size() <= 8) {
    T acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc += terms[i];
    return acc;
  }
  const std::size_t half = terms.size() / 2;
  T left = pairwise(terms.first(half), zero);
  left += pairwise(terms.subspan(half), zero);
  return left;
}

}  // namespace

std::size_t thread_count() {
  const std::size_t n = g_threads.load();
  return n ? n : default_threads();
}

void set_thread_count(std::size_t n) { g_threads.store(n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

ComplexVector pairwise_sum(std::span<const ComplexVector> terms) {
  return pairwise(terms, [] { return ComplexVector(); });
}

ComplexMatrix pairwise_sum(std::span<const ComplexMatrix> terms) {
  return pairwise(terms, [] { return ComplexMatrix(); });
}

double pairwise_sum(std::span<const double> terms) {
  return pairwise(terms, [] { return 0.0; });
}

Complex pairwise_sum(std::span<const Complex> terms) {
  return pairwise(terms, [] { return Complex{}; });
}

}  // namespace lchs
