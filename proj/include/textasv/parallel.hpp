// Copyright 2026 The textasv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEXTASV_PARALLEL_HPP_
#define TEXTASV_PARALLEL_HPP_

#include <cstddef>
#include <cstdint>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace textasv {

// Selects the OpenMP kernel or its serial reference. Elementwise kernels agree
// bit for bit; kernels that reduce in parallel sum over a fixed chunking, so
// their output differs from the serial order only by rounding and never
// depends on the thread count.
enum class Exec { kSerial, kParallel };

inline int MaxThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Calls body(i) for i in [0, n). Iterations must be independent.
template <typename Body>
void ParallelFor(Exec exec, size_t n, Body&& body) {
  if (exec == Exec::kSerial) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  // Exceptions may not cross the OpenMP region; the lowest failing index wins.
  const auto count = static_cast<int64_t>(n);
  std::exception_ptr error;
  int64_t error_index = count;
#pragma omp parallel for schedule(dynamic, 1)
  for (int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<size_t>(i));
    } catch (...) {
#pragma omp critical(textasv_parallel_for_error)
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace textasv

#endif  // TEXTASV_PARALLEL_HPP_
