// Copyright 2026 The fctsbn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FCTSBN_PARALLEL_HPP
#define FCTSBN_PARALLEL_HPP

#include <exception>
#include <optional>
#include <string_view>

#include "fctsbn/types.hpp"

namespace fctsbn {

enum class Policy { Serial, Parallel };

// Parses FCTSBN_THREADS-style values. Empty, zero or malformed values yield
// nullopt.
std::optional<int> parse_thread_count(std::string_view text);

// Applies FCTSBN_THREADS (if set) as the OpenMP worker cap and returns the
// resulting worker count.
int configure_threads_from_env();

int max_workers();
void set_max_workers(int n);

// Runs f(i) for i in [0, n). Under Policy::Parallel iterations are spread over
// OpenMP workers; the first exception thrown by any iteration is rethrown.
template <class F>
void for_each_index(Index n, Policy policy, F&& f) {
  if (policy == Policy::Serial) {
    for (Index i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (Index i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#pragma omp critical(fctsbn_for_each_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace fctsbn

#endif  // FCTSBN_PARALLEL_HPP
