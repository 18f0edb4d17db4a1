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

#include "fctsbn/parallel.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>

namespace fctsbn {

std::optional<int> parse_thread_count(std::string_view text) {
  int n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || ptr != text.data() + text.size() || n < 1) return std::nullopt;
  return n;
}

int configure_threads_from_env() {
  if (const char* env = std::getenv("FCTSBN_THREADS")) {
    if (auto n = parse_thread_count(env)) omp_set_num_threads(*n);
  }
  return max_workers();
}

int max_workers() { return omp_get_max_threads(); }

void set_max_workers(int n) {
  if (n >= 1) omp_set_num_threads(n);
}

}  // namespace fctsbn
