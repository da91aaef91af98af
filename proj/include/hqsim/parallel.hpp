// Copyright 2026 The hqsim Authors
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

#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace hqsim {

/// Selects between the serial reference kernels and their OpenMP versions.
/// Both paths produce bit-identical results; the serial one is kept as the
/// testing baseline.
enum class Execution { serial, parallel };

namespace parallel {

/// Caps worker threads for all OpenMP kernels. 0 restores the runtime default.
void set_thread_limit(int threads);

/// Applies HQSIM_THREADS from the environment (0 or unset = auto). Returns the
/// value that was applied.
int apply_env_thread_limit();

/// Runs body(0..n-1), dynamically scheduled over threads when `exec` is
/// parallel. An exception thrown by any task is rethrown after the loop; if
/// several tasks throw, the one with the lowest index wins.
void for_tasks(int n, Execution exec, const std::function<void(int)>& body);

/// Number of threads a parallel region will use.
int effective_threads();

/// Independent, reproducible RNG stream for (seed, stream index). Work items
/// draw only from their own stream so results do not depend on scheduling.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace parallel
}  // namespace hqsim
