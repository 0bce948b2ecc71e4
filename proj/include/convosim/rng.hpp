// Copyright 2026 The convosim Authors
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

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace convosim {

/// FNV-1a over bytes. Stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view bytes);

/// Derives a child seed from (seed, label). All per-session and
/// per-conversation streams are derived this way so batch order and worker
/// count never change what an individual conversation sees.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Deterministic RNG wrapper. mt19937_64 is fully specified by the standard
/// and the bounded draw below avoids std::uniform_int_distribution, whose
/// output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform draw in [0, bound). bound must be > 0.
    std::uint64_t next_below(std::uint64_t bound);

    /// Uniform draw in [lo, hi], inclusive.
    std::uint64_t next_in(std::uint64_t lo, std::uint64_t hi);

    /// Draws `count` distinct indices from [0, population), in draw order
    /// (partial Fisher-Yates).
    std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count);

private:
    std::mt19937_64 engine_;
};

}  // namespace convosim
