/*
 * surfshape - functional shape analysis for corresponded triangulated surfaces.
 *
 * Copyright 2026 The surfshape Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace surfshape {

/// Seedable pseudo-random source with fully specified derived draws, so a
/// seed reproduces the same sequence on every platform (the standard
/// library's distributions are implementation-defined).
///
///   engine      std::mt19937_64 seeded with the 64-bit seed
///   uniform01   (u >> 11) * 2^-53, in [0, 1)
///   index(n)    rejection sampling on u % n with the unbiased bound
///   normal      Box-Muller on (1 - u1, u2): sqrt(-2 ln(1-u1)) cos(2π u2);
///               the paired sine variate is discarded
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    std::uint64_t index(std::uint64_t n);
    double normal();

    /// Fisher-Yates shuffle driven by index().
    template <typename T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto k = static_cast<std::size_t>(index(i));
            std::swap(v[i - 1], v[k]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace surfshape
