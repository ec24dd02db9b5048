// SPDX-License-Identifier: Apache-2.0
//
// irsbs: simulator and reflection optimizer for radome-integrated reflecting surfaces
// Copyright (C) 2026 The irsbs authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#ifndef IRSBS_RANDOM_HPP
#define IRSBS_RANDOM_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace irsbs
{
    inline std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    // Child seed for a named sub-stream; order of tags matters
    inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags)
    {
        std::uint64_t h = splitmix64(parent);
        for (std::uint64_t t : tags)
            h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ull));
        return h;
    }

    // Stream tags, stable across releases
    enum class Stream : std::uint64_t
    {
        realization = 1,
        paths = 2,
        sr_init = 3,
        rpa = 4,
        irpa_init = 5,
        irpa_round = 6,
    };

    inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

    // mt19937_64 with portable conversions (std distributions are implementation-defined)
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        // uniform on [0, 1)
        double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
        double phase() { return uniform(0.0, 2.0 * std::numbers::pi); }
        std::complex<double> unit_phasor() { return std::polar(1.0, phase()); }

        double standard_normal()
        {
            if (has_spare_)
            {
                has_spare_ = false;
                return spare_;
            }
            double u1 = uniform();
            while (u1 <= 0.0)
                u1 = uniform();
            const double u2 = uniform();
            const double r = std::sqrt(-2.0 * std::log(u1));
            spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
            has_spare_ = true;
            return r * std::cos(2.0 * std::numbers::pi * u2);
        }

        // circularly-symmetric complex Gaussian with E|z|^2 = variance
        std::complex<double> complex_normal(double variance)
        {
            const double s = std::sqrt(variance / 2.0);
            const double re = standard_normal();
            const double im = standard_normal();
            return {s * re, s * im};
        }

    private:
        std::mt19937_64 engine_;
        bool has_spare_ = false;
        double spare_ = 0.0;
    };
}

#endif
