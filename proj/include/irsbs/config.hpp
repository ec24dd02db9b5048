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
#ifndef IRSBS_CONFIG_HPP
#define IRSBS_CONFIG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace irsbs
{
    // Raised for any invalid configuration value or config file content
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // 6 GHz maps to 0.05 m with this value
    inline constexpr double speed_of_light = 3.0e8;
    inline constexpr int surfaces_per_module = 4;

    inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

    enum class AntennaPattern
    {
        isotropic,
        tr38901
    };

    enum class SamplingMode
    {
        lcs_direct,   // elevation uniform on [0, pi/2) and azimuth uniform on [0, 2 pi), both in the radome frame
        global_ground // uniform over the lower global hemisphere, rotated into the radome frame by the tilt
    };

    inline std::string to_string(AntennaPattern p) { return p == AntennaPattern::isotropic ? "isotropic" : "tr38901"; }
    inline std::string to_string(SamplingMode s) { return s == SamplingMode::lcs_direct ? "lcs-direct" : "global-ground"; }

    inline int integer_sqrt(int value)
    {
        if (value < 0)
            return -1;
        int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(value))));
        while (r * r > value)
            --r;
        while ((r + 1) * (r + 1) <= value)
            ++r;
        return r;
    }

    // Physical and statistical parameters of one simulated radome.
    // Surfaces are indexed 0..3 in code; face 0 carries normal (-1,0,0), face 1 (1,0,0), face 2 (0,0,-1), face 3 (0,0,1).
    struct SimConfig
    {
        double carrier_frequency = 6.0e9;           // Hz
        int M_x = 4;                                // antennas along x
        int M_z = 4;                                // antennas along z
        std::optional<double> antenna_spacing;      // m, default lambda/2
        std::array<int, 4> N_j1{1, 1, 1, 1};        // elements along y, per surface
        std::array<int, 4> N_j2{8, 8, 8, 8};        // elements along z (faces 0,1) or x (faces 2,3), per surface
        std::optional<double> irs_spacing;          // m, default lambda/2
        std::optional<double> element_area;         // m^2, default (lambda/2)^2
        std::array<double, 4> initial_phases{};     // rad
        double theta_tilt = 0.0;                    // rad, suspension angle
        double H_AR = 10.0;                         // m, radome altitude (metadata only)
        int eta = 1;                                // antenna modules
        int K = 3;                                  // users
        int L_k = 4;                                // paths per user
        double path_gain_variance = 2e-12;          // E|a|^2
        double P_dBm = 30.0;                        // user transmit power
        double sigma2_dBm = -70.0;                  // noise power per antenna
        AntennaPattern pattern = AntennaPattern::tr38901;
        SamplingMode sampling_mode = SamplingMode::lcs_direct;
        std::uint64_t master_seed = 1;

        double wavelength() const { return speed_of_light / carrier_frequency; }
        double d_A() const { return antenna_spacing.value_or(wavelength() / 2.0); }
        double d_I() const { return irs_spacing.value_or(wavelength() / 2.0); }
        double area() const
        {
            if (element_area)
                return *element_area;
            const double half = wavelength() / 2.0;
            return half * half;
        }
        double power_w() const { return dbm_to_watt(P_dBm); }
        double noise_w() const { return dbm_to_watt(sigma2_dBm); }
        int M() const { return M_x * M_z; }
        int module_side() const { return integer_sqrt(eta); }
        int elements_per_module_surface(int face) const { return N_j1[face] * (N_j2[face] / module_side()); }
        int total_elements() const
        {
            int n = 0;
            for (int j = 0; j < surfaces_per_module; ++j)
                n += N_j1[j] * N_j2[j];
            // each module keeps the row count and gets 1/sqrt(eta) of the lateral count
            return n * module_side();
        }

        void validate() const
        {
            auto require = [](bool ok, const std::string &msg)
            {
                if (!ok)
                    throw ConfigError(msg);
            };
            require(std::isfinite(carrier_frequency) && carrier_frequency > 0.0, "carrier_frequency must be > 0");
            require(M_x >= 1 && M_z >= 1, "M_x and M_z must be >= 1");
            require(d_A() > 0.0 && std::isfinite(d_A()), "antenna_spacing must be > 0");
            require(d_I() > 0.0 && std::isfinite(d_I()), "irs_spacing must be > 0");
            require(area() > 0.0 && std::isfinite(area()), "element_area must be > 0");
            for (int j = 0; j < surfaces_per_module; ++j)
                require(N_j1[j] >= 1 && N_j2[j] >= 1, "N_j1 and N_j2 must be >= 1");
            require(theta_tilt >= 0.0 && theta_tilt <= std::numbers::pi / 2.0 + 1e-12, "theta_tilt must lie in [0, pi/2]");
            require(eta >= 1, "eta must be >= 1");
            const int side = module_side();
            require(side * side == eta, "eta must be a perfect square (1, 4, 16, ...)");
            require(M_x % side == 0 && M_z % side == 0, "eta must partition the array into equal square modules");
            require((M_x * M_z) % eta == 0, "M_x * M_z must be divisible by eta");
            for (int j = 0; j < surfaces_per_module; ++j)
                require(N_j2[j] % side == 0, "N_j2 must be divisible by sqrt(eta) so module surfaces shrink evenly");
            require(K >= 1, "K must be >= 1");
            require(L_k >= 1, "L_k must be >= 1");
            require(path_gain_variance >= 0.0 && std::isfinite(path_gain_variance), "path_gain_variance must be >= 0");
            require(std::isfinite(P_dBm) && power_w() > 0.0, "P_dBm must be finite");
            require(std::isfinite(sigma2_dBm) && noise_w() > 0.0, "sigma2_dBm must be finite");
        }
    };
}

#endif
