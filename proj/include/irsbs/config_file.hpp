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
#ifndef IRSBS_CONFIG_FILE_HPP
#define IRSBS_CONFIG_FILE_HPP

#include "config.hpp"
#include "optimize.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace irsbs
{
    // Everything a run needs: physical setup plus optimizer and harness settings
    struct RunConfig
    {
        SimConfig sim;
        SrParams sr;
        IrpaParams irpa;
        std::optional<int> irpa_Tj;  // derived from t_total when unset
        int t_total = 1400;
        int realizations = 100;

        // Trials per block for a given budget: (t_total - T0) / (blocks * max_rounds)
        IrpaParams irpa_for(int budget, int blocks) const
        {
            IrpaParams p = irpa;
            p.Tj = irpa_Tj ? *irpa_Tj : std::max(0, (budget - irpa.T0) / (blocks * irpa.max_rounds));
            return p;
        }

        void validate() const
        {
            sim.validate();
            if (sr.T < 1 || !(sr.epsilon > 0.0) || sr.max_iterations < 1 || sr.grid < 4)
                throw ConfigError("sr_T, sr_max_iterations must be >= 1, sr_epsilon > 0 and sr_grid >= 4");
            if (irpa.T0 < 1 || !(irpa.epsilon > 0.0) || irpa.max_rounds < 1)
                throw ConfigError("irpa_T0 and irpa_max_rounds must be >= 1 and irpa_epsilon > 0");
            if (irpa_Tj && *irpa_Tj < 0)
                throw ConfigError("irpa_Tj must be >= 0");
            if (t_total < 1)
                throw ConfigError("t_total must be >= 1");
            if (realizations < 1)
                throw ConfigError("realizations must be >= 1");
        }
    };

    namespace detail
    {
        inline std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        inline std::vector<std::string> split_list(const std::string &s)
        {
            std::vector<std::string> out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ','))
                out.push_back(trim(item));
            return out;
        }

        inline double parse_double(const std::string &key, const std::string &v)
        {
            double x = 0.0;
            const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (ec != std::errc() || p != v.data() + v.size() || v.empty())
                throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
            return x;
        }

        template <typename Int>
        Int parse_int(const std::string &key, const std::string &v)
        {
            Int x = 0;
            const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (ec != std::errc() || p != v.data() + v.size() || v.empty())
                throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
            return x;
        }

        // One value for all four surfaces, or exactly four values
        template <typename T, typename Parse>
        std::array<T, 4> parse_per_surface(const std::string &key, const std::string &v, Parse parse)
        {
            const auto items = split_list(v);
            std::array<T, 4> out{};
            if (items.size() == 1)
                out.fill(parse(key, items[0]));
            else if (items.size() == 4)
                for (int j = 0; j < 4; ++j)
                    out[j] = parse(key, items[j]);
            else
                throw ConfigError("'" + key + "': expected 1 or 4 comma-separated values");
            return out;
        }
    }

    inline AntennaPattern parse_pattern(const std::string &v)
    {
        if (v == "isotropic")
            return AntennaPattern::isotropic;
        if (v == "tr38901")
            return AntennaPattern::tr38901;
        throw ConfigError("pattern must be 'isotropic' or 'tr38901', got '" + v + "'");
    }

    inline SamplingMode parse_sampling_mode(const std::string &v)
    {
        if (v == "lcs-direct")
            return SamplingMode::lcs_direct;
        if (v == "global-ground")
            return SamplingMode::global_ground;
        throw ConfigError("sampling_mode must be 'lcs-direct' or 'global-ground', got '" + v + "'");
    }

    // Parses `key = value` lines; '#' starts a comment. Unknown or repeated keys are errors.
    inline RunConfig parse_run_config(std::istream &in)
    {
        using namespace detail;
        RunConfig rc;
        SimConfig &c = rc.sim;
        std::map<std::string, int> seen;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string v = trim(line.substr(eq + 1));
            if (seen.count(key))
                throw ConfigError("line " + std::to_string(line_no) + ": '" + key + "' given twice (first on line " +
                                  std::to_string(seen[key]) + ")");
            seen[key] = line_no;

            if (key == "carrier_frequency")
                c.carrier_frequency = parse_double(key, v);
            else if (key == "M_x")
                c.M_x = parse_int<int>(key, v);
            else if (key == "M_z")
                c.M_z = parse_int<int>(key, v);
            else if (key == "antenna_spacing")
                c.antenna_spacing = parse_double(key, v);
            else if (key == "J")
            {
                if (parse_int<int>(key, v) != surfaces_per_module)
                    throw ConfigError("J is fixed at 4 surfaces per module");
            }
            else if (key == "N_j1")
                c.N_j1 = parse_per_surface<int>(key, v, parse_int<int>);
            else if (key == "N_j2")
                c.N_j2 = parse_per_surface<int>(key, v, parse_int<int>);
            else if (key == "irs_spacing")
                c.irs_spacing = parse_double(key, v);
            else if (key == "element_area")
                c.element_area = parse_double(key, v);
            else if (key == "initial_phases")
                c.initial_phases = parse_per_surface<double>(key, v, parse_double);
            else if (key == "theta_tilt")
                c.theta_tilt = parse_double(key, v);
            else if (key == "H_AR")
                c.H_AR = parse_double(key, v);
            else if (key == "eta")
                c.eta = parse_int<int>(key, v);
            else if (key == "K")
                c.K = parse_int<int>(key, v);
            else if (key == "L_k")
                c.L_k = parse_int<int>(key, v);
            else if (key == "path_gain_variance")
                c.path_gain_variance = parse_double(key, v);
            else if (key == "P_dBm")
                c.P_dBm = parse_double(key, v);
            else if (key == "sigma2_dBm")
                c.sigma2_dBm = parse_double(key, v);
            else if (key == "pattern")
                c.pattern = parse_pattern(v);
            else if (key == "sampling_mode")
                c.sampling_mode = parse_sampling_mode(v);
            else if (key == "master_seed")
                c.master_seed = parse_int<std::uint64_t>(key, v);
            else if (key == "sr_T")
                rc.sr.T = parse_int<int>(key, v);
            else if (key == "sr_epsilon")
                rc.sr.epsilon = parse_double(key, v);
            else if (key == "sr_max_iterations")
                rc.sr.max_iterations = parse_int<int>(key, v);
            else if (key == "sr_grid")
                rc.sr.grid = parse_int<int>(key, v);
            else if (key == "irpa_T0")
                rc.irpa.T0 = parse_int<int>(key, v);
            else if (key == "irpa_Tj")
                rc.irpa_Tj = parse_int<int>(key, v);
            else if (key == "irpa_epsilon")
                rc.irpa.epsilon = parse_double(key, v);
            else if (key == "irpa_max_rounds")
                rc.irpa.max_rounds = parse_int<int>(key, v);
            else if (key == "t_total")
                rc.t_total = parse_int<int>(key, v);
            else if (key == "realizations")
                rc.realizations = parse_int<int>(key, v);
            else
                throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        rc.validate();
        return rc;
    }

    inline RunConfig parse_run_config(const std::string &text)
    {
        std::istringstream in(text);
        return parse_run_config(in);
    }

    inline RunConfig load_run_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file '" + path + "'");
        return parse_run_config(in);
    }
}

#endif
