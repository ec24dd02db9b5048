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
#ifndef IRSBS_CHANNEL_HPP
#define IRSBS_CHANNEL_HPP

#include "config.hpp"
#include "geometry.hpp"
#include "propagation.hpp"
#include "random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace irsbs
{
    struct PathComponent
    {
        cd gain;
        Direction direction;
    };

    // paths[k] holds the L_k components of user k
    struct PathSet
    {
        std::vector<std::vector<PathComponent>> users;
        int user_count() const { return static_cast<int>(users.size()); }
    };

    inline Vec3 rotate_global_to_radome(const Vec3 &g, double tilt)
    {
        const double c = std::cos(tilt), s = std::sin(tilt);
        return {g.x(), g.y() * c - g.z() * s, g.y() * s + g.z() * c};
    }

    inline PathSet sample_paths(const SimConfig &cfg, std::uint64_t realization_seed)
    {
        cfg.validate();
        Rng rng(derive_seed(realization_seed, {tag(Stream::paths)}));
        PathSet paths;
        paths.users.resize(cfg.K);
        for (int k = 0; k < cfg.K; ++k)
            for (int l = 0; l < cfg.L_k; ++l)
            {
                PathComponent c;
                c.gain = rng.complex_normal(cfg.path_gain_variance);
                if (cfg.sampling_mode == SamplingMode::lcs_direct)
                {
                    c.direction.theta = rng.uniform(0.0, pi / 2.0);
                    c.direction.phi = rng.phase();
                }
                else
                {
                    // uniform in solid angle over the lower hemisphere (global z <= 0)
                    const double gz = -rng.uniform();
                    const double az = rng.phase();
                    const double r = std::sqrt(std::max(0.0, 1.0 - gz * gz));
                    const Vec3 g(r * std::cos(az), r * std::sin(az), gz);
                    c.direction = Direction::from_vector(rotate_global_to_radome(g, cfg.theta_tilt));
                }
                paths.users[k].push_back(c);
            }
        return paths;
    }

    // One unit-modulus coefficient per reflecting unit (element or subsurface)
    struct ReflectionState
    {
        std::vector<cd> values;

        ReflectionState() = default;
        explicit ReflectionState(std::vector<cd> v) : values(std::move(v)) {}
        static ReflectionState ones(int n) { return ReflectionState(std::vector<cd>(n, cd(1.0, 0.0))); }
        static ReflectionState random(int n, Rng &rng)
        {
            ReflectionState s;
            s.values.reserve(n);
            for (int i = 0; i < n; ++i)
                s.values.push_back(rng.unit_phasor());
            return s;
        }

        int size() const { return static_cast<int>(values.size()); }
        cd &operator[](int i) { return values[i]; }
        const cd &operator[](int i) const { return values[i]; }

        bool unit_modulus(double tol = 1e-9) const
        {
            for (const cd &v : values)
                if (!(std::abs(std::abs(v) - 1.0) <= tol))
                    return false;
            return true;
        }
    };

    struct UnitSurface
    {
        int module = 0;
        int face = 0;
        int rows = 0;
        int cols = 0;
        int first = 0;
        int size() const { return rows * cols; }
    };

    struct UnitPair
    {
        int first = 0;  // unit hit first
        int second = 0; // unit hit second, then on to the array
    };

    // Direct, single- and double-reflection components for all users.
    // Double-reflection entries are kept only for interacting ordered pairs
    // (different surfaces, same module); every other pair is exactly zero.
    struct ChannelTensors
    {
        int users = 0;
        int antennas = 0;
        int module_count = 1;
        Eigen::MatrixXcd direct;               // antennas x users
        std::vector<Eigen::MatrixXcd> single;  // per user: antennas x units
        std::vector<Eigen::MatrixXcd> dbl;     // per user: antennas x pairs
        std::vector<UnitPair> pairs;
        std::vector<UnitSurface> surfaces;
        std::vector<int> surface_of_unit;
        std::vector<int> pair_lookup;          // units x units, -1 when not interacting
        std::uint64_t layout_hash = 0;
        std::uint64_t seed = 0;

        int units() const { return static_cast<int>(surface_of_unit.size()); }
        int pair_count() const { return static_cast<int>(pairs.size()); }
        int module_of_unit(int u) const { return surfaces[surface_of_unit[u]].module; }

        cd f(int k, int unit, int m) const { return single[k](m, unit); }
        cd g(int k, int a, int b, int m) const
        {
            const int p = pair_lookup[static_cast<std::size_t>(a) * units() + b];
            return p < 0 ? cd(0.0, 0.0) : dbl[k](m, p);
        }

        void rebuild_pair_lookup()
        {
            const std::size_t n = static_cast<std::size_t>(units());
            pair_lookup.assign(n * n, -1);
            for (int p = 0; p < pair_count(); ++p)
                pair_lookup[static_cast<std::size_t>(pairs[p].first) * n + pairs[p].second] = p;
        }
    };

    inline constexpr std::size_t default_tensor_memory_limit = std::size_t(4) << 30;

    namespace detail
    {
        inline std::vector<UnitPair> interacting_pairs(const RadomeLayout &layout)
        {
            std::vector<UnitPair> pairs;
            const int n = layout.element_count();
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    if (layout.interacting(a, b))
                        pairs.push_back({a, b});
            return pairs;
        }

        inline void check_memory(std::size_t users, std::size_t antennas, std::size_t units, std::size_t pairs,
                                 std::size_t limit)
        {
            const double bytes = 16.0 * static_cast<double>(users) * static_cast<double>(antennas) *
                                 (static_cast<double>(units) + static_cast<double>(pairs) + 1.0);
            if (bytes > static_cast<double>(limit))
                throw std::length_error("channel tensors need " + std::to_string(bytes / (1 << 20)) +
                                        " MiB, above the configured limit of " +
                                        std::to_string(limit >> 20) + " MiB");
        }

        inline std::vector<UnitSurface> unit_surfaces(const RadomeLayout &layout)
        {
            std::vector<UnitSurface> out;
            for (const auto &s : layout.surfaces)
                out.push_back({s.module, s.face, s.rows, s.cols, s.first});
            return out;
        }
    }

    // Path-independent factors of the reflection links for one layout:
    //   f(k,a,m)     = incidence(k,a) * tail(m,a)
    //   g(k,(a,b),m) = incidence(k,a) * hop(a,b) * tail(m,b)
    struct ReflectionGeometry
    {
        ReflectionMode mode = ReflectionMode::element_wise;
        Eigen::MatrixXcd tail;           // antennas x elements
        std::vector<UnitPair> pairs;
        std::vector<cd> hop;             // per pair
    };

    inline ReflectionGeometry element_wise_geometry(const RadomeLayout &layout, AntennaPattern pattern)
    {
        constexpr ReflectionMode mode = ReflectionMode::element_wise;
        ReflectionGeometry geo;
        geo.mode = mode;
        const int M = layout.antenna_count();
        const int N = layout.element_count();
        const double lambda = layout.wavelength, area = layout.element_area;
        const double sqrt2 = std::sqrt(2.0);

        geo.tail = Eigen::MatrixXcd::Zero(M, N);
        for (int e = 0; e < N; ++e)
        {
            const Vec3 &w = layout.element_positions[e];
            const Vec3 &n = layout.normal_of_element(e);
            for (int m = 0; m < M; ++m)
            {
                if (layout.module_of_antenna[m] != layout.module_of_element(e))
                    continue;
                const Vec3 &s = layout.antenna_positions[m];
                const double p = reflection_side_factor(elevation_from_surface(w, n, s), area, lambda, mode);
                if (p == 0.0)
                    continue;
                geo.tail(m, e) = sqrt2 * std::sqrt(p) * los_gain(w, s, lambda) *
                                 std::sqrt(antenna_gain(Vec3(w - s), pattern));
            }
        }

        geo.pairs = detail::interacting_pairs(layout);
        geo.hop.reserve(geo.pairs.size());
        for (const auto &pr : geo.pairs)
        {
            const Vec3 &wa = layout.element_positions[pr.first];
            const Vec3 &wb = layout.element_positions[pr.second];
            const double pa = reflection_side_factor(elevation_from_surface(wa, layout.normal_of_element(pr.first), wb),
                                                     area, lambda, mode);
            const double pb = reflection_side_factor(elevation_from_surface(wb, layout.normal_of_element(pr.second), wa),
                                                     area, lambda, mode);
            if (pa == 0.0 || pb == 0.0)
                geo.hop.emplace_back(0.0, 0.0);
            else
                geo.hop.push_back(std::sqrt(2.0 * pa) * los_gain(wa, wb, lambda) * std::sqrt(pb));
        }
        return geo;
    }

    // Plane-wave (far-field) counterpart: every surface and every array module is treated as a
    // whole; links use the centroid distance for the amplitude and a linear phase across elements.
    inline ReflectionGeometry far_field_geometry(const RadomeLayout &layout, AntennaPattern pattern)
    {
        constexpr ReflectionMode mode = ReflectionMode::far_field_isotropic;
        if (layout.module_count != 1)
            throw std::invalid_argument("far-field benchmark is defined for a single module only");
        ReflectionGeometry geo;
        geo.mode = mode;
        const int M = layout.antenna_count();
        const int N = layout.element_count();
        const double lambda = layout.wavelength, area = layout.element_area;
        const double k0 = 2.0 * pi / lambda;
        const double sqrt2 = std::sqrt(2.0);

        std::vector<Vec3> centroid(layout.surfaces.size(), Vec3::Zero());
        for (std::size_t s = 0; s < layout.surfaces.size(); ++s)
        {
            const auto &info = layout.surfaces[s];
            for (int e = info.first; e < info.first + info.size(); ++e)
                centroid[s] += layout.element_positions[e];
            centroid[s] /= info.size();
        }
        Vec3 array_centroid = Vec3::Zero();
        for (const auto &s : layout.antenna_positions)
            array_centroid += s;
        array_centroid /= M;

        geo.tail = Eigen::MatrixXcd::Zero(M, N);
        for (std::size_t s = 0; s < layout.surfaces.size(); ++s)
        {
            const auto &info = layout.surfaces[s];
            const Vec3 to_array = array_centroid - centroid[s];
            const double dc = to_array.norm();
            const Vec3 e = to_array / dc;
            const double p = reflection_side_factor(std::acos(std::clamp(e.dot(info.normal), -1.0, 1.0)), area, lambda, mode);
            if (p == 0.0)
                continue;
            const double g_ant = antenna_gain(Vec3(-e), pattern);
            const double amp = sqrt2 * std::sqrt(p) * lambda / (4.0 * pi * dc) * std::sqrt(g_ant);
            for (int el = info.first; el < info.first + info.size(); ++el)
            {
                const Vec3 dw = layout.element_positions[el] - centroid[s];
                for (int m = 0; m < M; ++m)
                {
                    const Vec3 ds = layout.antenna_positions[m] - array_centroid;
                    const double path = dc + e.dot(ds - dw);
                    geo.tail(m, el) = amp * std::exp(-imag_unit * (k0 * path));
                }
            }
        }

        geo.pairs = detail::interacting_pairs(layout);
        geo.hop.reserve(geo.pairs.size());
        for (const auto &pr : geo.pairs)
        {
            const int sa = layout.surface_of_element[pr.first], sb = layout.surface_of_element[pr.second];
            const Vec3 link = centroid[sb] - centroid[sa];
            const double dc = link.norm();
            const Vec3 e = link / dc;
            const double pa = reflection_side_factor(std::acos(std::clamp(e.dot(layout.surfaces[sa].normal), -1.0, 1.0)),
                                                     area, lambda, mode);
            const double pb = reflection_side_factor(std::acos(std::clamp(-e.dot(layout.surfaces[sb].normal), -1.0, 1.0)),
                                                     area, lambda, mode);
            if (pa == 0.0 || pb == 0.0)
            {
                geo.hop.emplace_back(0.0, 0.0);
                continue;
            }
            const Vec3 dwa = layout.element_positions[pr.first] - centroid[sa];
            const Vec3 dwb = layout.element_positions[pr.second] - centroid[sb];
            const double path = dc + e.dot(dwb - dwa);
            geo.hop.push_back(std::sqrt(2.0 * pa * pb) * lambda / (4.0 * pi * dc) * std::exp(-imag_unit * (k0 * path)));
        }
        return geo;
    }

    // Sum over paths of gain * sqrt(antenna gain) * e_z (x) e_x
    inline Eigen::MatrixXcd direct_channel(const PathSet &paths, const RadomeLayout &layout, AntennaPattern pattern)
    {
        const int K = paths.user_count();
        const int M = layout.antenna_count();
        const double ratio = 2.0 * layout.antenna_spacing / layout.wavelength;
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(M, K);
        for (int k = 0; k < K; ++k)
            for (const auto &path : paths.users[k])
            {
                const double st = std::sin(path.direction.theta);
                const Eigen::VectorXcd ez = steering_vector(ratio * st * std::cos(path.direction.phi), layout.M_z);
                const Eigen::VectorXcd ex = steering_vector(ratio * st * std::sin(path.direction.phi), layout.M_x);
                const cd amp = path.gain * std::sqrt(antenna_gain(path.direction, pattern));
                for (int iz = 0; iz < layout.M_z; ++iz)
                    for (int ix = 0; ix < layout.M_x; ++ix)
                        h(iz * layout.M_x + ix, k) += amp * ez[iz] * ex[ix];
            }
        return h;
    }

    namespace detail
    {
        // sum_l a_l * alpha_e(l) * sqrt(p(theta_l))
        inline cd incidence(const std::vector<PathComponent> &paths, const RadomeLayout &layout, int element,
                            ReflectionMode mode)
        {
            const int face = layout.face_of_element(element);
            const int row = layout.row_of_element[element], col = layout.col_of_element[element];
            cd sum(0.0, 0.0);
            for (const auto &path : paths)
            {
                const IrsAngles ang = aoa_transform(path.direction, face);
                const double p = reflection_side_factor(ang.theta, layout.element_area, layout.wavelength, mode);
                if (p == 0.0)
                    continue;
                sum += path.gain *
                       irs_array_response(ang, row, col, layout.irs_spacing, layout.wavelength, layout.initial_phases[face]) *
                       std::sqrt(p);
            }
            return sum;
        }
    }

    // Reference evaluation of one single-reflection entry, element by element
    inline cd single_reflection_component(const PathSet &paths, const RadomeLayout &layout, AntennaPattern pattern,
                                          int k, int element, int m)
    {
        if (layout.module_of_antenna[m] != layout.module_of_element(element))
            return {0.0, 0.0};
        const Vec3 &w = layout.element_positions[element];
        const Vec3 &s = layout.antenna_positions[m];
        const int face = layout.face_of_element(element);
        const double theta_out = elevation_from_surface(w, layout.normal_of_element(element), s);
        const cd xi = los_gain(w, s, layout.wavelength);
        const double g_ant = antenna_gain(Vec3(w - s), pattern);
        cd sum(0.0, 0.0);
        for (const auto &path : paths.users[k])
        {
            const IrsAngles ang = aoa_transform(path.direction, face);
            const double g_refl = element_reflection_gain(ang.theta, theta_out, layout.element_area, layout.wavelength,
                                                          ReflectionMode::element_wise);
            if (g_refl == 0.0)
                continue;
            const cd alpha = irs_array_response(ang, layout.row_of_element[element], layout.col_of_element[element],
                                                layout.irs_spacing, layout.wavelength, layout.initial_phases[face]);
            sum += path.gain * alpha * std::sqrt(g_refl) * xi * std::sqrt(g_ant);
        }
        return sum;
    }

    // Reference evaluation of one double-reflection entry: user -> first -> second -> antenna m
    inline cd double_reflection_component(const PathSet &paths, const RadomeLayout &layout, AntennaPattern pattern,
                                          int k, int first, int second, int m)
    {
        if (layout.surface_of_element[first] == layout.surface_of_element[second])
            throw std::invalid_argument("double_reflection_component: elements must be on different surfaces");
        if (layout.module_of_element(first) != layout.module_of_element(second) ||
            layout.module_of_antenna[m] != layout.module_of_element(second))
            return {0.0, 0.0};
        const Vec3 &wa = layout.element_positions[first];
        const Vec3 &wb = layout.element_positions[second];
        const Vec3 &s = layout.antenna_positions[m];
        const int face = layout.face_of_element(first);
        const double lambda = layout.wavelength, area = layout.element_area;
        const double theta_a_out = elevation_from_surface(wa, layout.normal_of_element(first), wb);
        const double theta_b_in = elevation_from_surface(wb, layout.normal_of_element(second), wa);
        const double theta_b_out = elevation_from_surface(wb, layout.normal_of_element(second), s);
        const cd zeta = los_gain(wb, wa, lambda);
        const cd xi = los_gain(s, wb, lambda);
        const double g_second = element_reflection_gain(theta_b_in, theta_b_out, area, lambda, ReflectionMode::element_wise);
        const double g_ant = antenna_gain(Vec3(wb - s), pattern);
        cd sum(0.0, 0.0);
        for (const auto &path : paths.users[k])
        {
            const IrsAngles ang = aoa_transform(path.direction, face);
            const double g_first = element_reflection_gain(ang.theta, theta_a_out, area, lambda, ReflectionMode::element_wise);
            if (g_first == 0.0 || g_second == 0.0)
                continue;
            const cd alpha = irs_array_response(ang, layout.row_of_element[first], layout.col_of_element[first],
                                                layout.irs_spacing, lambda, layout.initial_phases[face]);
            sum += path.gain * alpha * std::sqrt(g_first) * zeta * std::sqrt(g_second) * xi * std::sqrt(g_ant);
        }
        return sum;
    }

    // Materialise all channel components for one realization from precomputed link geometry
    inline ChannelTensors build_tensors(const PathSet &paths, const RadomeLayout &layout, AntennaPattern pattern,
                                        const ReflectionGeometry &geo,
                                        std::size_t memory_limit = default_tensor_memory_limit)
    {
        const int K = paths.user_count();
        const int M = layout.antenna_count();
        const int N = layout.element_count();
        const int P = static_cast<int>(geo.pairs.size());
        detail::check_memory(K, M, N, P, memory_limit);

        ChannelTensors t;
        t.users = K;
        t.antennas = M;
        t.module_count = layout.module_count;
        t.surfaces = detail::unit_surfaces(layout);
        t.surface_of_unit = layout.surface_of_element;
        t.pairs = geo.pairs;
        t.layout_hash = layout.hash();
        t.direct = direct_channel(paths, layout, pattern);
        t.rebuild_pair_lookup();

        for (int k = 0; k < K; ++k)
        {
            std::vector<cd> inc(N);
            for (int e = 0; e < N; ++e)
                inc[e] = detail::incidence(paths.users[k], layout, e, geo.mode);

            Eigen::MatrixXcd f(M, N);
            for (int e = 0; e < N; ++e)
                f.col(e) = inc[e] * geo.tail.col(e);
            t.single.push_back(std::move(f));

            Eigen::MatrixXcd g(M, P);
            for (int p = 0; p < P; ++p)
                g.col(p) = (inc[geo.pairs[p].first] * geo.hop[p]) * geo.tail.col(geo.pairs[p].second);
            t.dbl.push_back(std::move(g));
        }
        return t;
    }

    inline ChannelTensors build_tensors(const PathSet &paths, const RadomeLayout &layout, AntennaPattern pattern)
    {
        return build_tensors(paths, layout, pattern, element_wise_geometry(layout, pattern));
    }

    inline ChannelTensors build_far_field_tensors(const PathSet &paths, const RadomeLayout &layout, AntennaPattern pattern)
    {
        return build_tensors(paths, layout, pattern, far_field_geometry(layout, pattern));
    }

    // h_k = direct_k + sum_n f_{k,n} theta_n + sum_(a,b) g_{k,a,b} theta_a theta_b, returned as antennas x users
    inline Eigen::MatrixXcd assemble_effective_channel(const ChannelTensors &t, const ReflectionState &theta)
    {
        if (theta.size() != t.units())
            throw std::invalid_argument("assemble_effective_channel: reflection state has " +
                                        std::to_string(theta.size()) + " entries, tensors expect " +
                                        std::to_string(t.units()));
        const Eigen::Map<const Eigen::VectorXcd> v(theta.values.data(), theta.size());
        Eigen::VectorXcd products(t.pair_count());
        for (int p = 0; p < t.pair_count(); ++p)
            products[p] = theta[t.pairs[p].first] * theta[t.pairs[p].second];
        Eigen::MatrixXcd h = t.direct;
        for (int k = 0; k < t.users; ++k)
        {
            h.col(k).noalias() += t.single[k] * v;
            h.col(k).noalias() += t.dbl[k] * products;
        }
        return h;
    }

    // Subsurface map: every unit belongs to exactly one group and a group never spans surfaces
    struct Grouping
    {
        std::vector<int> group_of_unit;
        int group_count = 0;
    };

    // Ties all rows of each column of every surface into one subsurface
    inline Grouping column_grouping(const ChannelTensors &t)
    {
        Grouping g;
        g.group_of_unit.assign(t.units(), -1);
        for (const auto &s : t.surfaces)
        {
            for (int c = 0; c < s.cols; ++c)
                for (int r = 0; r < s.rows; ++r)
                    g.group_of_unit[s.first + c * s.rows + r] = g.group_count + c;
            g.group_count += s.cols;
        }
        return g;
    }

    inline Grouping identity_grouping(const ChannelTensors &t)
    {
        Grouping g;
        g.group_count = t.units();
        for (int u = 0; u < t.units(); ++u)
            g.group_of_unit.push_back(u);
        return g;
    }

    inline ChannelTensors apply_grouping(const ChannelTensors &t, const Grouping &grouping)
    {
        const int N = t.units();
        const int G = grouping.group_count;
        if (static_cast<int>(grouping.group_of_unit.size()) != N)
            throw std::invalid_argument("apply_grouping: grouping must map every unit");
        std::vector<int> surface_of_group(G, -1);
        for (int u = 0; u < N; ++u)
        {
            const int grp = grouping.group_of_unit[u];
            if (grp < 0 || grp >= G)
                throw std::invalid_argument("apply_grouping: unit " + std::to_string(u) + " is not mapped");
            if (surface_of_group[grp] < 0)
                surface_of_group[grp] = t.surface_of_unit[u];
            else if (surface_of_group[grp] != t.surface_of_unit[u])
                throw std::invalid_argument("apply_grouping: group " + std::to_string(grp) + " spans two surfaces");
        }
        for (int grp = 0; grp < G; ++grp)
        {
            if (surface_of_group[grp] < 0)
                throw std::invalid_argument("apply_grouping: empty group " + std::to_string(grp));
            if (grp > 0 && surface_of_group[grp] < surface_of_group[grp - 1])
                throw std::invalid_argument("apply_grouping: groups must be numbered surface by surface");
        }

        ChannelTensors out;
        out.users = t.users;
        out.antennas = t.antennas;
        out.module_count = t.module_count;
        out.direct = t.direct;
        out.layout_hash = t.layout_hash;
        out.seed = t.seed;
        out.surface_of_unit = surface_of_group;
        out.surfaces = t.surfaces;
        for (std::size_t s = 0; s < out.surfaces.size(); ++s)
        {
            int first = -1, count = 0;
            for (int grp = 0; grp < G; ++grp)
                if (surface_of_group[grp] == static_cast<int>(s))
                {
                    if (first < 0)
                        first = grp;
                    ++count;
                }
            out.surfaces[s].rows = 1;
            out.surfaces[s].cols = count;
            out.surfaces[s].first = first < 0 ? 0 : first;
        }

        // grouped pairs in first-group-major order
        std::vector<int> pair_of(static_cast<std::size_t>(G) * G, -1);
        for (const auto &p : t.pairs)
        {
            const int a = grouping.group_of_unit[p.first], b = grouping.group_of_unit[p.second];
            pair_of[static_cast<std::size_t>(a) * G + b] = 0;
        }
        for (int a = 0; a < G; ++a)
            for (int b = 0; b < G; ++b)
                if (pair_of[static_cast<std::size_t>(a) * G + b] == 0)
                {
                    pair_of[static_cast<std::size_t>(a) * G + b] = out.pair_count();
                    out.pairs.push_back({a, b});
                }
        out.rebuild_pair_lookup();

        for (int k = 0; k < t.users; ++k)
        {
            Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(t.antennas, G);
            for (int u = 0; u < N; ++u)
                f.col(grouping.group_of_unit[u]) += t.single[k].col(u);
            Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(t.antennas, out.pair_count());
            for (int p = 0; p < t.pair_count(); ++p)
            {
                const int a = grouping.group_of_unit[t.pairs[p].first], b = grouping.group_of_unit[t.pairs[p].second];
                g.col(pair_of[static_cast<std::size_t>(a) * G + b]) += t.dbl[k].col(p);
            }
            out.single.push_back(std::move(f));
            out.dbl.push_back(std::move(g));
        }
        return out;
    }

    // Expands per-group coefficients back to per-unit coefficients
    inline ReflectionState expand_grouped_state(const ReflectionState &grouped, const Grouping &grouping)
    {
        ReflectionState s;
        for (int grp : grouping.group_of_unit)
            s.values.push_back(grouped[grp]);
        return s;
    }

    enum class Setup
    {
        full,
        single_only,
        double_only,
        no_irs
    };

    inline std::string to_string(Setup s)
    {
        switch (s)
        {
        case Setup::full:
            return "full";
        case Setup::single_only:
            return "single";
        case Setup::double_only:
            return "double";
        default:
            return "none";
        }
    }

    inline Setup parse_setup(const std::string &name)
    {
        if (name == "full")
            return Setup::full;
        if (name == "single")
            return Setup::single_only;
        if (name == "double")
            return Setup::double_only;
        if (name == "none")
            return Setup::no_irs;
        throw std::invalid_argument("unknown setup '" + name + "' (expected full, single, double or none)");
    }

    // Zeroes the reflection components a setup excludes
    inline ChannelTensors mask_setup(ChannelTensors t, Setup setup)
    {
        if (setup == Setup::double_only || setup == Setup::no_irs)
            for (auto &f : t.single)
                f.setZero();
        if (setup == Setup::single_only || setup == Setup::no_irs)
            for (auto &g : t.dbl)
                g.setZero();
        return t;
    }

    // Text dump, one "re im" entry per line: direct (k, m), single (k, unit, m), double (k, pair, m)
    inline void write_tensor_dump(std::ostream &os, const ChannelTensors &t)
    {
        char buf[96];
        auto put = [&](const cd &v)
        {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", v.real(), v.imag());
            os << buf;
        };
        os << "# users " << t.users << " antennas " << t.antennas << " units " << t.units() << " pairs "
           << t.pair_count() << " layout_hash " << t.layout_hash << " seed " << t.seed << "\n";
        os << "# direct\n";
        for (int k = 0; k < t.users; ++k)
            for (int m = 0; m < t.antennas; ++m)
                put(t.direct(m, k));
        os << "# single\n";
        for (int k = 0; k < t.users; ++k)
            for (int u = 0; u < t.units(); ++u)
                for (int m = 0; m < t.antennas; ++m)
                    put(t.single[k](m, u));
        os << "# double\n";
        for (int k = 0; k < t.users; ++k)
            for (int p = 0; p < t.pair_count(); ++p)
                for (int m = 0; m < t.antennas; ++m)
                    put(t.dbl[k](m, p));
    }
}

#endif
