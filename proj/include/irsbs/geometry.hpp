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
#ifndef IRSBS_GEOMETRY_HPP
#define IRSBS_GEOMETRY_HPP

#include "config.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <vector>

namespace irsbs
{
    using Vec3 = Eigen::Vector3d;

    // Inward normals of the four surfaces around a module (face 0..3)
    inline const std::array<Vec3, 4> &face_normals()
    {
        static const std::array<Vec3, 4> normals = {Vec3(-1.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0),
                                                    Vec3(0.0, 0.0, -1.0), Vec3(0.0, 0.0, 1.0)};
        return normals;
    }

    // Faces 0 and 1 extend laterally along z, faces 2 and 3 along x
    inline int lateral_axis(int face) { return face < 2 ? 2 : 0; }

    struct SurfaceInfo
    {
        int module = 0;
        int face = 0;        // 0..3
        int rows = 0;        // elements along y
        int cols = 0;        // elements along the lateral axis
        int first = 0;       // global index of the surface's first element
        Vec3 normal;         // unit normal, pointing into the module
        Vec3 reference;      // a point on the surface plane
        int size() const { return rows * cols; }
    };

    struct RadomeLayout
    {
        int M_x = 0, M_z = 0;
        int module_count = 1;
        double wavelength = 0.0;
        double antenna_spacing = 0.0;
        double irs_spacing = 0.0;
        double element_area = 0.0;
        std::array<double, 4> initial_phases{};

        std::vector<Vec3> antenna_positions;   // index m = iz * M_x + ix
        std::vector<int> module_of_antenna;
        std::vector<Vec3> module_centers;
        std::vector<SurfaceInfo> surfaces;     // module-major, faces in order
        std::vector<Vec3> element_positions;   // surface by surface, column-major inside a surface
        std::vector<int> surface_of_element;
        std::vector<int> row_of_element;
        std::vector<int> col_of_element;

        int antenna_count() const { return static_cast<int>(antenna_positions.size()); }
        int element_count() const { return static_cast<int>(element_positions.size()); }
        int module_of_element(int e) const { return surfaces[surface_of_element[e]].module; }
        int face_of_element(int e) const { return surfaces[surface_of_element[e]].face; }
        const Vec3 &normal_of_element(int e) const { return surfaces[surface_of_element[e]].normal; }

        // Reflections only couple elements on different surfaces of the same module
        bool interacting(int a, int b) const
        {
            return surface_of_element[a] != surface_of_element[b] && module_of_element(a) == module_of_element(b);
        }

        // FNV-1a over all coordinates and structural integers
        std::uint64_t hash() const
        {
            std::uint64_t h = 14695981039346656037ull;
            auto mix = [&h](std::uint64_t v)
            {
                for (int i = 0; i < 8; ++i)
                {
                    h ^= (v >> (8 * i)) & 0xffu;
                    h *= 1099511628211ull;
                }
            };
            auto mix_vec = [&](const Vec3 &p)
            {
                for (int i = 0; i < 3; ++i)
                    mix(std::bit_cast<std::uint64_t>(p[i]));
            };
            mix(static_cast<std::uint64_t>(M_x));
            mix(static_cast<std::uint64_t>(M_z));
            mix(static_cast<std::uint64_t>(module_count));
            for (const auto &p : antenna_positions)
                mix_vec(p);
            for (const auto &p : element_positions)
                mix_vec(p);
            for (int s : surface_of_element)
                mix(static_cast<std::uint64_t>(s));
            return h;
        }
    };

    namespace detail
    {
        // Half-width of a module's radome cross-section along x (axis 0) or z (axis 2).
        // The wall sits lambda/2 beyond the outermost antenna, and is pushed further out if the
        // perpendicular surfaces would not fit between the walls.
        inline double wall_offset(const SimConfig &cfg, int axis)
        {
            const int side = cfg.module_side();
            const int antennas = (axis == 0 ? cfg.M_x : cfg.M_z) / side;
            const double half_aperture = 0.5 * (antennas - 1) * cfg.d_A();
            double offset = half_aperture + 0.5 * cfg.wavelength();
            // faces spanning this axis laterally: 2,3 span x; 0,1 span z
            const int f0 = axis == 0 ? 2 : 0;
            for (int f = f0; f < f0 + 2; ++f)
                offset = std::max(offset, 0.5 * (cfg.N_j2[f] / side) * cfg.d_I());
            return offset;
        }

        inline void append_module(RadomeLayout &layout, const SimConfig &cfg, int module, const Vec3 &center)
        {
            const int side = cfg.module_side();
            const double d_I = cfg.d_I();
            const double wall_x = wall_offset(cfg, 0);
            const double wall_z = wall_offset(cfg, 2);
            for (int face = 0; face < surfaces_per_module; ++face)
            {
                SurfaceInfo s;
                s.module = module;
                s.face = face;
                s.rows = cfg.N_j1[face];
                s.cols = cfg.N_j2[face] / side;
                s.first = layout.element_count();
                s.normal = face_normals()[face];
                const double wall = face < 2 ? wall_x : wall_z;
                s.reference = center - wall * s.normal;
                const int surface_index = static_cast<int>(layout.surfaces.size());
                const int lat = lateral_axis(face);
                for (int c = 0; c < s.cols; ++c)
                    for (int r = 0; r < s.rows; ++r)
                    {
                        Vec3 p = s.reference;
                        p[1] = 0.5 * d_I + r * d_I;
                        p[lat] = center[lat] + (c - 0.5 * (s.cols - 1)) * d_I;
                        layout.element_positions.push_back(p);
                        layout.surface_of_element.push_back(surface_index);
                        layout.row_of_element.push_back(r);
                        layout.col_of_element.push_back(c);
                    }
                layout.surfaces.push_back(s);
            }
        }

        inline RadomeLayout empty_layout(const SimConfig &cfg)
        {
            RadomeLayout layout;
            layout.M_x = cfg.M_x;
            layout.M_z = cfg.M_z;
            layout.wavelength = cfg.wavelength();
            layout.antenna_spacing = cfg.d_A();
            layout.irs_spacing = cfg.d_I();
            layout.element_area = cfg.area();
            layout.initial_phases = cfg.initial_phases;
            return layout;
        }
    }

    // Antenna grid centred at the origin in the x-O-z plane, four surfaces per module.
    // Throws ConfigError if eta cannot split the array into equal square modules.
    inline RadomeLayout build_layout(const SimConfig &cfg)
    {
        cfg.validate();
        RadomeLayout layout = detail::empty_layout(cfg);
        const int side = cfg.module_side();
        layout.module_count = cfg.eta;
        const int mx = cfg.M_x / side, mz = cfg.M_z / side;
        const double d_A = cfg.d_A();

        for (int iz = 0; iz < cfg.M_z; ++iz)
            for (int ix = 0; ix < cfg.M_x; ++ix)
            {
                layout.antenna_positions.emplace_back((ix - 0.5 * (cfg.M_x - 1)) * d_A, 0.0,
                                                      (iz - 0.5 * (cfg.M_z - 1)) * d_A);
                layout.module_of_antenna.push_back((iz / mz) * side + ix / mx);
            }

        for (int bz = 0; bz < side; ++bz)
            for (int bx = 0; bx < side; ++bx)
            {
                const double cx = ((bx * mx + 0.5 * (mx - 1)) - 0.5 * (cfg.M_x - 1)) * d_A;
                const double cz = ((bz * mz + 0.5 * (mz - 1)) - 0.5 * (cfg.M_z - 1)) * d_A;
                layout.module_centers.emplace_back(cx, 0.0, cz);
            }
        for (int module = 0; module < cfg.eta; ++module)
            detail::append_module(layout, cfg, module, layout.module_centers[module]);
        return layout;
    }

    // One self-contained layout per module: its antennas and its four surfaces.
    // With eta = 1 the single entry equals build_layout(cfg).
    inline std::vector<RadomeLayout> module_partition(const SimConfig &cfg)
    {
        const RadomeLayout full = build_layout(cfg);
        if (full.module_count == 1)
            return {full};

        std::vector<RadomeLayout> parts;
        for (int module = 0; module < full.module_count; ++module)
        {
            RadomeLayout part = detail::empty_layout(cfg);
            part.module_count = 1;
            part.M_x = cfg.M_x / cfg.module_side();
            part.M_z = cfg.M_z / cfg.module_side();
            part.module_centers = {full.module_centers[module]};
            for (int m = 0; m < full.antenna_count(); ++m)
                if (full.module_of_antenna[m] == module)
                {
                    part.antenna_positions.push_back(full.antenna_positions[m]);
                    part.module_of_antenna.push_back(0);
                }
            for (const auto &s : full.surfaces)
            {
                if (s.module != module)
                    continue;
                SurfaceInfo copy = s;
                copy.module = 0;
                copy.first = part.element_count();
                const int surface_index = static_cast<int>(part.surfaces.size());
                for (int e = s.first; e < s.first + s.size(); ++e)
                {
                    part.element_positions.push_back(full.element_positions[e]);
                    part.surface_of_element.push_back(surface_index);
                    part.row_of_element.push_back(full.row_of_element[e]);
                    part.col_of_element.push_back(full.col_of_element[e]);
                }
                part.surfaces.push_back(copy);
            }
            parts.push_back(std::move(part));
        }
        return parts;
    }
}

#endif
