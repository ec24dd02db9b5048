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
#ifndef IRSBS_PROPAGATION_HPP
#define IRSBS_PROPAGATION_HPP

#include "config.hpp"
#include "geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace irsbs
{
    using cd = std::complex<double>;
    inline constexpr double pi = std::numbers::pi;
    inline constexpr cd imag_unit{0.0, 1.0};

    inline double wrap_two_pi(double angle)
    {
        double a = std::fmod(angle, 2.0 * pi);
        if (a < 0.0)
            a += 2.0 * pi;
        if (a >= 2.0 * pi)
            a = 0.0;
        return a;
    }

    // Direction in the radome frame.
    // theta: polar angle from the +y boresight, phi: azimuth in the x-z plane from +z toward +x.
    // Points from the array toward the source.
    struct Direction
    {
        double theta = 0.0;
        double phi = 0.0;

        Vec3 unit() const
        {
            const double s = std::sin(theta);
            return {s * std::sin(phi), std::cos(theta), s * std::cos(phi)};
        }

        static Direction from_vector(const Vec3 &v)
        {
            const Vec3 u = v.normalized();
            Direction d;
            d.theta = std::acos(std::clamp(u.y(), -1.0, 1.0));
            d.phi = (u.x() == 0.0 && u.z() == 0.0) ? 0.0 : wrap_two_pi(std::atan2(u.x(), u.z()));
            return d;
        }
    };

    // Elevation from the surface normal and azimuth in the surface plane
    struct IrsAngles
    {
        double theta = 0.0;
        double phi = 0.0;
    };

    // e(phi, n) = [1, e^{i pi phi}, ..., e^{i (n-1) pi phi}]
    inline Eigen::VectorXcd steering_vector(double phase_increment, int count)
    {
        if (count < 1)
            throw std::invalid_argument("steering_vector: count must be >= 1");
        Eigen::VectorXcd v(count);
        for (int m = 0; m < count; ++m)
            v[m] = std::exp(imag_unit * (pi * phase_increment * m));
        return v;
    }

    // In-plane direction cosines seen by a surface: first along y (rows), second along its lateral axis (columns)
    inline std::pair<double, double> in_plane_components(const Vec3 &u, int face)
    {
        return {u.y(), face < 2 ? u.z() : u.x()};
    }

    inline IrsAngles aoa_transform(const Direction &dir, int face)
    {
        if (face < 0 || face >= surfaces_per_module)
            throw std::out_of_range("aoa_transform: face index must be in 0..3");
        const Vec3 u = dir.unit();
        const double c = std::clamp(u.dot(face_normals()[face]), -1.0, 1.0);
        const auto [along_rows, along_cols] = in_plane_components(u, face);
        IrsAngles a;
        a.theta = std::acos(c);
        const double s = std::hypot(along_rows, along_cols);
        a.phi = (s < 1e-15) ? 0.0 : wrap_two_pi(std::atan2(along_cols, along_rows));
        return a;
    }

    // Response of element (row, col) (0-based) of a surface for an incoming plane wave
    inline cd irs_array_response(const IrsAngles &angles, int row, int col, double d_I, double wavelength,
                                 double initial_phase)
    {
        const double st = std::sin(angles.theta);
        const double arg = pi * (2.0 * d_I / wavelength) *
                           (row * st * std::cos(angles.phi) + col * st * std::sin(angles.phi));
        return std::exp(imag_unit * (initial_phase + arg));
    }

    enum class ReflectionMode
    {
        element_wise,      // cosine-weighted aperture gain on both sides
        far_field_isotropic // constant gain of 2 inside the front half-space
    };

    // Per-side factor p(theta): gain = 2 * p(theta_A) * p(theta_D)
    inline double reflection_side_factor(double theta, double area, double wavelength, ReflectionMode mode)
    {
        if (!(theta < pi / 2.0))
            return 0.0;
        if (mode == ReflectionMode::far_field_isotropic)
            return 1.0;
        return area * std::cos(theta) / (wavelength * wavelength / (4.0 * pi));
    }

    inline double element_reflection_gain(double theta_a, double theta_d, double area, double wavelength,
                                          ReflectionMode mode)
    {
        if (!(theta_a < pi / 2.0) || !(theta_d < pi / 2.0))
            return 0.0;
        if (mode == ReflectionMode::far_field_isotropic)
            return 2.0;
        const double aperture = wavelength * wavelength / (4.0 * pi);
        return 2.0 * (area * std::cos(theta_a) / aperture) * (area * std::cos(theta_d) / aperture);
    }

    // Linear power gain of a BS antenna element toward a radome-frame direction
    inline double antenna_gain(const Vec3 &u, AntennaPattern pattern)
    {
        if (pattern == AntennaPattern::isotropic)
            return 1.0;
        constexpr double deg = 180.0 / pi;
        const double theta = std::acos(std::clamp(u.z() / u.norm(), -1.0, 1.0)) * deg;
        const double phi = std::atan2(u.x(), u.y()) * deg;
        const double a_v = -std::min(12.0 * std::pow((theta - 90.0) / 65.0, 2), 30.0);
        const double a_h = -std::min(12.0 * std::pow(phi / 65.0, 2), 30.0);
        const double attenuation = -std::min(-(a_v + a_h), 30.0);
        return std::pow(10.0, (8.0 + attenuation) / 10.0);
    }

    inline double antenna_gain(const Direction &dir, AntennaPattern pattern) { return antenna_gain(dir.unit(), pattern); }

    // Free-space line-of-sight gain between two points
    inline cd los_gain(const Vec3 &a, const Vec3 &b, double wavelength)
    {
        const double d = (a - b).norm();
        if (!(d > 0.0))
            throw std::invalid_argument("los_gain: coincident points");
        return (wavelength / (4.0 * pi * d)) * std::exp(-imag_unit * (2.0 * pi * d / wavelength));
    }

    // Elevation of `target` seen from a point on a surface with normal `normal`
    inline double elevation_from_surface(const Vec3 &origin, const Vec3 &normal, const Vec3 &target)
    {
        const Vec3 d = target - origin;
        return std::acos(std::clamp(d.dot(normal) / d.norm(), -1.0, 1.0));
    }
}

#endif
