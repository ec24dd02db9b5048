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
#include "catch_amalgamated.hpp"
#include "test_support.hpp"

using namespace irsbs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Steering vector entries")
{
    const auto a = steering_vector(0.0, 4);
    for (int m = 0; m < 4; ++m)
        CHECK(std::abs(a[m] - cd(1.0, 0.0)) < 1e-15);
    const auto b = steering_vector(1.0, 2);
    CHECK(std::abs(b[1] - cd(-1.0, 0.0)) < 1e-15);
    const auto c = steering_vector(0.5, 3);
    CHECK(std::abs(c[1] - cd(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(c[2] - cd(-1.0, 0.0)) < 1e-15);
    CHECK_THROWS(steering_vector(0.1, 0));

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 100; ++i)
    {
        const auto v = steering_vector(u(gen), 16);
        for (int m = 0; m < 16; ++m)
            CHECK(std::abs(std::abs(v[m]) - 1.0) < 1e-12);
    }
}

TEST_CASE("Arrival angles on the surfaces for axis-aligned directions")
{
    const Direction plus_x{pi / 2, pi / 2};
    CHECK_THAT(aoa_transform(plus_x, 1).theta, WithinAbs(0.0, 1e-7));
    CHECK_THAT(aoa_transform(plus_x, 0).theta, WithinAbs(pi, 1e-7));
    const Direction plus_z{pi / 2, 0.0};
    CHECK_THAT(aoa_transform(plus_z, 3).theta, WithinAbs(0.0, 1e-7));
    CHECK_THAT(aoa_transform(plus_z, 2).theta, WithinAbs(pi, 1e-7));
    CHECK(aoa_transform(plus_z, 3).phi == 0.0);
    CHECK_THROWS(aoa_transform(plus_z, 4));
}

TEST_CASE("Arrival angles reproduce the direction cosines")
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> th(0.0, pi), ph(0.0, 2.0 * pi);
    for (int i = 0; i < 10000; ++i)
    {
        const Direction d{th(gen), ph(gen)};
        const Vec3 u = d.unit();
        CHECK(std::abs(u.norm() - 1.0) < 1e-12);
        for (int j = 0; j < 4; ++j)
        {
            const IrsAngles a = aoa_transform(d, j);
            const double identity = std::pow(std::cos(a.theta), 2) +
                                    std::pow(std::sin(a.theta), 2) *
                                        (std::pow(std::cos(a.phi), 2) + std::pow(std::sin(a.phi), 2));
            REQUIRE(std::abs(identity - 1.0) < 1e-12);
            REQUIRE(std::abs(std::cos(a.theta) - u.dot(face_normals()[j])) < 1e-12);
            // in-plane components: rows along y, columns along the lateral axis
            REQUIRE(std::abs(std::sin(a.theta) * std::cos(a.phi) - u.y()) < 1e-12);
            REQUIRE(std::abs(std::sin(a.theta) * std::sin(a.phi) - u[lateral_axis(j)]) < 1e-12);
        }
    }
    // closed-form angles on all four surfaces for one direction
    const Direction d{0.7, 2.1};
    const double st = std::sin(0.7), sp = std::sin(2.1), cp = std::cos(2.1);
    CHECK_THAT(std::cos(aoa_transform(d, 1).theta), WithinAbs(st * sp, 1e-12));
    CHECK_THAT(std::cos(aoa_transform(d, 0).theta), WithinAbs(-st * sp, 1e-12));
    CHECK_THAT(std::cos(aoa_transform(d, 3).theta), WithinAbs(st * cp, 1e-12));
    CHECK_THAT(std::cos(aoa_transform(d, 2).theta), WithinAbs(-st * cp, 1e-12));
}

TEST_CASE("Surface array response")
{
    const double lambda = 0.05, d_I = 0.025;
    CHECK(std::abs(irs_array_response({0.3, 1.0}, 0, 0, d_I, lambda, 0.0) - cd(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(irs_array_response({0.3, 1.0}, 0, 0, d_I, lambda, pi / 2) - cd(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(irs_array_response({pi / 2, pi / 2}, 0, 1, d_I, lambda, 0.0) - cd(-1.0, 0.0)) < 1e-12);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> th(0.0, pi), ph(0.0, 2.0 * pi);
    for (int i = 0; i < 1000; ++i)
        CHECK(std::abs(std::abs(irs_array_response({th(gen), ph(gen)}, i % 5, i % 7, d_I, lambda, ph(gen))) - 1.0) <
              1e-12);
}

TEST_CASE("Element reflection gain")
{
    const double lambda = 0.05, A = 0.025 * 0.025;
    CHECK(element_reflection_gain(pi / 3, pi / 2, A, lambda, ReflectionMode::element_wise) == 0.0);
    CHECK(element_reflection_gain(pi / 2, 0.1, A, lambda, ReflectionMode::far_field_isotropic) == 0.0);
    CHECK(element_reflection_gain(2.0, 0.1, A, lambda, ReflectionMode::element_wise) == 0.0);
    CHECK_THAT(element_reflection_gain(0.0, 0.0, A, lambda, ReflectionMode::element_wise),
               WithinRel(2.0 * pi * pi, 1e-12));
    CHECK(element_reflection_gain(pi / 4, pi / 4, A, lambda, ReflectionMode::far_field_isotropic) == 2.0);
    // the separable form used by the tensor builder
    for (double a : {0.0, 0.4, 1.2, 1.5})
        for (double d : {0.1, 0.9, 1.55})
            CHECK_THAT(element_reflection_gain(a, d, A, lambda, ReflectionMode::element_wise),
                       WithinRel(2.0 * reflection_side_factor(a, A, lambda, ReflectionMode::element_wise) *
                                     reflection_side_factor(d, A, lambda, ReflectionMode::element_wise),
                                 1e-14));
    // continuity just below the half-space edge
    CHECK(element_reflection_gain(pi / 2 - 1e-9, 0.0, A, lambda, ReflectionMode::element_wise) < 1e-7);
}

TEST_CASE("Antenna element gain")
{
    CHECK(antenna_gain(Vec3(0.3, -0.2, 0.9), AntennaPattern::isotropic) == 1.0);
    CHECK_THAT(antenna_gain(Vec3(0, 1, 0), AntennaPattern::tr38901), WithinRel(std::pow(10.0, 0.8), 1e-12));
    CHECK_THAT(antenna_gain(Vec3(0, -1, 0), AntennaPattern::tr38901), WithinRel(std::pow(10.0, -2.2), 1e-12));
    // 65 degrees off boresight in azimuth costs 12 dB
    const double az = 65.0 * pi / 180.0;
    CHECK_THAT(antenna_gain(Vec3(std::sin(az), std::cos(az), 0.0), AntennaPattern::tr38901),
               WithinRel(std::pow(10.0, -0.4), 1e-12));
    CHECK_THAT(antenna_gain(Direction{0.0, 0.0}, AntennaPattern::tr38901), WithinRel(std::pow(10.0, 0.8), 1e-12));
}

TEST_CASE("Line-of-sight gain between two points")
{
    const double lambda = 0.05;
    const Vec3 o(0, 0, 0);
    const cd g1 = los_gain(o, Vec3(lambda, 0, 0), lambda);
    CHECK_THAT(std::abs(g1), WithinRel(1.0 / (4.0 * pi), 1e-12));
    CHECK(std::abs(g1 / std::abs(g1) - cd(1.0, 0.0)) < 1e-12);
    const cd g2 = los_gain(o, Vec3(0, 2 * lambda, 0), lambda);
    CHECK_THAT(std::abs(g2), WithinRel(std::abs(g1) / 2.0, 1e-12));
    const cd g4 = los_gain(o, Vec3(0, 0, lambda / 4), lambda);
    CHECK(std::abs(g4 / std::abs(g4) - cd(0.0, -1.0)) < 1e-12);
    const Vec3 p(0.1, -0.2, 0.03), q(-0.05, 0.04, 0.2);
    CHECK(los_gain(p, q, lambda) == los_gain(q, p, lambda));
    CHECK_THROWS(los_gain(p, p, lambda));
}
