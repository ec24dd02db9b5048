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
using namespace irsbs_test;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    ChannelTensors tensors_for(const SimConfig &c, std::uint64_t seed)
    {
        ChannelTensors t = build_tensors(sample_paths(c, seed), build_layout(c), c.pattern);
        t.seed = seed;
        return t;
    }

    // Isotropic antennas make the reflected components comparable to the direct one
    SimConfig strong_config()
    {
        SimConfig c = small_config();
        c.pattern = AntennaPattern::isotropic;
        return c;
    }

    ReflectionState random_state(int n, std::uint64_t seed)
    {
        Rng rng(seed);
        return ReflectionState::random(n, rng);
    }

    double objective_lu(const Eigen::MatrixXcd &A, const Eigen::MatrixXcd &B, cd v)
    {
        return log2det_lu(A + v * B + std::conj(v) * B.adjoint());
    }
}

TEST_CASE("Single-unit update matrices reproduce the sum rate")
{
    const SimConfig c = strong_config();
    const ChannelTensors t = tensors_for(c, 11);
    const RateParams p = RateParams::from(c);
    std::mt19937_64 gen(3);
    ReflectionState s = random_state(t.units(), 4);
    for (int u : {0, 5, t.units() - 1})
    {
        const UpdateMatrices m = compute_update_matrices(t, s, u, p);
        CHECK((m.A - m.A.adjoint()).norm() <= 1e-12 * m.A.norm());
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m.A);
        CHECK(eig.eigenvalues().minCoeff() >= 1.0 - 1e-9);
        for (int trial = 0; trial < 5; ++trial)
        {
            const cd v = random_phasor(gen);
            ReflectionState q = s;
            q[u] = v;
            const double direct = sum_rate(assemble_effective_channel(t, q), p);
            REQUIRE_THAT(objective_lu(m.A, m.B, v), WithinRel(direct, 1e-9));
        }
    }
    CHECK_THROWS(compute_update_matrices(t, s, t.units(), p));
}

TEST_CASE("Phase objective agrees with a dense determinant")
{
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial)
    {
        const int M = 2 + trial % 5;
        const Eigen::MatrixXcd G = random_matrix(M, 2, gen);
        const Eigen::MatrixXcd C = random_matrix(M, 2, gen);
        const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(M, M) + C * C.adjoint() + G * G.adjoint();
        const Eigen::MatrixXcd B = G * C.adjoint();
        const PhaseObjective obj(A, B);
        CHECK(obj.rank() <= 2);
        for (int k = 0; k < 5; ++k)
        {
            const cd v = random_phasor(gen) * std::sqrt(std::uniform_real_distribution<double>(0, 1)(gen));
            REQUIRE_THAT(obj.value(v), WithinRel(objective_lu(A, B, v), 1e-9));

            // ascent direction equals the (Re, Im) gradient
            const double h = 1e-6;
            const double dre = (obj.value(v + h) - obj.value(v - h)) / (2 * h);
            const double dim = (obj.value(v + cd(0, h)) - obj.value(v - cd(0, h))) / (2 * h);
            const cd g = obj.ascent(v);
            REQUIRE_THAT(g.real(), WithinAbs(dre, 1e-5 * (1 + std::abs(dre))));
            REQUIRE_THAT(g.imag(), WithinAbs(dim, 1e-5 * (1 + std::abs(dim))));
        }
    }
    CHECK_THROWS(PhaseObjective(-Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Zero(2, 2)));
    Eigen::MatrixXcd nonherm = Eigen::MatrixXcd::Identity(2, 2);
    nonherm(0, 1) = 0.5;
    CHECK_THROWS(PhaseObjective(nonherm, Eigen::MatrixXcd::Zero(2, 2)));
}

TEST_CASE("Element subproblem special cases")
{
    SECTION("no coupling keeps the current coefficient")
    {
        const Eigen::MatrixXcd A = 2.0 * Eigen::MatrixXcd::Identity(3, 3);
        const cd current = std::polar(1.0, 0.4);
        const SubproblemSolution s = solve_element_subproblem(A, Eigen::MatrixXcd::Zero(3, 3), current);
        CHECK(s.theta == current);
        CHECK_THAT(s.value, WithinRel(3.0, 1e-12));
    }

    SECTION("scalar problem has a closed form")
    {
        std::mt19937_64 gen(9);
        for (int trial = 0; trial < 20; ++trial)
        {
            const cd b = random_phasor(gen) * (0.1 + 0.3 * trial / 20.0);
            const double a = 1.0 + 2.0 * std::abs(b);
            Eigen::MatrixXcd A(1, 1), B(1, 1);
            A << a;
            B << b;
            const SubproblemSolution s = solve_element_subproblem(A, B, random_phasor(gen));
            REQUIRE(std::abs(s.theta - std::conj(b) / std::abs(b)) < 1e-6);
            REQUIRE_THAT(s.value, WithinAbs(std::log2(a + 2.0 * std::abs(b)), 1e-10));
        }
    }
}

TEST_CASE("Element subproblem reaches the dense-grid optimum")
{
    const SimConfig c = strong_config();
    const ChannelTensors t = tensors_for(c, 21);
    const RateParams p = RateParams::from(c);
    const ReflectionState s = random_state(t.units(), 8);
    for (int u = 0; u < t.units(); u += 3)
    {
        const UpdateMatrices m = compute_update_matrices(t, s, u, p);
        const PhaseObjective obj(m.A, m.B);
        double grid_best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < 65536; ++i)
            grid_best = std::max(grid_best, obj.value(std::polar(1.0, 2.0 * pi * i / 65536)));
        const SubproblemSolution sol = solve_element_subproblem(m.A, m.B, s[u]);
        REQUIRE(std::abs(std::abs(sol.theta) - 1.0) < 1e-12);
        REQUIRE(sol.value >= grid_best - 1e-9);
        REQUIRE(sol.value >= obj.value(s[u]));
        REQUIRE_THAT(sol.value, WithinAbs(objective_lu(m.A, m.B, sol.theta), 1e-9));
    }
}

TEST_CASE("Relaxed element objective is concave on the unit disk")
{
    const SimConfig c = strong_config();
    const ChannelTensors t = tensors_for(c, 22);
    const UpdateMatrices m = compute_update_matrices(t, random_state(t.units(), 1), 2, RateParams::from(c));
    const PhaseObjective obj(m.A, m.B);
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> rad(0.0, 1.0);
    for (int i = 0; i < 1000; ++i)
    {
        const cd x = random_phasor(gen) * std::sqrt(rad(gen));
        const cd y = random_phasor(gen) * std::sqrt(rad(gen));
        REQUIRE(obj.value(0.5 * (x + y)) >= 0.5 * (obj.value(x) + obj.value(y)) - 1e-9);
    }
}

TEST_CASE("Successive refinement")
{
    const SimConfig c = strong_config();
    const ChannelTensors t = tensors_for(c, 31);
    const RateParams p = RateParams::from(c);
    SrParams sp;
    sp.T = 20;

    const OptimizerResult a = successive_refinement(t, sp, p, 7);
    REQUIRE(a.trace.steps.size() >= 2);
    CHECK(a.trace.non_decreasing());
    CHECK(a.theta.unit_modulus(1e-12));
    CHECK_THAT(a.rate, WithinRel(sum_rate(assemble_effective_channel(t, a.theta), p), 1e-12));
    CHECK(a.rate > a.trace.steps.front().rate);
    CHECK(a.iterations <= sp.max_iterations);

    SECTION("deterministic for a seed")
    {
        const OptimizerResult b = successive_refinement(t, sp, p, 7);
        CHECK(b.theta.values == a.theta.values);
        CHECK(b.rate == a.rate);
    }

    SECTION("unchanged by a power-of-two rescaling of channel and power")
    {
        ChannelTensors scaled = t;
        scaled.direct *= 2.0;
        for (int k = 0; k < t.users; ++k)
        {
            scaled.single[k] *= 2.0;
            scaled.dbl[k] *= 2.0;
        }
        const RateParams q{p.P / 4.0, p.sigma2};
        const OptimizerResult b = successive_refinement(scaled, sp, q, 7);
        CHECK(b.theta.values == a.theta.values);
        CHECK_THAT(b.rate, WithinRel(a.rate, 1e-12));
    }

    SECTION("no single-unit change improves the converged state noticeably")
    {
        SrParams tight = sp;
        tight.epsilon = 1e-9;
        tight.max_iterations = 500;
        const OptimizerResult r = successive_refinement(t, tight, p, 7);
        for (int u = 0; u < t.units(); ++u)
        {
            const UpdateMatrices m = compute_update_matrices(t, r.theta, u, p);
            REQUIRE(solve_element_subproblem(m.A, m.B, r.theta[u]).value <= r.rate + 1e-6);
        }
    }

    SECTION("zero channel")
    {
        PathSet paths = sample_paths(c, 31);
        for (auto &u : paths.users)
            for (auto &l : u)
                l.gain = 0.0;
        const OptimizerResult z = successive_refinement(build_tensors(paths, build_layout(c), c.pattern), sp, p, 1);
        CHECK(z.rate == 0.0);
        CHECK(z.iterations == 1);
    }
}

TEST_CASE("Random phase search")
{
    const SimConfig c = strong_config();
    const ChannelTensors t = tensors_for(c, 41);
    const RateParams p = RateParams::from(c);
    ChannelOracle oracle = make_oracle(t, p);

    const OptimizerResult one = rpa(oracle, 1, 3);
    CHECK(one.queries == 1);
    CHECK(one.rate == sum_rate(assemble_effective_channel(t, one.theta), p));

    ChannelOracle fresh = oracle.clone();
    const OptimizerResult r = rpa(fresh, 300, 3);
    CHECK(r.queries == 300);
    CHECK(fresh.queries() == 300);
    REQUIRE(r.trace.steps.size() == 300);
    CHECK(r.trace.non_decreasing());
    CHECK(r.trace.steps.front().rate == one.rate);
    for (std::size_t i = 0; i < r.trace.steps.size(); ++i)
        CHECK(r.trace.steps[i].queries == i + 1);
    CHECK(r.rate == r.trace.final_rate());
    CHECK(r.rate == sum_rate(assemble_effective_channel(t, r.theta), p));

    // independent replay of the same states: the reported value is their maximum
    Rng replay(derive_seed(3, {tag(Stream::rpa)}));
    double best = 0.0;
    for (int i = 0; i < 300; ++i)
        best = std::max(best, sum_rate(assemble_effective_channel(t, ReflectionState::random(t.units(), replay)), p));
    CHECK(r.rate == best);

    CHECK_THROWS(rpa(fresh, 0, 3));
}

TEST_CASE("Improved random phase search")
{
    const SimConfig c = strong_config();
    const ChannelTensors t = tensors_for(c, 51);
    const RateParams p = RateParams::from(c);

    SECTION("without per-block trials it is random search with T0 draws")
    {
        ChannelOracle o1 = make_oracle(t, p), o2 = make_oracle(t, p);
        IrpaParams ip;
        ip.T0 = 150;
        ip.Tj = 0;
        const OptimizerResult a = irpa(o1, ip, 9);
        const OptimizerResult b = rpa(o2, 150, 9);
        CHECK(a.rate == b.rate);
        CHECK(a.theta.values == b.theta.values);
        CHECK(a.queries == 150);
    }

    SECTION("query count and monotone trace")
    {
        ChannelOracle o = make_oracle(t, p);
        IrpaParams ip;
        ip.T0 = 50;
        ip.Tj = 7;
        ip.epsilon = 1e-300;
        ip.max_rounds = 3;
        const OptimizerResult r = irpa(o, ip, 9);
        CHECK(r.iterations <= 3);
        CHECK(r.queries == 50u + static_cast<std::uint64_t>(r.iterations) * 4u * 7u);
        CHECK(o.queries() == r.queries);
        CHECK(r.trace.non_decreasing());
        CHECK(r.rate == sum_rate(assemble_effective_channel(t, r.theta), p));

        ChannelOracle o2 = make_oracle(t, p);
        CHECK(r.rate >= rpa(o2, 50, 9).rate);
    }

    SECTION("modular blocks")
    {
        SimConfig m = c;
        m.N_j2 = {8, 8, 8, 8};
        m.eta = 4;
        ChannelOracle o = make_oracle(tensors_for(m, 3), RateParams::from(m));
        IrpaParams ip;
        ip.T0 = 10;
        ip.Tj = 3;
        ip.epsilon = 1e-300;
        ip.max_rounds = 2;
        const OptimizerResult r = irpa(o, ip, 1, 4);
        CHECK(r.queries == 10u + static_cast<std::uint64_t>(r.iterations) * 4u * 3u);
    }
}

TEST_CASE("DFT codebook")
{
    SECTION("columns")
    {
        const Eigen::VectorXcd w = dft_column(4, 1);
        CHECK(std::abs(w[0] - cd(1, 0)) < 1e-15);
        CHECK(std::abs(w[1] - cd(0, -1)) < 1e-15);
        CHECK(std::abs(w[2] - cd(-1, 0)) < 1e-15);
        CHECK(std::abs(w[3] - cd(0, 1)) < 1e-15);
        const Eigen::VectorXcd w0 = dft_column(5, 0);
        CHECK((w0 - Eigen::VectorXcd::Ones(5)).norm() == 0.0);
    }

    SECTION("exhaustive search over the default layout")
    {
        const SimConfig c;
        const ChannelTensors t = tensors_for(c, 61);
        ChannelOracle o = make_oracle(t, RateParams::from(c));
        CHECK(dft_codebook_size(o.surfaces()) == 4096);
        const OptimizerResult r = dft_codebook_search(o);
        CHECK(r.queries == 4096);
        CHECK(o.queries() == 4096);
        CHECK(r.theta.unit_modulus(1e-12));
        CHECK(r.trace.non_decreasing());
        CHECK(r.trace.steps.back().queries == 4096);
        ChannelOracle o2 = make_oracle(t, RateParams::from(c));
        CHECK(r.rate >= o2.rate(ReflectionState::ones(t.units())));
        CHECK(r.rate == o2.rate(r.theta));
    }

    SECTION("oversized codebooks are refused")
    {
        const SimConfig c = small_config();
        ChannelOracle o = make_oracle(tensors_for(c, 1), RateParams::from(c));
        CHECK_THROWS_AS(dft_codebook_search(o, 100), std::length_error);
        CHECK(o.queries() == 0);
    }
}
