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
#ifndef IRSBS_OPTIMIZE_HPP
#define IRSBS_OPTIMIZE_HPP

#include "channel.hpp"
#include "random.hpp"
#include "rate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace irsbs
{
    struct SrParams
    {
        int T = 100;               // random initial states
        double epsilon = 1e-5;     // stop when a sweep gains less than this (bps/Hz)
        int max_iterations = 100;  // sweeps
        int grid = 64;             // circle search points per element update

        void validate() const
        {
            if (T < 1 || !(epsilon > 0.0) || max_iterations < 1 || grid < 4)
                throw std::invalid_argument("SrParams: need T >= 1, epsilon > 0, max_iterations >= 1, grid >= 4");
        }
    };

    struct IrpaParams
    {
        int T0 = 200;              // initial random states
        int Tj = 10;               // trials per block per round
        double epsilon = 1e-5;     // stop when a round gains less than this (bps/Hz)
        int max_rounds = 10;

        void validate() const
        {
            if (T0 < 1 || Tj < 0 || !(epsilon > 0.0) || max_rounds < 1)
                throw std::invalid_argument("IrpaParams: need T0 >= 1, Tj >= 0, epsilon > 0, max_rounds >= 1");
        }

        // Per-block trials so that T0 + max_rounds * 4 * Tj does not exceed the budget
        static IrpaParams for_budget(int t_total, int t0 = 200, int max_rounds = 10)
        {
            IrpaParams p;
            p.T0 = t0;
            p.max_rounds = max_rounds;
            p.Tj = std::max(0, (t_total - t0) / (surfaces_per_module * max_rounds));
            return p;
        }
    };

    struct TraceStep
    {
        int step = 0;
        double rate = 0.0;           // accepted value after this step, bps/Hz
        std::uint64_t queries = 0;   // cumulative oracle queries
    };

    struct OptimizerTrace
    {
        std::vector<TraceStep> steps;
        double wall_ms = 0.0;

        void record(double rate, std::uint64_t queries)
        {
            steps.push_back({static_cast<int>(steps.size()), rate, queries});
        }
        double final_rate() const { return steps.empty() ? 0.0 : steps.back().rate; }
        bool non_decreasing() const
        {
            for (std::size_t i = 1; i < steps.size(); ++i)
                if (steps[i].rate < steps[i - 1].rate)
                    return false;
            return true;
        }

        void write_csv(std::ostream &os) const
        {
            char buf[128];
            os << "step,accepted_rate_bps_hz,oracle_queries\n";
            for (const auto &s : steps)
            {
                std::snprintf(buf, sizeof(buf), "%d,%.10f,%llu\n", s.step, s.rate,
                              static_cast<unsigned long long>(s.queries));
                os << buf;
            }
        }
    };

    struct OptimizerResult
    {
        ReflectionState theta;
        OptimizerTrace trace;
        double rate = 0.0;
        std::uint64_t queries = 0;
        int iterations = 0;        // sweeps (SR) or rounds (IRPA)
    };

    struct UpdateMatrices
    {
        Eigen::MatrixXcd A;
        Eigen::MatrixXcd B;
    };

    namespace detail
    {
        // Columns of the double-reflection tensor that involve a given unit, with the partner unit
        struct UnitLinks
        {
            std::vector<std::vector<std::pair<int, int>>> links; // per unit: (pair index, partner)
        };

        inline UnitLinks unit_links(const ChannelTensors &t)
        {
            UnitLinks l;
            l.links.resize(t.units());
            for (int p = 0; p < t.pair_count(); ++p)
            {
                l.links[t.pairs[p].first].emplace_back(p, t.pairs[p].second);
                l.links[t.pairs[p].second].emplace_back(p, t.pairs[p].first);
            }
            return l;
        }

        // Coefficient of theta_unit in every h_k: antennas x users
        inline Eigen::MatrixXcd unit_gradient(const ChannelTensors &t, const ReflectionState &theta, int unit,
                                              const UnitLinks &links)
        {
            Eigen::MatrixXcd gamma(t.antennas, t.users);
            for (int k = 0; k < t.users; ++k)
            {
                gamma.col(k) = t.single[k].col(unit);
                for (const auto &[p, partner] : links.links[unit])
                    gamma.col(k) += t.dbl[k].col(p) * theta[partner];
            }
            return gamma;
        }

        inline UpdateMatrices update_matrices(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &gamma, cd current,
                                              double snr)
        {
            const Eigen::MatrixXcd C = H - current * gamma;
            const Eigen::Index M = H.rows();
            UpdateMatrices u;
            u.A = Eigen::MatrixXcd::Identity(M, M);
            u.A.noalias() += snr * (C * C.adjoint());
            u.A.noalias() += snr * (gamma * gamma.adjoint());
            u.A = 0.5 * (u.A + u.A.adjoint()).eval();
            u.B.noalias() = snr * (gamma * C.adjoint());
            return u;
        }
    }

    // A and B such that the sum rate as a function of one unit's coefficient v (|v| = 1) is
    // log2 det(A + v B + conj(v) B^H)
    inline UpdateMatrices compute_update_matrices(const ChannelTensors &t, const ReflectionState &theta, int unit,
                                                  const RateParams &params)
    {
        if (theta.size() != t.units())
            throw std::invalid_argument("compute_update_matrices: state size does not match tensors");
        if (unit < 0 || unit >= t.units())
            throw std::out_of_range("compute_update_matrices: unit index out of range");
        params.validate();
        const Eigen::MatrixXcd H = assemble_effective_channel(t, theta);
        const detail::UnitLinks links = detail::unit_links(t);
        return detail::update_matrices(H, detail::unit_gradient(t, theta, unit, links), theta[unit], params.snr());
    }

    // R(v) = log2 det(A + v B + conj(v) B^H), evaluated through the low-rank part of B
    class PhaseObjective
    {
    public:
        PhaseObjective(const Eigen::MatrixXcd &A, const Eigen::MatrixXcd &B)
        {
            const Eigen::Index M = A.rows();
            if (A.cols() != M || B.rows() != M || B.cols() != M)
                throw std::invalid_argument("PhaseObjective: A and B must be square and of equal size");
            const double scale = std::max(1.0, A.norm());
            if ((A - A.adjoint()).norm() > 1e-9 * scale)
                throw std::invalid_argument("PhaseObjective: A is not Hermitian");
            const Eigen::MatrixXcd As = 0.5 * (A + A.adjoint());
            Eigen::LLT<Eigen::MatrixXcd> llt(As);
            if (llt.info() != Eigen::Success)
                throw std::invalid_argument("PhaseObjective: A is not positive definite");
            const auto &L = llt.matrixLLT();
            log2det_A_ = 0.0;
            for (Eigen::Index i = 0; i < M; ++i)
                log2det_A_ += 2.0 * std::log(L(i, i).real()) / std::numbers::ln2;

            // C = L^-1 B L^-H = U V^H
            const Eigen::MatrixXcd Y = llt.matrixL().solve(B);
            const Eigen::MatrixXcd C = llt.matrixL().solve(Y.adjoint()).adjoint();
            Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(C);
            // round-off in the triangular solves would otherwise count as extra rank
            qr.setThreshold(1e-12);
            rank_ = static_cast<int>(qr.rank());
            if (rank_ == 0)
                return;
            const Eigen::MatrixXcd U = qr.householderQ() * Eigen::MatrixXcd::Identity(M, rank_);
            const Eigen::MatrixXcd R = qr.matrixR().topRows(rank_).template triangularView<Eigen::Upper>();
            const Eigen::MatrixXcd Vh = R * qr.colsPermutation().transpose();
            Eigen::MatrixXcd W(M, 2 * rank_);
            W << U, Vh.adjoint();
            gram_ = W.adjoint() * W;
        }

        int rank() const { return rank_; }

        // -inf where the matrix is not positive definite
        double value(cd v) const
        {
            if (rank_ == 0)
                return log2det_A_;
            const double det = rank_ <= small_rank ? determinant<SmallMatrix>(v) : determinant<Eigen::MatrixXcd>(v);
            if (!(det > 0.0))
                return -std::numeric_limits<double>::infinity();
            return log2det_A_ + std::log2(det);
        }

        // Steepest-ascent direction of R with respect to (Re v, Im v), packed as a complex number
        cd ascent(cd v) const
        {
            if (rank_ == 0)
                return {0.0, 0.0};
            const cd t = rank_ <= small_rank ? trace_term<SmallMatrix>(v) : trace_term<Eigen::MatrixXcd>(v);
            return 2.0 * t / std::numbers::ln2;
        }

    private:
        // ranks up to K = 4 users stay on the stack
        static constexpr int small_rank = 4;
        using SmallMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * small_rank, 2 * small_rank>;

        // I + D(v) G with D = [[0, v I], [conj(v) I, 0]]
        template <typename Mat>
        Mat system(cd v) const
        {
            const int r = rank_;
            Mat X = Mat::Identity(2 * r, 2 * r);
            X.topRows(r) += v * gram_.bottomRows(r);
            X.bottomRows(r) += std::conj(v) * gram_.topRows(r);
            return X;
        }

        template <typename Mat>
        double determinant(cd v) const
        {
            return Eigen::PartialPivLU<Mat>(system<Mat>(v)).determinant().real();
        }

        template <typename Mat>
        cd trace_term(cd v) const
        {
            const Mat Xinv = system<Mat>(v).inverse();
            return (Xinv.rightCols(rank_) * gram_.topRows(rank_)).trace();
        }

        double log2det_A_ = 0.0;
        int rank_ = 0;
        Eigen::MatrixXcd gram_;
    };

    struct SubproblemSolution
    {
        cd theta;
        double value = 0.0;
    };

    namespace detail
    {
        inline cd project_disk(cd v)
        {
            const double a = std::abs(v);
            return a > 1.0 ? v / a : v;
        }

        // Projected-gradient ascent of the relaxed problem over the closed unit disk
        inline cd relaxed_maximizer(const PhaseObjective &obj, cd start)
        {
            cd v = start;
            double fv = obj.value(v);
            double step = 1.0;
            for (int it = 0; it < 500 && step >= 1e-10; ++it)
            {
                const cd g = obj.ascent(v);
                const double gn = std::abs(g);
                if (!(gn > 0.0) || !std::isfinite(gn))
                    break;
                const cd trial = project_disk(v + (step / gn) * g);
                const double ft = obj.value(trial);
                if (ft > fv && std::abs(trial - v) > 0.0)
                {
                    v = trial;
                    fv = ft;
                    step = std::min(2.0, 2.0 * step);
                }
                else
                    step *= 0.5;
            }
            return v;
        }

        inline std::pair<double, double> golden_section(const PhaseObjective &obj, double lo, double hi, double tol)
        {
            const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
            double a = lo, b = hi;
            double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
            double f1 = obj.value(std::polar(1.0, x1)), f2 = obj.value(std::polar(1.0, x2));
            while (b - a > tol)
            {
                if (f1 < f2)
                {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + inv_phi * (b - a);
                    f2 = obj.value(std::polar(1.0, x2));
                }
                else
                {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - inv_phi * (b - a);
                    f1 = obj.value(std::polar(1.0, x1));
                }
            }
            const double x = 0.5 * (a + b);
            return {x, obj.value(std::polar(1.0, x))};
        }
    }

    // Best unit-modulus coefficient among the projected relaxed optimum, the current value and a
    // grid-plus-golden-section search on the circle. Never returns something worse than `current`.
    inline SubproblemSolution solve_element_subproblem(const Eigen::MatrixXcd &A, const Eigen::MatrixXcd &B, cd current,
                                                       int grid = 64)
    {
        const PhaseObjective obj(A, B);
        if (std::abs(current) > 0.0)
            current /= std::abs(current);
        else
            current = cd(1.0, 0.0);
        SubproblemSolution best{current, obj.value(current)};
        if (obj.rank() == 0)
            return best;

        SubproblemSolution cand = best;
        auto consider = [&cand](cd v, double f)
        {
            if (f > cand.value)
                cand = {v, f};
        };

        const cd relaxed = detail::relaxed_maximizer(obj, current);
        if (std::abs(relaxed) > 1e-12)
        {
            const cd projected = relaxed / std::abs(relaxed);
            consider(projected, obj.value(projected));
        }

        std::vector<double> values(grid);
        const double h = 2.0 * pi / grid;
        for (int i = 0; i < grid; ++i)
            values[i] = obj.value(std::polar(1.0, i * h));
        std::vector<int> peaks;
        for (int i = 0; i < grid; ++i)
            if (values[i] >= values[(i + grid - 1) % grid] && values[i] >= values[(i + 1) % grid])
                peaks.push_back(i);
        std::sort(peaks.begin(), peaks.end(), [&](int a, int b) { return values[a] > values[b]; });
        if (peaks.size() > 3)
            peaks.resize(3);
        for (int i : peaks)
        {
            consider(std::polar(1.0, i * h), values[i]);
            const auto [x, f] = detail::golden_section(obj, i * h - h, i * h + h, 1e-10);
            consider(std::polar(1.0, x), f);
        }

        if (cand.value > best.value + 1e-12)
            best = cand;
        return best;
    }

    namespace detail
    {
        inline double elapsed_ms(std::chrono::steady_clock::time_point start)
        {
            return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }

        inline std::vector<std::vector<int>> irpa_blocks(const std::vector<UnitSurface> &surfaces, int module_count)
        {
            std::vector<std::vector<int>> blocks;
            if (module_count <= 1)
            {
                for (const auto &s : surfaces)
                {
                    std::vector<int> b;
                    for (int u = s.first; u < s.first + s.size(); ++u)
                        b.push_back(u);
                    blocks.push_back(std::move(b));
                }
                return blocks;
            }
            blocks.resize(module_count);
            for (const auto &s : surfaces)
                for (int u = s.first; u < s.first + s.size(); ++u)
                    blocks[s.module].push_back(u);
            return blocks;
        }
    }

    // Coordinate ascent over all units with perfect knowledge of the channel components.
    // `seed` selects the random initial states.
    inline OptimizerResult successive_refinement(const ChannelTensors &t, const SrParams &params,
                                                 const RateParams &rate_params, std::uint64_t seed)
    {
        params.validate();
        rate_params.validate();
        const auto start = std::chrono::steady_clock::now();
        const int N = t.units();
        const double snr = rate_params.snr();

        OptimizerResult res;
        Rng rng(derive_seed(seed, {tag(Stream::sr_init)}));
        double best = -1.0;
        for (int i = 0; i < params.T; ++i)
        {
            ReflectionState s = ReflectionState::random(N, rng);
            const double r = sum_rate(assemble_effective_channel(t, s), rate_params);
            if (r > best)
            {
                best = r;
                res.theta = std::move(s);
            }
        }
        res.trace.record(best, 0);

        const detail::UnitLinks links = detail::unit_links(t);
        double current = best;
        for (int sweep = 1; sweep <= params.max_iterations; ++sweep)
        {
            const ReflectionState before = res.theta;
            Eigen::MatrixXcd H = assemble_effective_channel(t, res.theta);
            for (int u = 0; u < N; ++u)
            {
                const Eigen::MatrixXcd gamma = detail::unit_gradient(t, res.theta, u, links);
                const UpdateMatrices m = detail::update_matrices(H, gamma, res.theta[u], snr);
                const SubproblemSolution sol = solve_element_subproblem(m.A, m.B, res.theta[u], params.grid);
                if (sol.theta != res.theta[u])
                {
                    H += (sol.theta - res.theta[u]) * gamma;
                    res.theta[u] = sol.theta;
                }
            }
            double next = sum_rate(assemble_effective_channel(t, res.theta), rate_params);
            res.iterations = sweep;
            if (next < current)
            {
                // round-off only; keep the previous state so the trace stays monotone
                res.theta = before;
                next = current;
            }
            res.trace.record(next, 0);
            const double gain = next - current;
            current = next;
            if (gain < params.epsilon)
                break;
        }
        res.rate = current;
        res.trace.wall_ms = detail::elapsed_ms(start);
        return res;
    }

    // Best of t_total uniformly random states, evaluated through the oracle
    inline OptimizerResult rpa(ChannelOracle &oracle, int t_total, std::uint64_t seed)
    {
        if (t_total < 1)
            throw std::invalid_argument("rpa: t_total must be >= 1");
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t q0 = oracle.queries();
        Rng rng(derive_seed(seed, {tag(Stream::rpa)}));
        OptimizerResult res;
        double best = -1.0;
        for (int i = 0; i < t_total; ++i)
        {
            ReflectionState s = ReflectionState::random(oracle.units(), rng);
            const double r = oracle.rate(s);
            if (r > best)
            {
                best = r;
                res.theta = std::move(s);
            }
            res.trace.record(best, oracle.queries() - q0);
        }
        res.rate = best;
        res.queries = oracle.queries() - q0;
        res.iterations = 0;
        res.trace.wall_ms = detail::elapsed_ms(start);
        return res;
    }

    // Random search that re-draws one block (a surface, or a module's four surfaces) at a time.
    // The initial stage shares its random stream with rpa() for the same seed.
    inline OptimizerResult irpa(ChannelOracle &oracle, const IrpaParams &params, std::uint64_t seed, int module_count = 1)
    {
        params.validate();
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t q0 = oracle.queries();
        OptimizerResult res;

        Rng init(derive_seed(seed, {tag(Stream::rpa)}));
        double r_o = -1.0;
        for (int i = 0; i < params.T0; ++i)
        {
            ReflectionState s = ReflectionState::random(oracle.units(), init);
            const double r = oracle.rate(s);
            if (r > r_o)
            {
                r_o = r;
                res.theta = std::move(s);
            }
        }
        res.trace.record(r_o, oracle.queries() - q0);

        const auto blocks = detail::irpa_blocks(oracle.surfaces(), module_count);
        if (params.Tj > 0)
            for (int round = 1; round <= params.max_rounds; ++round)
            {
                const double round_start = r_o;
                for (std::size_t b = 0; b < blocks.size(); ++b)
                {
                    Rng rng(derive_seed(seed, {tag(Stream::irpa_round), static_cast<std::uint64_t>(round),
                                               static_cast<std::uint64_t>(b)}));
                    ReflectionState trial = res.theta;
                    ReflectionState best_trial;
                    double best = -1.0;
                    for (int t = 0; t < params.Tj; ++t)
                    {
                        for (int u : blocks[b])
                            trial[u] = rng.unit_phasor();
                        const double r = oracle.rate(trial);
                        if (r > best)
                        {
                            best = r;
                            best_trial = trial;
                        }
                    }
                    if (best > r_o)
                    {
                        r_o = best;
                        res.theta = std::move(best_trial);
                    }
                    res.trace.record(r_o, oracle.queries() - q0);
                }
                res.iterations = round;
                if (r_o - round_start < params.epsilon)
                    break;
            }
        res.rate = r_o;
        res.queries = oracle.queries() - q0;
        res.trace.wall_ms = detail::elapsed_ms(start);
        return res;
    }

    // Column k of the n-point DFT matrix: exp(-i 2 pi n k / N)
    inline Eigen::VectorXcd dft_column(int n, int k)
    {
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i)
            v[i] = std::exp(-imag_unit * (2.0 * pi * static_cast<double>((static_cast<long long>(i) * k) % n) / n));
        return v;
    }

    inline std::uint64_t dft_codebook_size(const std::vector<UnitSurface> &surfaces)
    {
        std::uint64_t total = 1;
        for (const auto &s : surfaces)
        {
            const std::uint64_t n = static_cast<std::uint64_t>(s.rows) * static_cast<std::uint64_t>(s.cols);
            if (total > (std::uint64_t(1) << 62) / n)
                return std::numeric_limits<std::uint64_t>::max();
            total *= n;
        }
        return total;
    }

    // Exhaustive search over per-surface 2-D DFT codewords (Kronecker products of DFT columns)
    inline OptimizerResult dft_codebook_search(ChannelOracle &oracle, std::uint64_t max_evaluations = 100'000'000)
    {
        const auto start = std::chrono::steady_clock::now();
        const auto &surfaces = oracle.surfaces();
        const std::uint64_t total = dft_codebook_size(surfaces);
        if (total > max_evaluations)
            throw std::length_error("dft_codebook_search: codebook product has " + std::to_string(total) +
                                    " entries, above the limit of " + std::to_string(max_evaluations));

        // codewords[s][c] holds surface s's coefficients for codeword c (column-major elements)
        std::vector<std::vector<std::vector<cd>>> codewords(surfaces.size());
        for (std::size_t s = 0; s < surfaces.size(); ++s)
        {
            const auto &info = surfaces[s];
            for (int k1 = 0; k1 < info.rows; ++k1)
                for (int k2 = 0; k2 < info.cols; ++k2)
                {
                    const Eigen::VectorXcd w1 = dft_column(info.rows, k1);
                    const Eigen::VectorXcd w2 = dft_column(info.cols, k2);
                    std::vector<cd> word;
                    for (int c = 0; c < info.cols; ++c)
                        for (int r = 0; r < info.rows; ++r)
                            word.push_back(w1[r] * w2[c]);
                    codewords[s].push_back(std::move(word));
                }
        }

        const std::uint64_t q0 = oracle.queries();
        OptimizerResult res;
        ReflectionState state = ReflectionState::ones(oracle.units());
        std::vector<int> index(surfaces.size(), 0);
        double best = -1.0;
        for (std::uint64_t n = 0; n < total; ++n)
        {
            for (std::size_t s = 0; s < surfaces.size(); ++s)
            {
                const auto &word = codewords[s][index[s]];
                std::copy(word.begin(), word.end(), state.values.begin() + surfaces[s].first);
            }
            const double r = oracle.rate(state);
            if (r > best)
            {
                best = r;
                res.theta = state;
                res.trace.record(best, oracle.queries() - q0);
            }
            // mixed-radix increment, last surface fastest
            for (int s = static_cast<int>(surfaces.size()) - 1; s >= 0; --s)
            {
                if (++index[s] < static_cast<int>(codewords[s].size()))
                    break;
                index[s] = 0;
            }
        }
        res.rate = best;
        res.queries = oracle.queries() - q0;
        res.trace.record(best, res.queries);
        res.trace.wall_ms = detail::elapsed_ms(start);
        return res;
    }
}

#endif
