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
#ifndef IRSBS_EXPERIMENTS_HPP
#define IRSBS_EXPERIMENTS_HPP

#include "channel.hpp"
#include "config_file.hpp"
#include "geometry.hpp"
#include "optimize.hpp"
#include "rate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace irsbs
{
    enum class Algorithm
    {
        sr,
        rpa,
        irpa,
        dft,
        none
    };

    inline std::string to_string(Algorithm a)
    {
        switch (a)
        {
        case Algorithm::sr:
            return "sr";
        case Algorithm::rpa:
            return "rpa";
        case Algorithm::irpa:
            return "irpa";
        case Algorithm::dft:
            return "dft";
        default:
            return "none";
        }
    }

    inline Algorithm parse_algorithm(const std::string &name)
    {
        for (Algorithm a : {Algorithm::sr, Algorithm::rpa, Algorithm::irpa, Algorithm::dft, Algorithm::none})
            if (to_string(a) == name)
                return a;
        throw ConfigError("unknown algorithm '" + name + "' (expected sr, rpa, irpa, dft or none)");
    }

    enum class ExperimentKind
    {
        simulate,
        convergence,
        sweep_n,
        sweep_t_total,
        tilt,
        modules,
        setups,
        mismatch
    };

    inline std::string to_string(ExperimentKind k)
    {
        switch (k)
        {
        case ExperimentKind::simulate:
            return "simulate";
        case ExperimentKind::convergence:
            return "convergence";
        case ExperimentKind::sweep_n:
            return "sweep-N";
        case ExperimentKind::sweep_t_total:
            return "sweep-Ttotal";
        case ExperimentKind::tilt:
            return "tilt";
        case ExperimentKind::modules:
            return "modules";
        case ExperimentKind::setups:
            return "setups";
        default:
            return "mismatch";
        }
    }

    // Maps a sweep parameter name from the command line to its experiment kind
    inline ExperimentKind parse_sweep_param(const std::string &name)
    {
        if (name == "n_elements")
            return ExperimentKind::sweep_n;
        if (name == "t_total")
            return ExperimentKind::sweep_t_total;
        if (name == "theta_tilt")
            return ExperimentKind::tilt;
        if (name == "eta")
            return ExperimentKind::modules;
        throw ConfigError("unknown sweep parameter '" + name + "' (expected n_elements, t_total, theta_tilt or eta)");
    }

    struct ExperimentSpec
    {
        ExperimentKind kind = ExperimentKind::simulate;
        RunConfig base;
        Algorithm algorithm = Algorithm::sr;     // simulate / convergence
        std::vector<double> values;              // sweeps; n_elements list for mismatch
        std::vector<Setup> setups;               // setups
        int threads = 0;                         // 0: hardware concurrency
        bool timing = false;                     // wall_ms column is 0 unless set, so reruns are byte-identical
    };

    struct ResultRow
    {
        std::string experiment;
        int realization = 0;
        std::uint64_t seed = 0;
        std::string algorithm;
        std::string param_name;
        std::string param_value;
        double sum_rate_bps_hz = 0.0;
        std::uint64_t oracle_queries = 0;
        int iterations = 0;
        double wall_ms = 0.0;

        // ordering keys, not written
        int algorithm_order = 0;
        int param_order = 0;
    };

    inline const char *result_csv_header()
    {
        return "experiment,realization,seed,algorithm,param_name,param_value,sum_rate_bps_hz,oracle_queries,iterations,"
               "wall_ms";
    }

    inline void write_results_csv(std::ostream &os, const std::vector<ResultRow> &rows, bool timing)
    {
        os << result_csv_header() << "\n";
        char buf[512];
        for (const auto &r : rows)
        {
            std::snprintf(buf, sizeof(buf), "%s,%d,%llu,%s,%s,%s,%.10f,%llu,%d,%.3f\n", r.experiment.c_str(),
                          r.realization, static_cast<unsigned long long>(r.seed), r.algorithm.c_str(),
                          r.param_name.c_str(), r.param_value.c_str(), r.sum_rate_bps_hz,
                          static_cast<unsigned long long>(r.oracle_queries), r.iterations, timing ? r.wall_ms : 0.0);
            os << buf;
        }
    }

    struct ExperimentResult
    {
        std::vector<ResultRow> rows;
        OptimizerTrace mean_trace;    // simulate / convergence only
        OptimizerTrace single_trace;  // realization 0
    };

    inline std::uint64_t realization_seed(std::uint64_t master_seed, int realization)
    {
        return derive_seed(master_seed, {tag(Stream::realization), static_cast<std::uint64_t>(realization)});
    }

    inline std::string format_value(double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return buf;
    }

    // Runs fn(i) for i in [0, n) on a small pool; exceptions are rethrown after all workers stop
    inline void parallel_for(int n, int threads, const std::function<void(int)> &fn)
    {
        if (threads <= 0)
            threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        threads = std::min(threads, std::max(1, n));
        std::atomic<int> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]()
        {
            for (int i = next++; i < n; i = next++)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next = n;
                }
            }
        };
        if (threads == 1)
            worker();
        else
        {
            std::vector<std::jthread> pool;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back(worker);
        }
        if (error)
            std::rethrow_exception(error);
    }

    // Layout and realization-independent link factors for one configuration
    struct Instance
    {
        SimConfig cfg;
        RadomeLayout layout;
        ReflectionGeometry element_wise;
        std::optional<ReflectionGeometry> far_field;

        explicit Instance(const SimConfig &c, bool with_far_field = false)
            : cfg(c), layout(build_layout(c)), element_wise(element_wise_geometry(layout, c.pattern))
        {
            if (with_far_field)
                far_field = far_field_geometry(layout, c.pattern);
        }

        bool grouped() const
        {
            return std::any_of(cfg.N_j1.begin(), cfg.N_j1.end(), [](int r) { return r > 1; });
        }

        // Channel tensors of one realization; rows of each surface share a coefficient when a surface has several rows
        std::shared_ptr<const ChannelTensors> tensors(std::uint64_t seed, bool use_far_field = false) const
        {
            const PathSet paths = sample_paths(cfg, seed);
            ChannelTensors t = build_tensors(paths, layout, cfg.pattern, use_far_field ? *far_field : element_wise);
            t.seed = seed;
            if (grouped())
                t = apply_grouping(t, column_grouping(t));
            return std::make_shared<const ChannelTensors>(std::move(t));
        }
    };

    inline int irpa_block_count(const ChannelTensors &t)
    {
        return t.module_count > 1 ? t.module_count : static_cast<int>(t.surfaces.size());
    }

    // One optimizer run on one realization; `budget` is T_total for rpa and irpa
    inline OptimizerResult run_algorithm(Algorithm alg, const std::shared_ptr<const ChannelTensors> &t,
                                         const RunConfig &rc, std::uint64_t seed, int budget)
    {
        const RateParams rp = RateParams::from(rc.sim);
        switch (alg)
        {
        case Algorithm::sr:
            return successive_refinement(*t, rc.sr, rp, seed);
        case Algorithm::rpa:
        {
            ChannelOracle oracle = make_oracle(t, rp);
            return rpa(oracle, budget, seed);
        }
        case Algorithm::irpa:
        {
            ChannelOracle oracle = make_oracle(t, rp);
            return irpa(oracle, rc.irpa_for(budget, irpa_block_count(*t)), seed, t->module_count);
        }
        case Algorithm::dft:
        {
            ChannelOracle oracle = make_oracle(t, rp);
            return dft_codebook_search(oracle);
        }
        default:
        {
            OptimizerResult res;
            res.rate = sum_rate(t->direct, rp);
            res.theta = ReflectionState::ones(t->units());
            res.trace.record(res.rate, 0);
            return res;
        }
        }
    }

    namespace detail
    {
        inline ResultRow make_row(const std::string &experiment, int realization, std::uint64_t seed,
                                  const std::string &algorithm, const std::string &param_name,
                                  const std::string &param_value, const OptimizerResult &res, int algorithm_order,
                                  int param_order)
        {
            ResultRow r;
            r.experiment = experiment;
            r.realization = realization;
            r.seed = seed;
            r.algorithm = algorithm;
            r.param_name = param_name;
            r.param_value = param_value;
            r.sum_rate_bps_hz = res.rate;
            r.oracle_queries = res.queries;
            r.iterations = res.iterations;
            r.wall_ms = res.trace.wall_ms;
            r.algorithm_order = algorithm_order;
            r.param_order = param_order;
            return r;
        }

        inline std::vector<ResultRow> gather(std::vector<std::vector<ResultRow>> &per_realization)
        {
            std::vector<ResultRow> rows;
            for (auto &v : per_realization)
            {
                std::stable_sort(v.begin(), v.end(), [](const ResultRow &a, const ResultRow &b)
                                 { return std::tie(a.algorithm_order, a.param_order) <
                                          std::tie(b.algorithm_order, b.param_order); });
                rows.insert(rows.end(), v.begin(), v.end());
            }
            return rows;
        }

        // Accepted-value traces padded with their last value, averaged step by step
        inline OptimizerTrace mean_trace(const std::vector<OptimizerTrace> &traces)
        {
            OptimizerTrace mean;
            std::size_t len = 0;
            for (const auto &t : traces)
                len = std::max(len, t.steps.size());
            for (std::size_t s = 0; s < len; ++s)
            {
                double rate = 0.0, queries = 0.0;
                for (const auto &t : traces)
                {
                    const TraceStep &st = t.steps[std::min(s, t.steps.size() - 1)];
                    rate += st.rate;
                    queries += static_cast<double>(st.queries);
                }
                mean.record(rate / traces.size(), static_cast<std::uint64_t>(std::llround(queries / traces.size())));
            }
            return mean;
        }

        inline SimConfig with_total_elements(SimConfig cfg, double value)
        {
            const long long n = std::llround(value);
            if (std::abs(value - static_cast<double>(n)) > 1e-9 || n < 1)
                throw ConfigError("n_elements values must be positive integers");
            int columns = 0;
            for (int j = 0; j < surfaces_per_module; ++j)
                columns += cfg.N_j2[j];
            if (n % columns != 0)
                throw ConfigError("n_elements = " + std::to_string(n) + " is not a multiple of the " +
                                  std::to_string(columns) + " columns (sum of N_j2)");
            cfg.N_j1.fill(static_cast<int>(n / columns));
            return cfg;
        }

        inline SimConfig with_value(SimConfig cfg, ExperimentKind kind, double value)
        {
            switch (kind)
            {
            case ExperimentKind::sweep_n:
                return with_total_elements(cfg, value);
            case ExperimentKind::tilt:
                cfg.theta_tilt = value;
                cfg.sampling_mode = SamplingMode::global_ground;
                return cfg;
            case ExperimentKind::modules:
            {
                const long long e = std::llround(value);
                if (std::abs(value - static_cast<double>(e)) > 1e-9 || e < 1)
                    throw ConfigError("eta values must be positive integers");
                cfg.eta = static_cast<int>(e);
                return cfg;
            }
            default:
                return cfg;
            }
        }

        inline std::string param_name(ExperimentKind kind)
        {
            switch (kind)
            {
            case ExperimentKind::sweep_n:
            case ExperimentKind::mismatch:
                return "n_elements";
            case ExperimentKind::sweep_t_total:
                return "t_total";
            case ExperimentKind::tilt:
                return "theta_tilt";
            case ExperimentKind::modules:
                return "eta";
            case ExperimentKind::setups:
                return "setup";
            default:
                return "";
            }
        }
    }

    // One algorithm over all realizations, with averaged and single-realization traces
    inline ExperimentResult run_simulate(const ExperimentSpec &spec)
    {
        const RunConfig &rc = spec.base;
        rc.validate();
        const Instance inst(rc.sim);
        const int R = rc.realizations;
        const std::string name = to_string(spec.kind);
        std::vector<std::vector<ResultRow>> rows(R);
        std::vector<OptimizerTrace> traces(R);
        parallel_for(R, spec.threads, [&](int r)
                     {
                         const std::uint64_t seed = realization_seed(rc.sim.master_seed, r);
                         const auto t = inst.tensors(seed);
                         OptimizerResult res = run_algorithm(spec.algorithm, t, rc, seed, rc.t_total);
                         rows[r].push_back(detail::make_row(name, r, seed, to_string(spec.algorithm), "", "", res, 0, 0));
                         traces[r] = std::move(res.trace);
                     });
        ExperimentResult out;
        out.rows = detail::gather(rows);
        out.mean_trace = detail::mean_trace(traces);
        out.single_trace = traces.front();
        return out;
    }

    inline ExperimentResult run_convergence(ExperimentSpec spec)
    {
        spec.kind = ExperimentKind::convergence;
        spec.algorithm = Algorithm::sr;
        return run_simulate(spec);
    }

    // Perfect-CSI design with some reflection components removed
    inline ExperimentResult run_setup_comparison(const ExperimentSpec &spec)
    {
        const RunConfig &rc = spec.base;
        rc.validate();
        if (spec.setups.empty())
            throw ConfigError("setup comparison needs at least one setup");
        const Instance inst(rc.sim);
        const int R = rc.realizations;
        std::vector<std::vector<ResultRow>> rows(R);
        parallel_for(R, spec.threads, [&](int r)
                     {
                         const std::uint64_t seed = realization_seed(rc.sim.master_seed, r);
                         const auto t = inst.tensors(seed);
                         for (std::size_t i = 0; i < spec.setups.size(); ++i)
                         {
                             const Setup s = spec.setups[i];
                             const Algorithm alg = s == Setup::no_irs ? Algorithm::none : Algorithm::sr;
                             const auto masked = std::make_shared<const ChannelTensors>(mask_setup(*t, s));
                             const OptimizerResult res = run_algorithm(alg, masked, rc, seed, rc.t_total);
                             rows[r].push_back(detail::make_row("setups", r, seed, to_string(alg), "setup", to_string(s),
                                                                res, 0, static_cast<int>(i)));
                         }
                     });
        return {detail::gather(rows), {}, {}};
    }

    // Designs on far-field tensors, evaluates on element-wise tensors, next to the element-wise design
    inline ExperimentResult run_mismatch(const ExperimentSpec &spec)
    {
        const RunConfig &rc = spec.base;
        rc.validate();
        if (rc.sim.eta != 1)
            throw ConfigError("mismatch experiment requires eta = 1");
        std::vector<double> values = spec.values;
        if (values.empty())
            values.push_back(rc.sim.total_elements());
        std::vector<std::unique_ptr<Instance>> instances;
        for (double v : values)
            instances.push_back(std::make_unique<Instance>(detail::with_total_elements(rc.sim, v), true));

        const RateParams rp = RateParams::from(rc.sim);
        const int R = rc.realizations;
        std::vector<std::vector<ResultRow>> rows(R);
        parallel_for(R, spec.threads, [&](int r)
                     {
                         const std::uint64_t seed = realization_seed(rc.sim.master_seed, r);
                         for (std::size_t i = 0; i < values.size(); ++i)
                         {
                             const auto ew = instances[i]->tensors(seed, false);
                             const auto ff = instances[i]->tensors(seed, true);
                             const OptimizerResult own = successive_refinement(*ew, rc.sr, rp, seed);
                             OptimizerResult far = successive_refinement(*ff, rc.sr, rp, seed);
                             far.rate = sum_rate(assemble_effective_channel(*ew, far.theta), rp);
                             const std::string v = format_value(values[i]);
                             rows[r].push_back(detail::make_row("mismatch", r, seed, "sr-element-wise", "n_elements", v,
                                                                own, 0, static_cast<int>(i)));
                             rows[r].push_back(detail::make_row("mismatch", r, seed, "sr-far-field", "n_elements", v,
                                                                far, 1, static_cast<int>(i)));
                         }
                     });
        return {detail::gather(rows), {}, {}};
    }

    // n_elements, theta_tilt and eta sweeps run the perfect-CSI design on the full setup;
    // the t_total sweep compares sr, irpa, rpa and dft at each budget
    inline ExperimentResult run_sweep(const ExperimentSpec &spec)
    {
        const RunConfig &rc = spec.base;
        rc.validate();
        if (spec.values.empty())
            throw ConfigError("sweep needs at least one value");
        const std::string name = to_string(spec.kind);
        const std::string pname = detail::param_name(spec.kind);
        const int R = rc.realizations;
        std::vector<std::vector<ResultRow>> rows(R);

        if (spec.kind == ExperimentKind::sweep_t_total)
        {
            std::vector<int> budgets;
            for (double v : spec.values)
            {
                const long long b = std::llround(v);
                if (std::abs(v - static_cast<double>(b)) > 1e-9 || b < 1)
                    throw ConfigError("t_total values must be positive integers");
                budgets.push_back(static_cast<int>(b));
            }
            const Instance inst(rc.sim);
            parallel_for(R, spec.threads, [&](int r)
                         {
                             const std::uint64_t seed = realization_seed(rc.sim.master_seed, r);
                             const auto t = inst.tensors(seed);
                             // sr and dft do not depend on the budget
                             const OptimizerResult sr = run_algorithm(Algorithm::sr, t, rc, seed, 0);
                             const OptimizerResult dft = run_algorithm(Algorithm::dft, t, rc, seed, 0);
                             for (std::size_t i = 0; i < budgets.size(); ++i)
                             {
                                 const std::string v = format_value(budgets[i]);
                                 const int pi_ = static_cast<int>(i);
                                 rows[r].push_back(detail::make_row(name, r, seed, "sr", pname, v, sr, 0, pi_));
                                 const OptimizerResult ir = run_algorithm(Algorithm::irpa, t, rc, seed, budgets[i]);
                                 rows[r].push_back(detail::make_row(name, r, seed, "irpa", pname, v, ir, 1, pi_));
                                 const OptimizerResult rp = run_algorithm(Algorithm::rpa, t, rc, seed, budgets[i]);
                                 rows[r].push_back(detail::make_row(name, r, seed, "rpa", pname, v, rp, 2, pi_));
                                 rows[r].push_back(detail::make_row(name, r, seed, "dft", pname, v, dft, 3, pi_));
                             }
                         });
            return {detail::gather(rows), {}, {}};
        }

        if (spec.kind != ExperimentKind::sweep_n && spec.kind != ExperimentKind::tilt &&
            spec.kind != ExperimentKind::modules)
            throw ConfigError("run_sweep: not a sweep experiment");
        std::vector<std::unique_ptr<Instance>> instances;
        std::vector<RunConfig> configs;
        for (double v : spec.values)
        {
            RunConfig c = rc;
            c.sim = detail::with_value(rc.sim, spec.kind, v);
            c.validate();
            instances.push_back(std::make_unique<Instance>(c.sim));
            configs.push_back(c);
        }
        parallel_for(R, spec.threads, [&](int r)
                     {
                         const std::uint64_t seed = realization_seed(rc.sim.master_seed, r);
                         for (std::size_t i = 0; i < instances.size(); ++i)
                         {
                             const auto t = instances[i]->tensors(seed);
                             const OptimizerResult res = run_algorithm(Algorithm::sr, t, configs[i], seed, 0);
                             rows[r].push_back(detail::make_row(name, r, seed, "sr", pname, format_value(spec.values[i]),
                                                                res, 0, static_cast<int>(i)));
                         }
                     });
        return {detail::gather(rows), {}, {}};
    }

    inline ExperimentResult run_experiment(const ExperimentSpec &spec)
    {
        switch (spec.kind)
        {
        case ExperimentKind::simulate:
            return run_simulate(spec);
        case ExperimentKind::convergence:
            return run_convergence(spec);
        case ExperimentKind::setups:
            return run_setup_comparison(spec);
        case ExperimentKind::mismatch:
            return run_mismatch(spec);
        default:
            return run_sweep(spec);
        }
    }
}

#endif
