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
#include "irsbs/irsbs.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace
{
    struct Common
    {
        std::string config;
        std::string out;
        std::optional<int> realizations;
        std::optional<std::uint64_t> seed;
        int threads = 0;
        bool timing = false;
    };

    void add_common(CLI::App *cmd, Common &c)
    {
        cmd->add_option("--config", c.config, "Configuration file (key = value lines)")->required();
        cmd->add_option("--out", c.out, "Result CSV path")->required();
        cmd->add_option("--realizations", c.realizations, "Number of channel realizations (overrides the file)");
        cmd->add_option("--seed", c.seed, "Master seed (overrides the file)");
        cmd->add_option("--threads", c.threads, "Worker threads, 0 = all cores");
        cmd->add_flag("--timing", c.timing, "Fill the wall_ms column (output is then not reproducible)");
    }

    irsbs::ExperimentSpec base_spec(const Common &c)
    {
        irsbs::ExperimentSpec spec;
        spec.base = irsbs::load_run_config(c.config);
        if (c.realizations)
            spec.base.realizations = *c.realizations;
        if (c.seed)
            spec.base.sim.master_seed = *c.seed;
        spec.base.validate();
        spec.threads = c.threads;
        spec.timing = c.timing;
        return spec;
    }

    std::ofstream open_out(const std::string &path)
    {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot write '" + path + "'");
        return os;
    }

    void write_rows(const std::string &path, const irsbs::ExperimentResult &res, bool timing)
    {
        auto os = open_out(path);
        irsbs::write_results_csv(os, res.rows, timing);
    }

    std::vector<double> parse_values(const std::string &text)
    {
        std::vector<double> values;
        for (const auto &item : irsbs::detail::split_list(text))
            values.push_back(irsbs::detail::parse_double("--values", item));
        if (values.empty())
            throw irsbs::ConfigError("--values must list at least one value");
        return values;
    }

    // foo.csv -> foo_realization0.csv
    std::string single_trace_path(const std::string &path)
    {
        const auto dot = path.rfind('.');
        const auto slash = path.find_last_of('/');
        if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
            return path + "_realization0";
        return path.substr(0, dot) + "_realization0" + path.substr(dot);
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Simulator and reflection optimizer for antenna radomes with integrated reflecting surfaces"};
    app.require_subcommand(1);

    Common sim_opts, sweep_opts, cmp_opts, mis_opts, dump_opts;
    std::string algorithm = "sr", trace_path, param, values_text, setups_text = "full,single,double,none",
                mismatch_values;
    int dump_realization = 0;

    auto *sim = app.add_subcommand("simulate", "Run one algorithm over all realizations");
    add_common(sim, sim_opts);
    sim->add_option("--algorithm", algorithm, "sr, rpa, irpa, dft or none");
    sim->add_option("--trace", trace_path,
                    "Mean accepted-value trace CSV; realization 0's trace goes next to it with a _realization0 suffix");

    auto *sweep = app.add_subcommand("sweep", "Sweep one parameter");
    add_common(sweep, sweep_opts);
    sweep->add_option("--param", param, "n_elements, t_total, theta_tilt (rad) or eta")->required();
    sweep->add_option("--values", values_text, "Comma-separated values")->required();

    auto *cmp = app.add_subcommand("compare", "Compare reflection setups under the perfect-CSI design");
    add_common(cmp, cmp_opts);
    cmp->add_option("--setups", setups_text, "Comma-separated subset of full,single,double,none");

    auto *mis = app.add_subcommand("mismatch", "Far-field design evaluated on the element-wise channel");
    add_common(mis, mis_opts);
    mis->add_option("--values", mismatch_values, "Comma-separated total element counts (default: from the config)");

    auto *dump = app.add_subcommand("dump", "Write one realization's channel tensors as text");
    add_common(dump, dump_opts);
    dump->add_option("--realization", dump_realization, "Realization index");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (sim->parsed())
        {
            auto spec = base_spec(sim_opts);
            spec.algorithm = irsbs::parse_algorithm(algorithm);
            spec.kind = spec.algorithm == irsbs::Algorithm::sr ? irsbs::ExperimentKind::convergence
                                                               : irsbs::ExperimentKind::simulate;
            const auto res = irsbs::run_experiment(spec);
            write_rows(sim_opts.out, res, spec.timing);
            if (!trace_path.empty())
            {
                auto mean = open_out(trace_path);
                res.mean_trace.write_csv(mean);
                auto single = open_out(single_trace_path(trace_path));
                res.single_trace.write_csv(single);
            }
        }
        else if (sweep->parsed())
        {
            auto spec = base_spec(sweep_opts);
            spec.kind = irsbs::parse_sweep_param(param);
            spec.values = parse_values(values_text);
            write_rows(sweep_opts.out, irsbs::run_experiment(spec), spec.timing);
        }
        else if (cmp->parsed())
        {
            auto spec = base_spec(cmp_opts);
            spec.kind = irsbs::ExperimentKind::setups;
            try
            {
                for (const auto &s : irsbs::detail::split_list(setups_text))
                    spec.setups.push_back(irsbs::parse_setup(s));
            }
            catch (const std::invalid_argument &e)
            {
                throw irsbs::ConfigError(e.what());
            }
            write_rows(cmp_opts.out, irsbs::run_experiment(spec), spec.timing);
        }
        else if (mis->parsed())
        {
            auto spec = base_spec(mis_opts);
            spec.kind = irsbs::ExperimentKind::mismatch;
            if (!mismatch_values.empty())
                spec.values = parse_values(mismatch_values);
            write_rows(mis_opts.out, irsbs::run_experiment(spec), spec.timing);
        }
        else if (dump->parsed())
        {
            const auto spec = base_spec(dump_opts);
            if (dump_realization < 0)
                throw irsbs::ConfigError("--realization must be >= 0");
            const irsbs::Instance inst(spec.base.sim);
            const auto t = inst.tensors(irsbs::realization_seed(spec.base.sim.master_seed, dump_realization));
            auto os = open_out(dump_opts.out);
            irsbs::write_tensor_dump(os, *t);
        }
    }
    catch (const irsbs::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
