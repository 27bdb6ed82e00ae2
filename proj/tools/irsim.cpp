// SPDX-License-Identifier: Apache-2.0
//
// irsim - IRS-assisted wireless link simulation and beamforming optimization
// Copyright (C) 2026 the irsim authors
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

#include <irsim/experiment.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

int main(int argc, char **argv)
{
    CLI::App app{"irsim - IRS-assisted link simulation and beamforming experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    int threads = 1;
    bool timing = false;
    std::uint64_t seed = 0;

    CLI::App *run = app.add_subcommand("run", "Execute an experiment configuration");
    run->add_option("config", config_path, "JSON experiment configuration")->required();
    run->add_option("--out", out_path, "CSV output path (overrides the config)");
    run->add_option("--threads", threads, "Worker thread count")->check(CLI::PositiveNumber);
    CLI::Option *seed_option =
        run->add_option("--seed", seed, "Master seed (overrides the config)");
    run->add_flag("--timing", timing,
                  "Record wall-clock runtimes; breaks byte-level reproducibility");

    CLI::App *oracle = app.add_subcommand(
        "oracle-check", "Exhaustive-vs-branch-and-bound equivalence on a swipt configuration");
    oracle->add_option("config", config_path, "JSON experiment configuration")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &err)
    {
        return app.exit(err) == 0 ? 0 : 1;
    }

    try
    {
        const irsim::experiment::json root = irsim::experiment::load_config(config_path);
        if (run->parsed())
        {
            irsim::experiment::RunOptions options;
            options.threads = threads;
            options.timing = timing;
            if (seed_option->count() > 0)
            {
                options.has_seed_override = true;
                options.seed_override = seed;
            }
            const irsim::experiment::ResultTable table =
                irsim::experiment::run_experiment(root, options);
            for (std::size_t i = 0; i < table.rows.size(); ++i)
                if (!table.rows[i].note.empty())
                    std::cerr << "row " << i << ": solver error: " << table.rows[i].note
                              << "\n";
            const std::string path =
                out_path.empty() ? irsim::experiment::parse_spec(root).output : out_path;
            irsim::experiment::write_csv(table, path);
            std::cout << "wrote " << table.rows.size() << " rows to " << path << "\n";
        }
        else
        {
            const irsim::experiment::OracleCheckResult result =
                irsim::experiment::oracle_check(root);
            std::cout << result.summary << "\n";
            if (!result.ok)
                return 1;
        }
    }
    catch (const irsim::experiment::io_error &err)
    {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    catch (const std::exception &err)
    {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
