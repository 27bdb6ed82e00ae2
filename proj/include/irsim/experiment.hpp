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

#ifndef IRSIM_EXPERIMENT_HPP
#define IRSIM_EXPERIMENT_HPP

#include "irsim/channel.hpp"
#include "irsim/codebook.hpp"
#include "irsim/common.hpp"
#include "irsim/irs_models.hpp"
#include "irsim/rng.hpp"
#include "irsim/scenarios.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace irsim::experiment
{

class io_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Result table and CSV emission.
// ---------------------------------------------------------------------------

struct ResultRow
{
    std::string scenario;
    std::string model;
    std::string method;
    std::string sweep_param;
    std::string sweep_value;
    long trial = 0;
    double objective = 0.0;
    bool feasible = false;
    long iterations = 0;
    double runtime_ms = 0.0;
    std::uint64_t seed = 0;
    std::string note; // per-row error text, not emitted to CSV
};

struct ResultTable
{
    std::vector<ResultRow> rows;
};

/// Shortest decimal that parses back to exactly the same double.
inline std::string format_number(double value)
{
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

inline constexpr const char *csv_header =
    "scenario,model,method,sweep_param,sweep_value,trial,objective,feasible,iterations,"
    "runtime_ms,seed";

inline void write_csv(const ResultTable &table, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("write_csv: cannot open " + path);
    out << csv_header << "\n";
    for (const ResultRow &row : table.rows)
    {
        out << row.scenario << ',' << row.model << ',' << row.method << ',' << row.sweep_param
            << ',' << row.sweep_value << ',' << row.trial << ',' << format_number(row.objective)
            << ',' << (row.feasible ? 1 : 0) << ',' << row.iterations << ','
            << format_number(row.runtime_ms) << ',' << row.seed << "\n";
    }
    out.flush();
    if (!out)
        throw io_error("write_csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Strict JSON parsing. Every key is either consumed or rejected, and errors
// name the full dotted path of the offending key.
// ---------------------------------------------------------------------------

using json = nlohmann::json;

namespace detail
{

inline std::string join_path(const std::string &prefix, const std::string &key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

inline void expect_object(const json &node, const std::string &path)
{
    if (!node.is_object())
        throw domain_error("config: \"" + (path.empty() ? std::string("<root>") : path) +
                           "\" must be an object");
}

inline void expect_keys(const json &node, const std::string &prefix,
                        std::initializer_list<const char *> allowed)
{
    expect_object(node, prefix);
    for (auto it = node.begin(); it != node.end(); ++it)
    {
        bool known = false;
        for (const char *key : allowed)
            if (it.key() == key)
            {
                known = true;
                break;
            }
        if (!known)
            throw domain_error("config: unknown key \"" + join_path(prefix, it.key()) + "\"");
    }
}

inline double as_number(const json &value, const std::string &path)
{
    if (!value.is_number())
        throw domain_error("config: \"" + path + "\" must be a number");
    return value.get<double>();
}

inline long as_integer(const json &value, const std::string &path)
{
    if (!value.is_number_integer())
        throw domain_error("config: \"" + path + "\" must be an integer");
    return value.get<long>();
}

inline bool as_bool(const json &value, const std::string &path)
{
    if (!value.is_boolean())
        throw domain_error("config: \"" + path + "\" must be a boolean");
    return value.get<bool>();
}

inline std::string as_string(const json &value, const std::string &path)
{
    if (!value.is_string())
        throw domain_error("config: \"" + path + "\" must be a string");
    return value.get<std::string>();
}

inline Eigen::Vector3d as_vec3(const json &value, const std::string &path)
{
    if (!value.is_array() || value.size() != 3)
        throw domain_error("config: \"" + path + "\" must be an array of 3 numbers");
    Eigen::Vector3d out;
    for (int i = 0; i < 3; ++i)
        out(i) = as_number(value[static_cast<std::size_t>(i)],
                           path + "[" + std::to_string(i) + "]");
    return out;
}

inline const json &required(const json &node, const std::string &prefix, const char *key)
{
    const auto it = node.find(key);
    if (it == node.end())
        throw domain_error("config: missing key \"" + join_path(prefix, key) + "\"");
    return *it;
}

inline double number_or(const json &node, const std::string &prefix, const char *key,
                        double fallback)
{
    const auto it = node.find(key);
    return it == node.end() ? fallback : as_number(*it, join_path(prefix, key));
}

inline long integer_or(const json &node, const std::string &prefix, const char *key, long fallback)
{
    const auto it = node.find(key);
    return it == node.end() ? fallback : as_integer(*it, join_path(prefix, key));
}

inline bool bool_or(const json &node, const std::string &prefix, const char *key, bool fallback)
{
    const auto it = node.find(key);
    return it == node.end() ? fallback : as_bool(*it, join_path(prefix, key));
}

inline std::string string_or(const json &node, const std::string &prefix, const char *key,
                             const std::string &fallback)
{
    const auto it = node.find(key);
    return it == node.end() ? fallback : as_string(*it, join_path(prefix, key));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Typed experiment spec.
// ---------------------------------------------------------------------------

struct IrsOptions
{
    std::string model = "ids"; // ids | inw-sc | inw-pc | inw-fc | random | none
    int group_size = 2;        // partially connected block size
    double reference_impedance = 50.0;
    irs::ImpairmentSpec impairments;
};

struct CodebookOptions
{
    int tiles = 1;
    int modes = 2;
    bool nested = true;
    int grid_count = 8;
    std::vector<channel::DirectionCosines> explicit_grid;

    std::vector<channel::DirectionCosines> grid() const
    {
        return nested ? codebook::nested_direction_grid(grid_count) : explicit_grid;
    }
};

struct AlgorithmOptions
{
    std::string method = "ao"; // swipt: bnb | penalty | exhaustive | random | none
    int max_iter = 60;
    int rounds = 3;
    double mu0 = 0.0; // 0 = scenario default
    double growth = 10.0;
    double tol_feas = 1e-4;
    double gradient_tol = 1e-8;
    int sweeps = 2;
};

struct ExperimentSpec
{
    std::string scenario; // secure | swipt | single-link
    channel::Geometry geometry;
    channel::FadingSpec fading;
    double noise_power = 1e-13;
    IrsOptions irs;
    CodebookOptions codebook;
    AlgorithmOptions algorithm;
    scenarios::SecureScenario secure;
    scenarios::SwiptScenario swipt;
    scenarios::SingleLinkScenario single_link;
    std::string sweep_parameter; // empty when no sweep
    std::vector<json> sweep_values;
    long trials = 1;
    std::uint64_t master_seed = 0;
    std::string output = "results.csv";
};

namespace detail
{

inline channel::Geometry parse_geometry(const json &node, const std::string &prefix)
{
    expect_keys(node, prefix, {"wavelength", "tx", "receivers", "irs"});
    channel::Geometry geometry;
    geometry.wavelength = number_or(node, prefix, "wavelength", 0.1);

    const json &tx = required(node, prefix, "tx");
    const std::string tx_path = join_path(prefix, "tx");
    expect_keys(tx, tx_path, {"position", "antennas", "spacing"});
    geometry.tx_position = as_vec3(required(tx, tx_path, "position"), join_path(tx_path, "position"));
    geometry.tx_antenna_count = static_cast<int>(integer_or(tx, tx_path, "antennas", 1));
    geometry.tx_antenna_spacing = number_or(tx, tx_path, "spacing", 0.5);

    const json &receivers = required(node, prefix, "receivers");
    const std::string rx_path = join_path(prefix, "receivers");
    if (!receivers.is_array() || receivers.empty())
        throw domain_error("config: \"" + rx_path + "\" must be a non-empty array");
    for (std::size_t i = 0; i < receivers.size(); ++i)
    {
        const std::string item_path = rx_path + "[" + std::to_string(i) + "]";
        expect_keys(receivers[i], item_path, {"position", "antennas", "spacing", "direct_blocked"});
        channel::RxDescriptor rx;
        rx.position = as_vec3(required(receivers[i], item_path, "position"),
                              join_path(item_path, "position"));
        rx.antenna_count = static_cast<int>(integer_or(receivers[i], item_path, "antennas", 1));
        rx.antenna_spacing = number_or(receivers[i], item_path, "spacing", 0.5);
        rx.direct_blocked = bool_or(receivers[i], item_path, "direct_blocked", false);
        geometry.receivers.push_back(rx);
    }

    const json &surfaces = required(node, prefix, "irs");
    const std::string irs_path = join_path(prefix, "irs");
    if (!surfaces.is_array())
        throw domain_error("config: \"" + irs_path + "\" must be an array");
    for (std::size_t i = 0; i < surfaces.size(); ++i)
    {
        const std::string item_path = irs_path + "[" + std::to_string(i) + "]";
        expect_keys(surfaces[i], item_path, {"position", "elements", "rows", "spacing"});
        channel::IrsDescriptor surface;
        surface.position = as_vec3(required(surfaces[i], item_path, "position"),
                                   join_path(item_path, "position"));
        surface.element_count =
            static_cast<int>(as_integer(required(surfaces[i], item_path, "elements"),
                                        join_path(item_path, "elements")));
        const int rows = static_cast<int>(integer_or(surfaces[i], item_path, "rows", 1));
        if (rows < 1 || surface.element_count < 1 || surface.element_count % rows != 0)
            throw domain_error("config: \"" + item_path +
                               "\": elements must be a positive multiple of rows");
        surface.layout = channel::ArrayLayout::planar(rows, surface.element_count / rows);
        surface.element_spacing = number_or(surfaces[i], item_path, "spacing", 0.5);
        geometry.irs.push_back(surface);
    }

    geometry.validate();
    return geometry;
}

inline channel::FadingSpec parse_fading(const json &node, const std::string &prefix,
                                        double &noise_power)
{
    expect_keys(node, prefix, {"model", "rician_k", "path_loss", "noise_power"});
    channel::FadingSpec fading;
    const std::string model = string_or(node, prefix, "model", "rician");
    if (model == "los")
        fading.model = channel::FadingSpec::Model::pure_los;
    else if (model == "rayleigh")
        fading.model = channel::FadingSpec::Model::rayleigh;
    else if (model == "rician")
        fading.model = channel::FadingSpec::Model::rician;
    else
        throw domain_error("config: \"" + join_path(prefix, "model") +
                           "\" must be one of los|rayleigh|rician");
    fading.rician_k = number_or(node, prefix, "rician_k", 1.0);
    const auto pl = node.find("path_loss");
    if (pl != node.end())
    {
        const std::string pl_path = join_path(prefix, "path_loss");
        expect_keys(*pl, pl_path, {"reference_db", "exponent"});
        fading.pathloss.reference_loss_db = number_or(*pl, pl_path, "reference_db", 30.0);
        fading.pathloss.exponent = number_or(*pl, pl_path, "exponent", 2.0);
    }
    noise_power = number_or(node, prefix, "noise_power", 1e-13);
    fading.validate();
    return fading;
}

inline irs::ImpairmentSpec parse_impairments(const json &node, const std::string &prefix)
{
    expect_keys(node, prefix,
                {"quantization_bits", "phase_error", "eevm_kappa_tx", "eevm_kappa_rx"});
    irs::ImpairmentSpec spec;
    spec.quantization_bits =
        static_cast<int>(integer_or(node, prefix, "quantization_bits", 0));
    spec.eevm_kappa_tx = number_or(node, prefix, "eevm_kappa_tx", 0.0);
    spec.eevm_kappa_rx = number_or(node, prefix, "eevm_kappa_rx", 0.0);
    const auto pe = node.find("phase_error");
    if (pe != node.end())
    {
        const std::string pe_path = join_path(prefix, "phase_error");
        expect_keys(*pe, pe_path, {"kind", "half_width", "concentration"});
        const std::string kind = string_or(*pe, pe_path, "kind", "none");
        if (kind == "none")
            spec.phase_error.kind = irs::PhaseErrorSpec::Kind::none;
        else if (kind == "uniform")
            spec.phase_error.kind = irs::PhaseErrorSpec::Kind::uniform;
        else if (kind == "von_mises")
            spec.phase_error.kind = irs::PhaseErrorSpec::Kind::von_mises;
        else
            throw domain_error("config: \"" + join_path(pe_path, "kind") +
                               "\" must be one of none|uniform|von_mises");
        spec.phase_error.half_width = number_or(*pe, pe_path, "half_width", 0.0);
        spec.phase_error.concentration = number_or(*pe, pe_path, "concentration", 0.0);
    }
    spec.validate();
    return spec;
}

inline IrsOptions parse_irs(const json &node, const std::string &prefix)
{
    expect_keys(node, prefix, {"model", "group_size", "reference_impedance", "impairments"});
    IrsOptions options;
    options.model = string_or(node, prefix, "model", "ids");
    const bool known = options.model == "ids" || options.model == "inw-sc" ||
                       options.model == "inw-pc" || options.model == "inw-fc" ||
                       options.model == "random" || options.model == "none";
    if (!known)
        throw domain_error("config: \"" + join_path(prefix, "model") +
                           "\" must be one of ids|inw-sc|inw-pc|inw-fc|random|none");
    options.group_size = static_cast<int>(integer_or(node, prefix, "group_size", 2));
    options.reference_impedance = number_or(node, prefix, "reference_impedance", 50.0);
    if (options.group_size < 1)
        throw domain_error("config: \"" + join_path(prefix, "group_size") +
                           "\" must be positive");
    const auto imp = node.find("impairments");
    if (imp != node.end())
        options.impairments = parse_impairments(*imp, join_path(prefix, "impairments"));
    return options;
}

inline CodebookOptions parse_codebook(const json &node, const std::string &prefix)
{
    expect_keys(node, prefix, {"tiles", "modes", "grid"});
    CodebookOptions options;
    options.tiles = static_cast<int>(integer_or(node, prefix, "tiles", 1));
    options.modes = static_cast<int>(integer_or(node, prefix, "modes", 2));
    if (options.tiles < 1 || options.modes < 1)
        throw domain_error("config: \"" + prefix + "\": tiles and modes must be positive");
    const auto grid = node.find("grid");
    if (grid != node.end())
    {
        const std::string grid_path = join_path(prefix, "grid");
        expect_keys(*grid, grid_path, {"type", "count", "points"});
        const std::string type = string_or(*grid, grid_path, "type", "nested");
        if (type == "nested")
        {
            options.nested = true;
            options.grid_count = static_cast<int>(integer_or(*grid, grid_path, "count", 8));
        }
        else if (type == "explicit")
        {
            options.nested = false;
            const json &points = required(*grid, grid_path, "points");
            const std::string pts_path = join_path(grid_path, "points");
            if (!points.is_array())
                throw domain_error("config: \"" + pts_path + "\" must be an array");
            for (std::size_t i = 0; i < points.size(); ++i)
            {
                const std::string p_path = pts_path + "[" + std::to_string(i) + "]";
                if (!points[i].is_array() || points[i].size() != 2)
                    throw domain_error("config: \"" + p_path + "\" must be a [u, v] pair");
                options.explicit_grid.push_back(
                    {as_number(points[i][0], p_path + "[0]"),
                     as_number(points[i][1], p_path + "[1]")});
            }
        }
        else
            throw domain_error("config: \"" + join_path(grid_path, "type") +
                               "\" must be nested|explicit");
    }
    if (static_cast<int>(options.grid().size()) < options.modes - 1)
        throw domain_error("config: \"" + prefix +
                           "\": grid must provide at least modes-1 directions");
    return options;
}

inline AlgorithmOptions parse_algorithm(const json &node, const std::string &prefix)
{
    expect_keys(node, prefix,
                {"method", "max_iter", "rounds", "mu0", "growth", "tol_feas", "gradient_tol",
                 "sweeps"});
    AlgorithmOptions options;
    options.method = string_or(node, prefix, "method", "ao");
    options.max_iter = static_cast<int>(integer_or(node, prefix, "max_iter", 60));
    options.rounds = static_cast<int>(integer_or(node, prefix, "rounds", 3));
    options.mu0 = number_or(node, prefix, "mu0", 0.0);
    options.growth = number_or(node, prefix, "growth", 10.0);
    options.tol_feas = number_or(node, prefix, "tol_feas", 1e-4);
    options.gradient_tol = number_or(node, prefix, "gradient_tol", 1e-8);
    options.sweeps = static_cast<int>(integer_or(node, prefix, "sweeps", 2));
    if (options.max_iter < 1 || options.rounds < 1 || options.sweeps < 1)
        throw domain_error("config: \"" + prefix +
                           "\": max_iter, rounds and sweeps must be positive");
    return options;
}

/// Navigate a dotted path; every segment must already exist.
inline json *resolve_path(json &root, const std::string &path)
{
    json *node = &root;
    std::size_t start = 0;
    while (true)
    {
        const std::size_t dot = path.find('.', start);
        const std::string segment = path.substr(start, dot - start);
        if (!node->is_object() || node->find(segment) == node->end())
            throw domain_error("config: sweep parameter path \"" + path +
                               "\" does not exist (missing \"" + segment + "\")");
        node = &(*node)[segment];
        if (dot == std::string::npos)
            return node;
        start = dot + 1;
    }
}

inline std::string render_sweep_value(const json &value)
{
    if (value.is_string())
        return value.get<std::string>();
    if (value.is_boolean())
        return value.get<bool>() ? "true" : "false";
    if (value.is_number_integer())
        return std::to_string(value.get<long>());
    if (value.is_number())
        return format_number(value.get<double>());
    throw domain_error("config: sweep values must be numbers, strings or booleans");
}

} // namespace detail

/// Full strict parse of one configuration document.
inline ExperimentSpec parse_spec(const json &root)
{
    using namespace detail;
    expect_keys(root, "",
                {"scenario", "geometry", "fading", "irs", "codebook", "algorithm", "secure",
                 "swipt", "single_link", "sweep", "mc", "output"});

    ExperimentSpec spec;
    spec.scenario = as_string(required(root, "", "scenario"), "scenario");
    if (spec.scenario != "secure" && spec.scenario != "swipt" && spec.scenario != "single-link")
        throw domain_error("config: \"scenario\" must be one of secure|swipt|single-link");

    spec.geometry = parse_geometry(required(root, "", "geometry"), "geometry");
    const auto fading = root.find("fading");
    if (fading != root.end())
        spec.fading = parse_fading(*fading, "fading", spec.noise_power);

    const auto irs_node = root.find("irs");
    if (irs_node != root.end())
        spec.irs = parse_irs(*irs_node, "irs");

    const auto cb = root.find("codebook");
    if (cb != root.end())
        spec.codebook = parse_codebook(*cb, "codebook");

    const auto algo = root.find("algorithm");
    if (algo != root.end())
        spec.algorithm = parse_algorithm(*algo, "algorithm");

    // Only the active scenario block may appear; anything else would be
    // silently ignored configuration.
    const char *expected_block = spec.scenario == "secure"  ? "secure"
                                 : spec.scenario == "swipt" ? "swipt"
                                                            : "single_link";
    for (const char *block : {"secure", "swipt", "single_link"})
        if (std::string(block) != expected_block && root.find(block) != root.end())
            throw domain_error("config: key \"" + std::string(block) +
                               "\" does not match scenario \"" + spec.scenario + "\"");

    if (spec.scenario == "secure")
    {
        const json &node = required(root, "", "secure");
        expect_keys(node, "secure",
                    {"users", "p_max", "leakage_cap_db", "csi_epsilon", "csi_samples"});
        spec.secure.legit_count = static_cast<int>(integer_or(node, "secure", "users", 1));
        spec.secure.p_max = number_or(node, "secure", "p_max", 1.0);
        spec.secure.leakage_cap =
            db_to_linear(number_or(node, "secure", "leakage_cap_db", 0.0));
        spec.secure.csi_epsilon = number_or(node, "secure", "csi_epsilon", 0.0);
        spec.secure.csi_samples =
            static_cast<int>(integer_or(node, "secure", "csi_samples", 32));
        spec.secure.pc_group_size = spec.irs.group_size;
        spec.secure.solver.rounds = spec.algorithm.rounds;
        spec.secure.solver.mu0 = spec.algorithm.mu0 > 0.0 ? spec.algorithm.mu0 : 1.0;
        spec.secure.solver.growth = spec.algorithm.growth;
        spec.secure.solver.tol_feas = spec.algorithm.tol_feas;
        spec.secure.solver.sweeps_per_round = spec.algorithm.sweeps;
        spec.secure.solver.wv_iterations = spec.algorithm.max_iter;
        spec.secure.solver.irs_iterations = spec.algorithm.max_iter;
        spec.secure.solver.gradient_tol = spec.algorithm.gradient_tol;
        spec.secure.validate();
        if (spec.secure.legit_count >= static_cast<int>(spec.geometry.receivers.size()))
            throw domain_error(
                "config: \"secure.users\" must leave at least one eavesdropper receiver");
    }
    else if (spec.scenario == "swipt")
    {
        const json &node = required(root, "", "swipt");
        expect_keys(node, "swipt", {"id_users", "gamma_db", "p_min", "efficiency"});
        const int id_users = static_cast<int>(integer_or(node, "swipt", "id_users", 1));
        if (id_users < 1)
            throw domain_error("config: \"swipt.id_users\" must be positive");
        const auto gamma = node.find("gamma_db");
        Eigen::VectorXd thresholds(id_users);
        if (gamma == node.end())
            thresholds.setConstant(db_to_linear(4.0));
        else if (gamma->is_array())
        {
            if (static_cast<int>(gamma->size()) != id_users)
                throw domain_error("config: \"swipt.gamma_db\" must list one value per ID user");
            for (int k = 0; k < id_users; ++k)
                thresholds(k) = db_to_linear(as_number(
                    (*gamma)[static_cast<std::size_t>(k)],
                    "swipt.gamma_db[" + std::to_string(k) + "]"));
        }
        else
            thresholds.setConstant(db_to_linear(as_number(*gamma, "swipt.gamma_db")));
        spec.swipt.sinr_thresholds = thresholds;
        spec.swipt.p_min = number_or(node, "swipt", "p_min", 1e-6);
        spec.swipt.efficiency = number_or(node, "swipt", "efficiency", 0.8);
        spec.swipt.noise_power = spec.noise_power;
        spec.swipt.solver.rounds = spec.algorithm.rounds;
        spec.swipt.solver.mu0 = spec.algorithm.mu0 > 0.0 ? spec.algorithm.mu0 : 10.0;
        spec.swipt.solver.growth = spec.algorithm.growth;
        spec.swipt.solver.tol_feas = spec.algorithm.tol_feas;
        spec.swipt.solver.iterations = spec.algorithm.max_iter;
        spec.swipt.solver.gradient_tol = spec.algorithm.gradient_tol;
        spec.swipt.solver.relax_sweeps = spec.algorithm.sweeps;
        spec.swipt.validate();
        const bool method_known = spec.algorithm.method == "bnb" ||
                                  spec.algorithm.method == "penalty" ||
                                  spec.algorithm.method == "exhaustive" ||
                                  spec.algorithm.method == "random" ||
                                  spec.algorithm.method == "none";
        if (!method_known)
            throw domain_error(
                "config: \"algorithm.method\" must be one of bnb|penalty|exhaustive|random|none");
        if (spec.geometry.irs.size() != 1)
            throw domain_error("config: swipt runs require exactly one IRS in \"geometry.irs\"");
        if (id_users >= static_cast<int>(spec.geometry.receivers.size()))
            throw domain_error(
                "config: \"swipt.id_users\" must leave at least one energy receiver");
        if (spec.codebook.tiles > spec.geometry.irs[0].element_count)
            throw domain_error("config: \"codebook.tiles\" exceeds the IRS element count");
    }
    else
    {
        const auto node = root.find("single_link");
        if (node != root.end())
        {
            expect_keys(*node, "single_link", {"p_max"});
            spec.single_link.p_max = number_or(*node, "single_link", "p_max", 1.0);
        }
        spec.single_link.impairments = spec.irs.impairments;
        spec.single_link.validate();
        if (spec.geometry.receivers.size() != 1 || spec.geometry.receivers[0].antenna_count != 1)
            throw domain_error(
                "config: single-link runs require exactly one single-antenna receiver");
    }

    const auto sweep = root.find("sweep");
    if (sweep != root.end())
    {
        expect_keys(*sweep, "sweep", {"parameter", "values"});
        spec.sweep_parameter = as_string(required(*sweep, "sweep", "parameter"),
                                         "sweep.parameter");
        const json &values = required(*sweep, "sweep", "values");
        if (!values.is_array() || values.empty())
            throw domain_error("config: \"sweep.values\" must be a non-empty array");
        for (const json &value : values)
            spec.sweep_values.push_back(value);
        json probe = root;
        detail::resolve_path(probe, spec.sweep_parameter);
    }

    const auto mc = root.find("mc");
    if (mc != root.end())
    {
        expect_keys(*mc, "mc", {"trials", "master_seed"});
        spec.trials = integer_or(*mc, "mc", "trials", 1);
        const long seed = integer_or(*mc, "mc", "master_seed", 0);
        if (seed < 0)
            throw domain_error("config: \"mc.master_seed\" must be non-negative");
        spec.master_seed = static_cast<std::uint64_t>(seed);
    }
    if (spec.trials < 1)
        throw domain_error("config: \"mc.trials\" must be at least 1");

    spec.output = detail::string_or(root, "", "output", "results.csv");
    return spec;
}

inline json load_config(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("load_config: cannot open " + path);
    json root;
    try
    {
        root = json::parse(in);
    }
    catch (const json::parse_error &err)
    {
        throw domain_error("config: " + path + ": " + err.what());
    }
    return root;
}

// ---------------------------------------------------------------------------
// Experiment execution.
// ---------------------------------------------------------------------------

namespace detail
{

inline scenarios::SecureIrsModel secure_model_of(const std::string &name)
{
    if (name == "ids")
        return scenarios::SecureIrsModel::ids;
    if (name == "inw-sc")
        return scenarios::SecureIrsModel::inw_sc;
    if (name == "inw-pc")
        return scenarios::SecureIrsModel::inw_pc;
    if (name == "inw-fc")
        return scenarios::SecureIrsModel::inw_fc;
    if (name == "random")
        return scenarios::SecureIrsModel::random_phase;
    if (name == "none")
        return scenarios::SecureIrsModel::no_irs;
    throw domain_error("config: unsupported secure IRS model \"" + name + "\"");
}

inline scenarios::SwiptMethod swipt_method_of(const std::string &name)
{
    if (name == "bnb")
        return scenarios::SwiptMethod::bnb;
    if (name == "penalty")
        return scenarios::SwiptMethod::penalty;
    if (name == "exhaustive")
        return scenarios::SwiptMethod::exhaustive;
    if (name == "random")
        return scenarios::SwiptMethod::random_pick;
    if (name == "none")
        return scenarios::SwiptMethod::no_irs;
    throw domain_error("config: unsupported swipt method \"" + name + "\"");
}

inline codebook::EffectiveTileChannels swipt_tile_channels(const ExperimentSpec &spec,
                                                           const channel::ChannelSet &set)
{
    const channel::IrsDescriptor &surface = spec.geometry.irs[0];
    const codebook::TilePartition partition =
        codebook::partition_tiles(surface.layout, spec.codebook.tiles);
    const channel::DirectionCosines aoa_ref =
        channel::direction_toward(surface.position, spec.geometry.tx_position);
    const codebook::TransmissionModeSet modes = codebook::generate_codebook(
        partition, spec.codebook.modes, surface.element_spacing, aoa_ref, spec.codebook.grid());
    return codebook::precompute_tile_channels(set, partition, modes, 0);
}

inline void run_one(const ExperimentSpec &spec, ResultRow &row)
{
    Rng root(row.seed);
    Rng channel_rng = root.split(StreamPurpose::channel, 0);
    const channel::ChannelSet set =
        channel::draw_channels(spec.geometry, spec.fading, channel_rng, spec.noise_power);

    if (spec.scenario == "secure")
    {
        const scenarios::BeamformingSolution solution = scenarios::solve_secure(
            spec.secure, set, secure_model_of(spec.irs.model), row.seed);
        row.objective = solution.objective;
        row.feasible = solution.report.feasible;
        row.iterations = solution.report.iterations;
    }
    else if (spec.scenario == "swipt")
    {
        const codebook::EffectiveTileChannels tiles = swipt_tile_channels(spec, set);
        const scenarios::BeamformingSolution solution = scenarios::solve_swipt(
            spec.swipt, tiles, swipt_method_of(spec.algorithm.method), row.seed);
        row.objective = solution.objective;
        row.feasible = solution.report.feasible;
        row.iterations = solution.report.iterations;
    }
    else
    {
        const scenarios::BeamformingSolution solution =
            scenarios::solve_single_link(spec.single_link, set, row.seed);
        row.objective = solution.objective;
        row.feasible = solution.report.feasible;
        row.iterations = solution.report.iterations;
    }
}

} // namespace detail

struct RunOptions
{
    int threads = 1;
    bool timing = false; // real wall-clock runtimes break byte-reproducibility
    std::uint64_t seed_override = 0;
    bool has_seed_override = false;
};

/// Executes the full sweep-by-trial grid. Rows are ordered by (sweep index,
/// trial) no matter how many workers run; a solver failure marks its row
/// infeasible with an explanatory note and the run continues.
inline ResultTable run_experiment(const json &root, const RunOptions &options = {})
{
    const ExperimentSpec base = parse_spec(root);
    const std::uint64_t master =
        options.has_seed_override ? options.seed_override : base.master_seed;

    std::vector<ExperimentSpec> point_specs;
    std::vector<std::string> point_values;
    if (base.sweep_parameter.empty())
    {
        point_specs.push_back(base);
        point_values.push_back("0");
    }
    else
    {
        for (const json &value : base.sweep_values)
        {
            json doc = root;
            *detail::resolve_path(doc, base.sweep_parameter) = value;
            point_specs.push_back(parse_spec(doc));
            point_values.push_back(detail::render_sweep_value(value));
        }
    }

    ResultTable table;
    table.rows.resize(point_specs.size() * static_cast<std::size_t>(base.trials));
    for (std::size_t si = 0; si < point_specs.size(); ++si)
        for (long trial = 0; trial < base.trials; ++trial)
        {
            ResultRow &row = table.rows[si * static_cast<std::size_t>(base.trials) +
                                        static_cast<std::size_t>(trial)];
            const ExperimentSpec &spec = point_specs[si];
            row.scenario = spec.scenario;
            row.model = spec.irs.model;
            row.method = spec.algorithm.method;
            row.sweep_param = base.sweep_parameter.empty() ? "none" : base.sweep_parameter;
            row.sweep_value = point_values[si];
            row.trial = trial;
            row.seed = derive_seed(master, static_cast<std::uint64_t>(si),
                                   static_cast<std::uint64_t>(trial));
        }

    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        while (true)
        {
            const std::size_t index = next.fetch_add(1);
            if (index >= table.rows.size())
                return;
            ResultRow &row = table.rows[index];
            const ExperimentSpec &spec =
                point_specs[index / static_cast<std::size_t>(base.trials)];
            const auto start = std::chrono::steady_clock::now();
            try
            {
                detail::run_one(spec, row);
            }
            catch (const std::exception &err)
            {
                row.objective = std::numeric_limits<double>::quiet_NaN();
                row.feasible = false;
                row.iterations = 0;
                row.note = err.what();
            }
            if (options.timing)
                row.runtime_ms = std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - start)
                                     .count();
        }
    };

    const int thread_count = std::max(1, options.threads);
    if (thread_count == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int t = 0; t < thread_count; ++t)
            pool.emplace_back(worker);
        for (std::thread &t : pool)
            t.join();
    }
    return table;
}

/// Re-solves every (sweep value, trial) instance of a swipt configuration
/// with both exhaustive enumeration and branch-and-bound and checks that
/// the objectives agree and that pruning never exceeds the enumeration
/// node budget.
struct OracleCheckResult
{
    bool ok = true;
    int instances = 0;
    int mismatches = 0;
    std::string summary;
};

inline OracleCheckResult oracle_check(const json &root)
{
    const ExperimentSpec base = parse_spec(root);
    require(base.scenario == "swipt",
            "oracle-check: configuration must use the swipt scenario");

    std::vector<ExperimentSpec> point_specs;
    if (base.sweep_parameter.empty())
        point_specs.push_back(base);
    else
        for (const json &value : base.sweep_values)
        {
            json doc = root;
            *detail::resolve_path(doc, base.sweep_parameter) = value;
            point_specs.push_back(parse_spec(doc));
        }

    OracleCheckResult result;
    std::ostringstream summary;
    for (std::size_t si = 0; si < point_specs.size(); ++si)
        for (long trial = 0; trial < base.trials; ++trial)
        {
            const ExperimentSpec &spec = point_specs[si];
            const std::uint64_t seed = derive_seed(base.master_seed,
                                                   static_cast<std::uint64_t>(si),
                                                   static_cast<std::uint64_t>(trial));
            Rng row_root(seed);
            Rng channel_rng = row_root.split(StreamPurpose::channel, 0);
            const channel::ChannelSet set = channel::draw_channels(
                spec.geometry, spec.fading, channel_rng, spec.noise_power);
            const codebook::EffectiveTileChannels tiles =
                detail::swipt_tile_channels(spec, set);

            const scenarios::BeamformingSolution exact = scenarios::solve_swipt(
                spec.swipt, tiles, scenarios::SwiptMethod::exhaustive, seed);
            const scenarios::BeamformingSolution pruned = scenarios::solve_swipt(
                spec.swipt, tiles, scenarios::SwiptMethod::bnb, seed);

            ++result.instances;
            const double scale = std::max(1.0, std::abs(exact.objective));
            const bool objective_ok =
                std::abs(exact.objective - pruned.objective) <= 1e-6 * scale ||
                (!exact.report.feasible && !pruned.report.feasible);

            // Full enumeration visits every node of the selection tree.
            double enumeration_nodes = 1.0;
            double layer = 1.0;
            for (int d = 0; d < tiles.tile_count; ++d)
            {
                layer *= tiles.mode_count;
                enumeration_nodes += layer;
            }
            const bool nodes_ok =
                static_cast<double>(pruned.report.nodes) <= enumeration_nodes;

            if (!objective_ok || !nodes_ok)
            {
                ++result.mismatches;
                result.ok = false;
                summary << "instance (sweep " << si << ", trial " << trial
                        << "): exhaustive " << format_number(exact.objective) << ", bnb "
                        << format_number(pruned.objective) << ", nodes "
                        << pruned.report.nodes << "/" << format_number(enumeration_nodes)
                        << " MISMATCH\n";
            }
        }
    summary << result.instances - result.mismatches << "/" << result.instances
            << " instances agree";
    result.summary = summary.str();
    return result;
}

} // namespace irsim::experiment

#endif // IRSIM_EXPERIMENT_HPP
