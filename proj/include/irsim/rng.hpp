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

#ifndef IRSIM_RNG_HPP
#define IRSIM_RNG_HPP

#include "irsim/common.hpp"

#include <cstdint>
#include <random>

namespace irsim
{

/// SplitMix64 finalizer; the one documented mixing primitive behind all
/// substream derivation. Any reimplementation that reproduces this function
/// reproduces the stream structure of an experiment.
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Substream seed for (master_seed, sweep_index, trial_index) and for any
/// further per-purpose splits: seed = mix64(mix64(mix64(a) ^ b) ^ c).
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0)
{
    return mix64(mix64(mix64(a) ^ b) ^ c);
}

/// Purpose tags used when a trial substream is split further. Keeping them in
/// one place documents the stream layout of a run.
enum class StreamPurpose : std::uint64_t
{
    geometry = 1,
    channel = 2,
    csi_error = 3,
    irs_init = 4,
    phase_error = 5,
    selection = 6,
    solver = 7,
};

/// Deterministic random stream. Wraps mt19937_64 with the handful of draws
/// the simulator needs; normal variates use Box-Muller so the consumed
/// engine outputs per draw are fixed and independent of the C++ standard
/// library implementation.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng substream(std::uint64_t master, std::uint64_t sweep, std::uint64_t trial)
    {
        return Rng(derive_seed(master, sweep, trial));
    }

    Rng split(StreamPurpose purpose, std::uint64_t index = 0)
    {
        return Rng(derive_seed(base_draw(), static_cast<std::uint64_t>(purpose), index));
    }

    /// Uniform in [0, 1).
    double uniform()
    {
        return std::generate_canonical<double, 53>(engine_);
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi)
    {
        return lo + (hi - lo) * uniform();
    }

    std::uint64_t uniform_index(std::uint64_t n)
    {
        require(n > 0, "uniform_index: n must be positive");
        std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
        return dist(engine_);
    }

    /// Standard real normal via Box-Muller (two engine draws per pair).
    void normal_pair(double &a, double &b)
    {
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        double u2 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        a = radius * std::cos(two_pi * u2);
        b = radius * std::sin(two_pi * u2);
    }

    double normal()
    {
        double a, b;
        normal_pair(a, b);
        return a;
    }

    /// Standard circularly-symmetric complex normal, E|z|^2 = 1.
    cdouble complex_normal()
    {
        double a, b;
        normal_pair(a, b);
        return cdouble(a, b) / std::sqrt(2.0);
    }

    Eigen::MatrixXcd complex_normal_matrix(Eigen::Index rows, Eigen::Index cols)
    {
        Eigen::MatrixXcd m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
                m(r, c) = complex_normal();
        return m;
    }

    /// Von Mises sample with mean 0 and concentration kappa >= 0
    /// (Best-Fisher rejection sampler; kappa = 0 degenerates to uniform).
    double von_mises(double kappa)
    {
        require(kappa >= 0.0, "von_mises: kappa must be non-negative");
        if (kappa == 0.0)
            return uniform(-pi, pi);

        const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
        const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
        const double r = (1.0 + rho * rho) / (2.0 * rho);

        while (true)
        {
            double u1 = uniform();
            double z = std::cos(pi * u1);
            double f = (1.0 + r * z) / (r + z);
            double c = kappa * (r - f);
            double u2 = uniform();
            if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0)
            {
                double u3 = uniform();
                return (u3 < 0.5 ? -1.0 : 1.0) * std::acos(std::clamp(f, -1.0, 1.0));
            }
        }
    }

  private:
    std::uint64_t base_draw()
    {
        return engine_();
    }

    std::mt19937_64 engine_;
};

} // namespace irsim

#endif // IRSIM_RNG_HPP
