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

#ifndef IRSIM_IRS_MODELS_HPP
#define IRSIM_IRS_MODELS_HPP

#include "irsim/channel.hpp"
#include "irsim/common.hpp"
#include "irsim/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace irsim::irs
{

/// Ideal diagonal phase-shift surface: unit-modulus reflection coefficients.
struct IdsConfig
{
    Eigen::VectorXd phases; // radians

    void validate() const
    {
        require(phases.size() > 0, "IdsConfig: empty phase vector");
        require(phases.allFinite(), "IdsConfig: phases must be finite");
    }
};

enum class Connectivity
{
    single,
    full,
    partial
};

/// Reconfigurable impedance network behind the elements. The tunable state
/// is a real symmetric reactance matrix whose sparsity pattern follows the
/// connectivity: diagonal (single), unrestricted (full), or block diagonal
/// on a fixed element partition (partial).
struct InwConfig
{
    Connectivity connectivity = Connectivity::single;
    Eigen::MatrixXd reactance;        // Ohms
    std::vector<int> group_sizes;     // partial connectivity only
    double reference_impedance = 50.0; // Ohms

    void validate() const
    {
        const Eigen::Index n = reactance.rows();
        require(n > 0 && reactance.cols() == n, "InwConfig: reactance must be square");
        require(reactance.allFinite(), "InwConfig: reactance must be finite");
        require(reference_impedance > 0.0, "InwConfig: reference impedance must be positive");
        require((reactance - reactance.transpose()).cwiseAbs().maxCoeff() == 0.0,
                "InwConfig: reactance must be symmetric");
        if (connectivity == Connectivity::single)
        {
            require((reactance - Eigen::MatrixXd(reactance.diagonal().asDiagonal()))
                            .cwiseAbs()
                            .maxCoeff() == 0.0,
                    "InwConfig: single connectivity requires diagonal reactance");
        }
        else if (connectivity == Connectivity::partial)
        {
            int total = 0;
            for (int g : group_sizes)
            {
                require(g > 0, "InwConfig: group sizes must be positive");
                total += g;
            }
            require(total == n, "InwConfig: group sizes must partition the elements");
            Eigen::Index off = 0;
            Eigen::MatrixXd outside = reactance;
            for (int g : group_sizes)
            {
                outside.block(off, off, g, g).setZero();
                off += g;
            }
            require(outside.cwiseAbs().maxCoeff() == 0.0,
                    "InwConfig: partial connectivity requires block-diagonal reactance");
        }
    }
};

/// Reflection operator of a lossless surface: complex symmetric unitary.
struct ScatteringMatrix
{
    Eigen::MatrixXcd theta;

    double unitarity_defect() const
    {
        const Eigen::Index n = theta.rows();
        return (theta * theta.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    }

    double symmetry_defect() const
    {
        return (theta - theta.transpose()).cwiseAbs().maxCoeff();
    }
};

inline ScatteringMatrix ids_to_reflection(const IdsConfig &config)
{
    config.validate();
    const Eigen::Index n = config.phases.size();
    Eigen::MatrixXcd theta = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index l = 0; l < n; ++l)
        theta(l, l) = unit_phasor(config.phases(l));
    return ScatteringMatrix{std::move(theta)};
}

namespace detail
{

/// (jX - Z0 I)(jX + Z0 I)^{-1} for one dense block.
inline Eigen::MatrixXcd cayley_block(const Eigen::MatrixXd &x, double z0)
{
    const Eigen::Index n = x.rows();
    if (n == 1)
    {
        const cdouble jx(0.0, x(0, 0));
        return Eigen::MatrixXcd::Constant(1, 1, (jx - z0) / (jx + z0));
    }
    const Eigen::MatrixXcd jx = cdouble(0.0, 1.0) * x.cast<cdouble>();
    const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(n, n);
    // jX + Z0 I is nonsingular for real symmetric X: eigenvalues Z0 + j*lambda.
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(jx + z0 * identity);
    return lu.solve(jx - z0 * identity);
}

} // namespace detail

inline ScatteringMatrix reactance_to_scattering(const InwConfig &config)
{
    config.validate();
    const Eigen::Index n = config.reactance.rows();
    const double z0 = config.reference_impedance;
    Eigen::MatrixXcd theta = Eigen::MatrixXcd::Zero(n, n);

    if (config.connectivity == Connectivity::single)
    {
        for (Eigen::Index l = 0; l < n; ++l)
        {
            const cdouble jx(0.0, config.reactance(l, l));
            theta(l, l) = (jx - z0) / (jx + z0);
        }
    }
    else if (config.connectivity == Connectivity::partial)
    {
        Eigen::Index off = 0;
        for (int g : config.group_sizes)
        {
            theta.block(off, off, g, g) =
                detail::cayley_block(config.reactance.block(off, off, g, g), z0);
            off += g;
        }
    }
    else
    {
        theta = detail::cayley_block(config.reactance, z0);
    }

    ScatteringMatrix result{std::move(theta)};
    if (result.unitarity_defect() > 1e-8)
        throw solver_error("reactance_to_scattering: scattering matrix lost unitarity");
    return result;
}

/// Diagonal reactance realizing the given reflection phases through the
/// single-connected network: x = Z0 * cot(theta/2), clamped to avoid the
/// pole at theta = 0.
inline Eigen::VectorXd reflection_phases_to_reactance(const Eigen::VectorXd &phases, double z0,
                                                      double clamp = 1e6)
{
    require(z0 > 0.0, "reflection_phases_to_reactance: Z0 must be positive");
    Eigen::VectorXd x(phases.size());
    for (Eigen::Index l = 0; l < phases.size(); ++l)
    {
        const double half = 0.5 * wrap_two_pi(phases(l));
        const double s = std::sin(half);
        double value = (std::abs(s) < 1e-12) ? clamp : z0 * std::cos(half) / s;
        x(l) = std::clamp(value, -clamp, clamp);
    }
    return x;
}

/// Far-field bistatic reflection gain of a phase-profile surface:
/// g = A * sum_l exp(j(theta_l + 2*pi*spacing*<dir(psi_t)+dir(psi_r), p_l>)).
inline cdouble evaluate_grcs(const Eigen::VectorXd &phase_profile, const channel::ArrayLayout &layout,
                             double spacing, double amplitude, const channel::DirectionCosines &psi_t,
                             const channel::DirectionCosines &psi_r)
{
    require(phase_profile.size() == layout.count(),
            "evaluate_grcs: profile length must equal element count");
    require(amplitude > 0.0, "evaluate_grcs: element amplitude must be positive");
    require(spacing > 0.0, "evaluate_grcs: spacing must be positive");
    for (const auto &dir : {psi_t, psi_r})
        require(std::abs(dir.u) <= 1.0 && std::abs(dir.v) <= 1.0 && std::isfinite(dir.u) &&
                    std::isfinite(dir.v),
                "evaluate_grcs: direction cosines must lie in [-1, 1]");

    cdouble g(0.0, 0.0);
    for (int l = 0; l < layout.count(); ++l)
    {
        const Eigen::Vector2d p = layout.offset(l);
        const double geometric =
            two_pi * spacing * ((psi_t.u + psi_r.u) * p.x() + (psi_t.v + psi_r.v) * p.y());
        g += unit_phasor(phase_profile(l) + geometric);
    }
    return amplitude * g;
}

/// Reflection gains tabulated over angle grids.
struct GrcsMatrix
{
    Eigen::MatrixXcd values; // rows: AoA grid, cols: AoD grid
    double element_amplitude = 1.0;
};

inline GrcsMatrix build_grcs_matrix(const Eigen::VectorXd &phase_profile,
                                    const channel::ArrayLayout &layout, double spacing,
                                    double amplitude,
                                    const std::vector<channel::DirectionCosines> &aoa_grid,
                                    const std::vector<channel::DirectionCosines> &aod_grid)
{
    require(!aoa_grid.empty() && !aod_grid.empty(), "build_grcs_matrix: grids must be non-empty");
    GrcsMatrix out;
    out.element_amplitude = amplitude;
    out.values.resize(static_cast<Eigen::Index>(aoa_grid.size()),
                      static_cast<Eigen::Index>(aod_grid.size()));
    for (std::size_t i = 0; i < aoa_grid.size(); ++i)
        for (std::size_t k = 0; k < aod_grid.size(); ++k)
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                evaluate_grcs(phase_profile, layout, spacing, amplitude, aoa_grid[i], aod_grid[k]);
    return out;
}

/// The diagonal operator realizing the GRCS gains: composing it with the
/// two steering vectors reproduces evaluate_grcs for any angle pair.
inline ScatteringMatrix grcs_reflection_operator(const Eigen::VectorXd &phase_profile,
                                                 double amplitude)
{
    require(amplitude > 0.0, "grcs_reflection_operator: amplitude must be positive");
    const Eigen::Index n = phase_profile.size();
    Eigen::MatrixXcd theta = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index l = 0; l < n; ++l)
        theta(l, l) = amplitude * unit_phasor(phase_profile(l));
    return ScatteringMatrix{std::move(theta)};
}

/// Snaps each phase to the nearest of 2^K uniform levels under circular
/// distance; exact ties go to the lower level index.
inline Eigen::VectorXd quantize_phases(const Eigen::VectorXd &phases, int bits)
{
    require(bits >= 1 && bits <= 30, "quantize_phases: bits must be in [1, 30]");
    const std::int64_t n_levels = std::int64_t(1) << bits;
    const double step = two_pi / static_cast<double>(n_levels);

    Eigen::VectorXd out(phases.size());
    for (Eigen::Index l = 0; l < phases.size(); ++l)
    {
        const double t = wrap_two_pi(phases(l));
        std::int64_t lo = static_cast<std::int64_t>(std::floor(t / step)) % n_levels;
        const std::int64_t hi = (lo + 1) % n_levels;
        const double d_lo = circular_distance(t, static_cast<double>(lo) * step);
        const double d_hi = circular_distance(t, static_cast<double>(hi) * step);
        std::int64_t pick = lo;
        if (d_hi < d_lo)
            pick = hi;
        else if (d_hi == d_lo)
            pick = std::min(lo, hi);
        out(l) = static_cast<double>(pick) * step;
    }
    return out;
}

struct PhaseErrorSpec
{
    enum class Kind
    {
        none,
        uniform,
        von_mises
    };

    Kind kind = Kind::none;
    double half_width = 0.0;    // radians, uniform case
    double concentration = 0.0; // von Mises case

    void validate() const
    {
        require(half_width >= 0.0, "PhaseErrorSpec: half-width must be non-negative");
        require(concentration >= 0.0, "PhaseErrorSpec: concentration must be non-negative");
    }
};

inline Eigen::VectorXd apply_phase_error(const Eigen::VectorXd &phases, const PhaseErrorSpec &spec,
                                         Rng &rng)
{
    spec.validate();
    if (spec.kind == PhaseErrorSpec::Kind::none)
        return phases;
    Eigen::VectorXd out(phases.size());
    for (Eigen::Index l = 0; l < phases.size(); ++l)
    {
        double eps = 0.0;
        if (spec.kind == PhaseErrorSpec::Kind::uniform)
            eps = spec.half_width == 0.0 ? 0.0 : rng.uniform(-spec.half_width, spec.half_width);
        else
            eps = rng.von_mises(spec.concentration);
        out(l) = wrap_two_pi(phases(l) + eps);
    }
    return out;
}

/// Distortion noise power of a transceiver chain whose error-vector
/// magnitude scales with the carried signal power.
inline double eevm_distortion_power(double signal_power, double kappa)
{
    require(signal_power >= 0.0, "eevm_distortion_power: signal power must be non-negative");
    require(kappa >= 0.0, "eevm_distortion_power: kappa must be non-negative");
    return kappa * signal_power;
}

/// Hardware imperfections applied on top of an ideal design.
struct ImpairmentSpec
{
    int quantization_bits = 0; // 0 = ideal continuous phases
    PhaseErrorSpec phase_error;
    double eevm_kappa_tx = 0.0;
    double eevm_kappa_rx = 0.0;

    void validate() const
    {
        require(quantization_bits >= 0, "ImpairmentSpec: quantization bits must be non-negative");
        phase_error.validate();
        require(eevm_kappa_tx >= 0.0 && eevm_kappa_rx >= 0.0,
                "ImpairmentSpec: EEVM ratios must be non-negative");
    }

    bool ideal() const
    {
        return quantization_bits == 0 && phase_error.kind == PhaseErrorSpec::Kind::none &&
               eevm_kappa_tx == 0.0 && eevm_kappa_rx == 0.0;
    }
};

/// Quantization first (a discrete setting), then analog phase error.
inline Eigen::VectorXd impair_phases(const Eigen::VectorXd &phases, const ImpairmentSpec &spec,
                                     Rng &rng)
{
    spec.validate();
    Eigen::VectorXd out = phases;
    if (spec.quantization_bits >= 1)
        out = quantize_phases(out, spec.quantization_bits);
    return apply_phase_error(out, spec.phase_error, rng);
}

/// Symmetric Gaussian perturbation of the tunable reactance entries,
/// respecting the connectivity pattern. Exploratory; no distributional
/// claim about real hardware is implied.
inline InwConfig perturb_reactance(const InwConfig &config, double stddev_ohms, Rng &rng)
{
    config.validate();
    require(stddev_ohms >= 0.0, "perturb_reactance: stddev must be non-negative");
    InwConfig out = config;
    const Eigen::Index n = config.reactance.rows();

    auto perturb_block = [&](Eigen::Index off, Eigen::Index size) {
        for (Eigen::Index i = off; i < off + size; ++i)
            for (Eigen::Index j = i; j < off + size; ++j)
            {
                const double delta = stddev_ohms * rng.normal();
                out.reactance(i, j) += delta;
                if (j != i)
                    out.reactance(j, i) = out.reactance(i, j);
            }
    };

    if (config.connectivity == Connectivity::single)
    {
        for (Eigen::Index l = 0; l < n; ++l)
            out.reactance(l, l) += stddev_ohms * rng.normal();
    }
    else if (config.connectivity == Connectivity::partial)
    {
        Eigen::Index off = 0;
        for (int g : config.group_sizes)
        {
            perturb_block(off, g);
            off += g;
        }
    }
    else
    {
        perturb_block(0, n);
    }
    return out;
}

} // namespace irsim::irs

#endif // IRSIM_IRS_MODELS_HPP
