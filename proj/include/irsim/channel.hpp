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

#ifndef IRSIM_CHANNEL_HPP
#define IRSIM_CHANNEL_HPP

#include "irsim/common.hpp"
#include "irsim/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace irsim::channel
{

/// Antenna/element grid. Linear arrays run along the local x axis, planar
/// arrays fill a rows x cols grid in the local x-z plane, row-major.
struct ArrayLayout
{
    int rows = 1;
    int cols = 1;

    static ArrayLayout linear(int n)
    {
        require(n > 0, "ArrayLayout: element count must be positive");
        return ArrayLayout{1, n};
    }

    static ArrayLayout planar(int rows, int cols)
    {
        require(rows > 0 && cols > 0, "ArrayLayout: rows and cols must be positive");
        return ArrayLayout{rows, cols};
    }

    int count() const
    {
        return rows * cols;
    }

    /// Integer (x, y) offset of element l in layout order.
    Eigen::Vector2d offset(int l) const
    {
        return Eigen::Vector2d(static_cast<double>(l % cols), static_cast<double>(l / cols));
    }
};

/// Plane-wave direction as direction cosines along the local array axes.
/// Both components must lie in [-1, 1].
struct DirectionCosines
{
    double u = 0.0; // along the x (column) axis
    double v = 0.0; // along the z (row) axis
};

struct IrsDescriptor
{
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    int element_count = 1;
    double element_spacing = 0.5; // in wavelengths
    ArrayLayout layout = ArrayLayout::linear(1);
};

struct RxDescriptor
{
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    int antenna_count = 1;
    double antenna_spacing = 0.5; // in wavelengths
    bool direct_blocked = false;
};

struct Geometry
{
    Eigen::Vector3d tx_position = Eigen::Vector3d::Zero();
    int tx_antenna_count = 1;
    double tx_antenna_spacing = 0.5; // in wavelengths
    std::vector<RxDescriptor> receivers;
    std::vector<IrsDescriptor> irs;
    double wavelength = 0.1; // meters

    void validate() const
    {
        require(wavelength > 0.0, "Geometry: wavelength must be positive");
        require(tx_antenna_count > 0, "Geometry: tx antenna count must be positive");
        require(tx_antenna_spacing > 0.0, "Geometry: tx antenna spacing must be positive");
        require(tx_position.allFinite(), "Geometry: tx position must be finite");
        require(!receivers.empty(), "Geometry: at least one receiver required");
        for (const auto &rx : receivers)
        {
            require(rx.antenna_count > 0, "Geometry: rx antenna count must be positive");
            require(rx.antenna_spacing > 0.0, "Geometry: rx antenna spacing must be positive");
            require(rx.position.allFinite(), "Geometry: rx position must be finite");
        }
        for (const auto &surface : irs)
        {
            require(surface.element_count > 0, "Geometry: IRS element count must be positive");
            require(surface.element_spacing > 0.0, "Geometry: IRS element spacing must be positive");
            require(surface.layout.count() == surface.element_count,
                    "Geometry: IRS layout size must equal element_count");
            require(surface.position.allFinite(), "Geometry: IRS position must be finite");
        }
    }

    int total_irs_elements() const
    {
        int total = 0;
        for (const auto &surface : irs)
            total += surface.element_count;
        return total;
    }
};

/// Distance-based fading statistics shared by all links of a draw.
struct FadingSpec
{
    enum class Model
    {
        pure_los,
        rayleigh,
        rician
    };

    Model model = Model::rician;
    double rician_k = 1.0; // linear K-factor, >= 0

    struct PathLoss
    {
        double reference_loss_db = 30.0; // loss at 1 m
        double exponent = 2.0;           // alpha >= 0
    } pathloss;

    void validate() const
    {
        require(rician_k >= 0.0, "FadingSpec: Rician K-factor must be non-negative");
        require(pathloss.exponent >= 0.0, "FadingSpec: path-loss exponent must be non-negative");
    }
};

/// Linear power path loss at distance d (meters).
inline double path_loss(const FadingSpec::PathLoss &pl, double distance)
{
    require(distance > 0.0, "path_loss: distance must be positive");
    return std::pow(10.0, -pl.reference_loss_db / 10.0) * std::pow(distance, -pl.exponent);
}

/// All drawn channel matrices of one realization, plus the geometry that
/// produced them. Immutable after construction.
struct ChannelSet
{
    std::vector<Eigen::MatrixXcd> direct;                  // per rx, Nr x Nt
    std::vector<Eigen::MatrixXcd> tx_to_irs;               // per IRS, L_i x Nt
    std::vector<std::vector<Eigen::MatrixXcd>> irs_to_rx;  // [irs][rx], Nr x L_i
    Geometry geometry;
    double wavelength = 0.1;
    double noise_power = 1e-13; // Watts

    /// Tx->IRS channels stacked over all surfaces (mega-IRS view), sum(L_i) x Nt.
    Eigen::MatrixXcd stacked_tx_to_irs() const
    {
        const int total = geometry.total_irs_elements();
        const Eigen::Index nt = direct.empty() ? (tx_to_irs.empty() ? 0 : tx_to_irs[0].cols())
                                               : direct[0].cols();
        Eigen::MatrixXcd stacked(total, nt);
        Eigen::Index row = 0;
        for (const auto &h : tx_to_irs)
        {
            stacked.middleRows(row, h.rows()) = h;
            row += h.rows();
        }
        return stacked;
    }

    /// IRS->rx channels stacked over all surfaces, Nr x sum(L_i).
    Eigen::MatrixXcd stacked_irs_to_rx(std::size_t rx) const
    {
        const int total = geometry.total_irs_elements();
        const Eigen::Index nr = direct[rx].rows();
        Eigen::MatrixXcd stacked(nr, total);
        Eigen::Index col = 0;
        for (std::size_t i = 0; i < irs_to_rx.size(); ++i)
        {
            const auto &h = irs_to_rx[i][rx];
            stacked.middleCols(col, h.cols()) = h;
            col += h.cols();
        }
        return stacked;
    }
};

/// Array response for a plane wave along the given direction cosines.
/// Entry l is exp(j 2*pi*spacing * <direction, p_l>) with p_l the integer
/// element offset, so every entry has unit modulus.
inline Eigen::VectorXcd steering_vector(const ArrayLayout &layout, double spacing,
                                        const DirectionCosines &dir)
{
    require(spacing > 0.0, "steering_vector: spacing must be positive");
    require(std::abs(dir.u) <= 1.0 && std::abs(dir.v) <= 1.0 && std::isfinite(dir.u) && std::isfinite(dir.v),
            "steering_vector: direction cosines must lie in [-1, 1]");
    const int n = layout.count();
    Eigen::VectorXcd a(n);
    for (int l = 0; l < n; ++l)
    {
        const Eigen::Vector2d p = layout.offset(l);
        const double phase = two_pi * spacing * (dir.u * p.x() + dir.v * p.y());
        a(l) = unit_phasor(phase);
    }
    return a;
}

/// Direction cosines of the unit vector from `from` toward `to`, resolved in
/// the canonical array frame (x = column axis, z = row axis).
inline DirectionCosines direction_toward(const Eigen::Vector3d &from, const Eigen::Vector3d &to)
{
    const Eigen::Vector3d diff = to - from;
    const double d = diff.norm();
    require(d > 0.0, "direction_toward: coincident positions");
    return DirectionCosines{diff.x() / d, diff.z() / d};
}

namespace detail
{

/// One point-to-point link draw, Nb x Na (a transmits, b receives). Each
/// side's array response is evaluated along the unit vector from itself
/// toward the other end; the LoS phase reference is the centroid distance.
inline Eigen::MatrixXcd draw_link(const ArrayLayout &layout_a, double spacing_a,
                                  const Eigen::Vector3d &pos_a, const ArrayLayout &layout_b,
                                  double spacing_b, const Eigen::Vector3d &pos_b,
                                  const FadingSpec &fading, double wavelength, Rng &rng)
{
    const double d = (pos_b - pos_a).norm();
    require(d > 0.0, "draw_channels: coincident endpoint positions");
    const double amplitude = std::sqrt(path_loss(fading.pathloss, d));

    double w_los = 0.0, w_diffuse = 0.0;
    switch (fading.model)
    {
    case FadingSpec::Model::pure_los:
        w_los = 1.0;
        break;
    case FadingSpec::Model::rayleigh:
        w_diffuse = 1.0;
        break;
    case FadingSpec::Model::rician:
        w_los = std::sqrt(fading.rician_k / (fading.rician_k + 1.0));
        w_diffuse = std::sqrt(1.0 / (fading.rician_k + 1.0));
        break;
    }

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(layout_b.count(), layout_a.count());
    if (w_los > 0.0)
    {
        const Eigen::VectorXcd a_tx = steering_vector(layout_a, spacing_a, direction_toward(pos_a, pos_b));
        const Eigen::VectorXcd a_rx = steering_vector(layout_b, spacing_b, direction_toward(pos_b, pos_a));
        const cdouble los_phase = unit_phasor(-two_pi * d / wavelength);
        h += (w_los * los_phase) * (a_rx * a_tx.transpose());
    }
    if (w_diffuse > 0.0)
        h += w_diffuse * rng.complex_normal_matrix(layout_b.count(), layout_a.count());

    return amplitude * h;
}

} // namespace detail

/// Draws every link of the geometry. The draw order is fixed (direct links
/// in rx order, then Tx->IRS in surface order, then IRS->rx surface-major),
/// so a given rng stream yields a bit-identical ChannelSet.
inline ChannelSet draw_channels(const Geometry &geometry, const FadingSpec &fading, Rng &rng,
                                double noise_power = 1e-13)
{
    geometry.validate();
    fading.validate();
    require(noise_power > 0.0, "draw_channels: noise power must be positive");

    const ArrayLayout tx_layout = ArrayLayout::linear(geometry.tx_antenna_count);

    ChannelSet set;
    set.geometry = geometry;
    set.wavelength = geometry.wavelength;
    set.noise_power = noise_power;

    for (const auto &rx : geometry.receivers)
    {
        if (rx.direct_blocked)
        {
            set.direct.push_back(Eigen::MatrixXcd::Zero(rx.antenna_count, geometry.tx_antenna_count));
            continue;
        }
        const ArrayLayout rx_layout = ArrayLayout::linear(rx.antenna_count);
        set.direct.push_back(detail::draw_link(tx_layout, geometry.tx_antenna_spacing,
                                               geometry.tx_position, rx_layout, rx.antenna_spacing,
                                               rx.position, fading, geometry.wavelength, rng));
    }

    for (const auto &surface : geometry.irs)
        set.tx_to_irs.push_back(detail::draw_link(tx_layout, geometry.tx_antenna_spacing,
                                                  geometry.tx_position, surface.layout,
                                                  surface.element_spacing, surface.position, fading,
                                                  geometry.wavelength, rng));

    for (const auto &surface : geometry.irs)
    {
        std::vector<Eigen::MatrixXcd> to_rx;
        for (const auto &rx : geometry.receivers)
        {
            const ArrayLayout rx_layout = ArrayLayout::linear(rx.antenna_count);
            to_rx.push_back(detail::draw_link(surface.layout, surface.element_spacing,
                                              surface.position, rx_layout, rx.antenna_spacing,
                                              rx.position, fading, geometry.wavelength, rng));
        }
        set.irs_to_rx.push_back(std::move(to_rx));
    }

    return set;
}

/// End-to-end channel of one receiver: direct plus all single-reflection
/// IRS paths (inter-IRS reflections are not modeled).
inline Eigen::MatrixXcd effective_channel(const ChannelSet &set,
                                          const std::vector<Eigen::MatrixXcd> &reflection_operators,
                                          std::size_t rx)
{
    require(rx < set.direct.size(), "effective_channel: rx index out of range");
    require(reflection_operators.size() == set.tx_to_irs.size(),
            "effective_channel: one reflection operator per IRS required");

    Eigen::MatrixXcd h = set.direct[rx];
    for (std::size_t i = 0; i < reflection_operators.size(); ++i)
    {
        const auto &theta = reflection_operators[i];
        const auto &h_t = set.tx_to_irs[i];
        const auto &h_r = set.irs_to_rx[i][rx];
        require(theta.rows() == h_t.rows() && theta.cols() == h_t.rows(),
                "effective_channel: reflection operator dimension mismatch");
        h += h_r * theta * h_t;
    }
    return h;
}

inline std::vector<Eigen::MatrixXcd> effective_channels(
    const ChannelSet &set, const std::vector<Eigen::MatrixXcd> &reflection_operators)
{
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(set.direct.size());
    for (std::size_t rx = 0; rx < set.direct.size(); ++rx)
        out.push_back(effective_channel(set, reflection_operators, rx));
    return out;
}

/// Equivalent composition through one block-diagonal stacked operator.
inline Eigen::MatrixXcd effective_channel_stacked(const ChannelSet &set,
                                                  const Eigen::MatrixXcd &stacked_operator,
                                                  std::size_t rx)
{
    const int total = set.geometry.total_irs_elements();
    require(stacked_operator.rows() == total && stacked_operator.cols() == total,
            "effective_channel_stacked: operator must be total_elements square");
    return set.direct[rx] + set.stacked_irs_to_rx(rx) * stacked_operator * set.stacked_tx_to_irs();
}

} // namespace irsim::channel

#endif // IRSIM_CHANNEL_HPP
