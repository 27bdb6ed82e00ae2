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

#ifndef IRSIM_CODEBOOK_HPP
#define IRSIM_CODEBOOK_HPP

#include "irsim/channel.hpp"
#include "irsim/common.hpp"

#include <Eigen/Dense>

#include <vector>

namespace irsim::codebook
{

/// Contiguous grouping of surface elements into tiles, in layout order.
struct TilePartition
{
    channel::ArrayLayout layout;
    std::vector<int> assignment; // element index -> tile index
    std::vector<int> tile_start; // first element of each tile
    std::vector<int> tile_size;
    int tile_count = 0;
};

inline TilePartition partition_tiles(const channel::ArrayLayout &layout, int tile_count)
{
    const int total = layout.count();
    require(tile_count >= 1 && tile_count <= total,
            "partition_tiles: tile count must be in [1, element count]");

    TilePartition partition;
    partition.layout = layout;
    partition.tile_count = tile_count;
    partition.assignment.resize(total);

    const int base = total / tile_count;
    const int remainder = total % tile_count;
    int element = 0;
    for (int n = 0; n < tile_count; ++n)
    {
        const int size = base + (n < remainder ? 1 : 0);
        partition.tile_start.push_back(element);
        partition.tile_size.push_back(size);
        for (int k = 0; k < size; ++k)
            partition.assignment[element++] = n;
    }
    return partition;
}

/// Per-tile phase profiles selectable at runtime. Mode 0 is always the
/// zero-phase (specular) profile; the remaining modes are reflection beams
/// toward the leading design angles.
struct TransmissionModeSet
{
    std::vector<std::vector<Eigen::VectorXd>> modes; // [tile][mode], length = tile size
    std::vector<channel::DirectionCosines> design_angles;

    int mode_count() const
    {
        return modes.empty() ? 0 : static_cast<int>(modes[0].size());
    }
};

/// Fixed direction-cosine sequence whose prefixes are nested by
/// construction: 0, then odd multiples of successively halved steps.
/// Using the first M-1 entries for any M keeps coarser codebooks a prefix
/// of finer ones.
inline std::vector<channel::DirectionCosines> nested_direction_grid(int count)
{
    require(count >= 0, "nested_direction_grid: count must be non-negative");
    std::vector<channel::DirectionCosines> grid;
    grid.reserve(count);
    if (count > 0)
        grid.push_back(channel::DirectionCosines{0.0, 0.0});
    for (int depth = 1; static_cast<int>(grid.size()) < count; ++depth)
    {
        const double step = std::pow(0.5, depth);
        for (int k = 1; k < (1 << depth) && static_cast<int>(grid.size()) < count; k += 2)
        {
            grid.push_back(channel::DirectionCosines{k * step, 0.0});
            if (static_cast<int>(grid.size()) < count)
                grid.push_back(channel::DirectionCosines{-k * step, 0.0});
        }
    }
    return grid;
}

/// Beam profiles cancel the propagation phase accumulated from the
/// reference arrival direction to each design departure direction, using
/// global element offsets so that profiles stitched across tile boundaries
/// form one continuous beam.
inline TransmissionModeSet generate_codebook(const TilePartition &partition, int mode_count,
                                             double spacing,
                                             const channel::DirectionCosines &aoa_ref,
                                             const std::vector<channel::DirectionCosines> &aod_grid)
{
    require(mode_count >= 1, "generate_codebook: mode count must be at least 1");
    require(static_cast<int>(aod_grid.size()) >= mode_count - 1,
            "generate_codebook: design grid smaller than mode count - 1");
    require(spacing > 0.0, "generate_codebook: spacing must be positive");

    TransmissionModeSet set;
    set.design_angles.assign(aod_grid.begin(), aod_grid.begin() + (mode_count - 1));

    set.modes.resize(partition.tile_count);
    for (int n = 0; n < partition.tile_count; ++n)
    {
        auto &tile_modes = set.modes[n];
        tile_modes.push_back(Eigen::VectorXd::Zero(partition.tile_size[n]));
        for (int m = 1; m < mode_count; ++m)
        {
            const channel::DirectionCosines &aim = set.design_angles[m - 1];
            Eigen::VectorXd profile(partition.tile_size[n]);
            for (int k = 0; k < partition.tile_size[n]; ++k)
            {
                const Eigen::Vector2d p = partition.layout.offset(partition.tile_start[n] + k);
                profile(k) = wrap_two_pi(-two_pi * spacing *
                                         ((aoa_ref.u + aim.u) * p.x() + (aoa_ref.v + aim.v) * p.y()));
            }
            tile_modes.push_back(std::move(profile));
        }
    }
    return set;
}

/// One mode index per tile.
using ModeSelection = std::vector<int>;

/// Per-(tile, mode, rx) channel contributions; any selection composes by
/// summation, so selection search never touches per-element channels.
struct EffectiveTileChannels
{
    std::vector<std::vector<std::vector<Eigen::MatrixXcd>>> contributions; // [tile][mode][rx]
    std::vector<Eigen::MatrixXcd> direct;                                  // per rx
    int tile_count = 0;
    int mode_count = 0;
};

inline EffectiveTileChannels precompute_tile_channels(const channel::ChannelSet &set,
                                                      const TilePartition &partition,
                                                      const TransmissionModeSet &mode_set,
                                                      std::size_t irs_index = 0)
{
    require(irs_index < set.tx_to_irs.size(), "precompute_tile_channels: IRS index out of range");
    const Eigen::MatrixXcd &h_t = set.tx_to_irs[irs_index];
    require(h_t.rows() == partition.layout.count(),
            "precompute_tile_channels: partition does not match IRS element count");
    require(static_cast<int>(mode_set.modes.size()) == partition.tile_count,
            "precompute_tile_channels: mode set does not match partition");

    EffectiveTileChannels out;
    out.tile_count = partition.tile_count;
    out.mode_count = mode_set.mode_count();
    out.direct = set.direct;

    out.contributions.resize(partition.tile_count);
    for (int n = 0; n < partition.tile_count; ++n)
    {
        const int start = partition.tile_start[n];
        const int size = partition.tile_size[n];
        out.contributions[n].resize(out.mode_count);
        for (int m = 0; m < out.mode_count; ++m)
        {
            const Eigen::VectorXd &profile = mode_set.modes[n][m];
            require(profile.size() == size, "precompute_tile_channels: profile length mismatch");
            Eigen::VectorXcd phasors(size);
            for (int k = 0; k < size; ++k)
                phasors(k) = unit_phasor(profile(k));
            for (std::size_t rx = 0; rx < set.direct.size(); ++rx)
            {
                const Eigen::MatrixXcd &h_r = set.irs_to_rx[irs_index][rx];
                out.contributions[n][m].push_back(h_r.middleCols(start, size) *
                                                  phasors.asDiagonal() *
                                                  h_t.middleRows(start, size));
            }
        }
    }
    return out;
}

inline std::vector<Eigen::MatrixXcd> select_effective_channel(const EffectiveTileChannels &channels,
                                                              const ModeSelection &selection)
{
    require(static_cast<int>(selection.size()) == channels.tile_count,
            "select_effective_channel: selection length must equal tile count");
    std::vector<Eigen::MatrixXcd> h = channels.direct;
    for (int n = 0; n < channels.tile_count; ++n)
    {
        const int m = selection[static_cast<std::size_t>(n)];
        require(m >= 0 && m < channels.mode_count,
                "select_effective_channel: mode index out of range");
        for (std::size_t rx = 0; rx < h.size(); ++rx)
            h[rx] += channels.contributions[n][m][rx];
    }
    return h;
}

/// Full-surface phase profile realized by a selection (tile profiles
/// stitched in element order).
inline Eigen::VectorXd stitched_profile(const TilePartition &partition,
                                        const TransmissionModeSet &mode_set,
                                        const ModeSelection &selection)
{
    require(static_cast<int>(selection.size()) == partition.tile_count,
            "stitched_profile: selection length must equal tile count");
    Eigen::VectorXd profile(partition.layout.count());
    for (int n = 0; n < partition.tile_count; ++n)
    {
        const int m = selection[static_cast<std::size_t>(n)];
        require(m >= 0 && m < mode_set.mode_count(), "stitched_profile: mode index out of range");
        profile.segment(partition.tile_start[n], partition.tile_size[n]) = mode_set.modes[n][m];
    }
    return profile;
}

} // namespace irsim::codebook

#endif // IRSIM_CODEBOOK_HPP
