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

#ifndef IRSIM_SCENARIOS_HPP
#define IRSIM_SCENARIOS_HPP

#include "irsim/channel.hpp"
#include "irsim/codebook.hpp"
#include "irsim/common.hpp"
#include "irsim/irs_models.hpp"
#include "irsim/metrics.hpp"
#include "irsim/optim.hpp"
#include "irsim/rng.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace irsim::scenarios
{

// ---------------------------------------------------------------------------
// Scenario descriptions.
// ---------------------------------------------------------------------------

struct SecureSolverOptions
{
    double mu0 = 1.0;
    double growth = 10.0;
    int rounds = 4;
    double tol_feas = 1e-4;
    int sweeps_per_round = 2;
    int wv_iterations = 60;
    int irs_iterations = 60;
    double gradient_tol = 1e-8;
    double reactance_clamp = 1e8;
};

/// Sum-rate maximization for the legitimate users with artificial noise,
/// subject to a transmit power budget and a per-stream leakage SINR cap at
/// every eavesdropper, optionally robust to bounded channel uncertainty.
/// Receivers [0, legit_count) of the channel set are the single-antenna
/// users; the rest are eavesdroppers.
struct SecureScenario
{
    int legit_count = 1;
    double p_max = 1.0;       // Watts
    double leakage_cap = 1.0; // linear SINR cap tau
    double csi_epsilon = 0.0; // Frobenius radius on eavesdropper effective channels
    int csi_samples = 32;
    int pc_group_size = 2;
    SecureSolverOptions solver;

    void validate() const
    {
        require(legit_count >= 1, "SecureScenario: at least one legitimate user");
        require(p_max > 0.0, "SecureScenario: power budget must be positive");
        require(leakage_cap > 0.0, "SecureScenario: leakage cap must be positive");
        require(csi_epsilon >= 0.0, "SecureScenario: CSI radius must be non-negative");
        require(csi_samples >= 0, "SecureScenario: CSI sample count must be non-negative");
        require(pc_group_size >= 1, "SecureScenario: group size must be positive");
    }
};

struct SwiptSolverOptions
{
    double mu0 = 10.0;
    double growth = 10.0;
    int rounds = 3;
    double tol_feas = 1e-4;
    int iterations = 80;
    double gradient_tol = 1e-9;
    int relax_sweeps = 3;
};

/// Transmit power minimization with per-user SINR floors at the
/// information receivers and a harvested-power floor at every energy
/// receiver. Receivers [0, K_id) of the tile channels are the ID users,
/// the rest harvest energy.
struct SwiptScenario
{
    Eigen::VectorXd sinr_thresholds; // linear, one per ID user
    double p_min = 1e-6;             // Watts
    double efficiency = 0.8;
    double noise_power = 1e-13;
    SwiptSolverOptions solver;

    void validate() const
    {
        require(sinr_thresholds.size() > 0, "SwiptScenario: at least one ID user");
        require((sinr_thresholds.array() > 0.0).all() && sinr_thresholds.allFinite(),
                "SwiptScenario: SINR thresholds must be positive and finite");
        require(p_min > 0.0, "SwiptScenario: harvested power floor must be positive");
        require(efficiency > 0.0 && efficiency <= 1.0,
                "SwiptScenario: efficiency must be in (0, 1]");
        require(noise_power > 0.0, "SwiptScenario: noise power must be positive");
    }
};

enum class SecureIrsModel
{
    ids,
    inw_sc,
    inw_pc,
    inw_fc,
    random_phase,
    no_irs
};

enum class SwiptMethod
{
    bnb,
    penalty,
    exhaustive,
    random_pick,
    no_irs
};

/// The surface configuration a solve settled on. `stacked_operator` is the
/// authoritative reflection operator over all surfaces; the parameter
/// fields record how it was produced.
struct IrsSetting
{
    enum class Kind
    {
        absent,
        phases,
        reactance
    };

    Kind kind = Kind::absent;
    Eigen::VectorXd phases;            // stacked element phases (Kind::phases)
    Eigen::MatrixXd reactance;         // stacked reactance (Kind::reactance)
    std::vector<int> reactance_blocks; // Cayley block sizes over stacked elements
    double reference_impedance = 50.0;
    Eigen::MatrixXcd stacked_operator;
};

struct BeamformingSolution
{
    Eigen::MatrixXcd w; // Nt x K
    Eigen::MatrixXcd v; // Nt x r, AN covariance factor (Z = V V^H)
    IrsSetting irs;
    optim::ModeSelection selection; // SWIPT mode selection, empty otherwise
    double objective = 0.0;
    optim::SolveReport report;
};

// ---------------------------------------------------------------------------
// Secure case study: shared channel data and smooth problems.
// ---------------------------------------------------------------------------

/// Raw link pieces of a secure instance, independent of the surface state.
/// Eavesdropper error matrices always include the zero matrix first, so the
/// nominal constraint is enforced alongside any sampled ones.
struct SecureLinkData
{
    Eigen::MatrixXcd a_stack;                          // L x Nt
    std::vector<Eigen::RowVectorXcd> user_direct;      // K of 1 x Nt
    std::vector<Eigen::RowVectorXcd> user_reflect;     // K of 1 x L
    std::vector<Eigen::MatrixXcd> eav_direct;          // E of Nr x Nt
    std::vector<Eigen::MatrixXcd> eav_reflect;         // E of Nr x L
    std::vector<std::vector<Eigen::MatrixXcd>> errors; // per eav, first entry zero
    double noise_power = 1e-13;
    double p_max = 1.0;
    double leakage_cap = 1.0;

    int tx_count() const
    {
        return static_cast<int>(a_stack.cols());
    }

    int element_count() const
    {
        return static_cast<int>(a_stack.rows());
    }
};

inline SecureLinkData build_secure_link_data(const SecureScenario &scenario,
                                             const channel::ChannelSet &set, Rng &csi_rng)
{
    scenario.validate();
    const int total_rx = static_cast<int>(set.direct.size());
    require(scenario.legit_count <= total_rx,
            "solve_secure: more legitimate users than receivers");

    SecureLinkData data;
    data.a_stack = set.stacked_tx_to_irs();
    data.noise_power = set.noise_power;
    data.p_max = scenario.p_max;
    data.leakage_cap = scenario.leakage_cap;

    for (int k = 0; k < scenario.legit_count; ++k)
    {
        require(set.direct[static_cast<std::size_t>(k)].rows() == 1,
                "solve_secure: legitimate users must be single-antenna");
        data.user_direct.push_back(set.direct[static_cast<std::size_t>(k)].row(0));
        data.user_reflect.push_back(set.stacked_irs_to_rx(static_cast<std::size_t>(k)).row(0));
    }
    for (int e = scenario.legit_count; e < total_rx; ++e)
    {
        data.eav_direct.push_back(set.direct[static_cast<std::size_t>(e)]);
        data.eav_reflect.push_back(set.stacked_irs_to_rx(static_cast<std::size_t>(e)));

        std::vector<Eigen::MatrixXcd> deltas;
        deltas.push_back(Eigen::MatrixXcd::Zero(data.eav_direct.back().rows(),
                                                data.eav_direct.back().cols()));
        if (scenario.csi_epsilon > 0.0)
        {
            for (int s = 0; s < scenario.csi_samples; ++s)
            {
                Eigen::MatrixXcd delta = csi_rng.complex_normal_matrix(
                    data.eav_direct.back().rows(), data.eav_direct.back().cols());
                delta *= scenario.csi_epsilon / delta.norm();
                deltas.push_back(std::move(delta));
            }
        }
        data.errors.push_back(std::move(deltas));
    }
    return data;
}

inline std::vector<Eigen::RowVectorXcd> secure_user_rows(const SecureLinkData &data,
                                                         const Eigen::MatrixXcd &theta)
{
    std::vector<Eigen::RowVectorXcd> rows;
    rows.reserve(data.user_direct.size());
    for (std::size_t k = 0; k < data.user_direct.size(); ++k)
    {
        if (theta.size() == 0)
            rows.push_back(data.user_direct[k]);
        else
            rows.push_back(data.user_direct[k] + data.user_reflect[k] * theta * data.a_stack);
    }
    return rows;
}

inline std::vector<Eigen::MatrixXcd> secure_eav_channels(const SecureLinkData &data,
                                                         const Eigen::MatrixXcd &theta)
{
    std::vector<Eigen::MatrixXcd> mats;
    mats.reserve(data.eav_direct.size());
    for (std::size_t e = 0; e < data.eav_direct.size(); ++e)
    {
        if (theta.size() == 0)
            mats.push_back(data.eav_direct[e]);
        else
            mats.push_back(data.eav_direct[e] + data.eav_reflect[e] * theta * data.a_stack);
    }
    return mats;
}

namespace detail
{

constexpr double inv_ln2 = 1.4426950408889634;

inline double sum_rate_of_rows(const std::vector<Eigen::RowVectorXcd> &rows,
                               const Eigen::MatrixXcd &w, const Eigen::MatrixXcd &v,
                               double noise_power)
{
    double total = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        const Eigen::RowVectorXcd t = rows[k] * w;
        double interference = noise_power;
        for (Eigen::Index j = 0; j < t.size(); ++j)
            if (j != static_cast<Eigen::Index>(k))
                interference += std::norm(t(j));
        if (v.size() > 0)
            interference += (rows[k] * v).squaredNorm();
        total += std::log2(1.0 + std::norm(t(static_cast<Eigen::Index>(k))) / interference);
    }
    return total;
}

/// Normalized constraint values of the secure problem at fixed channels:
/// power first, then one leakage entry per (eavesdropper, error, user).
inline std::vector<double> secure_violations(const std::vector<Eigen::RowVectorXcd> &rows,
                                             const SecureLinkData &data,
                                             const std::vector<Eigen::MatrixXcd> &eav_nominal,
                                             const Eigen::MatrixXcd &w, const Eigen::MatrixXcd &v)
{
    std::vector<double> g;
    g.push_back((w.squaredNorm() + v.squaredNorm() - data.p_max) / data.p_max);
    for (std::size_t e = 0; e < eav_nominal.size(); ++e)
        for (const Eigen::MatrixXcd &delta : data.errors[e])
        {
            const Eigen::VectorXd leak =
                metrics::leakage_sinr(eav_nominal[e] + delta, w, v, data.noise_power);
            for (Eigen::Index k = 0; k < leak.size(); ++k)
                g.push_back((leak(k) - data.leakage_cap) / data.leakage_cap);
        }
    (void)rows;
    return g;
}

inline double penalized_value(double sum_rate, const std::vector<double> &violations, double mu)
{
    double penalty = 0.0;
    for (double g : violations)
        if (g > 0.0)
            penalty += g * g;
    return sum_rate - mu * penalty;
}

inline double secure_penalized(const SecureLinkData &data, const Eigen::MatrixXcd &theta,
                               const Eigen::MatrixXcd &w, const Eigen::MatrixXcd &v, double mu)
{
    const auto rows = secure_user_rows(data, theta);
    const auto eav = secure_eav_channels(data, theta);
    return penalized_value(sum_rate_of_rows(rows, w, v, data.noise_power),
                           secure_violations(rows, data, eav, w, v), mu);
}

struct WvGradient
{
    Eigen::MatrixXcd w;
    Eigen::MatrixXcd v;
};

/// Gradient of the penalized secure objective with respect to (W, V) at
/// fixed channels, under the convention f(p + d) ~ f(p) + Re(g^H d).
inline WvGradient secure_wv_gradient(const std::vector<Eigen::RowVectorXcd> &rows,
                                     const SecureLinkData &data,
                                     const std::vector<Eigen::MatrixXcd> &eav_nominal,
                                     const Eigen::MatrixXcd &w, const Eigen::MatrixXcd &v,
                                     double mu)
{
    WvGradient grad{Eigen::MatrixXcd::Zero(w.rows(), w.cols()),
                    Eigen::MatrixXcd::Zero(v.rows(), v.cols())};

    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        const Eigen::Index kk = static_cast<Eigen::Index>(k);
        const Eigen::VectorXcd h = rows[k].adjoint();
        const Eigen::RowVectorXcd t = rows[k] * w;
        const Eigen::RowVectorXcd tv = v.size() > 0 ? (rows[k] * v).eval()
                                                    : Eigen::RowVectorXcd::Zero(0);
        double denom = data.noise_power;
        for (Eigen::Index j = 0; j < t.size(); ++j)
            if (j != kk)
                denom += std::norm(t(j));
        denom += tv.squaredNorm();
        const double signal = std::norm(t(kk));
        const double gamma = signal / denom;
        const double coef = inv_ln2 / (1.0 + gamma) / denom;

        grad.w.col(kk) += coef * 2.0 * t(kk) * h;
        for (Eigen::Index j = 0; j < t.size(); ++j)
            if (j != kk)
                grad.w.col(j) -= coef * gamma * 2.0 * t(j) * h;
        if (v.size() > 0)
            grad.v -= coef * gamma * 2.0 * h * tv;
    }

    const double g_pow = (w.squaredNorm() + v.squaredNorm() - data.p_max) / data.p_max;
    if (g_pow > 0.0)
    {
        const double factor = 2.0 * mu * g_pow * 2.0 / data.p_max;
        grad.w -= factor * w;
        grad.v -= factor * v;
    }

    for (std::size_t e = 0; e < eav_nominal.size(); ++e)
        for (const Eigen::MatrixXcd &delta : data.errors[e])
        {
            const Eigen::MatrixXcd h_e = eav_nominal[e] + delta;
            const Eigen::Index nr = h_e.rows();
            const Eigen::MatrixXcd hw = h_e * w;
            const Eigen::MatrixXcd hv = v.size() > 0 ? (h_e * v).eval()
                                                     : Eigen::MatrixXcd::Zero(nr, 0);
            const Eigen::MatrixXcd base = data.noise_power *
                                              Eigen::MatrixXcd::Identity(nr, nr) +
                                          hw * hw.adjoint() + hv * hv.adjoint();
            for (Eigen::Index k = 0; k < w.cols(); ++k)
            {
                const Eigen::VectorXcd u = hw.col(k);
                const Eigen::MatrixXcd q = base - u * u.adjoint();
                const Eigen::VectorXcd y = Eigen::LLT<Eigen::MatrixXcd>(q).solve(u);
                const double sinr = std::real(u.dot(y));
                const double g = (sinr - data.leakage_cap) / data.leakage_cap;
                if (g <= 0.0)
                    continue;
                const double factor = 2.0 * mu * g / data.leakage_cap;
                const Eigen::VectorXcd z = h_e.adjoint() * y;
                grad.w.col(k) -= factor * 2.0 * z;
                for (Eigen::Index j = 0; j < w.cols(); ++j)
                    if (j != k)
                        grad.w.col(j) += factor * 2.0 * (z.dot(w.col(j))) * z;
                if (v.size() > 0)
                    grad.v += factor * 2.0 * z * (z.adjoint() * v);
            }
        }

    return grad;
}

/// Gradient of the penalized secure objective with respect to the stacked
/// reflection operator, convention df = Re tr(G^H dTheta).
inline Eigen::MatrixXcd secure_theta_gradient(const SecureLinkData &data,
                                              const Eigen::MatrixXcd &theta,
                                              const Eigen::MatrixXcd &w, const Eigen::MatrixXcd &v,
                                              double mu)
{
    const int elements = data.element_count();
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(elements, elements);
    const Eigen::MatrixXcd aw = data.a_stack * w; // L x K
    const Eigen::MatrixXcd av = v.size() > 0 ? (data.a_stack * v).eval()
                                             : Eigen::MatrixXcd::Zero(elements, 0);

    const auto rows = secure_user_rows(data, theta);
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        const Eigen::Index kk = static_cast<Eigen::Index>(k);
        const Eigen::RowVectorXcd t = rows[k] * w;
        const Eigen::RowVectorXcd tv = v.size() > 0 ? (rows[k] * v).eval()
                                                    : Eigen::RowVectorXcd::Zero(0);
        double denom = data.noise_power;
        for (Eigen::Index j = 0; j < t.size(); ++j)
            if (j != kk)
                denom += std::norm(t(j));
        denom += tv.squaredNorm();
        const double gamma = std::norm(t(kk)) / denom;
        const double coef = inv_ln2 / (1.0 + gamma) / denom;

        const Eigen::VectorXcd b = data.user_reflect[k].adjoint(); // L x 1
        g += coef * 2.0 * t(kk) * b * aw.col(kk).adjoint();
        for (Eigen::Index j = 0; j < t.size(); ++j)
            if (j != kk)
                g -= coef * gamma * 2.0 * t(j) * b * aw.col(j).adjoint();
        for (Eigen::Index c = 0; c < tv.size(); ++c)
            g -= coef * gamma * 2.0 * tv(c) * b * av.col(c).adjoint();
    }

    const auto eav = secure_eav_channels(data, theta);
    for (std::size_t e = 0; e < eav.size(); ++e)
        for (const Eigen::MatrixXcd &delta : data.errors[e])
        {
            const Eigen::MatrixXcd h_e = eav[e] + delta;
            const Eigen::VectorXd leak = metrics::leakage_sinr(h_e, w, v, data.noise_power);
            for (Eigen::Index k = 0; k < leak.size(); ++k)
            {
                const double viol = (leak(k) - data.leakage_cap) / data.leakage_cap;
                if (viol <= 0.0)
                    continue;
                const Eigen::MatrixXcd grad_h = metrics::detail::leakage_gradient_wrt_channel(
                    h_e, w, v, data.noise_power, k);
                g -= (2.0 * mu * viol / data.leakage_cap) *
                     (data.eav_reflect[e].adjoint() * grad_h * data.a_stack.adjoint());
            }
        }

    return g;
}

/// Block-diagonal scattering operator from a stacked reactance matrix. The
/// factor order (jX - Z0 I) * (jX + Z0 I)^{-1} is the one the reactance
/// gradient below differentiates, so the two stay consistent for any X.
inline Eigen::MatrixXcd theta_from_reactance(const Eigen::MatrixXd &x,
                                             const std::vector<int> &blocks, double z0)
{
    const Eigen::Index n = x.rows();
    Eigen::MatrixXcd theta = Eigen::MatrixXcd::Zero(n, n);
    Eigen::Index off = 0;
    for (int size : blocks)
    {
        const Eigen::MatrixXcd jx =
            cdouble(0.0, 1.0) * x.block(off, off, size, size).cast<cdouble>();
        const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(size, size);
        const Eigen::MatrixXcd p = (jx + z0 * identity).partialPivLu().solve(identity);
        theta.block(off, off, size, size) = (jx - z0 * identity) * p;
        off += size;
    }
    return theta;
}

/// Chain rule through the Cayley-type transform: given the objective
/// gradient with respect to Theta, returns the Euclidean gradient with
/// respect to the reactance entries.
inline Eigen::MatrixXd reactance_gradient(const Eigen::MatrixXd &x, const std::vector<int> &blocks,
                                          double z0, const Eigen::MatrixXcd &g_theta)
{
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index off = 0;
    for (int size : blocks)
    {
        const Eigen::MatrixXcd jx =
            cdouble(0.0, 1.0) * x.block(off, off, size, size).cast<cdouble>();
        const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(size, size);
        const Eigen::MatrixXcd p = (jx + z0 * identity).partialPivLu().solve(identity);
        const Eigen::MatrixXcd theta = (jx - z0 * identity) * p;
        const Eigen::MatrixXcd m = p * g_theta.block(off, off, size, size).adjoint() *
                                   (cdouble(0.0, 1.0) * (identity - theta));
        g.block(off, off, size, size) = m.transpose().real();
        off += size;
    }
    return g;
}

inline Eigen::VectorXcd pack_wv(const Eigen::MatrixXcd &w, const Eigen::MatrixXcd &v)
{
    Eigen::VectorXcd p(w.size() + v.size());
    p.head(w.size()) = Eigen::Map<const Eigen::VectorXcd>(w.data(), w.size());
    if (v.size() > 0)
        p.tail(v.size()) = Eigen::Map<const Eigen::VectorXcd>(v.data(), v.size());
    return p;
}

inline void unpack_wv(const Eigen::VectorXcd &p, Eigen::MatrixXcd &w, Eigen::MatrixXcd &v)
{
    w = Eigen::Map<const Eigen::MatrixXcd>(p.data(), w.rows(), w.cols());
    if (v.size() > 0)
        v = Eigen::Map<const Eigen::MatrixXcd>(p.data() + w.size(), v.rows(), v.cols());
}

} // namespace detail

// ---------------------------------------------------------------------------
// Smooth problems shipped by the secure scenario. The solvers below use
// exactly these constructions, so gradient tests cover the production path.
// ---------------------------------------------------------------------------

/// Penalized (W, V) ascent problem at fixed channels. The point is
/// [vec(W); vec(V)].
inline optim::SmoothProblem<optim::ComplexEuclidean> secure_wv_problem(
    std::shared_ptr<const SecureLinkData> data, std::shared_ptr<const Eigen::MatrixXcd> theta,
    int an_rank, double mu)
{
    const int nt = data->tx_count();
    const int users = static_cast<int>(data->user_direct.size());
    auto rows = std::make_shared<const std::vector<Eigen::RowVectorXcd>>(
        secure_user_rows(*data, *theta));
    auto eav = std::make_shared<const std::vector<Eigen::MatrixXcd>>(
        secure_eav_channels(*data, *theta));

    optim::SmoothProblem<optim::ComplexEuclidean> problem;
    problem.objective = [data, rows, eav, nt, users, an_rank, mu](const Eigen::VectorXcd &p) {
        Eigen::MatrixXcd w(nt, users), v(nt, an_rank);
        detail::unpack_wv(p, w, v);
        return detail::penalized_value(detail::sum_rate_of_rows(*rows, w, v, data->noise_power),
                                       detail::secure_violations(*rows, *data, *eav, w, v), mu);
    };
    problem.gradient = [data, rows, eav, nt, users, an_rank, mu](const Eigen::VectorXcd &p) {
        Eigen::MatrixXcd w(nt, users), v(nt, an_rank);
        detail::unpack_wv(p, w, v);
        const detail::WvGradient g = detail::secure_wv_gradient(*rows, *data, *eav, w, v, mu);
        return detail::pack_wv(g.w, g.v);
    };
    return problem;
}

/// Penalized phase-profile ascent problem (IDS surface) at fixed (W, V).
/// The point is the vector of unit-modulus reflection coefficients.
inline optim::SmoothProblem<optim::CircleManifold> secure_phase_problem(
    std::shared_ptr<const SecureLinkData> data, std::shared_ptr<const Eigen::MatrixXcd> w,
    std::shared_ptr<const Eigen::MatrixXcd> v, double mu)
{
    optim::SmoothProblem<optim::CircleManifold> problem;
    problem.objective = [data, w, v, mu](const Eigen::VectorXcd &x) {
        return detail::secure_penalized(*data, Eigen::MatrixXcd(x.asDiagonal()), *w, *v, mu);
    };
    problem.gradient = [data, w, v, mu](const Eigen::VectorXcd &x) {
        const Eigen::MatrixXcd g_theta = detail::secure_theta_gradient(
            *data, Eigen::MatrixXcd(x.asDiagonal()), *w, *v, mu);
        return Eigen::VectorXcd(g_theta.diagonal());
    };
    return problem;
}

/// Penalized reactance ascent problem (INW surface) at fixed (W, V). The
/// point is the stacked real reactance matrix; `blocks` lists the Cayley
/// block sizes over the stacked elements.
inline optim::SmoothProblem<optim::SymmetricMatrices> secure_reactance_problem(
    std::shared_ptr<const SecureLinkData> data, std::shared_ptr<const Eigen::MatrixXcd> w,
    std::shared_ptr<const Eigen::MatrixXcd> v, std::vector<int> blocks, double z0, double mu)
{
    optim::SmoothProblem<optim::SymmetricMatrices> problem;
    problem.manifold = optim::SymmetricMatrices::block_diagonal(blocks);
    problem.objective = [data, w, v, blocks, z0, mu](const Eigen::MatrixXd &x) {
        return detail::secure_penalized(*data, detail::theta_from_reactance(x, blocks, z0), *w,
                                        *v, mu);
    };
    problem.gradient = [data, w, v, blocks, z0, mu](const Eigen::MatrixXd &x) {
        const Eigen::MatrixXcd theta = detail::theta_from_reactance(x, blocks, z0);
        const Eigen::MatrixXcd g_theta = detail::secure_theta_gradient(*data, theta, *w, *v, mu);
        return detail::reactance_gradient(x, blocks, z0, g_theta);
    };
    return problem;
}

// ---------------------------------------------------------------------------
// Secure solver.
// ---------------------------------------------------------------------------

namespace detail
{

struct SecureState
{
    Eigen::MatrixXcd w;
    Eigen::MatrixXcd v;
    Eigen::VectorXcd x;        // circle point (IDS path)
    Eigen::MatrixXd reactance; // INW path
    Eigen::MatrixXcd theta;
};

/// Alternating (W,V) / surface ascent under one escalating penalty
/// schedule. `irs_mode` 0: fixed operator, 1: phases, 2: reactance.
inline optim::SolveReport secure_alternating(const std::shared_ptr<const SecureLinkData> &data,
                                             const SecureSolverOptions &opts, int irs_mode,
                                             const std::vector<int> &blocks, double z0,
                                             SecureState &state)
{
    const int an_rank = static_cast<int>(state.v.cols());
    optim::SolveReport last_report;

    double mu = opts.mu0;
    for (int round = 0; round < opts.rounds; ++round)
    {
        std::vector<std::function<void(SecureState &)>> block_fns;

        block_fns.push_back([data, an_rank, mu, &opts](SecureState &s) {
            auto theta = std::make_shared<const Eigen::MatrixXcd>(s.theta);
            auto problem = secure_wv_problem(data, theta, an_rank, mu);
            Eigen::VectorXcd p = pack_wv(s.w, s.v);
            optim::AscendOptions ascend_opts;
            ascend_opts.max_iterations = opts.wv_iterations;
            ascend_opts.gradient_tol = opts.gradient_tol;
            optim::ascend(problem, p, ascend_opts);
            unpack_wv(p, s.w, s.v);
        });

        if (irs_mode == 1)
        {
            block_fns.push_back([data, mu, &opts](SecureState &s) {
                auto w = std::make_shared<const Eigen::MatrixXcd>(s.w);
                auto v = std::make_shared<const Eigen::MatrixXcd>(s.v);
                auto problem = secure_phase_problem(data, w, v, mu);
                optim::AscendOptions ascend_opts;
                ascend_opts.max_iterations = opts.irs_iterations;
                ascend_opts.gradient_tol = opts.gradient_tol;
                ascend_opts.initial_step = 0.5;
                optim::ascend(problem, s.x, ascend_opts);
                s.theta = s.x.asDiagonal();
            });
        }
        else if (irs_mode == 2)
        {
            block_fns.push_back([data, mu, blocks, z0, &opts](SecureState &s) {
                auto w = std::make_shared<const Eigen::MatrixXcd>(s.w);
                auto v = std::make_shared<const Eigen::MatrixXcd>(s.v);
                auto problem = secure_reactance_problem(data, w, v, blocks, z0, mu);
                optim::AscendOptions ascend_opts;
                ascend_opts.max_iterations = opts.irs_iterations;
                ascend_opts.gradient_tol = opts.gradient_tol;
                ascend_opts.initial_step = 10.0; // Ohm-scale steps
                optim::ascend(problem, s.reactance, ascend_opts);
                s.theta = theta_from_reactance(s.reactance, blocks, z0);
            });
        }

        const double round_mu = mu;
        std::function<double(const SecureState &)> joint = [data,
                                                            round_mu](const SecureState &s) {
            return secure_penalized(*data, s.theta, s.w, s.v, round_mu);
        };

        if (block_fns.size() >= 2)
        {
            optim::AlternatingOptions ao;
            ao.max_sweeps = opts.sweeps_per_round;
            ao.relative_tol = 1e-7;
            last_report = optim::alternating_optimize(block_fns, joint, state, ao);
        }
        else
        {
            block_fns[0](state);
            last_report.objective_trace = {joint(state)};
            last_report.converged = true;
        }
        mu *= opts.growth;
    }
    return last_report;
}

} // namespace detail

/// Joint active/passive design for the secure scenario. The INW variants
/// first run the IDS path on the same seed and refine from its optimum; if
/// refinement does not help, the IDS configuration (a valid special case of
/// every connectivity) is returned unchanged.
inline BeamformingSolution solve_secure(const SecureScenario &scenario,
                                        const channel::ChannelSet &set, SecureIrsModel model,
                                        std::uint64_t seed)
{
    scenario.validate();
    const int nt = static_cast<int>(set.direct.empty() ? 0 : set.direct[0].cols());
    const int elements = set.geometry.total_irs_elements();
    require(nt > 0, "solve_secure: transmitter must have antennas");

    Rng root(seed);
    Rng irs_rng = root.split(StreamPurpose::irs_init, 0);
    Rng csi_rng = root.split(StreamPurpose::csi_error, 0);
    Rng sol_rng = root.split(StreamPurpose::solver, 0);

    auto data = std::make_shared<const SecureLinkData>(
        build_secure_link_data(scenario, set, csi_rng));
    const int users = static_cast<int>(data->user_direct.size());
    const int an_rank = nt;

    // Shared starting surface: phases drawn once, identically for every
    // model on the same seed, so optimized and random-phase runs are paired.
    Eigen::VectorXd init_phases(elements);
    for (int l = 0; l < elements; ++l)
        init_phases(l) = irs_rng.uniform(0.0, two_pi);

    detail::SecureState state;
    state.x = Eigen::VectorXcd(elements);
    for (int l = 0; l < elements; ++l)
        state.x(l) = unit_phasor(init_phases(l));

    if (model == SecureIrsModel::no_irs)
        state.theta = Eigen::MatrixXcd::Zero(elements, elements);
    else
        state.theta = state.x.asDiagonal();

    // Beams matched to the initial effective channels, a small random AN
    // factor to break the V = 0 stationary point.
    const auto init_rows = secure_user_rows(*data, state.theta);
    state.w = Eigen::MatrixXcd::Zero(nt, users);
    for (int k = 0; k < users; ++k)
    {
        const Eigen::VectorXcd h = init_rows[static_cast<std::size_t>(k)].adjoint();
        const double norm = h.norm();
        if (norm > 0.0)
            state.w.col(k) = h * (std::sqrt(0.85 * scenario.p_max / users) / norm);
    }
    state.v = sol_rng.complex_normal_matrix(nt, an_rank);
    state.v *= std::sqrt(0.05 * scenario.p_max) / state.v.norm();

    // Surface parameterization.
    std::vector<int> blocks;
    const int irs_mode = (model == SecureIrsModel::ids) ? 1
                         : (model == SecureIrsModel::inw_sc || model == SecureIrsModel::inw_pc ||
                            model == SecureIrsModel::inw_fc)
                             ? 2
                             : 0;
    if (irs_mode == 2)
    {
        for (const auto &surface : set.geometry.irs)
        {
            if (model == SecureIrsModel::inw_sc)
                for (int l = 0; l < surface.element_count; ++l)
                    blocks.push_back(1);
            else if (model == SecureIrsModel::inw_fc)
                blocks.push_back(surface.element_count);
            else
                for (int off = 0; off < surface.element_count; off += scenario.pc_group_size)
                    blocks.push_back(
                        std::min(scenario.pc_group_size, surface.element_count - off));
        }
    }

    const double z0 = 50.0;
    BeamformingSolution ids_baseline;
    if (irs_mode == 2)
    {
        // The IDS run consumes the same substreams, so it is bit-identical
        // to a standalone IDS solve on this seed.
        ids_baseline = solve_secure(scenario, set, SecureIrsModel::ids, seed);
        state.w = ids_baseline.w;
        state.v = ids_baseline.v;
        state.reactance = Eigen::MatrixXd::Zero(elements, elements);
        state.reactance.diagonal() = irs::reflection_phases_to_reactance(
            ids_baseline.irs.phases, z0, scenario.solver.reactance_clamp);
        state.theta = detail::theta_from_reactance(state.reactance, blocks, z0);
    }

    optim::SolveReport report =
        detail::secure_alternating(data, scenario.solver, irs_mode, blocks, z0, state);

    // Enforce the power budget exactly, then verify.
    const double power = state.w.squaredNorm() + state.v.squaredNorm();
    if (power > scenario.p_max)
    {
        const double shrink = std::sqrt(scenario.p_max / power);
        state.w *= shrink;
        state.v *= shrink;
    }

    BeamformingSolution solution;
    solution.w = state.w;
    solution.v = state.v;
    solution.irs.stacked_operator = state.theta;
    if (model == SecureIrsModel::no_irs)
        solution.irs.kind = IrsSetting::Kind::absent;
    else if (irs_mode == 2)
    {
        solution.irs.kind = IrsSetting::Kind::reactance;
        solution.irs.reactance = state.reactance;
        solution.irs.reactance_blocks = blocks;
        solution.irs.reference_impedance = z0;
    }
    else
    {
        solution.irs.kind = IrsSetting::Kind::phases;
        solution.irs.phases.resize(elements);
        for (int l = 0; l < elements; ++l)
            solution.irs.phases(l) = wrap_two_pi(std::arg(state.x(l)));
    }

    const auto rows = secure_user_rows(*data, state.theta);
    std::vector<Eigen::MatrixXcd> row_mats;
    for (const auto &row : rows)
        row_mats.push_back(row);
    solution.objective = metrics::link_metrics(row_mats, state.w, state.v,
                                               data->noise_power)
                             .sum_rate;

    // Post-hoc worst-case verification of the leakage cap.
    double worst_rel = 0.0;
    const auto eav = secure_eav_channels(*data, state.theta);
    for (const auto &h_e : eav)
    {
        const double wc = metrics::worst_case_leakage(h_e, scenario.csi_epsilon, state.w, state.v,
                                                      data->noise_power, scenario.csi_samples);
        worst_rel = std::max(worst_rel, (wc - scenario.leakage_cap) / scenario.leakage_cap);
    }
    report.max_violation = std::max(0.0, worst_rel);
    report.feasible = report.max_violation <= scenario.solver.tol_feas;
    report.final_objective = solution.objective;
    solution.report = report;

    if (irs_mode == 2)
    {
        // Keep the better of refinement and its IDS starting point.
        const bool worse = (ids_baseline.report.feasible && !solution.report.feasible) ||
                           (ids_baseline.report.feasible == solution.report.feasible &&
                            solution.objective < ids_baseline.objective);
        if (worse)
        {
            ids_baseline.report.contract_violation = solution.report.contract_violation;
            return ids_baseline;
        }
    }
    return solution;
}

// ---------------------------------------------------------------------------
// SWIPT case study.
// ---------------------------------------------------------------------------

/// Channel rows of one SWIPT instance: ID users first, then EH receivers.
struct SwiptLinkData
{
    std::vector<Eigen::RowVectorXcd> id_rows;
    std::vector<Eigen::RowVectorXcd> eh_rows;
    Eigen::VectorXd gamma;
    double p_min = 1e-6;
    double efficiency = 0.8;
    double noise_power = 1e-13;
    int tx_count = 0;
};

inline SwiptLinkData build_swipt_link_data(const SwiptScenario &scenario,
                                           const std::vector<Eigen::MatrixXcd> &channels)
{
    scenario.validate();
    const int id_count = static_cast<int>(scenario.sinr_thresholds.size());
    require(static_cast<int>(channels.size()) > id_count,
            "solve_swipt: need at least one energy receiver after the ID users");

    SwiptLinkData data;
    data.gamma = scenario.sinr_thresholds;
    data.p_min = scenario.p_min;
    data.efficiency = scenario.efficiency;
    data.noise_power = scenario.noise_power;
    data.tx_count = static_cast<int>(channels[0].cols());
    for (int k = 0; k < id_count; ++k)
    {
        require(channels[static_cast<std::size_t>(k)].rows() == 1,
                "solve_swipt: receivers must be single-antenna");
        data.id_rows.push_back(channels[static_cast<std::size_t>(k)].row(0));
    }
    for (std::size_t e = static_cast<std::size_t>(id_count); e < channels.size(); ++e)
    {
        require(channels[e].rows() == 1, "solve_swipt: receivers must be single-antenna");
        data.eh_rows.push_back(channels[e].row(0));
    }
    return data;
}

/// Transmit power objective over vec(W), to be minimized.
inline optim::SmoothProblem<optim::ComplexEuclidean> swipt_power_problem()
{
    optim::SmoothProblem<optim::ComplexEuclidean> problem;
    problem.objective = [](const Eigen::VectorXcd &p) { return p.squaredNorm(); };
    problem.gradient = [](const Eigen::VectorXcd &p) { return Eigen::VectorXcd(2.0 * p); };
    return problem;
}

/// Normalized SINR and harvested-power constraints (g <= 0 feasible).
inline std::vector<optim::Constraint<optim::ComplexEuclidean>> swipt_constraints(
    std::shared_ptr<const SwiptLinkData> data)
{
    std::vector<optim::Constraint<optim::ComplexEuclidean>> constraints;
    const int nt = data->tx_count;
    const int users = static_cast<int>(data->id_rows.size());

    for (int k = 0; k < users; ++k)
    {
        optim::Constraint<optim::ComplexEuclidean> c;
        c.scale = 1.0;
        c.value = [data, nt, users, k](const Eigen::VectorXcd &p) {
            const Eigen::Map<const Eigen::MatrixXcd> w(p.data(), nt, users);
            const Eigen::RowVectorXcd t = data->id_rows[static_cast<std::size_t>(k)] * w;
            double interference = data->noise_power;
            for (Eigen::Index j = 0; j < t.size(); ++j)
                if (j != k)
                    interference += std::norm(t(j));
            const double gamma = data->gamma(k);
            return (gamma * interference - std::norm(t(k))) / (gamma * data->noise_power);
        };
        c.gradient = [data, nt, users, k](const Eigen::VectorXcd &p) {
            const Eigen::Map<const Eigen::MatrixXcd> w(p.data(), nt, users);
            const Eigen::RowVectorXcd row = data->id_rows[static_cast<std::size_t>(k)];
            const Eigen::RowVectorXcd t = row * w;
            const Eigen::VectorXcd h = row.adjoint();
            const double gamma = data->gamma(k);
            Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(nt, users);
            for (Eigen::Index j = 0; j < t.size(); ++j)
            {
                if (j == k)
                    g.col(j) = -2.0 * t(j) * h / (gamma * data->noise_power);
                else
                    g.col(j) = 2.0 * t(j) * h / data->noise_power;
            }
            return Eigen::VectorXcd(Eigen::Map<const Eigen::VectorXcd>(g.data(), g.size()));
        };
        constraints.push_back(std::move(c));
    }

    for (std::size_t e = 0; e < data->eh_rows.size(); ++e)
    {
        optim::Constraint<optim::ComplexEuclidean> c;
        c.scale = 1.0;
        c.value = [data, nt, users, e](const Eigen::VectorXcd &p) {
            const Eigen::Map<const Eigen::MatrixXcd> w(p.data(), nt, users);
            const double harvested = data->efficiency * (data->eh_rows[e] * w).squaredNorm();
            return (data->p_min - harvested) / data->p_min;
        };
        c.gradient = [data, nt, users, e](const Eigen::VectorXcd &p) {
            const Eigen::Map<const Eigen::MatrixXcd> w(p.data(), nt, users);
            const Eigen::RowVectorXcd row = data->eh_rows[e];
            const Eigen::RowVectorXcd t = row * w;
            const Eigen::VectorXcd h = row.adjoint();
            Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(nt, users);
            for (Eigen::Index j = 0; j < t.size(); ++j)
                g.col(j) = (-2.0 * data->efficiency / data->p_min) * t(j) * h;
            return Eigen::VectorXcd(Eigen::Map<const Eigen::VectorXcd>(g.data(), g.size()));
        };
        constraints.push_back(std::move(c));
    }
    return constraints;
}

namespace detail
{

/// Deterministic starting point: zero-forcing beams scaled to meet the
/// SINR floors exactly, then a common power raise for the EH floors.
inline Eigen::MatrixXcd swipt_initial_beams(const SwiptLinkData &data)
{
    const int nt = data.tx_count;
    const int users = static_cast<int>(data.id_rows.size());
    Eigen::MatrixXcd h(users, nt);
    for (int k = 0; k < users; ++k)
        h.row(k) = data.id_rows[static_cast<std::size_t>(k)];

    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(nt, users);
    const Eigen::MatrixXcd pinv = h.completeOrthogonalDecomposition().pseudoInverse();
    for (int k = 0; k < users; ++k)
    {
        const Eigen::VectorXcd u = pinv.col(k);
        const cdouble gain = (h.row(k) * u).value();
        const double target = std::sqrt(data.gamma(k) * data.noise_power);
        if (std::abs(gain) > 1e-14)
            w.col(k) = u * (target / gain);
        else if (h.row(k).norm() > 0.0)
            w.col(k) = h.row(k).adjoint() * (target / h.row(k).squaredNorm());
    }

    double raise = 1.0;
    for (const auto &row : data.eh_rows)
    {
        const double harvested = data.efficiency * (row * w).squaredNorm();
        if (harvested > 1e-300)
            raise = std::max(raise, data.p_min / harvested);
        else if (row.norm() > 0.0 && users > 0)
            w.col(0) += row.adjoint() * (std::sqrt(data.p_min / data.efficiency) /
                                         row.squaredNorm());
    }
    return w * std::sqrt(raise);
}

} // namespace detail

struct SwiptInnerSolution
{
    Eigen::MatrixXcd w;
    double objective = std::numeric_limits<double>::infinity();
    bool feasible = false;
    double max_violation = 0.0;
    int iterations = 0;
};

/// Power-minimizing beams for fixed channels.
inline SwiptInnerSolution swipt_inner_solve(const SwiptLinkData &data,
                                            const SwiptSolverOptions &opts)
{
    auto shared = std::make_shared<const SwiptLinkData>(data);
    const auto constraints = swipt_constraints(shared);
    auto problem = swipt_power_problem();

    Eigen::MatrixXcd w0 = detail::swipt_initial_beams(data);
    Eigen::VectorXcd p = Eigen::Map<const Eigen::VectorXcd>(w0.data(), w0.size());

    optim::PenaltySchedule schedule;
    schedule.mu0 = opts.mu0;
    schedule.growth = opts.growth;
    schedule.rounds = opts.rounds;
    schedule.tol_feas = opts.tol_feas;
    optim::AscendOptions ascend_opts;
    ascend_opts.max_iterations = opts.iterations;
    ascend_opts.gradient_tol = opts.gradient_tol;
    ascend_opts.initial_step = 0.25;

    const optim::SolveReport report =
        optim::penalty_solve(problem, constraints, p, schedule, ascend_opts);

    SwiptInnerSolution out;
    out.w = Eigen::Map<const Eigen::MatrixXcd>(p.data(), data.tx_count,
                                               static_cast<Eigen::Index>(data.id_rows.size()));
    out.objective = report.final_objective;
    out.feasible = report.feasible;
    out.max_violation = report.max_violation;
    out.iterations = report.iterations;
    return out;
}

/// Lower bound on the transmit power of any completion of a partial mode
/// assignment: each constraint is relaxed using the largest channel norm
/// reachable in the subtree (triangle inequality over undecided tiles).
/// Sound up to the inner solver's feasibility tolerance, hence the margin.
inline std::function<double(const optim::ModeSelection &)> swipt_norm_bound(
    std::shared_ptr<const codebook::EffectiveTileChannels> tiles,
    std::shared_ptr<const SwiptScenario> scenario)
{
    const int id_count = static_cast<int>(scenario->sinr_thresholds.size());
    const int rx_count = static_cast<int>(tiles->direct.size());

    // max_m ||contribution[n][m][rx]|| per (tile, rx)
    auto best_norms = std::make_shared<std::vector<std::vector<double>>>();
    best_norms->resize(static_cast<std::size_t>(tiles->tile_count));
    for (int n = 0; n < tiles->tile_count; ++n)
    {
        (*best_norms)[static_cast<std::size_t>(n)].resize(static_cast<std::size_t>(rx_count), 0.0);
        for (int m = 0; m < tiles->mode_count; ++m)
            for (int rx = 0; rx < rx_count; ++rx)
                (*best_norms)[static_cast<std::size_t>(n)][static_cast<std::size_t>(rx)] =
                    std::max((*best_norms)[static_cast<std::size_t>(n)][static_cast<std::size_t>(rx)],
                             tiles->contributions[static_cast<std::size_t>(n)]
                                                 [static_cast<std::size_t>(m)]
                                                 [static_cast<std::size_t>(rx)]
                                                     .norm());
    }

    return [tiles, scenario, best_norms, id_count, rx_count](const optim::ModeSelection &partial) {
        const int assigned = static_cast<int>(partial.size());
        double bound = 0.0;
        for (int rx = 0; rx < rx_count; ++rx)
        {
            Eigen::MatrixXcd base = tiles->direct[static_cast<std::size_t>(rx)];
            for (int n = 0; n < assigned; ++n)
                base += tiles->contributions[static_cast<std::size_t>(n)]
                                            [static_cast<std::size_t>(partial[static_cast<std::size_t>(n)])]
                                            [static_cast<std::size_t>(rx)];
            double reach = base.norm();
            for (int n = assigned; n < tiles->tile_count; ++n)
                reach += (*best_norms)[static_cast<std::size_t>(n)][static_cast<std::size_t>(rx)];
            const double reach_sq = std::max(reach * reach, 1e-300);

            if (rx < id_count)
                bound = std::max(bound,
                                 scenario->sinr_thresholds(rx) * scenario->noise_power / reach_sq);
            else
                bound = std::max(bound,
                                 scenario->p_min / (scenario->efficiency * reach_sq));
        }
        return bound * (1.0 - 1e-3);
    };
}

namespace detail
{

/// Continuous relaxation of the mode selection: simplex weights per tile,
/// pushed toward one-hot corners by an escalating quadratic penalty, then
/// rounded. The weight block and the beam block alternate.
inline optim::ModeSelection swipt_relaxed_selection(
    const std::shared_ptr<const codebook::EffectiveTileChannels> &tiles,
    const std::shared_ptr<const SwiptScenario> &scenario)
{
    const int tile_count = tiles->tile_count;
    const int mode_count = tiles->mode_count;
    const int rx_count = static_cast<int>(tiles->direct.size());
    const int id_count = static_cast<int>(scenario->sinr_thresholds.size());
    const int nt = static_cast<int>(tiles->direct[0].cols());
    const int users = id_count;

    auto compose_rows = [&](const Eigen::VectorXd &alpha) {
        std::vector<Eigen::MatrixXcd> channels;
        for (int rx = 0; rx < rx_count; ++rx)
        {
            Eigen::MatrixXcd h = tiles->direct[static_cast<std::size_t>(rx)];
            for (int n = 0; n < tile_count; ++n)
                for (int m = 0; m < mode_count; ++m)
                    h += alpha(n * mode_count + m) *
                         tiles->contributions[static_cast<std::size_t>(n)]
                                             [static_cast<std::size_t>(m)]
                                             [static_cast<std::size_t>(rx)];
            channels.push_back(h);
        }
        return channels;
    };

    Eigen::VectorXd alpha =
        Eigen::VectorXd::Constant(tile_count * mode_count, 1.0 / mode_count);
    SwiptLinkData relaxed = build_swipt_link_data(*scenario, compose_rows(alpha));
    Eigen::MatrixXcd w = detail::swipt_initial_beams(relaxed);
    Eigen::VectorXcd p = Eigen::Map<const Eigen::VectorXcd>(w.data(), w.size());

    double mu = scenario->solver.mu0;
    for (int round = 0; round < scenario->solver.rounds; ++round)
    {
        // Beam block at fixed weights.
        auto shared = std::make_shared<const SwiptLinkData>(
            build_swipt_link_data(*scenario, compose_rows(alpha)));
        const auto constraints = swipt_constraints(shared);
        auto power = swipt_power_problem();
        optim::SmoothProblem<optim::ComplexEuclidean> beam_problem;
        beam_problem.objective = [&power, &constraints, mu](const Eigen::VectorXcd &q) {
            double value = -power.objective(q);
            for (const auto &c : constraints)
            {
                const double g = c.value(q);
                if (g > 0.0)
                    value -= mu * g * g;
            }
            return value;
        };
        beam_problem.gradient = [&power, &constraints, mu](const Eigen::VectorXcd &q) {
            Eigen::VectorXcd g = -power.gradient(q);
            for (const auto &c : constraints)
            {
                const double viol = c.value(q);
                if (viol > 0.0)
                    g -= (2.0 * mu * viol) * c.gradient(q);
            }
            return g;
        };
        optim::AscendOptions beam_opts;
        beam_opts.max_iterations = scenario->solver.iterations;
        beam_opts.gradient_tol = scenario->solver.gradient_tol;
        beam_opts.initial_step = 0.25;
        optim::ascend(beam_problem, p, beam_opts);

        // Weight block at fixed beams.
        const Eigen::MatrixXcd w_now =
            Eigen::Map<const Eigen::MatrixXcd>(p.data(), nt, users);
        auto weight_objective = [&](const Eigen::VectorXd &a) {
            const auto channels = compose_rows(a);
            const SwiptLinkData d = build_swipt_link_data(*scenario, channels);
            auto sh = std::make_shared<const SwiptLinkData>(d);
            const auto cons = swipt_constraints(sh);
            const Eigen::VectorXcd q = Eigen::Map<const Eigen::VectorXcd>(
                w_now.data(), w_now.size());
            double value = -w_now.squaredNorm();
            for (const auto &c : cons)
            {
                const double g = c.value(q);
                if (g > 0.0)
                    value -= mu * g * g;
            }
            for (int n = 0; n < tile_count; ++n)
            {
                double sum = 0.0;
                for (int m = 0; m < mode_count; ++m)
                {
                    const double x = a(n * mode_count + m);
                    sum += x;
                    const double box = std::max(0.0, -x) + std::max(0.0, x - 1.0);
                    value -= mu * box * box;
                    const double push = x * (1.0 - x);
                    value -= mu * push * push;
                }
                value -= mu * (sum - 1.0) * (sum - 1.0);
            }
            return value;
        };

        optim::SmoothProblem<optim::RealEuclidean> weight_problem;
        weight_problem.objective = weight_objective;
        weight_problem.gradient = [&, weight_objective](const Eigen::VectorXd &a) {
            // Central differences: the weight block is low-dimensional and
            // runs a handful of times per solve.
            Eigen::VectorXd g(a.size());
            const double h = 1e-6;
            for (Eigen::Index i = 0; i < a.size(); ++i)
            {
                Eigen::VectorXd plus = a, minus = a;
                plus(i) += h;
                minus(i) -= h;
                g(i) = (weight_objective(plus) - weight_objective(minus)) / (2.0 * h);
            }
            return g;
        };
        optim::AscendOptions weight_opts;
        weight_opts.max_iterations = 30;
        weight_opts.gradient_tol = 1e-10;
        weight_opts.initial_step = 0.1;
        optim::ascend(weight_problem, alpha, weight_opts);

        mu *= scenario->solver.growth;
    }

    optim::ModeSelection selection(static_cast<std::size_t>(tile_count), 0);
    for (int n = 0; n < tile_count; ++n)
    {
        int best = 0;
        for (int m = 1; m < mode_count; ++m)
            if (alpha(n * mode_count + m) > alpha(n * mode_count + best))
                best = m;
        selection[static_cast<std::size_t>(n)] = best;
    }
    return selection;
}

} // namespace detail

/// Mode selection plus power-minimizing beams for the SWIPT scenario.
inline BeamformingSolution solve_swipt(const SwiptScenario &scenario,
                                       const codebook::EffectiveTileChannels &tile_channels,
                                       SwiptMethod method, std::uint64_t seed)
{
    scenario.validate();
    require(tile_channels.tile_count >= 1 && tile_channels.mode_count >= 1,
            "solve_swipt: empty tile channels");

    auto tiles = std::make_shared<const codebook::EffectiveTileChannels>(tile_channels);
    auto shared_scenario = std::make_shared<const SwiptScenario>(scenario);

    const auto inner = [tiles, shared_scenario](const optim::ModeSelection &selection) {
        const auto channels = codebook::select_effective_channel(*tiles, selection);
        const SwiptLinkData data = build_swipt_link_data(*shared_scenario, channels);
        const SwiptInnerSolution sol = swipt_inner_solve(data, shared_scenario->solver);
        return optim::InnerResult{sol.objective, sol.feasible};
    };

    optim::SelectionProblem problem;
    problem.tile_count = tile_channels.tile_count;
    problem.mode_count = tile_channels.mode_count;
    problem.inner_solve = inner;

    Rng root(seed);
    Rng pick_rng = root.split(StreamPurpose::selection, 0);

    optim::ModeSelection selection;
    optim::SolveReport report;
    bool direct_only = false;

    switch (method)
    {
    case SwiptMethod::exhaustive:
        std::tie(selection, report) = optim::exhaustive_select(problem);
        break;
    case SwiptMethod::bnb:
        std::tie(selection, report) =
            optim::branch_and_bound(problem, swipt_norm_bound(tiles, shared_scenario));
        break;
    case SwiptMethod::penalty:
        selection = detail::swipt_relaxed_selection(tiles, shared_scenario);
        break;
    case SwiptMethod::random_pick:
        selection.resize(static_cast<std::size_t>(tile_channels.tile_count));
        for (auto &m : selection)
            m = static_cast<int>(pick_rng.uniform_index(
                static_cast<std::size_t>(tile_channels.mode_count)));
        break;
    case SwiptMethod::no_irs:
        direct_only = true;
        break;
    }

    std::vector<Eigen::MatrixXcd> channels;
    if (direct_only)
        channels = tile_channels.direct;
    else
        channels = codebook::select_effective_channel(tile_channels, selection);

    const SwiptLinkData data = build_swipt_link_data(scenario, channels);
    const SwiptInnerSolution inner_solution = swipt_inner_solve(data, scenario.solver);

    BeamformingSolution solution;
    solution.w = inner_solution.w;
    solution.v = Eigen::MatrixXcd::Zero(data.tx_count, 0);
    solution.selection = selection;
    solution.objective = inner_solution.objective;

    if (method == SwiptMethod::exhaustive || method == SwiptMethod::bnb)
    {
        solution.report = report;
        solution.report.final_objective = inner_solution.objective;
        solution.report.feasible = inner_solution.feasible;
        solution.report.max_violation = inner_solution.max_violation;
    }
    else
    {
        solution.report.converged = true;
        solution.report.final_objective = inner_solution.objective;
        solution.report.feasible = inner_solution.feasible;
        solution.report.max_violation = inner_solution.max_violation;
        solution.report.iterations = inner_solution.iterations;
        solution.report.selection = selection;
    }
    return solution;
}

// ---------------------------------------------------------------------------
// Single link with hardware impairments.
// ---------------------------------------------------------------------------

struct SingleLinkScenario
{
    double p_max = 1.0;
    irs::ImpairmentSpec impairments;

    void validate() const
    {
        require(p_max > 0.0, "SingleLinkScenario: power budget must be positive");
        impairments.validate();
    }
};

/// Matched-filter transmission to a single user through one IDS surface:
/// closed-form alternation between the beam and the phase alignment, then
/// impairments applied to the aligned phases and to the received SNR.
inline BeamformingSolution solve_single_link(const SingleLinkScenario &scenario,
                                             const channel::ChannelSet &set, std::uint64_t seed)
{
    scenario.validate();
    require(set.direct.size() == 1 && set.direct[0].rows() == 1,
            "solve_single_link: exactly one single-antenna receiver required");

    Rng root(seed);
    Rng impair_rng = root.split(StreamPurpose::phase_error, 0);

    const Eigen::MatrixXcd a_stack = set.stacked_tx_to_irs();
    const Eigen::RowVectorXcd b = set.stacked_irs_to_rx(0).row(0);
    const Eigen::RowVectorXcd d = set.direct[0].row(0);
    const int elements = static_cast<int>(a_stack.rows());
    const int nt = static_cast<int>(a_stack.cols());

    struct State
    {
        Eigen::VectorXcd w;
        Eigen::VectorXd phases;
    };
    State state;
    state.w = Eigen::VectorXcd::Zero(nt);
    state.w(0) = std::sqrt(scenario.p_max);
    state.phases = Eigen::VectorXd::Zero(elements);

    auto effective_row = [&](const Eigen::VectorXd &phases) {
        Eigen::RowVectorXcd row = d;
        for (int l = 0; l < elements; ++l)
            row += unit_phasor(phases(l)) * (b(l) * a_stack.row(l));
        return row;
    };

    const std::function<double(const State &)> gain = [&](const State &s) {
        return std::norm((effective_row(s.phases) * s.w).value());
    };

    std::vector<std::function<void(State &)>> blocks;
    blocks.push_back([&](State &s) {
        const Eigen::VectorXcd h = effective_row(s.phases).adjoint();
        if (h.norm() > 0.0)
            s.w = h * (std::sqrt(scenario.p_max) / h.norm());
    });
    blocks.push_back([&](State &s) {
        // Align every reflected term with the direct term (or with zero
        // phase if the direct link is absent).
        const cdouble direct_gain = (d * s.w).value();
        const double reference = std::abs(direct_gain) > 0.0 ? std::arg(direct_gain) : 0.0;
        for (int l = 0; l < elements; ++l)
        {
            const cdouble path = b(l) * (a_stack.row(l) * s.w).value();
            if (std::abs(path) > 0.0)
                s.phases(l) = wrap_two_pi(reference - std::arg(path));
        }
    });

    optim::AlternatingOptions ao;
    ao.max_sweeps = 8;
    ao.relative_tol = 1e-12;
    optim::SolveReport report = optim::alternating_optimize(blocks, gain, state, ao);

    const Eigen::VectorXd realized =
        irs::impair_phases(state.phases, scenario.impairments, impair_rng);
    const double signal = std::norm((effective_row(realized) * state.w).value());
    const double snr = metrics::impaired_snr(signal, set.noise_power,
                                             scenario.impairments.eevm_kappa_tx,
                                             scenario.impairments.eevm_kappa_rx);

    BeamformingSolution solution;
    solution.w = state.w;
    solution.v = Eigen::MatrixXcd::Zero(nt, 0);
    solution.irs.kind = IrsSetting::Kind::phases;
    solution.irs.phases = realized;
    Eigen::VectorXcd diag(elements);
    for (int l = 0; l < elements; ++l)
        diag(l) = unit_phasor(realized(l));
    solution.irs.stacked_operator = diag.asDiagonal();
    solution.objective = snr;
    solution.report = report;
    solution.report.final_objective = snr;
    solution.report.feasible = true;
    return solution;
}

} // namespace irsim::scenarios

#endif // IRSIM_SCENARIOS_HPP
