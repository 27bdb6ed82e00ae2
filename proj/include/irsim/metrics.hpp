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

#ifndef IRSIM_METRICS_HPP
#define IRSIM_METRICS_HPP

#include "irsim/common.hpp"
#include "irsim/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace irsim::metrics
{

struct LinkMetrics
{
    Eigen::VectorXd sinr;
    Eigen::VectorXd rate; // bits/s/Hz
    double sum_rate = 0.0;
};

/// Per-user SINR and rate for single-antenna receivers. Channel k is a
/// 1 x Nt row; w_k is the intended beam, the other beams and the noise
/// factor V interfere.
inline LinkMetrics link_metrics(const std::vector<Eigen::MatrixXcd> &channels,
                                const Eigen::MatrixXcd &w, const Eigen::MatrixXcd &v,
                                double noise_power)
{
    require(noise_power > 0.0, "link_metrics: noise power must be positive");
    const Eigen::Index users = static_cast<Eigen::Index>(channels.size());
    require(w.cols() == users, "link_metrics: one beam column per user required");

    LinkMetrics out;
    out.sinr.resize(users);
    out.rate.resize(users);
    for (Eigen::Index k = 0; k < users; ++k)
    {
        const Eigen::MatrixXcd &h = channels[static_cast<std::size_t>(k)];
        require(h.rows() == 1 && h.cols() == w.rows(), "link_metrics: channel must be 1 x Nt");

        const Eigen::RowVectorXcd row = h.row(0);
        const double signal = std::norm((row * w.col(k)).value());
        double interference = 0.0;
        for (Eigen::Index j = 0; j < users; ++j)
            if (j != k)
                interference += std::norm((row * w.col(j)).value());
        if (v.size() > 0)
            interference += (row * v).squaredNorm();

        out.sinr(k) = signal / (interference + noise_power);
        out.rate(k) = std::log2(1.0 + out.sinr(k));
        out.sum_rate += out.rate(k);
    }
    return out;
}

/// Leakage SINR of each user's stream at one eavesdropper applying the
/// optimal linear combiner: w_k^H H^H Q_k^{-1} H w_k with Q_k the
/// interference-plus-noise covariance seen for stream k.
inline Eigen::VectorXd leakage_sinr(const Eigen::MatrixXcd &h_e, const Eigen::MatrixXcd &w,
                                    const Eigen::MatrixXcd &v, double noise_power)
{
    require(noise_power > 0.0, "leakage_sinr: noise power must be positive");
    require(h_e.cols() == w.rows(), "leakage_sinr: channel/precoder dimension mismatch");
    const Eigen::Index nr = h_e.rows();
    const Eigen::Index users = w.cols();

    const Eigen::MatrixXcd hw = h_e * w;                          // Nr x K
    const Eigen::MatrixXcd hv = v.size() > 0 ? (h_e * v).eval()  // Nr x r
                                             : Eigen::MatrixXcd::Zero(nr, 0);
    const Eigen::MatrixXcd floor_cov = noise_power * Eigen::MatrixXcd::Identity(nr, nr) +
                                       hv * hv.adjoint();

    Eigen::VectorXd out(users);
    for (Eigen::Index k = 0; k < users; ++k)
    {
        // Sum the interference terms directly; subtracting the user term from
        // the total loses definiteness to rounding once the signal dwarfs the
        // noise floor.
        Eigen::MatrixXcd q = floor_cov;
        for (Eigen::Index j = 0; j < users; ++j)
            if (j != k)
                q += hw.col(j) * hw.col(j).adjoint();
        const Eigen::VectorXcd u = hw.col(k);
        Eigen::LLT<Eigen::MatrixXcd> llt(q);
        if (llt.info() != Eigen::Success)
        {
            // Extreme line-search probes can push the condition number past
            // 1/eps; retry with escalating diagonal loading before giving up.
            const double scale = std::max(q.diagonal().real().maxCoeff(), noise_power);
            double jitter = 1e-14 * scale;
            for (int attempt = 0; attempt < 8 && llt.info() != Eigen::Success; ++attempt)
            {
                llt.compute(q + jitter * Eigen::MatrixXcd::Identity(nr, nr));
                jitter *= 100.0;
            }
            if (llt.info() != Eigen::Success)
                throw solver_error("leakage_sinr: covariance not positive definite");
        }
        out(k) = std::real(u.dot(llt.solve(u)));
    }
    return out;
}

/// Linear energy-harvesting model; artificial noise is harvested too.
inline double harvested_power(const Eigen::MatrixXcd &h, const Eigen::MatrixXcd &w,
                              const Eigen::MatrixXcd &v, double efficiency)
{
    require(efficiency > 0.0 && efficiency <= 1.0, "harvested_power: efficiency must be in (0, 1]");
    require(h.rows() == 1 && h.cols() == w.rows(), "harvested_power: channel must be 1 x Nt");
    double power = (h * w).squaredNorm();
    if (v.size() > 0)
        power += (h * v).squaredNorm();
    return efficiency * power;
}

/// Received SNR under transceiver distortion noise whose power scales with
/// the signal power; saturates at 1/(kappa_tx + kappa_rx).
inline double impaired_snr(double signal_power, double noise_power, double kappa_tx,
                           double kappa_rx)
{
    require(signal_power >= 0.0, "impaired_snr: signal power must be non-negative");
    require(noise_power > 0.0, "impaired_snr: noise power must be positive");
    require(kappa_tx >= 0.0 && kappa_rx >= 0.0, "impaired_snr: kappas must be non-negative");
    return signal_power / (noise_power + (kappa_tx + kappa_rx) * signal_power);
}

namespace detail
{

/// Gradient of w_k^H H^H Q_k^{-1} H w_k with respect to H under the
/// convention df = Re tr(G^H dH).
inline Eigen::MatrixXcd leakage_gradient_wrt_channel(const Eigen::MatrixXcd &h,
                                                     const Eigen::MatrixXcd &w,
                                                     const Eigen::MatrixXcd &v, double noise_power,
                                                     Eigen::Index k)
{
    const Eigen::Index nr = h.rows();
    Eigen::MatrixXcd b = v.size() > 0 ? (v * v.adjoint()).eval()
                                      : Eigen::MatrixXcd::Zero(w.rows(), w.rows());
    for (Eigen::Index j = 0; j < w.cols(); ++j)
        if (j != k)
            b += w.col(j) * w.col(j).adjoint();

    const Eigen::MatrixXcd q =
        noise_power * Eigen::MatrixXcd::Identity(nr, nr) + h * b * h.adjoint();
    Eigen::LLT<Eigen::MatrixXcd> llt(q);
    const Eigen::VectorXcd u = h * w.col(k);
    const Eigen::VectorXcd y = llt.solve(u);
    return 2.0 * y * (w.col(k).adjoint() - y.adjoint() * h * b);
}

} // namespace detail

/// Largest leakage SINR over all channel errors within Frobenius radius
/// `epsilon` around the nominal channel, and over all user streams. The
/// search combines the nominal point, random boundary samples, and
/// projected-gradient ascent from the best candidate; the result is always
/// at least the nominal leakage.
inline double worst_case_leakage(const Eigen::MatrixXcd &h_e, double epsilon,
                                 const Eigen::MatrixXcd &w, const Eigen::MatrixXcd &v,
                                 double noise_power, int samples = 32)
{
    require(epsilon >= 0.0, "worst_case_leakage: radius must be non-negative");
    require(samples >= 0, "worst_case_leakage: sample count must be non-negative");

    const Eigen::VectorXd nominal = leakage_sinr(h_e, w, v, noise_power);
    double best = nominal.maxCoeff();
    if (epsilon == 0.0)
        return best;

    // Fixed generator: the verification is a deterministic function of its
    // arguments.
    Rng rng(derive_seed(0x77c5u, static_cast<std::uint64_t>(h_e.rows()),
                        static_cast<std::uint64_t>(h_e.cols())));

    Eigen::MatrixXcd best_delta = Eigen::MatrixXcd::Zero(h_e.rows(), h_e.cols());
    for (int s = 0; s < samples; ++s)
    {
        Eigen::MatrixXcd delta = rng.complex_normal_matrix(h_e.rows(), h_e.cols());
        delta *= epsilon / delta.norm();
        const double value = leakage_sinr(h_e + delta, w, v, noise_power).maxCoeff();
        if (value > best)
        {
            best = value;
            best_delta = delta;
        }
    }

    // Projected-gradient ascent from the best candidate, per user stream.
    for (Eigen::Index k = 0; k < w.cols(); ++k)
    {
        Eigen::MatrixXcd delta = best_delta;
        double current = leakage_sinr(h_e + delta, w, v, noise_power)(k);
        double step = epsilon;
        for (int iter = 0; iter < 40 && step > 1e-12 * epsilon; ++iter)
        {
            const Eigen::MatrixXcd grad =
                detail::leakage_gradient_wrt_channel(h_e + delta, w, v, noise_power, k);
            const double gnorm = grad.norm();
            if (gnorm == 0.0)
                break;
            Eigen::MatrixXcd candidate = delta + (step / gnorm) * grad;
            const double cnorm = candidate.norm();
            if (cnorm > epsilon)
                candidate *= epsilon / cnorm;
            const double value = leakage_sinr(h_e + candidate, w, v, noise_power)(k);
            if (value > current)
            {
                delta = candidate;
                current = value;
            }
            else
            {
                step *= 0.5;
            }
        }
        best = std::max(best, current);
    }
    return best;
}

} // namespace irsim::metrics

#endif // IRSIM_METRICS_HPP
