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

#ifndef IRSIM_COMMON_HPP
#define IRSIM_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace irsim
{

using cdouble = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

/// Thrown on violated preconditions and malformed domain inputs.
class domain_error : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a solver encounters non-finite values or an internal failure.
class solver_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string &message)
{
    if (!condition)
        throw domain_error(message);
}

/// Wraps an angle into [0, 2*pi).
inline double wrap_two_pi(double angle)
{
    double wrapped = std::fmod(angle, two_pi);
    if (wrapped < 0.0)
        wrapped += two_pi;
    // fmod of a slightly negative value can round up to exactly 2*pi
    if (wrapped >= two_pi)
        wrapped -= two_pi;
    return wrapped;
}

/// Circular distance between two angles, in [0, pi].
inline double circular_distance(double a, double b)
{
    double diff = wrap_two_pi(a - b);
    return std::min(diff, two_pi - diff);
}

inline double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

inline double linear_to_db(double linear)
{
    return 10.0 * std::log10(linear);
}

inline std::complex<double> unit_phasor(double angle)
{
    return std::complex<double>(std::cos(angle), std::sin(angle));
}

} // namespace irsim

#endif // IRSIM_COMMON_HPP
