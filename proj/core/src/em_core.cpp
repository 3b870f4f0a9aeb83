// SPDX-License-Identifier: Apache-2.0
//
// csidiel: dielectric property estimation from WiFi channel state information
// Copyright (C) 2026 The csidiel authors
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

#include "csidiel/em_core.hpp"

#include "csidiel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace csidiel
{
    namespace
    {
        void require_frequency(double freq_hz)
        {
            if (!std::isfinite(freq_hz) || freq_hz <= 0.0)
                throw Error(ErrorCode::invalid_argument, "frequency must be finite and > 0");
        }

        void require_thickness(double d_m)
        {
            if (!std::isfinite(d_m) || d_m <= 0.0)
                throw Error(ErrorCode::invalid_argument, "thickness d_m must be finite and > 0");
        }
    } // namespace

    double angular_frequency(double freq_hz)
    {
        require_frequency(freq_hz);
        return 2.0 * constants::pi * freq_hz;
    }

    PropagationFactors wavenumbers(const DielectricProperties &props, double freq_hz)
    {
        const double omega = angular_frequency(freq_hz);
        if (!std::isfinite(props.eps_r) || props.eps_r <= 0.0)
            throw Error(ErrorCode::invalid_argument, "eps_r must be finite and > 0");
        if (!std::isfinite(props.sigma) || props.sigma < 0.0)
            throw Error(ErrorCode::invalid_argument, "sigma must be finite and >= 0");

        const double loss = props.sigma / (constants::eps0 * props.eps_r * omega);
        const double lossless_k = omega * std::sqrt(constants::mu0 * constants::eps0 * props.eps_r);
        const double root = std::hypot(1.0, loss); // sqrt(1 + L^2)

        // (root - 1) / 2 == L^2 / (2 (root + 1)); the right side avoids cancellation for small L.
        PropagationFactors pf;
        pf.k_r = lossless_k * std::sqrt(0.5 * (root + 1.0));
        pf.k_i = lossless_k * loss / std::sqrt(2.0 * (root + 1.0));
        return pf;
    }

    Complex transmission_factor(const PropagationFactors &pf, double d_m)
    {
        require_thickness(d_m);
        return std::polar(std::exp(-pf.k_i * d_m), -pf.k_r * d_m);
    }

    TransmissionFactor polar_transmission(const Complex &t, int wrap_hint)
    {
        if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
            throw Error(ErrorCode::non_finite, "transmission factor is not finite");
        const double b = std::hypot(t.real(), t.imag());
        if (b == 0.0)
            throw Error(ErrorCode::zero_transmission, "transmission factor is zero");
        if (b > 1.0 + kUnitGainSlack)
        {
            std::ostringstream msg;
            msg.precision(6);
            msg << "non-physical gain: |T| = " << b << " > 1";
            throw Error(ErrorCode::non_physical_gain, msg.str());
        }
        double theta = std::atan2(t.imag(), t.real());
        if (theta > 0.0)
            theta -= 2.0 * constants::pi;
        theta -= 2.0 * constants::pi * static_cast<double>(wrap_hint);
        return {std::min(b, 1.0), theta};
    }

    PropagationFactors factors_from_transmission(const Complex &t, double d_m, int wrap_hint)
    {
        require_thickness(d_m);
        const TransmissionFactor tf = polar_transmission(t, wrap_hint);

        PropagationFactors pf;
        pf.k_i = -std::log(tf.b) / d_m;
        pf.k_r = -tf.theta_b / d_m;
        if (!(pf.k_r > 0.0))
            throw Error(ErrorCode::non_physical_medium, "k_r must be > 0 (zero phase delay; check wrap_hint)");
        if (pf.k_r < pf.k_i)
            throw Error(ErrorCode::non_physical_medium, "non-physical medium (k_r < k_i), check wrap_hint");
        return pf;
    }

    DielectricProperties invert_to_dielectric(const PropagationFactors &pf, double freq_hz)
    {
        const double omega = angular_frequency(freq_hz);
        if (!std::isfinite(pf.k_r) || !std::isfinite(pf.k_i) || pf.k_r <= 0.0 || pf.k_i < 0.0)
            throw Error(ErrorCode::invalid_argument, "propagation factors require k_r > 0 and k_i >= 0");

        const double omega2_mu_eps = omega * omega * constants::mu0 * constants::eps0;
        if (pf.k_i / pf.k_r < kLosslessRatio)
            return {pf.k_r * pf.k_r / omega2_mu_eps, 0.0};

        if (pf.k_r <= pf.k_i)
            throw Error(ErrorCode::singular_ratio, "singular ratio: k_r <= k_i has no dielectric solution");

        // With r = k_r / k_i, sqrt(((1 + r^2) / (r^2 - 1))^2 - 1) = 2 r / (r^2 - 1), which is
        // the loss term L = n / (eps0 omega). Written in k_r, k_i to stay finite near r = 1.
        const double loss = 2.0 * pf.k_r * pf.k_i / ((pf.k_r - pf.k_i) * (pf.k_r + pf.k_i));
        const double n = constants::eps0 * omega * loss; // sigma / eps_r
        const double eps_r = 2.0 * pf.k_r * pf.k_r / (omega2_mu_eps * (std::hypot(1.0, loss) + 1.0));
        return {eps_r, n * eps_r};
    }
} // namespace csidiel
