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

#ifndef CSIDIEL_EM_CORE_HPP
#define CSIDIEL_EM_CORE_HPP

#include "csidiel/trace_model.hpp"

namespace csidiel
{
    namespace constants
    {
        inline constexpr double eps0 = 8.8541878128e-12; // F/m
        inline constexpr double mu0 = 1.25663706212e-6;  // H/m
        inline constexpr double pi = 3.14159265358979323846;
    } // namespace constants

    // Plane-wave propagation constants of a lossy, non-magnetic medium.
    struct PropagationFactors
    {
        double k_r = 0.0; // phase constant, rad/m
        double k_i = 0.0; // attenuation constant, Np/m
    };

    // Polar form B * exp(j theta_b) of a slab's transmission, theta_b in (-2 pi, 0]
    // for the default branch.
    struct TransmissionFactor
    {
        double b = 1.0;
        double theta_b = 0.0;
    };

    // Ratio k_i / k_r below which a medium is treated as lossless.
    inline constexpr double kLosslessRatio = 1e-9;

    // Magnitudes up to 1 + kUnitGainSlack count as unit gain (floating-point roundoff).
    inline constexpr double kUnitGainSlack = 1e-12;

    double angular_frequency(double freq_hz);

    PropagationFactors wavenumbers(const DielectricProperties &props, double freq_hz);

    // exp(-k_i d) * exp(-j k_r d)
    Complex transmission_factor(const PropagationFactors &pf, double d_m);

    // Magnitude and unwrapped phase of t. The principal argument is mapped into
    // (-2 pi, 0] and then shifted by -2 pi * wrap_hint.
    TransmissionFactor polar_transmission(const Complex &t, int wrap_hint = 0);

    // Inverts transmission_factor. Throws non_physical_gain for |t| > 1,
    // zero_transmission for |t| = 0, non_physical_medium when the recovered
    // constants violate k_r > 0 or k_r >= k_i.
    PropagationFactors factors_from_transmission(const Complex &t, double d_m, int wrap_hint = 0);

    // Analytic inversion of wavenumbers(). Throws singular_ratio when k_r <= k_i
    // outside the lossless branch.
    DielectricProperties invert_to_dielectric(const PropagationFactors &pf, double freq_hz);
} // namespace csidiel

#endif
