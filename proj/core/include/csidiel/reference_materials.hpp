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

#ifndef CSIDIEL_REFERENCE_MATERIALS_HPP
#define CSIDIEL_REFERENCE_MATERIALS_HPP

#include "csidiel/trace_model.hpp"

#include <optional>
#include <span>
#include <string>

namespace csidiel
{
    // A liquid with probe-measured truth and, where reported, a WiFi estimate
    // and the printed relative errors (percent).
    struct ReferenceMaterial
    {
        std::string label;
        DielectricProperties truth;
        std::optional<DielectricProperties> reported_estimate;
        std::optional<double> printed_delta_eps_pct;
        std::optional<double> printed_delta_sigma_pct;
    };

    // Ethanol/water mixtures from 0 % to 90 % ABV (the calibration set).
    std::span<const ReferenceMaterial> ethanol_water_mixtures();

    // The two commercial spirits evaluated alongside the mixtures.
    std::span<const ReferenceMaterial> spirits();

    // Ethanol/water mixtures followed by the spirits, in table order.
    std::span<const ReferenceMaterial> mixtures_and_spirits();

    // Soju, saline and glucose solutions.
    std::span<const ReferenceMaterial> additional_liquids();

    // Empty container (sigma = 0).
    const ReferenceMaterial &air();

    // Every liquid except air, mixtures first.
    std::span<const ReferenceMaterial> all_liquids();
} // namespace csidiel

#endif
