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

#ifndef CSIDIEL_ESTIMATOR_HPP
#define CSIDIEL_ESTIMATOR_HPP

#include "csidiel/calibration.hpp"
#include "csidiel/em_core.hpp"
#include "csidiel/preprocess.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csidiel
{
    struct DielectricEstimate
    {
        DielectricProperties est;
        double b = 1.0;
        double theta_b = 0.0;
        SubcarrierPosition subcarrier_position = kCenterAdjacentPosition;
        double freq_hz = 0.0;
    };

    struct ErrorReport
    {
        double delta_eps = 0.0;
        std::optional<double> delta_sigma; // undefined for zero-conductivity truth
    };

    // (measured - coeff_multipath) / coeff_los, using a fixed evaluation order.
    Complex calibrated_transmission(const Complex &measured, const CalibrationProfile &profile);

    DielectricEstimate estimate(const Complex &measured, const CalibrationProfile &profile, int wrap_hint = 0);

    ErrorReport relative_errors(const DielectricProperties &est, const DielectricProperties &truth);

    struct SubcarrierEstimate
    {
        SubcarrierPosition position;
        std::optional<DielectricEstimate> estimate;
        std::string error; // set iff estimate is empty
    };

    // Each profile is applied to the averaged response at its own position.
    // Failures are recorded per position; the sweep never aborts.
    std::vector<SubcarrierEstimate> estimate_per_subcarrier(const AveragedResponse &avg,
                                                            std::span<const CalibrationProfile> profiles,
                                                            int wrap_hint = 0);

    // Component-wise median over the successful entries of a sweep.
    std::optional<DielectricProperties> median_estimate(std::span<const SubcarrierEstimate> sweep);

    struct EstimateRow
    {
        std::string material_label;
        SubcarrierPosition subcarrier_position = kCenterAdjacentPosition;
        std::optional<DielectricProperties> est;
        std::optional<DielectricProperties> truth;
        std::optional<double> b;
        std::optional<double> theta_b;
    };

    // CSV with header material_label,subcarrier_position,eps_hat,sigma_hat,eps_truth,
    // sigma_truth,delta_eps_pct,delta_sigma_pct,b,theta_b (RFC 4180 quoting).
    // Unknown values are written as empty cells.
    void write_estimate_csv(std::span<const EstimateRow> rows, std::ostream &out);
    std::vector<EstimateRow> read_estimate_csv(std::istream &in);

    // RFC 4180 helpers.
    std::string csv_escape(const std::string &field);
    std::vector<std::vector<std::string>> parse_csv(std::istream &in);
} // namespace csidiel

#endif
