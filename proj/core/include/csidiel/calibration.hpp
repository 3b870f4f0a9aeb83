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

#ifndef CSIDIEL_CALIBRATION_HPP
#define CSIDIEL_CALIBRATION_HPP

#include "csidiel/em_core.hpp"
#include "csidiel/preprocess.hpp"
#include "csidiel/trace_model.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csidiel
{
    struct CalibrationSample
    {
        Complex measured; // phase-adjusted material-port response, volts
        DielectricProperties known;
        double freq_hz = 0.0;
        double d_m = 0.0;
    };

    // System coefficients of the per-subcarrier transmission model
    //   measured = coeff_los * T(material) + coeff_multipath
    struct CalibrationProfile
    {
        Complex coeff_los;
        Complex coeff_multipath;
        double freq_hz = 0.0;
        double d_m = 0.0;
        SubcarrierPosition subcarrier_position = kCenterAdjacentPosition;
        double residual_rms = 0.0; // volts
        std::size_t n_samples = 0;
    };

    // Transmission factor of the sample's known material at its frequency and thickness.
    Complex model_transmission(const CalibrationSample &sample);

    // Exact complex linear least squares on the two coefficients.
    // Throws insufficient_samples (< 2), geometry_mismatch (mixed freq / d_m)
    // and rank_deficient (all transmission factors equal).
    CalibrationProfile fit_coefficients(std::span<const CalibrationSample> samples,
                                        SubcarrierPosition position = kCenterAdjacentPosition);

    struct LmOptions
    {
        Complex initial_los{1.0, 0.0};
        Complex initial_multipath{0.0, 0.0};
        double tol = 1e-14;
        int max_iters = 200;
    };

    struct LmFit
    {
        CalibrationProfile profile;
        int iterations = 0;
    };

    // Levenberg-Marquardt on the four real parameters; kept as an independent
    // cross-check of fit_coefficients. Throws no_convergence after max_iters.
    LmFit fit_coefficients_lm(std::span<const CalibrationSample> samples, const LmOptions &options = {},
                              SubcarrierPosition position = kCenterAdjacentPosition);

    // measured_i - (coeff_los * T_i + coeff_multipath)
    std::vector<Complex> residuals(const CalibrationProfile &profile, std::span<const CalibrationSample> samples);

    // Warns when fewer than two pairs of calibration materials are separated by
    // at least min_separation in the transmission-factor plane.
    std::optional<std::string> conditioning_warning(std::span<const CalibrationSample> samples,
                                                    double min_separation = 0.05);

    struct CalibrationInput
    {
        AveragedResponse response;
        DielectricProperties known;
        double d_m = 0.0;
        std::string label;
    };

    // One profile per grid position, each fitted independently.
    std::vector<CalibrationProfile> fit_all_subcarriers(std::span<const CalibrationInput> inputs);

    // JSON document {"freq_hz", "d_m", "subcarrier_position", "coeff_los", "coeff_multipath",
    // "residual_rms", "n_samples"}.
    void write_profile(const CalibrationProfile &profile, std::ostream &out);
    CalibrationProfile read_profile(std::istream &in);
    void save_profile(const CalibrationProfile &profile, const std::string &path);
    CalibrationProfile load_profile(const std::string &path);
} // namespace csidiel

#endif
