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

#ifndef CSIDIEL_PREPROCESS_HPP
#define CSIDIEL_PREPROCESS_HPP

#include "csidiel/trace_model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace csidiel
{
    enum class ReceivePort
    {
        a, // Rx1
        b  // Rx2
    };

    enum class PhaseAnchor
    {
        per_subcarrier, // every subcarrier is referenced to the reference port at the same subcarrier
        single          // every subcarrier is referenced to the reference port at anchor_position
    };

    struct RescaleConfig
    {
        double c_db = 44.0; // internal reference constant of the receiver
        ReceivePort reference_port = ReceivePort::a;
        PhaseAnchor anchor = PhaseAnchor::per_subcarrier;
        SubcarrierPosition anchor_position = kCenterAdjacentPosition;

        ReceivePort material_port() const noexcept
        {
            return reference_port == ReceivePort::a ? ReceivePort::b : ReceivePort::a;
        }
    };

    struct TimeWindow
    {
        double start_s = 10.0;
        double end_s = 20.0;

        bool contains(double t) const noexcept { return start_s <= t && t <= end_s; }
    };

    // Time-averaged, phase-synchronized material-port response in volts.
    struct AveragedResponse
    {
        SubcarrierGrid grid;
        std::vector<Complex> h_r2_adj;
        std::size_t n_frames_used = 0;
        TimeWindow window;
    };

    struct ChannelSample
    {
        Complex value;
        double freq_hz = 0.0;
    };

    // Total received power (linear) from per-port RSSI, AGC and the internal
    // reference constant. Absent ports contribute zero linear power.
    double total_power(std::optional<double> rssi_a_db, std::optional<double> rssi_b_db,
                       std::optional<double> rssi_c_db, double agc_db, double c_db);

    // Mean per-subcarrier CSI power summed over ports (compensated summation).
    // Empty spans stand for unconnected ports; returns 0 for all-zero input.
    double mean_port_power(std::span<const Complex> csi_a, std::span<const Complex> csi_b,
                           std::span<const Complex> csi_c = {});

    // Ratio between the RSSI-derived power and the mean per-subcarrier CSI power
    // summed over ports. Empty spans stand for unconnected ports.
    double rescale_factor(double p_total, std::span<const Complex> csi_a, std::span<const Complex> csi_b,
                          std::span<const Complex> csi_c = {});

    // Multiplies both ports by sqrt(rescale_factor) so the samples are in volts.
    CsiFrame rescale_frame(const CsiFrame &frame, const RescaleConfig &cfg);

    // Rotates both ports so the reference-port sample at `pos` has zero phase.
    // The reference sample at `pos` becomes exactly (|ref|, 0).
    CsiFrame phase_adjust(const CsiFrame &frame, SubcarrierPosition pos, const RescaleConfig &cfg);

    // Rotates each subcarrier by its own reference-port phase.
    CsiFrame phase_adjust_per_subcarrier(const CsiFrame &frame, const RescaleConfig &cfg);

    // Applies the anchor mode selected in cfg.
    CsiFrame phase_adjust(const CsiFrame &frame, const RescaleConfig &cfg);

    // Complex mean of the material port over frames with start <= t <= end.
    AveragedResponse trim_and_average(std::span<const CsiFrame> frames, const SubcarrierGrid &grid,
                                      TimeWindow window, ReceivePort material_port = ReceivePort::b);

    ChannelSample select_subcarrier(const AveragedResponse &avg, SubcarrierPosition pos);

    struct PreprocessConfig
    {
        RescaleConfig rescale;
        TimeWindow window;
    };

    // rescale_frame -> phase_adjust -> trim_and_average over a whole trace.
    AveragedResponse preprocess_trace(const Trace &trace, const PreprocessConfig &cfg = {});
} // namespace csidiel

#endif
