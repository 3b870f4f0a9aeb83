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

#ifndef CSIDIEL_SIMULATOR_HPP
#define CSIDIEL_SIMULATOR_HPP

#include "csidiel/trace_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace csidiel
{
    // Per-subcarrier system channels of one measurement setup.
    struct SystemChannels
    {
        std::vector<Complex> coeff_los;
        std::vector<Complex> coeff_multipath;
        std::vector<Complex> reference_channel; // Tx -> Rx1
    };

    // Smoothly varying channels drawn from a seeded distribution.
    SystemChannels make_smooth_channels(const SubcarrierGrid &grid, std::uint64_t seed);

    struct SimScenario
    {
        SubcarrierGrid grid;
        double d_m = 0.002;
        std::vector<Complex> coeff_los_per_sc;
        std::vector<Complex> coeff_multipath_per_sc;
        std::vector<Complex> reference_channel_per_sc;
        double snr_db = 30.0; // +inf disables noise
        std::size_t n_packets = 200;
        double packet_interval_s = 0.05;
        double c_db = 44.0;
        std::uint64_t seed = 1;
        double transient_s = 10.0;     // perturbed frames prepended before the steady packets
        double multipath_scale = 1.0;
        double rssi_step_db = 0.5;     // RSSI quantization step; 0 reports exact values

        // Default grid and geometry with channels from make_smooth_channels(channel_seed).
        static SimScenario with_default_channels(std::uint64_t channel_seed, std::uint64_t seed = 1);

        std::vector<std::string> violations() const;
    };

    // coeff_los * T(props, freq, d) + multipath_scale * coeff_multipath, noiseless.
    Complex synth_channel(const SimScenario &scn, const DielectricProperties &props, SubcarrierPosition pos);

    struct SynthesizedTrace
    {
        Trace trace;                       // raw CSI with RSSI / AGC bookkeeping
        std::vector<CsiFrame> volt_frames; // the same frames before the receiver's arbitrary scaling
        std::vector<double> packet_phases; // global phase drawn for each frame
    };

    // Per frame, in RNG stream order: global phase, raw-gain exponent, nominal
    // AGC, then (unless noise is disabled) complex noise for port a and port b,
    // subcarrier by subcarrier. Transient-factor parameters are drawn once before
    // the first frame. Identical scenarios produce identical traces.
    SynthesizedTrace synth_trace_detailed(const SimScenario &scn, const DielectricProperties &props,
                                          const std::string &label = "");
    Trace synth_trace(const SimScenario &scn, const DielectricProperties &props, const std::string &label = "");

    // Independent stream seed for the i-th derived trace (splitmix64 mixing).
    std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

    // Scenario JSON. Channel arrays are optional; when absent they are drawn from
    // "channel_seed" (defaulting to "seed"). "snr_db": null or "inf" disables noise.
    SimScenario read_scenario(std::istream &in);
    SimScenario load_scenario(const std::string &path);
    void write_scenario(const SimScenario &scn, std::ostream &out);
} // namespace csidiel

#endif
