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

#ifndef CSIDIEL_TRACE_MODEL_HPP
#define CSIDIEL_TRACE_MODEL_HPP

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace csidiel
{
    using Complex = std::complex<double>;

    // 1-based position into a grid's subcarrier index list. Position 16 of the
    // default grid is index +1, the carrier adjacent to the channel center.
    class SubcarrierPosition
    {
    public:
        constexpr explicit SubcarrierPosition(std::size_t one_based) : value_(one_based) {}

        constexpr std::size_t value() const noexcept { return value_; }
        constexpr std::size_t offset() const noexcept { return value_ - 1; }

        friend constexpr bool operator==(SubcarrierPosition, SubcarrierPosition) = default;
        friend constexpr auto operator<=>(SubcarrierPosition, SubcarrierPosition) = default;

    private:
        std::size_t value_;
    };

    inline constexpr SubcarrierPosition kCenterAdjacentPosition{16};

    // Standard 30-entry reporting subgroup of a 20 MHz channel.
    std::vector<int> default_subcarrier_indices();

    struct SubcarrierGrid
    {
        double center_freq_hz = 5.32e9;
        double bandwidth_hz = 20.0e6;
        double spacing_hz = 312.5e3;
        std::vector<int> subcarrier_indices = default_subcarrier_indices();

        std::size_t size() const noexcept { return subcarrier_indices.size(); }
        bool contains(SubcarrierPosition pos) const noexcept { return pos.value() >= 1 && pos.value() <= size(); }

        // Throws Error(out_of_range) for positions outside [1, size()].
        double frequency_at(SubcarrierPosition pos) const;

        std::vector<std::string> violations() const;

        bool operator==(const SubcarrierGrid &) const = default;
    };

    struct CsiFrame
    {
        double t = 0.0; // seconds since trace start
        std::optional<double> rssi_a;
        std::optional<double> rssi_b;
        std::optional<double> rssi_c;
        double agc = 0.0;
        std::vector<Complex> csi_a; // Tx -> Rx1, reference path
        std::vector<Complex> csi_b; // Tx -> Rx2, through the material

        bool operator==(const CsiFrame &) const = default;
    };

    struct Trace
    {
        SubcarrierGrid grid;
        double d_m = 0.002;
        std::string material_label;
        std::vector<CsiFrame> frames;
        double packet_interval_s = 0.05;

        bool operator==(const Trace &) const = default;
    };

    struct DielectricProperties
    {
        double eps_r = 1.0;
        double sigma = 0.0; // S/m

        bool operator==(const DielectricProperties &) const = default;
    };

    // Empty when every invariant holds; otherwise one description per violation,
    // naming the field and, for frame-level problems, the frame index.
    std::vector<std::string> validate_trace(const Trace &trace);

    // JSONL trace format: one header object followed by one object per frame.
    // Throws Error(parse) with a 1-based line number for malformed input and
    // Error(invariant_violation) when the parsed trace fails validation.
    Trace parse_trace(std::istream &in);
    Trace read_trace_file(const std::string &path);

    // Deterministic; parse_trace(write_trace(t)) == t for every valid trace.
    // Refuses invalid traces (including non-finite samples).
    void write_trace(const Trace &trace, std::ostream &out);
    void write_trace_file(const Trace &trace, const std::string &path);
} // namespace csidiel

#endif
