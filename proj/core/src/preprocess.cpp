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

#include "csidiel/preprocess.hpp"

#include "csidiel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace csidiel
{
    namespace
    {
        // Neumaier-compensated running sum.
        class CompensatedSum
        {
        public:
            void add(double x) noexcept
            {
                const double t = sum_ + x;
                if (std::abs(sum_) >= std::abs(x))
                    comp_ += (sum_ - t) + x;
                else
                    comp_ += (x - t) + sum_;
                sum_ = t;
            }
            double value() const noexcept { return sum_ + comp_; }

        private:
            double sum_ = 0.0;
            double comp_ = 0.0;
        };

        double squared_magnitude(const Complex &z) noexcept { return z.real() * z.real() + z.imag() * z.imag(); }

        // z * conj(u), written out so that the evaluation order is fixed.
        Complex rotate_by_conj(const Complex &z, const Complex &u) noexcept
        {
            return {z.real() * u.real() + z.imag() * u.imag(), z.imag() * u.real() - z.real() * u.imag()};
        }

        std::vector<Complex> &port_of(CsiFrame &f, ReceivePort p) { return p == ReceivePort::a ? f.csi_a : f.csi_b; }
        const std::vector<Complex> &port_of(const CsiFrame &f, ReceivePort p)
        {
            return p == ReceivePort::a ? f.csi_a : f.csi_b;
        }

        Complex unit_phasor(const Complex &ref)
        {
            const double r = std::hypot(ref.real(), ref.imag());
            if (!(r > 0.0) || !std::isfinite(r))
                throw Error(ErrorCode::zero_reference, "phase reference sample is zero or non-finite");
            return {ref.real() / r, ref.imag() / r};
        }
    } // namespace

    double total_power(std::optional<double> rssi_a_db, std::optional<double> rssi_b_db,
                       std::optional<double> rssi_c_db, double agc_db, double c_db)
    {
        if (!rssi_a_db && !rssi_b_db && !rssi_c_db)
            throw Error(ErrorCode::no_rssi, "no rssi present");
        if (!std::isfinite(agc_db) || !std::isfinite(c_db))
            throw Error(ErrorCode::non_finite, "agc and c must be finite");

        double linear = 0.0;
        for (const auto &rssi : {rssi_a_db, rssi_b_db, rssi_c_db})
        {
            if (!rssi)
                continue;
            if (!std::isfinite(*rssi))
                throw Error(ErrorCode::non_finite, "rssi must be finite");
            linear += std::pow(10.0, *rssi / 10.0);
        }
        const double exponent_db = 10.0 * std::log10(linear) - agc_db - c_db;
        return std::pow(10.0, exponent_db / 10.0);
    }

    double mean_port_power(std::span<const Complex> csi_a, std::span<const Complex> csi_b,
                           std::span<const Complex> csi_c)
    {
        const std::size_t n = std::max({csi_a.size(), csi_b.size(), csi_c.size()});
        if (n == 0)
            return 0.0;
        for (auto port : {csi_a, csi_b, csi_c})
            if (!port.empty() && port.size() != n)
                throw Error(ErrorCode::invalid_argument, "CSI ports differ in length");

        CompensatedSum power;
        for (auto port : {csi_a, csi_b, csi_c})
            for (const auto &z : port)
                power.add(squared_magnitude(z));
        return power.value() / static_cast<double>(n);
    }

    double rescale_factor(double p_total, std::span<const Complex> csi_a, std::span<const Complex> csi_b,
                          std::span<const Complex> csi_c)
    {
        if (!std::isfinite(p_total) || p_total <= 0.0)
            throw Error(ErrorCode::invalid_argument, "total power must be finite and > 0");
        const double mean_power = mean_port_power(csi_a, csi_b, csi_c);
        if (!(mean_power > 0.0) || !std::isfinite(mean_power))
            throw Error(ErrorCode::zero_power, "all-zero CSI: rescale denominator is zero");
        return p_total / mean_power;
    }

    CsiFrame rescale_frame(const CsiFrame &frame, const RescaleConfig &cfg)
    {
        const double p_total = total_power(frame.rssi_a, frame.rssi_b, frame.rssi_c, frame.agc, cfg.c_db);
        const double scale = std::sqrt(rescale_factor(p_total, frame.csi_a, frame.csi_b));
        CsiFrame out = frame;
        for (auto *port : {&out.csi_a, &out.csi_b})
            for (auto &z : *port)
                z = Complex(z.real() * scale, z.imag() * scale);
        return out;
    }

    CsiFrame phase_adjust(const CsiFrame &frame, SubcarrierPosition pos, const RescaleConfig &cfg)
    {
        const auto &ref = port_of(frame, cfg.reference_port);
        if (pos.value() < 1 || pos.value() > ref.size())
            throw Error(ErrorCode::out_of_range, "phase anchor position " + std::to_string(pos.value()) +
                                                     " outside the frame");
        const Complex ref_sample = ref[pos.offset()];
        const Complex u = unit_phasor(ref_sample);

        CsiFrame out = frame;
        for (auto *port : {&out.csi_a, &out.csi_b})
            for (auto &z : *port)
                z = rotate_by_conj(z, u);
        port_of(out, cfg.reference_port)[pos.offset()] = Complex(std::hypot(ref_sample.real(), ref_sample.imag()), 0.0);
        return out;
    }

    CsiFrame phase_adjust_per_subcarrier(const CsiFrame &frame, const RescaleConfig &cfg)
    {
        const auto &ref = port_of(frame, cfg.reference_port);
        const auto &mat = port_of(frame, cfg.material_port());
        if (ref.size() != mat.size())
            throw Error(ErrorCode::invalid_argument, "CSI ports differ in length");

        CsiFrame out = frame;
        auto &out_ref = port_of(out, cfg.reference_port);
        auto &out_mat = port_of(out, cfg.material_port());
        for (std::size_t k = 0; k < ref.size(); ++k)
        {
            const Complex u = unit_phasor(ref[k]);
            out_mat[k] = rotate_by_conj(mat[k], u);
            out_ref[k] = Complex(std::hypot(ref[k].real(), ref[k].imag()), 0.0);
        }
        return out;
    }

    CsiFrame phase_adjust(const CsiFrame &frame, const RescaleConfig &cfg)
    {
        return cfg.anchor == PhaseAnchor::single ? phase_adjust(frame, cfg.anchor_position, cfg)
                                                 : phase_adjust_per_subcarrier(frame, cfg);
    }

    AveragedResponse trim_and_average(std::span<const CsiFrame> frames, const SubcarrierGrid &grid,
                                      TimeWindow window, ReceivePort material_port)
    {
        if (!(window.start_s < window.end_s))
            throw Error(ErrorCode::invalid_argument, "averaging window start must precede end");

        const std::size_t n_sc = grid.size();
        const CsiFrame *first = nullptr;
        std::vector<CompensatedSum> re(n_sc), im(n_sc);
        std::size_t used = 0;

        // Deviations from the first in-window frame are summed, so a constant
        // sequence averages to itself exactly.
        for (const auto &f : frames)
        {
            if (!window.contains(f.t))
                continue;
            const auto &port = port_of(f, material_port);
            if (port.size() != n_sc)
                throw Error(ErrorCode::invalid_argument, "csi length mismatch against grid");
            if (!first)
                first = &f;
            const auto &base = port_of(*first, material_port);
            for (std::size_t k = 0; k < n_sc; ++k)
            {
                re[k].add(port[k].real() - base[k].real());
                im[k].add(port[k].imag() - base[k].imag());
            }
            ++used;
        }
        if (used == 0)
            throw Error(ErrorCode::empty_window, "no frames inside the averaging window [" +
                                                     std::to_string(window.start_s) + ", " +
                                                     std::to_string(window.end_s) + "] s");

        AveragedResponse avg;
        avg.grid = grid;
        avg.window = window;
        avg.n_frames_used = used;
        avg.h_r2_adj.resize(n_sc);
        const auto &base = port_of(*first, material_port);
        const double n = static_cast<double>(used);
        for (std::size_t k = 0; k < n_sc; ++k)
        {
            avg.h_r2_adj[k] = Complex(base[k].real() + re[k].value() / n, base[k].imag() + im[k].value() / n);
            if (!std::isfinite(avg.h_r2_adj[k].real()) || !std::isfinite(avg.h_r2_adj[k].imag()))
                throw Error(ErrorCode::non_finite, "averaged response is not finite");
        }
        return avg;
    }

    ChannelSample select_subcarrier(const AveragedResponse &avg, SubcarrierPosition pos)
    {
        const double f = avg.grid.frequency_at(pos);
        return {avg.h_r2_adj.at(pos.offset()), f};
    }

    AveragedResponse preprocess_trace(const Trace &trace, const PreprocessConfig &cfg)
    {
        std::vector<CsiFrame> adjusted;
        adjusted.reserve(trace.frames.size());
        for (const auto &f : trace.frames)
        {
            if (!cfg.window.contains(f.t))
                continue;
            adjusted.push_back(phase_adjust(rescale_frame(f, cfg.rescale), cfg.rescale));
        }
        return trim_and_average(adjusted, trace.grid, cfg.window, cfg.rescale.material_port());
    }
} // namespace csidiel
