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

#include "csidiel/simulator.hpp"

#include "csidiel/em_core.hpp"
#include "csidiel/errors.hpp"
#include "csidiel/preprocess.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace csidiel
{
    namespace
    {
        using ordered_json = nlohmann::ordered_json;

        // mt19937_64 with explicitly defined uniform and Gaussian mappings so that
        // streams are reproducible across standard libraries.
        class SimRng
        {
        public:
            explicit SimRng(std::uint64_t seed) : engine_(seed) {}

            double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; } // [0, 1)
            double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
            int integer(int lo, int hi) { return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1)); }

            // Circular complex Gaussian with E|z|^2 = variance.
            Complex complex_gaussian(double variance)
            {
                const double u1 = 1.0 - uniform();
                const double u2 = uniform();
                const double r = std::sqrt(-std::log(u1) * variance);
                const double a = 2.0 * constants::pi * u2;
                return {r * std::cos(a), r * std::sin(a)};
            }

        private:
            std::mt19937_64 engine_;
        };

        // 1 + sum a sin(...) in amplitude and sum b sin(...) in phase.
        struct SlowFactor
        {
            std::array<double, 3> amp{}, amp_freq{}, amp_phase{};
            std::array<double, 3> ph{}, ph_freq{}, ph_phase{};

            static SlowFactor draw(SimRng &rng)
            {
                SlowFactor f;
                for (std::size_t m = 0; m < 3; ++m)
                {
                    f.amp[m] = rng.uniform(0.0, 0.15);
                    f.amp_freq[m] = rng.uniform(0.2, 1.0);
                    f.amp_phase[m] = rng.uniform(0.0, 2.0 * constants::pi);
                    f.ph[m] = rng.uniform(0.0, 0.5);
                    f.ph_freq[m] = rng.uniform(0.2, 1.0);
                    f.ph_phase[m] = rng.uniform(0.0, 2.0 * constants::pi);
                }
                return f;
            }

            Complex at(double t) const
            {
                double a = 1.0, p = 0.0;
                for (std::size_t m = 0; m < 3; ++m)
                {
                    a += amp[m] * std::sin(2.0 * constants::pi * amp_freq[m] * t + amp_phase[m]);
                    p += ph[m] * std::sin(2.0 * constants::pi * ph_freq[m] * t + ph_phase[m]);
                }
                return std::polar(a, p);
            }
        };

        double quantize(double value, double step) { return step > 0.0 ? step * std::round(value / step) : value; }

        // sqrt(alpha) / gain - 1 for a candidate AGC value; gain is a power of two.
        double rescale_mismatch(const CsiFrame &raw, double agc, double c_db, double gain)
        {
            const double p = total_power(raw.rssi_a, raw.rssi_b, raw.rssi_c, agc, c_db);
            return std::sqrt(rescale_factor(p, raw.csi_a, raw.csi_b)) / gain - 1.0;
        }

        // Distance in units in the last place between two finite doubles.
        std::uint64_t ulp_distance(double a, double b)
        {
            auto ordered = [](double x) {
                const auto bits = std::bit_cast<std::int64_t>(x);
                return bits < 0 ? std::numeric_limits<std::int64_t>::min() - bits : bits;
            };
            const std::int64_t ia = ordered(a), ib = ordered(b);
            return ia > ib ? static_cast<std::uint64_t>(ia) - static_cast<std::uint64_t>(ib)
                           : static_cast<std::uint64_t>(ib) - static_cast<std::uint64_t>(ia);
        }

        // Worst per-component ulp error of the rescaled raw frame against the volt frame.
        std::uint64_t rescale_ulp_error(const CsiFrame &raw, const CsiFrame &volt, double agc, double c_db)
        {
            const double p = total_power(raw.rssi_a, raw.rssi_b, raw.rssi_c, agc, c_db);
            const double scale = std::sqrt(rescale_factor(p, raw.csi_a, raw.csi_b));
            std::uint64_t worst = 0;
            for (const auto &[r, v] : {std::pair{&raw.csi_a, &volt.csi_a}, std::pair{&raw.csi_b, &volt.csi_b}})
                for (std::size_t k = 0; k < r->size(); ++k)
                    worst = std::max({worst, ulp_distance((*r)[k].real() * scale, (*v)[k].real()),
                                      ulp_distance((*r)[k].imag() * scale, (*v)[k].imag())});
            return worst;
        }

        ordered_json complex_array(const std::vector<Complex> &v)
        {
            ordered_json a = ordered_json::array();
            for (const auto &z : v)
                a.push_back(ordered_json::array({z.real(), z.imag()}));
            return a;
        }

        std::vector<Complex> complex_list(const ordered_json &j, const char *key)
        {
            std::vector<Complex> out;
            const auto &arr = j.at(key);
            if (!arr.is_array())
                throw Error(ErrorCode::parse, std::string("scenario field \"") + key + "\" must be an array");
            for (const auto &p : arr)
            {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw Error(ErrorCode::parse, std::string("scenario field \"") + key + "\" must hold [re, im] pairs");
                out.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            return out;
        }
    } // namespace

    std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept
    {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    SystemChannels make_smooth_channels(const SubcarrierGrid &grid, std::uint64_t seed)
    {
        SimRng rng(seed);
        const double span = grid.subcarrier_indices.empty()
                                ? 1.0
                                : std::max(std::abs(grid.subcarrier_indices.front()),
                                           std::abs(grid.subcarrier_indices.back()));

        auto smooth = [&](double amp_lo, double amp_hi) {
            const double amp = rng.uniform(amp_lo, amp_hi);
            const double ripple = rng.uniform(0.0, 0.15);
            const double ripple_freq = rng.uniform(0.2, 0.8);
            const double ripple_phase = rng.uniform(0.0, 2.0 * constants::pi);
            const double phase0 = rng.uniform(0.0, 2.0 * constants::pi);
            const double slope = rng.uniform(-1.0, 1.0); // rad across the half band
            std::vector<Complex> out;
            out.reserve(grid.size());
            for (int idx : grid.subcarrier_indices)
            {
                const double x = static_cast<double>(idx) / std::max(span, 1.0);
                const double mag = amp * (1.0 + ripple * std::cos(2.0 * constants::pi * ripple_freq * x + ripple_phase));
                out.push_back(std::polar(mag, phase0 + slope * x));
            }
            return out;
        };

        SystemChannels ch;
        ch.coeff_los = smooth(0.6, 1.0);
        ch.coeff_multipath = smooth(0.15, 0.4);
        ch.reference_channel = smooth(0.5, 1.0);
        return ch;
    }

    SimScenario SimScenario::with_default_channels(std::uint64_t channel_seed, std::uint64_t seed)
    {
        SimScenario scn;
        scn.seed = seed;
        SystemChannels ch = make_smooth_channels(scn.grid, channel_seed);
        scn.coeff_los_per_sc = std::move(ch.coeff_los);
        scn.coeff_multipath_per_sc = std::move(ch.coeff_multipath);
        scn.reference_channel_per_sc = std::move(ch.reference_channel);
        return scn;
    }

    std::vector<std::string> SimScenario::violations() const
    {
        std::vector<std::string> out = grid.violations();
        const std::size_t n = grid.size();
        if (coeff_los_per_sc.size() != n)
            out.emplace_back("coeff_los_per_sc must have one entry per subcarrier");
        if (coeff_multipath_per_sc.size() != n)
            out.emplace_back("coeff_multipath_per_sc must have one entry per subcarrier");
        if (reference_channel_per_sc.size() != n)
            out.emplace_back("reference_channel_per_sc must have one entry per subcarrier");
        for (const auto &z : reference_channel_per_sc)
            if (z == Complex(0.0, 0.0))
            {
                out.emplace_back("reference_channel_per_sc must be non-zero");
                break;
            }
        if (!(d_m > 0.0))
            out.emplace_back("d_m must be > 0");
        if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
            out.emplace_back("snr_db must be a number (or +inf)");
        if (n_packets < 1)
            out.emplace_back("n_packets must be >= 1");
        if (!(packet_interval_s > 0.0) || !std::isfinite(packet_interval_s))
            out.emplace_back("packet_interval_s must be > 0");
        if (!std::isfinite(c_db))
            out.emplace_back("c_db must be finite");
        if (!(transient_s >= 0.0) || !std::isfinite(transient_s))
            out.emplace_back("transient_s must be >= 0");
        if (!(multipath_scale >= 0.0) || !std::isfinite(multipath_scale))
            out.emplace_back("multipath_scale must be >= 0");
        if (!(rssi_step_db >= 0.0) || !std::isfinite(rssi_step_db))
            out.emplace_back("rssi_step_db must be >= 0");
        return out;
    }

    Complex synth_channel(const SimScenario &scn, const DielectricProperties &props, SubcarrierPosition pos)
    {
        const double f = scn.grid.frequency_at(pos);
        const Complex t = transmission_factor(wavenumbers(props, f), scn.d_m);
        return scn.coeff_los_per_sc.at(pos.offset()) * t +
               scn.multipath_scale * scn.coeff_multipath_per_sc.at(pos.offset());
    }

    SynthesizedTrace synth_trace_detailed(const SimScenario &scn, const DielectricProperties &props,
                                          const std::string &label)
    {
        const auto problems = scn.violations();
        if (!problems.empty())
            throw Error(ErrorCode::invalid_argument, "invalid scenario: " + problems.front());

        const std::size_t n_sc = scn.grid.size();
        std::vector<Complex> material(n_sc);
        for (std::size_t k = 0; k < n_sc; ++k)
            material[k] = synth_channel(scn, props, SubcarrierPosition(k + 1));

        const bool noisy = std::isfinite(scn.snr_db);
        const double snr_linear = noisy ? std::pow(10.0, scn.snr_db / 10.0) : 0.0;
        const auto n_transient = static_cast<std::size_t>(std::llround(scn.transient_s / scn.packet_interval_s));
        const std::size_t n_frames = n_transient + scn.n_packets;

        SimRng rng(scn.seed);
        const SlowFactor transient_a = SlowFactor::draw(rng);
        const SlowFactor transient_b = SlowFactor::draw(rng);

        SynthesizedTrace out;
        out.trace.grid = scn.grid;
        out.trace.d_m = scn.d_m;
        out.trace.material_label = label;
        out.trace.packet_interval_s = scn.packet_interval_s;
        out.trace.frames.reserve(n_frames);
        out.volt_frames.reserve(n_frames);
        out.packet_phases.reserve(n_frames);

        for (std::size_t i = 0; i < n_frames; ++i)
        {
            const double t = static_cast<double>(i) * scn.packet_interval_s;
            const double phase = rng.uniform(0.0, 2.0 * constants::pi);
            const int gain_exp = rng.integer(4, 8);
            const double agc_nominal = rng.uniform(20.0, 40.0);
            const Complex rot = std::polar(1.0, phase);

            Complex pert_a(1.0, 0.0), pert_b(1.0, 0.0);
            if (i < n_transient)
            {
                pert_a = transient_a.at(t);
                pert_b = transient_b.at(t);
            }

            CsiFrame volt;
            volt.t = t;
            volt.csi_a.resize(n_sc);
            volt.csi_b.resize(n_sc);
            for (std::size_t k = 0; k < n_sc; ++k)
            {
                volt.csi_a[k] = rot * pert_a * scn.reference_channel_per_sc[k];
                volt.csi_b[k] = rot * pert_b * material[k];
            }
            if (noisy)
            {
                for (auto *port : {&volt.csi_a, &volt.csi_b})
                    for (auto &z : *port)
                        z += rng.complex_gaussian(std::norm(z) / snr_linear);
            }

            // Hardware RSSI reports port power relative to its internal reference,
            // after gain, on a coarse grid. AGC is then chosen so the reported
            // triple maps back onto the true volt scale.
            const double power_a = mean_port_power(volt.csi_a, {});
            const double power_b = mean_port_power({}, volt.csi_b);
            volt.rssi_a = quantize(10.0 * std::log10(power_a) + agc_nominal + scn.c_db, scn.rssi_step_db);
            volt.rssi_b = quantize(10.0 * std::log10(power_b) + agc_nominal + scn.c_db, scn.rssi_step_db);
            const double reported_db =
                10.0 * std::log10(std::pow(10.0, *volt.rssi_a / 10.0) + std::pow(10.0, *volt.rssi_b / 10.0));
            double agc = reported_db - scn.c_db - 10.0 * std::log10(mean_port_power(volt.csi_a, volt.csi_b));

            CsiFrame raw = volt;
            const double gain = std::ldexp(1.0, gain_exp);
            for (auto *port : {&raw.csi_a, &raw.csi_b})
                for (auto &z : *port)
                    z = Complex(std::ldexp(z.real(), -gain_exp), std::ldexp(z.imag(), -gain_exp));

            // Newton steps on AGC, then a local ulp scan, so rescaling lands on the volt scale.
            for (int it = 0; it < 4; ++it)
            {
                const double delta = rescale_mismatch(raw, agc, scn.c_db, gain);
                if (delta == 0.0)
                    break;
                agc += 20.0 / std::log(10.0) * delta;
            }
            double best_agc = agc;
            std::uint64_t best_err = rescale_ulp_error(raw, volt, agc, scn.c_db);
            double lo = agc, hi = agc;
            for (int m = 0; m < 4 && best_err > 0; ++m)
            {
                lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
                hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
                for (double cand : {lo, hi})
                {
                    const std::uint64_t err = rescale_ulp_error(raw, volt, cand, scn.c_db);
                    if (err < best_err)
                    {
                        best_err = err;
                        best_agc = cand;
                    }
                }
            }
            agc = best_agc;
            volt.agc = raw.agc = agc;

            out.trace.frames.push_back(std::move(raw));
            out.volt_frames.push_back(std::move(volt));
            out.packet_phases.push_back(phase);
        }
        return out;
    }

    Trace synth_trace(const SimScenario &scn, const DielectricProperties &props, const std::string &label)
    {
        return synth_trace_detailed(scn, props, label).trace;
    }

    SimScenario read_scenario(std::istream &in)
    {
        ordered_json j;
        try
        {
            j = ordered_json::parse(in);
        }
        catch (const nlohmann::json::parse_error &e)
        {
            throw Error(ErrorCode::parse, std::string("malformed scenario JSON: ") + e.what());
        }
        if (!j.is_object())
            throw Error(ErrorCode::parse, "scenario must be a JSON object");

        SimScenario scn;
        try
        {
            scn.grid.center_freq_hz = j.value("center_freq_hz", scn.grid.center_freq_hz);
            scn.grid.bandwidth_hz = j.value("bandwidth_hz", scn.grid.bandwidth_hz);
            scn.grid.spacing_hz = j.value("spacing_hz", scn.grid.spacing_hz);
            if (j.contains("subcarrier_indices"))
                scn.grid.subcarrier_indices = j["subcarrier_indices"].get<std::vector<int>>();
            scn.d_m = j.value("d_m", scn.d_m);
            if (j.contains("snr_db"))
            {
                const auto &snr = j["snr_db"];
                if (snr.is_null() || (snr.is_string() && snr.get<std::string>() == "inf"))
                    scn.snr_db = std::numeric_limits<double>::infinity();
                else if (snr.is_number())
                    scn.snr_db = snr.get<double>();
                else
                    throw Error(ErrorCode::parse, "scenario field \"snr_db\" must be a number, null or \"inf\"");
            }
            scn.n_packets = j.value("n_packets", scn.n_packets);
            scn.packet_interval_s = j.value("packet_interval_s", scn.packet_interval_s);
            scn.c_db = j.value("c_db", scn.c_db);
            scn.seed = j.value("seed", scn.seed);
            scn.transient_s = j.value("transient_s", scn.transient_s);
            scn.multipath_scale = j.value("multipath_scale", scn.multipath_scale);
            scn.rssi_step_db = j.value("rssi_step_db", scn.rssi_step_db);

            const std::uint64_t channel_seed = j.value("channel_seed", scn.seed);
            SystemChannels ch = make_smooth_channels(scn.grid, channel_seed);
            scn.coeff_los_per_sc = j.contains("coeff_los") ? complex_list(j, "coeff_los") : std::move(ch.coeff_los);
            scn.coeff_multipath_per_sc =
                j.contains("coeff_multipath") ? complex_list(j, "coeff_multipath") : std::move(ch.coeff_multipath);
            scn.reference_channel_per_sc = j.contains("reference_channel") ? complex_list(j, "reference_channel")
                                                                           : std::move(ch.reference_channel);
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(ErrorCode::parse, std::string("scenario: ") + e.what());
        }

        const auto problems = scn.violations();
        if (!problems.empty())
            throw Error(ErrorCode::invariant_violation, "invalid scenario: " + problems.front());
        return scn;
    }

    SimScenario load_scenario(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorCode::io, "scenario not found: " + path);
        return read_scenario(in);
    }

    void write_scenario(const SimScenario &scn, std::ostream &out)
    {
        ordered_json j;
        j["center_freq_hz"] = scn.grid.center_freq_hz;
        j["bandwidth_hz"] = scn.grid.bandwidth_hz;
        j["spacing_hz"] = scn.grid.spacing_hz;
        j["subcarrier_indices"] = scn.grid.subcarrier_indices;
        j["d_m"] = scn.d_m;
        if (std::isfinite(scn.snr_db))
            j["snr_db"] = scn.snr_db;
        else
            j["snr_db"] = "inf";
        j["n_packets"] = scn.n_packets;
        j["packet_interval_s"] = scn.packet_interval_s;
        j["c_db"] = scn.c_db;
        j["seed"] = scn.seed;
        j["transient_s"] = scn.transient_s;
        j["multipath_scale"] = scn.multipath_scale;
        j["rssi_step_db"] = scn.rssi_step_db;
        j["coeff_los"] = complex_array(scn.coeff_los_per_sc);
        j["coeff_multipath"] = complex_array(scn.coeff_multipath_per_sc);
        j["reference_channel"] = complex_array(scn.reference_channel_per_sc);
        out << j.dump(2) << '\n';
    }
} // namespace csidiel
