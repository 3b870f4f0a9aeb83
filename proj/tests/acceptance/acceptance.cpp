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

// Acceptance suite: one PASS/FAIL line per criterion.
//   csidiel_acceptance                 run every criterion
//   csidiel_acceptance --criterion N   run criterion N only
// Exit status is 0 iff every selected criterion passed.

#include "csidiel/calibration.hpp"
#include "csidiel/em_core.hpp"
#include "csidiel/errors.hpp"
#include "csidiel/estimator.hpp"
#include "csidiel/preprocess.hpp"
#include "csidiel/reference_materials.hpp"
#include "csidiel/simulator.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace csidiel;

namespace
{
    constexpr double kFreq = 5.32e9;

    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    struct Criterion
    {
        int id;
        const char *title;
        std::function<Outcome()> run;
    };

    class Stopwatch
    {
    public:
        double seconds() const
        {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        }

    private:
        std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
    };

    std::string format(const char *fmt, auto... args)
    {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        return buf;
    }

    double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

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

    // Calibrates on the ten mixtures and returns the per-subcarrier profiles.
    std::vector<CalibrationProfile> calibrate_mixtures(const SimScenario &scn,
                                                       const std::function<Trace(Trace)> &transform = {})
    {
        std::vector<CalibrationInput> inputs;
        std::size_t i = 0;
        for (const auto &m : ethanol_water_mixtures())
        {
            SimScenario per = scn;
            per.seed = derive_seed(scn.seed, i++);
            Trace tr = synth_trace(per, m.truth, m.label);
            if (transform)
                tr = transform(std::move(tr));
            inputs.push_back({preprocess_trace(tr), m.truth, tr.d_m, m.label});
        }
        return fit_all_subcarriers(inputs);
    }

    Outcome criterion_roundtrip()
    {
        const Stopwatch clock;
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> eps(1.5, 100.0), sigma(0.01, 20.0);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i)
        {
            const DielectricProperties p{eps(rng), sigma(rng)};
            const DielectricProperties back = invert_to_dielectric(wavenumbers(p, kFreq), kFreq);
            worst = std::max({worst, rel(back.eps_r, p.eps_r), rel(back.sigma, p.sigma)});
        }
        const double t = clock.seconds();
        return {worst <= 1e-9 && t < 5.0,
                format("max rel error %.2e over 10000 samples (tol 1e-9); %.3f s (limit 5 s)", worst, t)};
    }

    Outcome criterion_noiseless_loop()
    {
        const Stopwatch clock;
        SimScenario scn = SimScenario::with_default_channels(2026, 7);
        scn.snr_db = std::numeric_limits<double>::infinity();
        const auto profiles = calibrate_mixtures(scn);
        const DielectricProperties truth{27.76, 7.29};
        SimScenario unknown = scn;
        unknown.seed = derive_seed(scn.seed, 99);
        const AveragedResponse avg = preprocess_trace(synth_trace(unknown, truth, "Baijiu 46%"));
        const DielectricEstimate e =
            estimate(select_subcarrier(avg, kCenterAdjacentPosition).value, profiles[kCenterAdjacentPosition.offset()]);
        const double err = std::max(rel(e.est.eps_r, truth.eps_r), rel(e.est.sigma, truth.sigma));
        const double t = clock.seconds();
        return {err <= 1e-6 && t < 10.0,
                format("estimate (%.9g, %.9g) vs (27.76, 7.29): max rel error %.2e (tol 1e-6); %.2f s (limit 10 s)",
                       e.est.eps_r, e.est.sigma, err, t)};
    }

    Outcome criterion_noisy_loop()
    {
        const Stopwatch clock;
        double sum_eps = 0.0, sum_sigma = 0.0;
        std::size_t n = 0, failures = 0;
        for (std::uint64_t s = 1; s <= 20; ++s)
        {
            SimScenario scn = SimScenario::with_default_channels(derive_seed(s, 1000), derive_seed(s, 0));
            scn.snr_db = 30.0;
            scn.n_packets = 200;
            const auto profiles = calibrate_mixtures(scn);
            const CalibrationProfile &profile = profiles[kCenterAdjacentPosition.offset()];
            std::uint64_t j = 100;
            for (const auto &m : all_liquids())
            {
                SimScenario per = scn;
                per.seed = derive_seed(scn.seed, j++);
                const AveragedResponse avg = preprocess_trace(synth_trace(per, m.truth, m.label));
                try
                {
                    const DielectricEstimate e =
                        estimate(select_subcarrier(avg, kCenterAdjacentPosition).value, profile);
                    const ErrorReport r = relative_errors(e.est, m.truth);
                    sum_eps += r.delta_eps;
                    sum_sigma += *r.delta_sigma;
                    ++n;
                }
                catch (const Error &)
                {
                    ++failures;
                }
            }
        }
        const double mean_eps = 100.0 * sum_eps / static_cast<double>(std::max<std::size_t>(n, 1));
        const double mean_sigma = 100.0 * sum_sigma / static_cast<double>(std::max<std::size_t>(n, 1));
        const double t = clock.seconds();
        return {failures == 0 && mean_eps <= 5.0 && mean_sigma <= 10.0 && t < 60.0,
                format("20 seeds x %zu liquids: mean d_eps %.2f%% (<= 5%%), mean d_sigma %.2f%% (<= 10%%), "
                       "%zu failed estimates; %.1f s (limit 60 s)",
                       all_liquids().size(), mean_eps, mean_sigma, failures, t)};
    }

    Outcome criterion_error_metrics()
    {
        std::size_t eps_ok = 0, sigma_ok = 0, rows = 0;
        std::ostringstream misses;
        for (const auto &m : mixtures_and_spirits())
        {
            const ErrorReport r = relative_errors(*m.reported_estimate, m.truth);
            const double d_eps = 100.0 * r.delta_eps, d_sigma = 100.0 * *r.delta_sigma;
            ++rows;
            if (std::abs(d_eps - *m.printed_delta_eps_pct) <= 0.1)
                ++eps_ok;
            else
                misses << format(" %s d_eps %.2f vs %.1f;", m.label.c_str(), d_eps, *m.printed_delta_eps_pct);
            if (std::abs(d_sigma - *m.printed_delta_sigma_pct) <= 0.1)
                ++sigma_ok;
            else
                misses << format(" %s d_sigma %.2f vs %.1f;", m.label.c_str(), d_sigma, *m.printed_delta_sigma_pct);
        }
        std::string detail = format("d_eps column %zu/%zu, d_sigma column %zu/%zu within 0.1 (abs %%)", eps_ok, rows,
                                    sigma_ok, rows);
        if (!misses.str().empty())
            detail += "; mismatches:" + misses.str();
        return {eps_ok == rows && sigma_ok == rows, detail};
    }

    Outcome criterion_solver_equivalence()
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> amp(0.1, 2.0), ph(-constants::pi, constants::pi);
        double worst = 0.0, worst_rms = 0.0;
        for (int dataset = 0; dataset < 200; ++dataset)
        {
            const bool noisy = dataset >= 100;
            const Complex los = std::polar(amp(rng), ph(rng)), mp = std::polar(0.4 * amp(rng), ph(rng));
            std::vector<CalibrationSample> samples;
            double power = 0.0;
            for (const auto &m : ethanol_water_mixtures())
            {
                CalibrationSample s{{}, m.truth, kFreq, 0.002};
                s.measured = los * model_transmission(s) + mp;
                power += std::norm(s.measured);
                samples.push_back(s);
            }
            if (noisy)
            {
                power /= static_cast<double>(samples.size());
                std::normal_distribution<double> g(0.0, std::sqrt(power / 1000.0 / 2.0));
                for (auto &s : samples)
                    s.measured += Complex(g(rng), g(rng));
            }
            const CalibrationProfile lin = fit_coefficients(samples);
            const CalibrationProfile lm = fit_coefficients_lm(samples).profile;
            worst = std::max({worst, std::abs(lin.coeff_los.real() - lm.coeff_los.real()),
                              std::abs(lin.coeff_los.imag() - lm.coeff_los.imag()),
                              std::abs(lin.coeff_multipath.real() - lm.coeff_multipath.real()),
                              std::abs(lin.coeff_multipath.imag() - lm.coeff_multipath.imag())});
            worst_rms = std::max(worst_rms, std::abs(lin.residual_rms - lm.residual_rms));
        }
        return {worst <= 1e-8 && worst_rms <= 1e-8,
                format("100 clean + 100 noisy (30 dB) datasets: max component gap %.2e, residual_rms gap %.2e "
                       "(tol 1e-8)",
                       worst, worst_rms)};
    }

    // Estimates the spirit on every subcarrier after transforming every trace.
    std::vector<SubcarrierEstimate> rotated_pipeline(const std::function<Trace(Trace)> &transform)
    {
        SimScenario scn = SimScenario::with_default_channels(606, 66);
        scn.snr_db = 30.0;
        const auto profiles = calibrate_mixtures(scn, transform);
        SimScenario unknown = scn;
        unknown.seed = derive_seed(scn.seed, 99);
        Trace tr = synth_trace(unknown, {27.76, 7.29}, "Baijiu 46%");
        if (transform)
            tr = transform(std::move(tr));
        return estimate_per_subcarrier(preprocess_trace(tr), profiles);
    }

    Trace rotate_packets(Trace tr, std::mt19937_64 &rng, bool quarter_turns)
    {
        std::uniform_real_distribution<double> phi(0.0, 2.0 * constants::pi);
        std::uniform_int_distribution<int> turns(0, 3);
        for (auto &f : tr.frames)
        {
            if (quarter_turns)
            {
                const int q = turns(rng);
                for (auto *port : {&f.csi_a, &f.csi_b})
                    for (auto &z : *port)
                        for (int i = 0; i < q; ++i)
                            z = Complex(-z.imag(), z.real());
            }
            else
            {
                const Complex rot = std::polar(1.0, phi(rng));
                for (auto *port : {&f.csi_a, &f.csi_b})
                    for (auto &z : *port)
                        z *= rot;
            }
        }
        return tr;
    }

    Outcome criterion_phase_invariance()
    {
        const auto base = rotated_pipeline({});
        auto compare = [&](const std::vector<SubcarrierEstimate> &other, double &max_rel) {
            bool identical = true;
            max_rel = 0.0;
            for (std::size_t k = 0; k < base.size(); ++k)
            {
                if (!base[k].estimate || !other[k].estimate)
                {
                    identical = identical && !base[k].estimate && !other[k].estimate;
                    continue;
                }
                const auto &a = *base[k].estimate, &b = *other[k].estimate;
                identical = identical && a.est == b.est && a.b == b.b && a.theta_b == b.theta_b;
                max_rel = std::max({max_rel, rel(b.est.eps_r, a.est.eps_r), rel(b.est.sigma, a.est.sigma)});
            }
            return identical;
        };

        std::mt19937_64 rng_any(61), rng_quarter(62);
        double dev_any = 0.0, dev_quarter = 0.0;
        const bool any_exact =
            compare(rotated_pipeline([&](Trace t) { return rotate_packets(std::move(t), rng_any, false); }), dev_any);
        const bool quarter_exact = compare(
            rotated_pipeline([&](Trace t) { return rotate_packets(std::move(t), rng_quarter, true); }), dev_quarter);
        return {any_exact,
                format("random e^{j phi_t} rotations: %s (max rel deviation %.2e); quarter-turn rotations: %s "
                       "(max rel deviation %.2e)",
                       any_exact ? "bit-identical" : "NOT bit-identical", dev_any,
                       quarter_exact ? "bit-identical" : "NOT bit-identical", dev_quarter)};
    }

    Outcome criterion_rescale_consistency()
    {
        std::uint64_t worst = 0;
        std::size_t frames = 0;
        const auto liquids = all_liquids();
        for (std::uint64_t s = 0; s < 5; ++s)
        {
            SimScenario scn = SimScenario::with_default_channels(derive_seed(s, 7000), derive_seed(s, 7001));
            scn.n_packets = 200;
            scn.transient_s = 0.0;
            const SynthesizedTrace st = synth_trace_detailed(scn, liquids[(s * 7) % liquids.size()].truth);
            for (std::size_t i = 0; i < st.trace.frames.size(); ++i, ++frames)
            {
                const CsiFrame r = rescale_frame(st.trace.frames[i], RescaleConfig{});
                const CsiFrame &v = st.volt_frames[i];
                for (std::size_t k = 0; k < r.csi_a.size(); ++k)
                    worst = std::max({worst, ulp_distance(r.csi_a[k].real(), v.csi_a[k].real()),
                                      ulp_distance(r.csi_a[k].imag(), v.csi_a[k].imag()),
                                      ulp_distance(r.csi_b[k].real(), v.csi_b[k].real()),
                                      ulp_distance(r.csi_b[k].imag(), v.csi_b[k].imag())});
            }
        }
        return {frames >= 1000 && worst <= 4,
                format("%zu frames, worst component error %llu ulp (limit 4)", frames,
                       static_cast<unsigned long long>(worst))};
    }

    Outcome criterion_degenerate_inputs()
    {
        std::vector<std::string> failed;
        std::size_t checks = 0;
        auto expect_error = [&](const char *name, ErrorCode code, const char *text, const std::function<void()> &fn) {
            ++checks;
            try
            {
                fn();
                failed.push_back(std::string(name) + ": no error");
            }
            catch (const Error &e)
            {
                if (e.code() != code || std::string(e.what()).find(text) == std::string::npos)
                    failed.push_back(std::string(name) + ": got '" + e.what() + "'");
            }
            catch (const std::exception &e)
            {
                failed.push_back(std::string(name) + ": unexpected exception '" + e.what() + "'");
            }
        };
        auto expect = [&](const char *name, bool ok) {
            ++checks;
            if (!ok)
                failed.emplace_back(name);
        };

        CalibrationProfile profile;
        profile.coeff_los = {0.75, -0.375};
        profile.coeff_multipath = {0.125, 0.0625};
        profile.freq_hz = kFreq;
        profile.d_m = 0.002;
        profile.n_samples = 10;

        expect_error("|T| > 1 in estimate", ErrorCode::non_physical_gain, "non-physical gain", [&] {
            estimate(profile.coeff_los * std::polar(1.2, -1.0) + profile.coeff_multipath, profile);
        });
        expect_error("|T| = 1.05", ErrorCode::non_physical_gain, "non-physical gain",
                     [] { factors_from_transmission({1.05, 0.0}, 0.002, 0); });
        expect_error("k_r = k_i", ErrorCode::singular_ratio, "singular ratio",
                     [] { invert_to_dielectric({300.0, 300.0}, kFreq); });
        expect_error("k_r < k_i", ErrorCode::singular_ratio, "singular ratio",
                     [] { invert_to_dielectric({100.0, 200.0}, kFreq); });
        expect_error("T implying k_r < k_i", ErrorCode::non_physical_medium, "non-physical medium",
                     [] { factors_from_transmission(std::polar(0.1, -0.5), 0.002, 0); });
        expect_error("empty cell T = 1", ErrorCode::non_physical_medium, "k_r must be > 0",
                     [&] { estimate(profile.coeff_los + profile.coeff_multipath, profile); });
        expect_error("T = 0", ErrorCode::zero_transmission, "|T| = 0", [&] { estimate(profile.coeff_multipath, profile); });

        const std::vector<CalibrationSample> one{{{0.5, 0.1}, {73.38, 6.41}, kFreq, 0.002}};
        expect_error("single-material calibration", ErrorCode::insufficient_samples, "insufficient calibration set",
                     [&] { fit_coefficients(one); });
        expect_error("single-material LM calibration", ErrorCode::insufficient_samples, "insufficient calibration set",
                     [&] { fit_coefficients_lm(one); });
        expect_error("single-trace calibration", ErrorCode::insufficient_samples, "insufficient calibration set", [] {
            CalibrationInput in;
            in.response.h_r2_adj.assign(30, Complex(0.5, 0.1));
            in.known = {73.38, 6.41};
            in.d_m = 0.002;
            fit_all_subcarriers(std::vector<CalibrationInput>{in});
        });

        // Air: zero-conductivity truth runs end to end and leaves d_sigma undefined.
        SimScenario scn = SimScenario::with_default_channels(88, 8);
        scn.snr_db = std::numeric_limits<double>::infinity();
        const auto profiles = calibrate_mixtures(scn);
        const AveragedResponse avg = preprocess_trace(synth_trace(scn, air().truth, "Air"));
        bool air_ok = false;
        try
        {
            const DielectricEstimate e = estimate(select_subcarrier(avg, kCenterAdjacentPosition).value,
                                                  profiles[kCenterAdjacentPosition.offset()]);
            const ErrorReport r = relative_errors(e.est, air().truth);
            air_ok = std::isfinite(e.est.eps_r) && std::isfinite(e.est.sigma) && e.est.sigma >= 0.0 &&
                     std::isfinite(r.delta_eps) && !r.delta_sigma.has_value() && std::abs(e.est.eps_r - 1.0) < 1e-6;
        }
        catch (const Error &)
        {
            air_ok = false;
        }
        expect("air estimate finite with undefined d_sigma", air_ok);
        const ErrorReport reported_air = relative_errors(*air().reported_estimate, air().truth);
        expect("reference air row: d_sigma undefined", !reported_air.delta_sigma.has_value());
        const DielectricProperties lossless = invert_to_dielectric({wavenumbers({1.0, 0.0}, kFreq).k_r, 0.0}, kFreq);
        expect("lossless inversion gives sigma = 0", lossless.sigma == 0.0 && std::isfinite(lossless.eps_r));

        std::string detail = format("%zu/%zu degenerate cases yield the specified outcome", checks - failed.size(), checks);
        for (const auto &f : failed)
            detail += "; FAILED " + f;
        return {failed.empty(), detail};
    }
} // namespace

int main(int argc, char **argv)
{
    const std::vector<Criterion> criteria{
        {1, "forward-inverse roundtrip", criterion_roundtrip},
        {2, "noiseless closed loop", criterion_noiseless_loop},
        {3, "noisy closed loop", criterion_noisy_loop},
        {4, "error-metric fidelity (reference table)", criterion_error_metrics},
        {5, "solver equivalence", criterion_solver_equivalence},
        {6, "global-phase invariance", criterion_phase_invariance},
        {7, "rescale consistency", criterion_rescale_consistency},
        {8, "degenerate-input suite", criterion_degenerate_inputs},
    };

    int only = 0;
    for (int i = 1; i < argc; ++i)
    {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            only = std::atoi(argv[++i]);
        else
        {
            std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
            return 2;
        }
    }
    if (only != 0 && (only < 1 || only > static_cast<int>(criteria.size())))
    {
        std::fprintf(stderr, "unknown criterion %d\n", only);
        return 2;
    }

    int failures = 0;
    for (const auto &c : criteria)
    {
        if (only != 0 && c.id != only)
            continue;
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("unexpected exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
