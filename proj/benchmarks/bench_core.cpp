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

#include "csidiel/calibration.hpp"
#include "csidiel/em_core.hpp"
#include "csidiel/estimator.hpp"
#include "csidiel/preprocess.hpp"
#include "csidiel/reference_materials.hpp"
#include "csidiel/simulator.hpp"

#include <benchmark/benchmark.h>

using namespace csidiel;

namespace
{
    constexpr double kFreq = 5.32e9;

    void BM_WavenumberRoundtrip(benchmark::State &state)
    {
        DielectricProperties p{40.64, 8.57};
        for (auto _ : state)
        {
            const DielectricProperties back = invert_to_dielectric(wavenumbers(p, kFreq), kFreq);
            benchmark::DoNotOptimize(back);
            p.eps_r = back.eps_r;
        }
    }
    BENCHMARK(BM_WavenumberRoundtrip);

    void BM_EstimateSingle(benchmark::State &state)
    {
        CalibrationProfile prof;
        prof.coeff_los = {0.8, -0.3};
        prof.coeff_multipath = {0.1, 0.05};
        prof.freq_hz = kFreq;
        prof.d_m = 0.002;
        prof.n_samples = 10;
        const Complex m =
            prof.coeff_los * transmission_factor(wavenumbers({27.76, 7.29}, kFreq), prof.d_m) + prof.coeff_multipath;
        for (auto _ : state)
            benchmark::DoNotOptimize(estimate(m, prof));
    }
    BENCHMARK(BM_EstimateSingle);

    void BM_FitLinear(benchmark::State &state)
    {
        std::vector<CalibrationSample> samples;
        for (const auto &m : ethanol_water_mixtures())
        {
            CalibrationSample s{{}, m.truth, kFreq, 0.002};
            s.measured = Complex(0.8, -0.3) * model_transmission(s) + Complex(0.1, 0.05);
            samples.push_back(s);
        }
        for (auto _ : state)
            benchmark::DoNotOptimize(fit_coefficients(samples));
    }
    BENCHMARK(BM_FitLinear);

    void BM_FitLevenbergMarquardt(benchmark::State &state)
    {
        std::vector<CalibrationSample> samples;
        for (const auto &m : ethanol_water_mixtures())
        {
            CalibrationSample s{{}, m.truth, kFreq, 0.002};
            s.measured = Complex(0.8, -0.3) * model_transmission(s) + Complex(0.1, 0.05);
            samples.push_back(s);
        }
        for (auto _ : state)
            benchmark::DoNotOptimize(fit_coefficients_lm(samples));
    }
    BENCHMARK(BM_FitLevenbergMarquardt);

    void BM_PreprocessTrace(benchmark::State &state)
    {
        SimScenario scn = SimScenario::with_default_channels(1, 2);
        scn.n_packets = static_cast<std::size_t>(state.range(0));
        scn.transient_s = 0.0;
        const Trace tr = synth_trace(scn, {73.38, 6.41});
        PreprocessConfig cfg;
        cfg.window = {0.0, static_cast<double>(tr.frames.size() + 1) * scn.packet_interval_s};
        for (auto _ : state)
            benchmark::DoNotOptimize(preprocess_trace(tr, cfg));
        state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tr.frames.size()));
    }
    BENCHMARK(BM_PreprocessTrace)->Arg(200)->Arg(2000);

    void BM_SynthTrace(benchmark::State &state)
    {
        SimScenario scn = SimScenario::with_default_channels(1, 2);
        scn.n_packets = 200;
        for (auto _ : state)
            benchmark::DoNotOptimize(synth_trace(scn, {73.38, 6.41}));
    }
    BENCHMARK(BM_SynthTrace);
} // namespace

BENCHMARK_MAIN();
