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

#include "csidiel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

namespace csidiel
{
    namespace
    {
        bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

        void check_samples(std::span<const CalibrationSample> samples)
        {
            if (samples.size() < 2)
                throw Error(ErrorCode::insufficient_samples,
                            "insufficient calibration set: need at least 2 samples, got " +
                                std::to_string(samples.size()));
            const double f0 = samples.front().freq_hz;
            const double d0 = samples.front().d_m;
            for (std::size_t i = 0; i < samples.size(); ++i)
            {
                const auto &s = samples[i];
                if (!same_value(s.freq_hz, f0) || !same_value(s.d_m, d0))
                    throw Error(ErrorCode::geometry_mismatch,
                                "geometry mismatch: sample " + std::to_string(i) + " differs in freq_hz or d_m");
                if (!std::isfinite(s.measured.real()) || !std::isfinite(s.measured.imag()))
                    throw Error(ErrorCode::non_finite, "calibration sample " + std::to_string(i) + " is not finite");
                if (s.measured == Complex(0.0, 0.0))
                    throw Error(ErrorCode::invalid_argument, "calibration sample " + std::to_string(i) + " is zero");
            }
        }

        double rms(const std::vector<Complex> &r)
        {
            if (r.empty())
                return 0.0;
            double acc = 0.0;
            for (const auto &z : r)
                acc += std::norm(z);
            return std::sqrt(acc / static_cast<double>(r.size()));
        }

        nlohmann::ordered_json complex_json(const Complex &z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

        Complex complex_from_json(const nlohmann::ordered_json &j, const char *key)
        {
            if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2 || !j[key][0].is_number() ||
                !j[key][1].is_number())
                throw Error(ErrorCode::parse, std::string("profile field \"") + key + "\" must be [re, im]");
            return {j[key][0].get<double>(), j[key][1].get<double>()};
        }

        double number_from_json(const nlohmann::ordered_json &j, const char *key)
        {
            if (!j.contains(key) || !j[key].is_number())
                throw Error(ErrorCode::parse, std::string("profile field \"") + key + "\" must be a number");
            return j[key].get<double>();
        }
    } // namespace

    Complex model_transmission(const CalibrationSample &sample)
    {
        return transmission_factor(wavenumbers(sample.known, sample.freq_hz), sample.d_m);
    }

    CalibrationProfile fit_coefficients(std::span<const CalibrationSample> samples, SubcarrierPosition position)
    {
        check_samples(samples);
        const std::size_t n = samples.size();

        std::vector<Complex> t(n);
        Complex t_mean, m_mean;
        double t_scale = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            t[i] = model_transmission(samples[i]);
            t_mean += t[i];
            m_mean += samples[i].measured;
            t_scale = std::max(t_scale, std::norm(t[i]));
        }
        t_mean /= static_cast<double>(n);
        m_mean /= static_cast<double>(n);

        // Centered normal equations: the intercept decouples from the slope.
        double sxx = 0.0;
        Complex sxy;
        for (std::size_t i = 0; i < n; ++i)
        {
            const Complex dt = t[i] - t_mean;
            sxx += std::norm(dt);
            sxy += std::conj(dt) * (samples[i].measured - m_mean);
        }
        if (!(sxx > 1e-20 * static_cast<double>(n) * t_scale))
            throw Error(ErrorCode::rank_deficient,
                        "rank-deficient calibration: all samples share the same transmission factor");

        CalibrationProfile p;
        p.coeff_los = sxy / sxx;
        p.coeff_multipath = m_mean - p.coeff_los * t_mean;
        p.freq_hz = samples.front().freq_hz;
        p.d_m = samples.front().d_m;
        p.subcarrier_position = position;
        p.n_samples = n;
        p.residual_rms = rms(residuals(p, samples));
        if (p.coeff_los == Complex(0.0, 0.0))
            throw Error(ErrorCode::rank_deficient, "fitted line-of-sight coefficient is zero");
        return p;
    }

    LmFit fit_coefficients_lm(std::span<const CalibrationSample> samples, const LmOptions &options,
                              SubcarrierPosition position)
    {
        check_samples(samples);
        if (!(options.tol > 0.0))
            throw Error(ErrorCode::invalid_argument, "LM tolerance must be > 0");
        const std::size_t n = samples.size();
        const Eigen::Index rows = static_cast<Eigen::Index>(2 * n);

        std::vector<Complex> t(n);
        for (std::size_t i = 0; i < n; ++i)
            t[i] = model_transmission(samples[i]);

        auto residual = [&](const Eigen::Vector4d &x) {
            const Complex los(x[0], x[1]), mp(x[2], x[3]);
            Eigen::VectorXd r(rows);
            for (std::size_t i = 0; i < n; ++i)
            {
                const Complex e = samples[i].measured - (los * t[i] + mp);
                r[static_cast<Eigen::Index>(2 * i)] = e.real();
                r[static_cast<Eigen::Index>(2 * i + 1)] = e.imag();
            }
            return r;
        };
        // d r / d x; constant because the model is linear in its parameters.
        Eigen::MatrixXd jac(rows, 4);
        for (std::size_t i = 0; i < n; ++i)
        {
            const auto re = static_cast<Eigen::Index>(2 * i), im = re + 1;
            jac.row(re) << -t[i].real(), t[i].imag(), -1.0, 0.0;
            jac.row(im) << -t[i].imag(), -t[i].real(), 0.0, -1.0;
        }
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const double jac_norm = jac.norm();

        Eigen::Vector4d x(options.initial_los.real(), options.initial_los.imag(), options.initial_multipath.real(),
                          options.initial_multipath.imag());
        Eigen::VectorXd r = residual(x);
        double cost = r.squaredNorm();
        double lambda = 1e-3;
        int iterations = 0;

        for (;;)
        {
            const Eigen::Vector4d grad = jac.transpose() * r;
            if (grad.lpNorm<Eigen::Infinity>() <= options.tol * std::max(1.0, jac_norm * std::sqrt(cost)))
                break;
            if (iterations >= options.max_iters)
                throw Error(ErrorCode::no_convergence,
                            "Levenberg-Marquardt did not converge in " + std::to_string(options.max_iters) +
                                " iterations");
            ++iterations;

            Eigen::Matrix4d damped = jtj;
            for (int k = 0; k < 4; ++k)
                damped(k, k) += lambda * std::max(jtj(k, k), 1e-300);
            const Eigen::Vector4d step = damped.ldlt().solve(-grad);
            const Eigen::Vector4d x_new = x + step;
            const Eigen::VectorXd r_new = residual(x_new);
            const double cost_new = r_new.squaredNorm();
            const bool small_step = step.norm() <= options.tol * (x.norm() + options.tol);

            if (cost_new <= cost)
            {
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda * 0.1, 1e-16);
                if (small_step)
                    break;
            }
            else
            {
                lambda *= 10.0;
                if (small_step || lambda > 1e16)
                    break;
            }
        }

        LmFit fit;
        fit.iterations = iterations;
        fit.profile.coeff_los = Complex(x[0], x[1]);
        fit.profile.coeff_multipath = Complex(x[2], x[3]);
        fit.profile.freq_hz = samples.front().freq_hz;
        fit.profile.d_m = samples.front().d_m;
        fit.profile.subcarrier_position = position;
        fit.profile.n_samples = n;
        fit.profile.residual_rms = rms(residuals(fit.profile, samples));
        return fit;
    }

    std::vector<Complex> residuals(const CalibrationProfile &profile, std::span<const CalibrationSample> samples)
    {
        std::vector<Complex> out;
        out.reserve(samples.size());
        for (const auto &s : samples)
            out.push_back(s.measured - (profile.coeff_los * model_transmission(s) + profile.coeff_multipath));
        return out;
    }

    std::optional<std::string> conditioning_warning(std::span<const CalibrationSample> samples,
                                                    double min_separation)
    {
        std::vector<Complex> t;
        t.reserve(samples.size());
        for (const auto &s : samples)
            t.push_back(model_transmission(s));

        std::size_t well_separated = 0;
        double largest = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = i + 1; j < t.size(); ++j)
            {
                const double sep = std::abs(t[i] - t[j]);
                largest = std::max(largest, sep);
                if (sep >= min_separation)
                    ++well_separated;
            }
        if (well_separated >= 2)
            return std::nullopt;
        std::ostringstream msg;
        msg << "poorly conditioned calibration set: " << well_separated
            << " material pair(s) separated by >= " << min_separation << " in T (largest " << largest
            << "); use at least 3 well-separated materials";
        return msg.str();
    }

    std::vector<CalibrationProfile> fit_all_subcarriers(std::span<const CalibrationInput> inputs)
    {
        if (inputs.size() < 2)
            throw Error(ErrorCode::insufficient_samples,
                        "insufficient calibration set: need at least 2 materials, got " +
                            std::to_string(inputs.size()));
        const SubcarrierGrid &grid = inputs.front().response.grid;
        for (const auto &in : inputs)
        {
            if (!(in.response.grid == grid))
                throw Error(ErrorCode::geometry_mismatch, "geometry mismatch: calibration traces use different grids");
            if (!same_value(in.d_m, inputs.front().d_m))
                throw Error(ErrorCode::geometry_mismatch, "geometry mismatch: calibration traces differ in d_m");
        }

        std::vector<CalibrationProfile> profiles;
        profiles.reserve(grid.size());
        std::vector<CalibrationSample> samples(inputs.size());
        for (std::size_t k = 1; k <= grid.size(); ++k)
        {
            const SubcarrierPosition pos(k);
            for (std::size_t i = 0; i < inputs.size(); ++i)
            {
                const ChannelSample cs = select_subcarrier(inputs[i].response, pos);
                samples[i] = {cs.value, inputs[i].known, cs.freq_hz, inputs[i].d_m};
            }
            profiles.push_back(fit_coefficients(samples, pos));
        }
        return profiles;
    }

    void write_profile(const CalibrationProfile &profile, std::ostream &out)
    {
        nlohmann::ordered_json j;
        j["freq_hz"] = profile.freq_hz;
        j["d_m"] = profile.d_m;
        j["subcarrier_position"] = profile.subcarrier_position.value();
        j["coeff_los"] = complex_json(profile.coeff_los);
        j["coeff_multipath"] = complex_json(profile.coeff_multipath);
        j["residual_rms"] = profile.residual_rms;
        j["n_samples"] = profile.n_samples;
        out << j.dump(2) << '\n';
    }

    CalibrationProfile read_profile(std::istream &in)
    {
        nlohmann::ordered_json j;
        try
        {
            j = nlohmann::ordered_json::parse(in);
        }
        catch (const nlohmann::json::parse_error &e)
        {
            throw Error(ErrorCode::parse, std::string("malformed profile JSON: ") + e.what());
        }
        if (!j.is_object())
            throw Error(ErrorCode::parse, "profile must be a JSON object");

        CalibrationProfile p;
        p.freq_hz = number_from_json(j, "freq_hz");
        p.d_m = number_from_json(j, "d_m");
        if (!j.contains("subcarrier_position") || !j["subcarrier_position"].is_number_unsigned())
            throw Error(ErrorCode::parse, "profile field \"subcarrier_position\" must be a positive integer");
        p.subcarrier_position = SubcarrierPosition(j["subcarrier_position"].get<std::size_t>());
        p.coeff_los = complex_from_json(j, "coeff_los");
        p.coeff_multipath = complex_from_json(j, "coeff_multipath");
        p.residual_rms = number_from_json(j, "residual_rms");
        if (!j.contains("n_samples") || !j["n_samples"].is_number_unsigned())
            throw Error(ErrorCode::parse, "profile field \"n_samples\" must be a non-negative integer");
        p.n_samples = j["n_samples"].get<std::size_t>();

        if (p.coeff_los == Complex(0.0, 0.0))
            throw Error(ErrorCode::invariant_violation, "profile coeff_los must be non-zero");
        if (p.n_samples < 2)
            throw Error(ErrorCode::invariant_violation, "profile n_samples must be >= 2");
        if (!(p.residual_rms >= 0.0))
            throw Error(ErrorCode::invariant_violation, "profile residual_rms must be >= 0");
        if (!(p.freq_hz > 0.0) || !(p.d_m > 0.0) || p.subcarrier_position.value() == 0)
            throw Error(ErrorCode::invariant_violation, "profile needs freq_hz > 0, d_m > 0, position >= 1");
        return p;
    }

    void save_profile(const CalibrationProfile &profile, const std::string &path)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::io, "cannot write profile " + path);
        write_profile(profile, out);
    }

    CalibrationProfile load_profile(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorCode::io, "profile not found: " + path);
        return read_profile(in);
    }
} // namespace csidiel
