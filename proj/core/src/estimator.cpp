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

#include "csidiel/estimator.hpp"

#include "csidiel/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

namespace csidiel
{
    namespace
    {
        const std::vector<std::string> kCsvColumns = {"material_label", "subcarrier_position", "eps_hat",
                                                      "sigma_hat", "eps_truth", "sigma_truth",
                                                      "delta_eps_pct", "delta_sigma_pct", "b", "theta_b"};

        std::string format_number(double v)
        {
            char buf[64];
            const auto res = std::to_chars(buf, buf + sizeof(buf), v);
            return std::string(buf, res.ptr);
        }

        std::string optional_cell(const std::optional<double> &v) { return v ? format_number(*v) : std::string(); }

        std::optional<double> parse_optional_number(const std::string &cell, std::size_t row, const char *column)
        {
            if (cell.empty())
                return std::nullopt;
            double v = 0.0;
            const char *end = cell.data() + cell.size();
            const auto res = std::from_chars(cell.data(), end, v);
            if (res.ec != std::errc() || res.ptr != end)
                throw Error(ErrorCode::parse, "estimate CSV row " + std::to_string(row) + ": column " + column +
                                                  " is not a number: \"" + cell + "\"");
            return v;
        }

        double median_of(std::vector<double> v)
        {
            std::sort(v.begin(), v.end());
            const std::size_t m = v.size() / 2;
            return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
        }
    } // namespace

    Complex calibrated_transmission(const Complex &measured, const CalibrationProfile &profile)
    {
        const Complex num = measured - profile.coeff_multipath;
        const Complex den = profile.coeff_los;
        if (!std::isfinite(num.real()) || !std::isfinite(num.imag()))
            throw Error(ErrorCode::non_finite, "measured channel value is not finite");
        if (num == Complex(0.0, 0.0))
            throw Error(ErrorCode::zero_transmission, "measured value equals the multipath coefficient (|T| = 0)");
        if (den == Complex(0.0, 0.0) || !std::isfinite(den.real()) || !std::isfinite(den.imag()))
            throw Error(ErrorCode::invalid_argument, "profile coeff_los must be finite and non-zero");

        // Power-of-two prescaling keeps the quotient exactly invariant under joint
        // scaling by +-2^k and +-j 2^k.
        const int s = std::ilogb(std::max(std::abs(den.real()), std::abs(den.imag())));
        const double dr = std::ldexp(den.real(), -s), di = std::ldexp(den.imag(), -s);
        const double nr = std::ldexp(num.real(), -s), ni = std::ldexp(num.imag(), -s);
        const double q = dr * dr + di * di;
        return {(nr * dr + ni * di) / q, (ni * dr - nr * di) / q};
    }

    DielectricEstimate estimate(const Complex &measured, const CalibrationProfile &profile, int wrap_hint)
    {
        const Complex t = calibrated_transmission(measured, profile);
        const TransmissionFactor polar = polar_transmission(t, wrap_hint);
        const PropagationFactors pf = factors_from_transmission(t, profile.d_m, wrap_hint);

        DielectricEstimate e;
        e.est = invert_to_dielectric(pf, profile.freq_hz);
        e.b = polar.b;
        e.theta_b = polar.theta_b;
        e.subcarrier_position = profile.subcarrier_position;
        e.freq_hz = profile.freq_hz;
        return e;
    }

    ErrorReport relative_errors(const DielectricProperties &est, const DielectricProperties &truth)
    {
        if (!(truth.eps_r > 0.0))
            throw Error(ErrorCode::invalid_argument, "truth eps_r must be > 0");
        if (truth.sigma < 0.0)
            throw Error(ErrorCode::invalid_argument, "truth sigma must be >= 0");
        ErrorReport r;
        r.delta_eps = std::abs(truth.eps_r - est.eps_r) / truth.eps_r;
        if (truth.sigma > 0.0)
            r.delta_sigma = std::abs(truth.sigma - est.sigma) / truth.sigma;
        return r;
    }

    std::vector<SubcarrierEstimate> estimate_per_subcarrier(const AveragedResponse &avg,
                                                            std::span<const CalibrationProfile> profiles,
                                                            int wrap_hint)
    {
        std::vector<SubcarrierEstimate> table;
        table.reserve(profiles.size());
        for (const auto &profile : profiles)
        {
            SubcarrierEstimate entry{profile.subcarrier_position, std::nullopt, {}};
            try
            {
                const ChannelSample cs = select_subcarrier(avg, profile.subcarrier_position);
                if (std::abs(cs.freq_hz - profile.freq_hz) > 1e-9 * cs.freq_hz)
                    throw Error(ErrorCode::geometry_mismatch, "profile frequency does not match the trace grid");
                entry.estimate = estimate(cs.value, profile, wrap_hint);
            }
            catch (const Error &e)
            {
                entry.error = e.what();
            }
            table.push_back(std::move(entry));
        }
        return table;
    }

    std::optional<DielectricProperties> median_estimate(std::span<const SubcarrierEstimate> sweep)
    {
        std::vector<double> eps, sigma;
        for (const auto &e : sweep)
            if (e.estimate)
            {
                eps.push_back(e.estimate->est.eps_r);
                sigma.push_back(e.estimate->est.sigma);
            }
        if (eps.empty())
            return std::nullopt;
        return DielectricProperties{median_of(std::move(eps)), median_of(std::move(sigma))};
    }

    std::string csv_escape(const std::string &field)
    {
        if (field.find_first_of(",\"\r\n") == std::string::npos)
            return field;
        std::string out = "\"";
        for (char c : field)
        {
            if (c == '"')
                out += '"';
            out += c;
        }
        out += '"';
        return out;
    }

    std::vector<std::vector<std::string>> parse_csv(std::istream &in)
    {
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> row;
        std::string field;
        bool quoted = false, field_started = false;
        char c;
        auto end_field = [&] {
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
        };
        auto end_row = [&] {
            end_field();
            if (!(row.size() == 1 && row[0].empty()))
                rows.push_back(std::move(row));
            row.clear();
        };
        while (in.get(c))
        {
            if (quoted)
            {
                if (c == '"')
                {
                    if (in.peek() == '"')
                    {
                        in.get(c);
                        field += '"';
                    }
                    else
                        quoted = false;
                }
                else
                    field += c;
                continue;
            }
            switch (c)
            {
            case '"':
                if (field_started)
                    throw Error(ErrorCode::parse, "CSV: stray quote inside unquoted field");
                quoted = field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                break;
            default:
                field += c;
                field_started = true;
            }
        }
        if (quoted)
            throw Error(ErrorCode::parse, "CSV: unterminated quoted field");
        if (field_started || !field.empty() || !row.empty())
            end_row();
        return rows;
    }

    void write_estimate_csv(std::span<const EstimateRow> rows, std::ostream &out)
    {
        for (std::size_t i = 0; i < kCsvColumns.size(); ++i)
            out << (i ? "," : "") << kCsvColumns[i];
        out << "\r\n";
        for (const auto &r : rows)
        {
            std::optional<double> d_eps, d_sigma;
            if (r.est && r.truth && r.truth->eps_r > 0.0)
            {
                const ErrorReport err = relative_errors(*r.est, *r.truth);
                d_eps = 100.0 * err.delta_eps;
                if (err.delta_sigma)
                    d_sigma = 100.0 * *err.delta_sigma;
            }
            out << csv_escape(r.material_label) << ',' << r.subcarrier_position.value() << ','
                << optional_cell(r.est ? std::optional(r.est->eps_r) : std::nullopt) << ','
                << optional_cell(r.est ? std::optional(r.est->sigma) : std::nullopt) << ','
                << optional_cell(r.truth ? std::optional(r.truth->eps_r) : std::nullopt) << ','
                << optional_cell(r.truth ? std::optional(r.truth->sigma) : std::nullopt) << ','
                << optional_cell(d_eps) << ',' << optional_cell(d_sigma) << ',' << optional_cell(r.b) << ','
                << optional_cell(r.theta_b) << "\r\n";
        }
    }

    std::vector<EstimateRow> read_estimate_csv(std::istream &in)
    {
        const auto table = parse_csv(in);
        if (table.empty())
            throw Error(ErrorCode::parse, "estimate CSV is empty");
        std::map<std::string, std::size_t> col;
        for (std::size_t i = 0; i < table[0].size(); ++i)
            col[table[0][i]] = i;
        for (const char *required : {"material_label", "subcarrier_position", "eps_hat", "sigma_hat"})
            if (!col.count(required))
                throw Error(ErrorCode::parse, std::string("estimate CSV lacks column ") + required);

        std::vector<EstimateRow> rows;
        for (std::size_t r = 1; r < table.size(); ++r)
        {
            const auto &cells = table[r];
            auto cell = [&](const char *name) -> std::string {
                auto it = col.find(name);
                return (it == col.end() || it->second >= cells.size()) ? std::string() : cells[it->second];
            };
            EstimateRow row;
            row.material_label = cell("material_label");
            const auto pos = parse_optional_number(cell("subcarrier_position"), r, "subcarrier_position");
            if (!pos || *pos < 1.0 || *pos != std::floor(*pos))
                throw Error(ErrorCode::parse, "estimate CSV row " + std::to_string(r) + ": bad subcarrier_position");
            row.subcarrier_position = SubcarrierPosition(static_cast<std::size_t>(*pos));
            const auto eps_hat = parse_optional_number(cell("eps_hat"), r, "eps_hat");
            const auto sigma_hat = parse_optional_number(cell("sigma_hat"), r, "sigma_hat");
            if (eps_hat && sigma_hat)
                row.est = DielectricProperties{*eps_hat, *sigma_hat};
            const auto eps_truth = parse_optional_number(cell("eps_truth"), r, "eps_truth");
            const auto sigma_truth = parse_optional_number(cell("sigma_truth"), r, "sigma_truth");
            if (eps_truth && sigma_truth)
                row.truth = DielectricProperties{*eps_truth, *sigma_truth};
            row.b = parse_optional_number(cell("b"), r, "b");
            row.theta_b = parse_optional_number(cell("theta_b"), r, "theta_b");
            rows.push_back(std::move(row));
        }
        return rows;
    }
} // namespace csidiel
