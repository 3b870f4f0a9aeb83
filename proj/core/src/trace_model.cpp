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

#include "csidiel/trace_model.hpp"

#include "csidiel/errors.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace csidiel
{
    namespace
    {
        using ordered_json = nlohmann::ordered_json;

        constexpr int kTraceFormatVersion = 1;

        void check_port(std::vector<std::string> &out, std::size_t frame, const char *port,
                        const std::vector<Complex> &csi, std::size_t expected)
        {
            std::ostringstream prefix;
            prefix << "frames[" << frame << "]." << port;
            if (csi.size() != expected)
                out.push_back(prefix.str() + ": csi length mismatch (" + std::to_string(csi.size()) +
                              " != " + std::to_string(expected) + ")");
            for (std::size_t k = 0; k < csi.size(); ++k)
                if (!std::isfinite(csi[k].real()) || !std::isfinite(csi[k].imag()))
                {
                    out.push_back(prefix.str() + "[" + std::to_string(k) + "]: non-finite sample");
                    break;
                }
        }

        [[noreturn]] void parse_fail(std::size_t line, const std::string &what)
        {
            throw Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + what);
        }

        double number_field(const ordered_json &obj, const char *key, std::size_t line)
        {
            auto it = obj.find(key);
            if (it == obj.end())
                parse_fail(line, std::string("missing field \"") + key + "\"");
            if (!it->is_number())
                parse_fail(line, std::string("field \"") + key + "\" is not a number");
            return it->get<double>();
        }

        std::optional<double> optional_number(const ordered_json &obj, const char *key, std::size_t line)
        {
            auto it = obj.find(key);
            if (it == obj.end() || it->is_null())
                return std::nullopt;
            if (!it->is_number())
                parse_fail(line, std::string("field \"") + key + "\" is not a number");
            return it->get<double>();
        }

        std::vector<Complex> complex_list(const ordered_json &obj, const char *key, std::size_t line)
        {
            auto it = obj.find(key);
            if (it == obj.end())
                parse_fail(line, std::string("missing field \"") + key + "\"");
            if (!it->is_array())
                parse_fail(line, std::string("field \"") + key + "\" is not an array");
            std::vector<Complex> values;
            values.reserve(it->size());
            for (const auto &pair : *it)
            {
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
                    parse_fail(line, std::string("field \"") + key + "\" must hold [re, im] pairs");
                values.emplace_back(pair[0].get<double>(), pair[1].get<double>());
            }
            return values;
        }

        ordered_json complex_array(const std::vector<Complex> &values)
        {
            ordered_json arr = ordered_json::array();
            for (const auto &z : values)
                arr.push_back(ordered_json::array({z.real(), z.imag()}));
            return arr;
        }
    } // namespace

    std::vector<int> default_subcarrier_indices()
    {
        std::vector<int> idx;
        idx.reserve(30);
        for (int i = -28; i <= -2; i += 2)
            idx.push_back(i);
        idx.push_back(-1);
        idx.push_back(1);
        for (int i = 3; i <= 27; i += 2)
            idx.push_back(i);
        idx.push_back(28);
        return idx;
    }

    double SubcarrierGrid::frequency_at(SubcarrierPosition pos) const
    {
        if (!contains(pos))
            throw Error(ErrorCode::out_of_range, "subcarrier position " + std::to_string(pos.value()) +
                                                     " outside [1, " + std::to_string(size()) + "]");
        return center_freq_hz + static_cast<double>(subcarrier_indices[pos.offset()]) * spacing_hz;
    }

    std::vector<std::string> SubcarrierGrid::violations() const
    {
        std::vector<std::string> out;
        if (!std::isfinite(center_freq_hz) || center_freq_hz <= 0.0)
            out.emplace_back("grid.center_freq_hz must be finite and > 0");
        if (!std::isfinite(bandwidth_hz) || bandwidth_hz <= 0.0)
            out.emplace_back("grid.bandwidth_hz must be finite and > 0");
        if (!std::isfinite(spacing_hz) || spacing_hz <= 0.0)
            out.emplace_back("grid.spacing_hz must be > 0");
        if (subcarrier_indices.empty())
            out.emplace_back("grid.subcarrier_indices must be non-empty");
        for (std::size_t k = 1; k < subcarrier_indices.size(); ++k)
            if (subcarrier_indices[k] <= subcarrier_indices[k - 1])
            {
                out.push_back("grid.subcarrier_indices[" + std::to_string(k) + "] not strictly increasing");
                break;
            }
        if (out.empty())
        {
            const double half = 0.5 * bandwidth_hz;
            for (std::size_t k = 0; k < subcarrier_indices.size(); ++k)
            {
                const double offset = static_cast<double>(subcarrier_indices[k]) * spacing_hz;
                if (std::abs(offset) > half)
                {
                    out.push_back("grid.subcarrier_indices[" + std::to_string(k) + "] lies outside the channel band");
                    break;
                }
            }
        }
        return out;
    }

    std::vector<std::string> validate_trace(const Trace &trace)
    {
        std::vector<std::string> out = trace.grid.violations();
        if (!(trace.d_m > 0.0) || !std::isfinite(trace.d_m))
            out.emplace_back("d_m must be > 0");
        if (!(trace.packet_interval_s > 0.0) || !std::isfinite(trace.packet_interval_s))
            out.emplace_back("packet_interval_s must be > 0");
        if (trace.frames.empty())
            out.emplace_back("frames must be non-empty");

        const std::size_t n_sc = trace.grid.size();
        for (std::size_t i = 0; i < trace.frames.size(); ++i)
        {
            const CsiFrame &f = trace.frames[i];
            const std::string prefix = "frames[" + std::to_string(i) + "]";
            if (!std::isfinite(f.t) || f.t < 0.0)
                out.push_back(prefix + ".t must be finite and >= 0");
            else if (i > 0 && f.t < trace.frames[i - 1].t)
                out.push_back(prefix + ".t decreases");
            if (!f.rssi_a && !f.rssi_b && !f.rssi_c)
                out.push_back(prefix + ": no rssi present");
            for (const auto &[name, value] : {std::pair{"rssi_a", f.rssi_a}, std::pair{"rssi_b", f.rssi_b},
                                              std::pair{"rssi_c", f.rssi_c}})
                if (value && !std::isfinite(*value))
                    out.push_back(prefix + "." + name + ": non-finite sample");
            if (!std::isfinite(f.agc))
                out.push_back(prefix + ".agc: non-finite sample");
            check_port(out, i, "csi_a", f.csi_a, n_sc);
            check_port(out, i, "csi_b", f.csi_b, n_sc);
        }
        return out;
    }

    Trace parse_trace(std::istream &in)
    {
        Trace trace;
        trace.frames.clear();
        std::string line;
        std::size_t line_no = 0;
        bool have_header = false;

        while (std::getline(in, line))
        {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;

            ordered_json obj;
            try
            {
                obj = ordered_json::parse(line);
            }
            catch (const nlohmann::json::parse_error &e)
            {
                parse_fail(line_no, std::string("malformed JSON: ") + e.what());
            }
            if (!obj.is_object())
                parse_fail(line_no, "expected a JSON object");

            if (!have_header)
            {
                if (!obj.contains("version"))
                    parse_fail(line_no, "missing header (first line must carry \"version\")");
                if (!obj["version"].is_number_integer() || obj["version"].get<int>() != kTraceFormatVersion)
                    parse_fail(line_no, "unsupported trace format version");
                trace.grid.center_freq_hz = number_field(obj, "center_freq_hz", line_no);
                trace.grid.bandwidth_hz = number_field(obj, "bandwidth_hz", line_no);
                trace.grid.spacing_hz = number_field(obj, "spacing_hz", line_no);
                auto idx = obj.find("subcarrier_indices");
                if (idx == obj.end() || !idx->is_array())
                    parse_fail(line_no, "missing field \"subcarrier_indices\"");
                trace.grid.subcarrier_indices.clear();
                for (const auto &v : *idx)
                {
                    if (!v.is_number_integer())
                        parse_fail(line_no, "subcarrier_indices must be integers");
                    trace.grid.subcarrier_indices.push_back(v.get<int>());
                }
                trace.d_m = number_field(obj, "d_m", line_no);
                auto label = obj.find("material_label");
                if (label == obj.end() || !label->is_string())
                    parse_fail(line_no, "missing field \"material_label\"");
                trace.material_label = label->get<std::string>();
                trace.packet_interval_s = number_field(obj, "packet_interval_s", line_no);
                have_header = true;
                continue;
            }

            if (obj.contains("version"))
                parse_fail(line_no, "unexpected second header");
            CsiFrame f;
            f.t = number_field(obj, "t", line_no);
            f.rssi_a = optional_number(obj, "rssi_a", line_no);
            f.rssi_b = optional_number(obj, "rssi_b", line_no);
            f.rssi_c = optional_number(obj, "rssi_c", line_no);
            f.agc = number_field(obj, "agc", line_no);
            f.csi_a = complex_list(obj, "csi_a", line_no);
            f.csi_b = complex_list(obj, "csi_b", line_no);
            const std::size_t n_sc = trace.grid.size();
            if (f.csi_a.size() != n_sc || f.csi_b.size() != n_sc)
                parse_fail(line_no, "csi length mismatch (grid has " + std::to_string(n_sc) + " subcarriers)");
            trace.frames.push_back(std::move(f));
        }

        if (!have_header)
            throw Error(ErrorCode::parse, "line 1: missing header");

        const auto violations = validate_trace(trace);
        if (!violations.empty())
            throw Error(ErrorCode::invariant_violation, "invalid trace: " + violations.front());
        return trace;
    }

    Trace read_trace_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorCode::io, "cannot open trace file " + path);
        try
        {
            return parse_trace(in);
        }
        catch (const Error &e)
        {
            throw Error(e.code(), path + ": " + e.what());
        }
    }

    void write_trace(const Trace &trace, std::ostream &out)
    {
        const auto violations = validate_trace(trace);
        if (!violations.empty())
        {
            for (const auto &v : violations)
                if (v.find("non-finite sample") != std::string::npos)
                    throw Error(ErrorCode::non_finite, "cannot encode trace: " + v);
            throw Error(ErrorCode::invariant_violation, "cannot encode trace: " + violations.front());
        }

        ordered_json header;
        header["version"] = kTraceFormatVersion;
        header["center_freq_hz"] = trace.grid.center_freq_hz;
        header["bandwidth_hz"] = trace.grid.bandwidth_hz;
        header["spacing_hz"] = trace.grid.spacing_hz;
        header["subcarrier_indices"] = trace.grid.subcarrier_indices;
        header["d_m"] = trace.d_m;
        header["material_label"] = trace.material_label;
        header["packet_interval_s"] = trace.packet_interval_s;
        out << header.dump() << '\n';

        for (const auto &f : trace.frames)
        {
            ordered_json obj;
            obj["t"] = f.t;
            if (f.rssi_a)
                obj["rssi_a"] = *f.rssi_a;
            if (f.rssi_b)
                obj["rssi_b"] = *f.rssi_b;
            if (f.rssi_c)
                obj["rssi_c"] = *f.rssi_c;
            obj["agc"] = f.agc;
            obj["csi_a"] = complex_array(f.csi_a);
            obj["csi_b"] = complex_array(f.csi_b);
            out << obj.dump() << '\n';
        }
    }

    void write_trace_file(const Trace &trace, const std::string &path)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::io, "cannot write trace file " + path);
        write_trace(trace, out);
        if (!out)
            throw Error(ErrorCode::io, "write failed for " + path);
    }
} // namespace csidiel
