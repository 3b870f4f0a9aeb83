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

#include "csidiel/commands.hpp"

#include "csidiel/calibration.hpp"
#include "csidiel/errors.hpp"
#include "csidiel/estimator.hpp"
#include "csidiel/preprocess.hpp"
#include "csidiel/reference_materials.hpp"
#include "csidiel/simulator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace csidiel::cli
{
    namespace
    {
        namespace fs = std::filesystem;
        using ordered_json = nlohmann::ordered_json;

        // A required input file that does not exist.
        struct MissingInput : std::runtime_error
        {
            using std::runtime_error::runtime_error;
        };

        void require_file(const fs::path &path, const std::string &kind)
        {
            std::error_code ec;
            if (!fs::is_regular_file(path, ec))
                throw MissingInput(kind + " not found: " + path.string());
        }

        struct Options
        {
            std::string scenario;
            std::vector<std::string> traces;
            std::string manifest;
            std::string profile_dir;
            std::string out;
            std::string estimates;
            std::size_t subcarrier = kCenterAdjacentPosition.value();
            bool all_subcarriers = false;
            std::string window = "10:20";
            double c_db = 44.0;
            int wrap_hint = 0;
            std::optional<std::uint64_t> seed;
        };

        TimeWindow parse_window(const std::string &text)
        {
            const auto colon = text.find(':');
            auto number = [&](std::string_view s) {
                double v = 0.0;
                const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
                if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
                    throw CLI::ValidationError("--window", "expected START:END in seconds, got '" + text + "'");
                return v;
            };
            if (colon == std::string::npos)
                throw CLI::ValidationError("--window", "expected START:END in seconds, got '" + text + "'");
            const std::string_view view(text);
            TimeWindow w{number(view.substr(0, colon)), number(view.substr(colon + 1))};
            if (!(w.start_s < w.end_s))
                throw CLI::ValidationError("--window", "window start must be < end");
            return w;
        }

        PreprocessConfig preprocess_config(const Options &opt)
        {
            PreprocessConfig cfg;
            cfg.rescale.c_db = opt.c_db;
            cfg.window = parse_window(opt.window);
            return cfg;
        }

        std::string profile_name(SubcarrierPosition pos) { return fmt::format("profile_sc{:02}.json", pos.value()); }

        const char *role_name(MaterialRole role) { return role == MaterialRole::calibration ? "calibration" : "unknown"; }

        MaterialRole parse_role(const std::string &s)
        {
            if (s == "calibration")
                return MaterialRole::calibration;
            if (s == "unknown")
                return MaterialRole::unknown;
            throw Error(ErrorCode::parse, "material role must be \"calibration\" or \"unknown\", got \"" + s + "\"");
        }

        struct MaterialSpec
        {
            std::string label;
            DielectricProperties truth;
            MaterialRole role = MaterialRole::unknown;
        };

        std::vector<MaterialSpec> default_materials()
        {
            std::vector<MaterialSpec> out;
            for (const auto &m : ethanol_water_mixtures())
                out.push_back({m.label, m.truth, MaterialRole::calibration});
            for (const auto &m : spirits())
                out.push_back({m.label, m.truth, MaterialRole::unknown});
            return out;
        }

        // The optional "materials" list of a scenario file.
        std::vector<MaterialSpec> scenario_materials(const fs::path &path)
        {
            std::ifstream in(path);
            const auto j = ordered_json::parse(in, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("materials"))
                return default_materials();
            std::vector<MaterialSpec> out;
            try
            {
                for (const auto &m : j.at("materials"))
                    out.push_back({m.at("label").get<std::string>(),
                                   {m.at("eps_r").get<double>(), m.at("sigma").get<double>()},
                                   parse_role(m.value("role", std::string("unknown")))});
            }
            catch (const nlohmann::json::exception &e)
            {
                throw Error(ErrorCode::parse, std::string("scenario materials: ") + e.what());
            }
            if (out.empty())
                throw Error(ErrorCode::invalid_argument, "scenario lists no materials");
            return out;
        }

        int cmd_simulate(const Options &opt, std::ostream &out)
        {
            require_file(opt.scenario, "scenario");
            SimScenario scn = load_scenario(opt.scenario);
            if (opt.seed)
                scn.seed = *opt.seed;
            const auto materials = scenario_materials(opt.scenario);

            const fs::path dir(opt.out);
            fs::create_directories(dir);
            Manifest manifest;
            manifest.d_m = scn.d_m;
            manifest.seed = scn.seed;
            for (std::size_t i = 0; i < materials.size(); ++i)
            {
                SimScenario per_trace = scn;
                per_trace.seed = derive_seed(scn.seed, i);
                const Trace trace = synth_trace(per_trace, materials[i].truth, materials[i].label);
                const std::string name = fmt::format("trace_{:02}_{}.jsonl", i + 1, slugify(materials[i].label));
                write_trace_file(trace, (dir / name).string());
                manifest.materials.push_back({name, materials[i].label, materials[i].truth, materials[i].role});
            }
            write_manifest(manifest, dir / "manifest.json");
            out << fmt::format("wrote {} traces and manifest.json to {}\n", materials.size(), dir.string());
            return kExitOk;
        }

        int cmd_calibrate(const Options &opt, std::ostream &out, std::ostream &err)
        {
            require_file(opt.manifest, "manifest");
            const Manifest manifest = read_manifest(opt.manifest);
            const PreprocessConfig cfg = preprocess_config(opt);

            std::vector<CalibrationInput> inputs;
            for (const auto &m : manifest.materials)
            {
                if (m.role != MaterialRole::calibration || !m.truth)
                    continue;
                require_file(m.file, "trace");
                const Trace trace = read_trace_file(m.file.string());
                inputs.push_back({preprocess_trace(trace, cfg), *m.truth, trace.d_m, m.label});
            }
            const auto profiles = fit_all_subcarriers(inputs);

            std::vector<CalibrationSample> anchor_samples;
            for (const auto &in : inputs)
            {
                const ChannelSample cs = select_subcarrier(in.response, kCenterAdjacentPosition);
                anchor_samples.push_back({cs.value, in.known, cs.freq_hz, in.d_m});
            }
            if (const auto warning = conditioning_warning(anchor_samples))
                err << "warning: " << *warning << '\n';

            const fs::path dir(opt.profile_dir);
            fs::create_directories(dir);
            double worst = 0.0;
            for (const auto &p : profiles)
            {
                save_profile(p, (dir / profile_name(p.subcarrier_position)).string());
                worst = std::max(worst, p.residual_rms);
            }
            out << fmt::format("calibrated {} subcarriers from {} materials; max residual_rms = {:.3e} V\n",
                               profiles.size(), inputs.size(), worst);
            return kExitOk;
        }

        struct EstimateTarget
        {
            fs::path file;
            std::string label;
            std::optional<DielectricProperties> truth;
        };

        std::vector<EstimateTarget> estimate_targets(const Options &opt)
        {
            std::optional<Manifest> manifest;
            if (!opt.manifest.empty())
            {
                require_file(opt.manifest, "manifest");
                manifest = read_manifest(opt.manifest);
            }
            std::vector<EstimateTarget> targets;
            if (!opt.traces.empty())
            {
                for (const auto &t : opt.traces)
                {
                    EstimateTarget target{t, {}, std::nullopt};
                    if (manifest)
                        for (const auto &m : manifest->materials)
                            if (fs::weakly_canonical(m.file) == fs::weakly_canonical(t))
                            {
                                target.label = m.label;
                                target.truth = m.truth;
                            }
                    targets.push_back(std::move(target));
                }
            }
            else if (manifest)
            {
                for (const auto &m : manifest->materials)
                    if (m.role == MaterialRole::unknown)
                        targets.push_back({m.file, m.label, m.truth});
            }
            if (targets.empty())
                throw CLI::ValidationError("estimate", "no traces to estimate: pass --traces or a manifest with unknowns");
            return targets;
        }

        int cmd_estimate(const Options &opt, std::ostream &out, std::ostream &err)
        {
            const PreprocessConfig cfg = preprocess_config(opt);
            const auto targets = estimate_targets(opt);
            for (const auto &t : targets)
                require_file(t.file, "trace");

            std::vector<SubcarrierPosition> positions;
            if (opt.all_subcarriers)
            {
                const Trace first = read_trace_file(targets.front().file.string());
                for (std::size_t k = 1; k <= first.grid.size(); ++k)
                    positions.emplace_back(k);
            }
            else
            {
                positions.emplace_back(opt.subcarrier);
            }

            std::vector<CalibrationProfile> profiles;
            for (const auto pos : positions)
            {
                const fs::path path = fs::path(opt.profile_dir) / profile_name(pos);
                require_file(path, "profile");
                profiles.push_back(load_profile(path.string()));
            }

            std::vector<EstimateRow> rows;
            bool complete = true;
            for (const auto &t : targets)
            {
                const Trace trace = read_trace_file(t.file.string());
                const std::string label = !t.label.empty() ? t.label
                                          : !trace.material_label.empty() ? trace.material_label
                                                                          : t.file.stem().string();
                const AveragedResponse avg = preprocess_trace(trace, cfg);
                for (const auto &s : estimate_per_subcarrier(avg, profiles, opt.wrap_hint))
                {
                    EstimateRow row{label, s.position, std::nullopt, t.truth, std::nullopt, std::nullopt};
                    if (s.estimate)
                    {
                        row.est = s.estimate->est;
                        row.b = s.estimate->b;
                        row.theta_b = s.estimate->theta_b;
                    }
                    else
                    {
                        complete = false;
                        err << fmt::format("error: {} subcarrier {}: {}\n", label, s.position.value(), s.error);
                    }
                    rows.push_back(std::move(row));
                }
            }

            if (opt.out.empty())
            {
                write_estimate_csv(rows, out);
            }
            else
            {
                std::ofstream file(opt.out, std::ios::binary);
                if (!file)
                    throw Error(ErrorCode::io, "cannot write " + opt.out);
                write_estimate_csv(rows, file);
                if (!file)
                    throw Error(ErrorCode::io, "write failed for " + opt.out);
                out << fmt::format("wrote {} estimate rows to {}\n", rows.size(), opt.out);
            }
            return complete ? kExitOk : kExitFailure;
        }

        double median(std::vector<double> v)
        {
            std::sort(v.begin(), v.end());
            const std::size_t n = v.size();
            return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        }

        struct Summary
        {
            std::string label;
            std::optional<DielectricProperties> est;
            std::optional<DielectricProperties> truth;
            std::optional<ErrorReport> errors;
        };

        std::string pct_cell(const std::optional<double> &fraction)
        {
            return fraction ? fmt::format("{:.1f}", *fraction * 100.0) : std::string("undef");
        }

        int cmd_evaluate(const Options &opt, std::ostream &out)
        {
            require_file(opt.estimates, "estimates");
            std::ifstream in(opt.estimates, std::ios::binary);
            std::vector<EstimateRow> rows = read_estimate_csv(in);

            if (!opt.manifest.empty())
            {
                require_file(opt.manifest, "manifest");
                const Manifest manifest = read_manifest(opt.manifest);
                for (auto &r : rows)
                    if (!r.truth)
                        for (const auto &m : manifest.materials)
                            if (m.label == r.material_label)
                                r.truth = m.truth;
            }

            // Rows of one material (several subcarriers) collapse to their median estimate.
            std::vector<Summary> summaries;
            std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> values;
            for (const auto &r : rows)
            {
                auto it = std::find_if(summaries.begin(), summaries.end(),
                                       [&](const Summary &s) { return s.label == r.material_label; });
                if (it == summaries.end())
                {
                    summaries.push_back({r.material_label, std::nullopt, r.truth, std::nullopt});
                    it = std::prev(summaries.end());
                }
                if (!it->truth)
                    it->truth = r.truth;
                if (r.est)
                {
                    values[r.material_label].first.push_back(r.est->eps_r);
                    values[r.material_label].second.push_back(r.est->sigma);
                }
            }

            double sum_eps = 0.0, sum_sigma = 0.0;
            std::size_t n_eps = 0, n_sigma = 0;
            for (auto &s : summaries)
            {
                const auto &v = values[s.label];
                if (!v.first.empty())
                    s.est = DielectricProperties{median(v.first), median(v.second)};
                if (s.est && s.truth)
                {
                    s.errors = relative_errors(*s.est, *s.truth);
                    sum_eps += s.errors->delta_eps;
                    ++n_eps;
                    if (s.errors->delta_sigma)
                    {
                        sum_sigma += *s.errors->delta_sigma;
                        ++n_sigma;
                    }
                }
            }
            std::optional<double> avg_eps, avg_sigma;
            if (n_eps > 0)
                avg_eps = sum_eps / static_cast<double>(n_eps);
            if (n_sigma > 0)
                avg_sigma = sum_sigma / static_cast<double>(n_sigma);

            auto num = [](const std::optional<DielectricProperties> &p, bool eps) {
                return p ? fmt::format("{:.2f}", eps ? p->eps_r : p->sigma) : std::string("n/a");
            };
            out << fmt::format("{:<16} {:>9} {:>9} {:>8} {:>9} {:>9} {:>8}\n", "material", "eps_hat", "eps",
                               "d_eps%", "sigma_hat", "sigma", "d_sig%");
            for (const auto &s : summaries)
            {
                const std::string d_eps = s.errors ? pct_cell(s.errors->delta_eps) : std::string("n/a");
                const std::string d_sig = s.errors ? pct_cell(s.errors->delta_sigma) : std::string("n/a");
                out << fmt::format("{:<16} {:>9} {:>9} {:>8} {:>9} {:>9} {:>8}\n", s.label, num(s.est, true),
                                   num(s.truth, true), d_eps, num(s.est, false), num(s.truth, false), d_sig);
            }
            out << fmt::format("{:<16} {:>9} {:>9} {:>8} {:>9} {:>9} {:>8}\n", "average", "", "",
                               avg_eps ? pct_cell(avg_eps) : "n/a", "", "", avg_sigma ? pct_cell(avg_sigma) : "n/a");

            if (!opt.out.empty())
            {
                std::ofstream file(opt.out, std::ios::binary);
                if (!file)
                    throw Error(ErrorCode::io, "cannot write " + opt.out);
                file << "material_label,delta_eps_pct,delta_sigma_pct\r\n";
                auto cell = [](const std::optional<double> &f) {
                    return f.has_value() ? fmt::format("{}", f.value() * 100.0) : std::string();
                };
                for (const auto &s : summaries)
                    file << csv_escape(s.label) << ',' << (s.errors ? cell(s.errors->delta_eps) : "") << ','
                         << (s.errors ? cell(s.errors->delta_sigma) : "") << "\r\n";
                file << "average," << cell(avg_eps) << ',' << cell(avg_sigma) << "\r\n";
                if (!file)
                    throw Error(ErrorCode::io, "write failed for " + opt.out);
            }
            return n_eps == summaries.size() ? kExitOk : kExitFailure;
        }
    } // namespace

    std::string slugify(const std::string &label)
    {
        std::string out;
        for (const unsigned char c : label)
        {
            if (std::isalnum(c))
                out.push_back(static_cast<char>(std::tolower(c)));
            else if (c == '%')
                out += "pct";
            else if (!out.empty() && out.back() != '_')
                out.push_back('_');
        }
        while (!out.empty() && out.back() == '_')
            out.pop_back();
        return out.empty() ? std::string("material") : out;
    }

    Manifest read_manifest(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorCode::io, "manifest not found: " + path.string());
        Manifest m;
        try
        {
            const auto j = ordered_json::parse(in);
            m.d_m = j.value("d_m", 0.0);
            m.seed = j.value("seed", std::uint64_t{0});
            const fs::path base = path.parent_path();
            for (const auto &e : j.at("materials"))
            {
                ManifestEntry entry;
                entry.file = base / e.at("file").get<std::string>();
                entry.label = e.value("label", std::string());
                if (e.contains("eps_r") && e.contains("sigma") && !e["eps_r"].is_null() && !e["sigma"].is_null())
                    entry.truth = DielectricProperties{e["eps_r"].get<double>(), e["sigma"].get<double>()};
                entry.role = parse_role(e.value("role", std::string("unknown")));
                m.materials.push_back(std::move(entry));
            }
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(ErrorCode::parse, "manifest " + path.string() + ": " + e.what());
        }
        return m;
    }

    void write_manifest(const Manifest &manifest, const std::filesystem::path &path)
    {
        ordered_json j;
        j["d_m"] = manifest.d_m;
        j["seed"] = manifest.seed;
        j["materials"] = ordered_json::array();
        for (const auto &m : manifest.materials)
        {
            ordered_json e;
            e["file"] = m.file.string();
            e["label"] = m.label;
            if (m.truth)
            {
                e["eps_r"] = m.truth->eps_r;
                e["sigma"] = m.truth->sigma;
            }
            e["role"] = role_name(m.role);
            j["materials"].push_back(std::move(e));
        }
        std::ofstream out(path);
        if (!out)
            throw Error(ErrorCode::io, "cannot write manifest " + path.string());
        out << j.dump(2) << '\n';
        if (!out)
            throw Error(ErrorCode::io, "write failed for " + path.string());
    }

    int run(const std::vector<std::string> &argv, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"Estimate permittivity and conductivity of liquids from WiFi CSI traces", "csidiel"};
        app.require_subcommand(1);
        app.set_version_flag("--version", "csidiel 0.1.0");
        Options opt;

        auto add_window = [&](CLI::App *sub) {
            sub->add_option("--window", opt.window, "averaging window START:END in seconds")->capture_default_str();
            sub->add_option("--c-db", opt.c_db, "receiver reference constant in dB")->capture_default_str();
        };

        auto *simulate = app.add_subcommand("simulate", "synthesize traces and a truth manifest from a scenario");
        simulate->add_option("--scenario", opt.scenario, "scenario JSON file")->required();
        simulate->add_option("--out", opt.out, "output directory")->required();
        simulate->add_option("--seed", opt.seed, "override the scenario seed");

        auto *calibrate = app.add_subcommand("calibrate", "fit per-subcarrier system coefficients");
        calibrate->add_option("--manifest", opt.manifest, "manifest listing traces and truth values")->required();
        calibrate->add_option("--profile-dir", opt.profile_dir, "directory for profile_scNN.json files")->required();
        add_window(calibrate);

        auto *estimate_cmd = app.add_subcommand("estimate", "estimate permittivity and conductivity");
        estimate_cmd->add_option("--traces", opt.traces, "trace files to estimate");
        estimate_cmd->add_option("--manifest", opt.manifest, "manifest; its unknown-role traces are estimated");
        estimate_cmd->add_option("--profile-dir", opt.profile_dir, "directory holding calibration profiles")
            ->required();
        estimate_cmd->add_option("--out", opt.out, "CSV report (stdout if omitted)");
        auto *sc = estimate_cmd->add_option("--subcarrier", opt.subcarrier, "1-based subcarrier position")
                       ->check(CLI::PositiveNumber)
                       ->capture_default_str();
        estimate_cmd->add_flag("--all-subcarriers", opt.all_subcarriers, "estimate on every subcarrier")->excludes(sc);
        estimate_cmd->add_option("--wrap-hint", opt.wrap_hint, "extra 2*pi phase wraps")->capture_default_str();
        add_window(estimate_cmd);

        auto *evaluate = app.add_subcommand("evaluate", "summarize relative errors against truth");
        evaluate->add_option("--estimates", opt.estimates, "estimate CSV report")->required();
        evaluate->add_option("--manifest", opt.manifest, "manifest supplying truth values by label");
        evaluate->add_option("--out", opt.out, "summary CSV");

        std::vector<const char *> args;
        for (const auto &a : argv)
            args.push_back(a.c_str());
        if (args.empty())
            args.push_back("csidiel");

        try
        {
            app.parse(static_cast<int>(args.size()), args.data());
            if (simulate->parsed())
                return cmd_simulate(opt, out);
            if (calibrate->parsed())
                return cmd_calibrate(opt, out, err);
            if (estimate_cmd->parsed())
                return cmd_estimate(opt, out, err);
            return cmd_evaluate(opt, out);
        }
        catch (const CLI::ParseError &e)
        {
            const int code = app.exit(e, out, err);
            return code == 0 ? kExitOk : kExitUsage;
        }
        catch (const MissingInput &e)
        {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        }
        catch (const Error &e)
        {
            err << "error: " << e.what() << '\n';
            return kExitFailure;
        }
        catch (const std::exception &e)
        {
            err << "error: " << e.what() << '\n';
            return kExitFailure;
        }
    }
} // namespace csidiel::cli
