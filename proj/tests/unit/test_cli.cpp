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
#include "csidiel/estimator.hpp"
#include "csidiel/reference_materials.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace csidiel;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace
{
    struct Result
    {
        int status;
        std::string out;
        std::string err;
    };

    Result run(std::vector<std::string> args)
    {
        args.insert(args.begin(), "csidiel");
        std::ostringstream out, err;
        const int status = cli::run(args, out, err);
        return {status, out.str(), err.str()};
    }

    fs::path scratch(const std::string &name)
    {
        const fs::path dir = fs::temp_directory_path() / ("csidiel_cli_test_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        return dir;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    // Scenario listing the ten mixtures (calibration) and optional extra unknowns.
    fs::path write_scenario_file(const fs::path &dir, const std::string &extra_fields, bool with_spirit,
                                 std::size_t n_calibration = 10)
    {
        std::ostringstream s;
        s << "{\"seed\": 11, \"snr_db\": \"inf\", \"n_packets\": 200" << extra_fields << ", \"materials\": [";
        const auto mixtures = ethanol_water_mixtures();
        for (std::size_t i = 0; i < n_calibration; ++i)
            s << (i ? "," : "") << "{\"label\": \"" << mixtures[i].label << "\", \"eps_r\": " << mixtures[i].truth.eps_r
              << ", \"sigma\": " << mixtures[i].truth.sigma << ", \"role\": \"calibration\"}";
        if (with_spirit)
            s << ", {\"label\": \"Baijiu 46%\", \"eps_r\": 27.76, \"sigma\": 7.29, \"role\": \"unknown\"}";
        s << "]}";
        const fs::path p = dir / "scenario.json";
        std::ofstream(p) << s.str();
        return p;
    }

    std::size_t count_files(const fs::path &dir, const std::string &ext)
    {
        std::size_t n = 0;
        for (const auto &e : fs::directory_iterator(dir))
            n += e.path().extension() == ext;
        return n;
    }
} // namespace

TEST_CASE("simulate writes one trace per material and a manifest")
{
    const fs::path dir = scratch("simulate");
    const fs::path scn = write_scenario_file(dir, "", false);
    const Result r = run({"simulate", "--scenario", scn.string(), "--out", (dir / "traces").string()});
    REQUIRE(r.status == 0);
    CHECK(count_files(dir / "traces", ".jsonl") == 10);
    const cli::Manifest m = cli::read_manifest(dir / "traces" / "manifest.json");
    REQUIRE(m.materials.size() == 10);
    CHECK(m.materials[0].label == "ABV 0%");
    CHECK(m.materials[0].truth == DielectricProperties{73.38, 6.41});
    CHECK(m.materials[0].role == cli::MaterialRole::calibration);
    CHECK(fs::exists(m.materials[9].file));
}

TEST_CASE("simulate reports a missing scenario")
{
    const Result r = run({"simulate", "--scenario", "/nonexistent/scn.json", "--out", "/tmp/unused"});
    CHECK(r.status == 2);
    CHECK_THAT(r.err, ContainsSubstring("scenario not found"));
}

TEST_CASE("simulate is reproducible for a repeated seed")
{
    const fs::path dir = scratch("seed");
    const fs::path scn = write_scenario_file(dir, ", \"snr_db\": 30", false, 2);
    REQUIRE(run({"simulate", "--scenario", scn.string(), "--out", (dir / "a").string(), "--seed", "5"}).status == 0);
    REQUIRE(run({"simulate", "--scenario", scn.string(), "--out", (dir / "b").string(), "--seed", "5"}).status == 0);
    REQUIRE(run({"simulate", "--scenario", scn.string(), "--out", (dir / "c").string(), "--seed", "6"}).status == 0);
    for (const auto &e : fs::directory_iterator(dir / "a"))
    {
        if (e.path().extension() != ".jsonl")
            continue;
        CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
        CHECK(slurp(e.path()) != slurp(dir / "c" / e.path().filename()));
    }
}

TEST_CASE("full pipeline on noiseless traces")
{
    const fs::path dir = scratch("pipeline");
    const fs::path scn = write_scenario_file(dir, "", true);
    const std::string traces = (dir / "traces").string();
    const std::string manifest = (dir / "traces" / "manifest.json").string();
    const std::string profiles = (dir / "profiles").string();
    REQUIRE(run({"simulate", "--scenario", scn.string(), "--out", traces}).status == 0);

    const Result cal = run({"calibrate", "--manifest", manifest, "--profile-dir", profiles});
    REQUIRE(cal.status == 0);
    CHECK(count_files(profiles, ".json") == 30);
    const double worst = std::stod(cal.out.substr(cal.out.find("residual_rms = ") + 15));
    CHECK(worst < 1e-9);

    const std::string csv = (dir / "est.csv").string();
    REQUIRE(run({"estimate", "--manifest", manifest, "--profile-dir", profiles, "--out", csv}).status == 0);
    std::ifstream in(csv, std::ios::binary);
    const auto rows = read_estimate_csv(in);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].est.has_value());
    CHECK(rows[0].subcarrier_position == kCenterAdjacentPosition);
    CHECK(std::abs(rows[0].est->eps_r - 27.76) <= 1e-6 * 27.76);
    CHECK(std::abs(rows[0].est->sigma - 7.29) <= 1e-6 * 7.29);

    const std::string all_csv = (dir / "all.csv").string();
    REQUIRE(run({"estimate", "--manifest", manifest, "--profile-dir", profiles, "--all-subcarriers", "--out", all_csv})
                .status == 0);
    std::ifstream all_in(all_csv, std::ios::binary);
    CHECK(read_estimate_csv(all_in).size() == 30);

    const Result eval = run({"evaluate", "--estimates", csv});
    CHECK(eval.status == 0);
    CHECK_THAT(eval.out, ContainsSubstring("Baijiu 46%"));

    const Result direct = run({"estimate", "--traces", (dir / "traces" / "trace_11_baijiu_46pct.jsonl").string(),
                               "--profile-dir", profiles, "--subcarrier", "3"});
    CHECK(direct.status == 0);
    CHECK_THAT(direct.out, ContainsSubstring("Baijiu 46%,3,"));

    CHECK(run({"estimate", "--manifest", manifest, "--profile-dir", (dir / "nope").string()}).status == 2);
    CHECK(run({"estimate", "--manifest", manifest, "--profile-dir", profiles, "--window", "20:10"}).status == 2);
    CHECK(run({"estimate", "--manifest", manifest, "--profile-dir", profiles, "--window", "abc"}).status == 2);
    CHECK(run({"calibrate", "--manifest", manifest, "--profile-dir", profiles, "--window", "100:200"}).status == 1);
}

TEST_CASE("calibrate rejects a single material and mixed geometry")
{
    const fs::path dir = scratch("calibrate_errors");
    const fs::path one = write_scenario_file(dir, "", false, 1);
    REQUIRE(run({"simulate", "--scenario", one.string(), "--out", (dir / "one").string()}).status == 0);
    const Result single = run({"calibrate", "--manifest", (dir / "one" / "manifest.json").string(), "--profile-dir",
                               (dir / "p1").string()});
    CHECK(single.status == 1);
    CHECK_THAT(single.err, ContainsSubstring("insufficient calibration set"));

    const fs::path thick = write_scenario_file(dir, ", \"d_m\": 0.003", false, 1);
    REQUIRE(run({"simulate", "--scenario", thick.string(), "--out", (dir / "thick").string()}).status == 0);
    cli::Manifest mixed = cli::read_manifest(dir / "one" / "manifest.json");
    mixed.materials.push_back(cli::read_manifest(dir / "thick" / "manifest.json").materials.front());
    mixed.materials.back().label = "thick";
    for (auto &m : mixed.materials)
        m.file = fs::relative(m.file, dir);
    cli::write_manifest(mixed, dir / "mixed.json");
    const Result geo = run({"calibrate", "--manifest", (dir / "mixed.json").string(), "--profile-dir",
                            (dir / "p2").string()});
    CHECK(geo.status == 1);
    CHECK_THAT(geo.err, ContainsSubstring("geometry mismatch"));
}

TEST_CASE("evaluate reproduces the reference averages")
{
    const fs::path dir = scratch("evaluate");
    std::vector<EstimateRow> rows;
    for (const auto &m : mixtures_and_spirits())
        rows.push_back({m.label, kCenterAdjacentPosition, m.reported_estimate, m.truth, std::nullopt, std::nullopt});
    {
        std::ofstream out(dir / "table.csv", std::ios::binary);
        write_estimate_csv(rows, out);
    }
    const Result r = run({"evaluate", "--estimates", (dir / "table.csv").string(), "--out", (dir / "sum.csv").string()});
    REQUIRE(r.status == 0);
    const std::string last = r.out.substr(r.out.rfind("average"));
    CHECK_THAT(last, ContainsSubstring("4.3"));
    CHECK_THAT(last, ContainsSubstring("7.7"));
    CHECK_THAT(slurp(dir / "sum.csv"), ContainsSubstring("average,"));
}

TEST_CASE("evaluate prints zeros for exact estimates and undef for zero conductivity")
{
    const fs::path dir = scratch("evaluate_edge");
    std::vector<EstimateRow> rows{
        {"water", kCenterAdjacentPosition, DielectricProperties{73.38, 6.41}, DielectricProperties{73.38, 6.41},
         std::nullopt, std::nullopt},
        {"Air", kCenterAdjacentPosition, DielectricProperties{1.0, 0.0}, DielectricProperties{1.0, 0.0}, std::nullopt,
         std::nullopt}};
    {
        std::ofstream out(dir / "edge.csv", std::ios::binary);
        write_estimate_csv(rows, out);
    }
    const Result r = run({"evaluate", "--estimates", (dir / "edge.csv").string()});
    REQUIRE(r.status == 0);
    CHECK_THAT(r.out, ContainsSubstring("undef"));
    const std::string water = r.out.substr(r.out.find("water"), r.out.find('\n', r.out.find("water")) - r.out.find("water"));
    CHECK(water.find("0.0") != std::string::npos);
    CHECK(water.find("undef") == std::string::npos);
    CHECK(run({"evaluate", "--estimates", (dir / "missing.csv").string()}).status == 2);
}

TEST_CASE("usage errors exit with status 2")
{
    CHECK(run({}).status == 2);
    CHECK(run({"bogus"}).status == 2);
    CHECK(run({"simulate"}).status == 2);
    CHECK(run({"--help"}).status == 0);
}

TEST_CASE("slugs are file-name safe")
{
    CHECK(cli::slugify("Baijiu 46%") == "baijiu_46pct");
    CHECK(cli::slugify("  Saline 0.9% ") == "saline_0_9pct");
    CHECK(cli::slugify("***") == "material");
}
