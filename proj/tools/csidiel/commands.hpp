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

#ifndef CSIDIEL_TOOLS_COMMANDS_HPP
#define CSIDIEL_TOOLS_COMMANDS_HPP

#include "csidiel/trace_model.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace csidiel::cli
{
    // Exit statuses shared by every subcommand.
    inline constexpr int kExitOk = 0;
    inline constexpr int kExitFailure = 1; // processing failed or produced incomplete output
    inline constexpr int kExitUsage = 2;   // bad flags or a missing input file

    enum class MaterialRole
    {
        calibration,
        unknown
    };

    struct ManifestEntry
    {
        std::filesystem::path file; // resolved against the manifest's directory
        std::string label;
        std::optional<DielectricProperties> truth;
        MaterialRole role = MaterialRole::unknown;
    };

    struct Manifest
    {
        double d_m = 0.0;
        std::uint64_t seed = 0;
        std::vector<ManifestEntry> materials;
    };

    Manifest read_manifest(const std::filesystem::path &path);
    void write_manifest(const Manifest &manifest, const std::filesystem::path &path);

    // Lowercase ASCII slug used for generated file names.
    std::string slugify(const std::string &label);

    // Runs the command line; argv[0] is the program name.
    int run(const std::vector<std::string> &argv, std::ostream &out, std::ostream &err);
} // namespace csidiel::cli

#endif
