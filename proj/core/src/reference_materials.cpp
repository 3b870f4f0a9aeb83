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

#include "csidiel/reference_materials.hpp"

#include <array>

namespace csidiel
{
    namespace
    {
        ReferenceMaterial row(const char *label, double eps, double sigma, double eps_hat, double sigma_hat,
                              double d_eps, double d_sigma)
        {
            return {label, {eps, sigma}, DielectricProperties{eps_hat, sigma_hat}, d_eps, d_sigma};
        }

        ReferenceMaterial truth_only(const char *label, double eps, double sigma)
        {
            return {label, {eps, sigma}, std::nullopt, std::nullopt, std::nullopt};
        }

        const std::array<ReferenceMaterial, 12> &table_rows()
        {
            static const std::array<ReferenceMaterial, 12> rows{
                row("ABV 0%", 73.38, 6.41, 77.92, 7.05, 6.2, 9.9),
                row("ABV 10%", 57.12, 8.33, 57.17, 7.44, 0.1, 10.5),
                row("ABV 20%", 50.89, 8.64, 48.53, 7.74, 4.6, 11.1),
                row("ABV 30%", 40.64, 8.57, 39.90, 7.86, 1.8, 8.1),
                row("ABV 40%", 30.66, 7.71, 28.49, 7.57, 7.1, 0.4),
                row("ABV 50%", 24.74, 6.82, 23.46, 7.12, 5.2, 3.3),
                row("ABV 60%", 18.48, 5.54, 17.57, 5.75, 4.9, 3.8),
                row("ABV 70%", 13.72, 4.32, 13.42, 4.78, 2.2, 12.5),
                row("ABV 80%", 9.93, 3.15, 10.47, 3.62, 5.5, 14.9),
                row("ABV 90%", 6.85, 2.02, 7.36, 1.74, 7.5, 15.2),
                row("Baijiu 46%", 27.76, 7.29, 28.52, 7.37, 2.7, 1.0),
                row("Baijiu 56%", 21.33, 6.13, 22.23, 6.25, 4.2, 2.0),
            };
            return rows;
        }

        const std::array<ReferenceMaterial, 20> &liquid_rows()
        {
            static const std::array<ReferenceMaterial, 20> rows = [] {
                std::array<ReferenceMaterial, 20> out{};
                const auto &head = table_rows();
                for (std::size_t i = 0; i < head.size(); ++i)
                    out[i] = head[i];
                const std::array<ReferenceMaterial, 8> tail{
                    truth_only("Grape Soju", 51.17, 8.17),   truth_only("Jinro Soju", 50.01, 8.48),
                    truth_only("Saline 0.9%", 70.87, 7.66),  truth_only("Saline 3.5%", 64.93, 10.60),
                    truth_only("Saline 7%", 58.39, 13.84),   truth_only("Glucose 5%", 70.38, 6.73),
                    truth_only("Glucose 10%", 67.63, 6.75),  truth_only("Glucose 25%", 62.25, 7.10),
                };
                for (std::size_t i = 0; i < tail.size(); ++i)
                    out[head.size() + i] = tail[i];
                return out;
            }();
            return rows;
        }
    } // namespace

    std::span<const ReferenceMaterial> ethanol_water_mixtures() { return std::span(table_rows()).first(10); }
    std::span<const ReferenceMaterial> spirits() { return std::span(table_rows()).subspan(10, 2); }
    std::span<const ReferenceMaterial> mixtures_and_spirits() { return table_rows(); }
    std::span<const ReferenceMaterial> additional_liquids() { return std::span(liquid_rows()).subspan(12); }
    std::span<const ReferenceMaterial> all_liquids() { return liquid_rows(); }

    const ReferenceMaterial &air()
    {
        static const ReferenceMaterial a{"Air", {1.0, 0.0}, DielectricProperties{1.38, 0.39}, 37.9, std::nullopt};
        return a;
    }
} // namespace csidiel
