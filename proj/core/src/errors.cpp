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

#include "csidiel/errors.hpp"

namespace csidiel
{
    std::string_view to_string(ErrorCode code) noexcept
    {
        switch (code)
        {
        case ErrorCode::parse: return "parse";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::invariant_violation: return "invariant_violation";
        case ErrorCode::non_finite: return "non_finite";
        case ErrorCode::no_rssi: return "no_rssi";
        case ErrorCode::zero_power: return "zero_power";
        case ErrorCode::zero_reference: return "zero_reference";
        case ErrorCode::empty_window: return "empty_window";
        case ErrorCode::out_of_range: return "out_of_range";
        case ErrorCode::non_physical_gain: return "non_physical_gain";
        case ErrorCode::zero_transmission: return "zero_transmission";
        case ErrorCode::non_physical_medium: return "non_physical_medium";
        case ErrorCode::singular_ratio: return "singular_ratio";
        case ErrorCode::insufficient_samples: return "insufficient_samples";
        case ErrorCode::rank_deficient: return "rank_deficient";
        case ErrorCode::geometry_mismatch: return "geometry_mismatch";
        case ErrorCode::no_convergence: return "no_convergence";
        case ErrorCode::io: return "io";
        }
        return "unknown";
    }
} // namespace csidiel
