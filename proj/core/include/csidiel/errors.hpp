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

#ifndef CSIDIEL_ERRORS_HPP
#define CSIDIEL_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace csidiel
{
    enum class ErrorCode
    {
        parse,               // malformed trace / profile / manifest text
        invalid_argument,    // precondition violated by the caller
        invariant_violation, // a domain type invariant does not hold
        non_finite,          // NaN or Inf where a finite sample is required
        no_rssi,             // no RSSI port reported
        zero_power,          // rescale denominator is zero
        zero_reference,      // phase reference sample is zero
        empty_window,        // no frames inside the averaging window
        out_of_range,        // subcarrier position outside the grid
        non_physical_gain,   // |T| > 1
        zero_transmission,   // |T| = 0
        non_physical_medium, // k_r <= 0 or k_r < k_i after unwrapping
        singular_ratio,      // k_r <= k_i in the analytic inversion
        insufficient_samples,
        rank_deficient,
        geometry_mismatch,
        no_convergence,
        io
    };

    std::string_view to_string(ErrorCode code) noexcept;

    // Single exception type for the library; callers branch on code().
    class Error : public std::runtime_error
    {
    public:
        Error(ErrorCode code, const std::string &message)
            : std::runtime_error(message), code_(code) {}

        ErrorCode code() const noexcept { return code_; }

    private:
        ErrorCode code_;
    };
} // namespace csidiel

#endif
