// SPDX-License-Identifier: Apache-2.0
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pilotadapt {

enum class ErrorKind {
    configuration,
    unsupportable_profile,
    no_data_room,
    registry_infeasible,
    degenerate_channel,
    exact_search_too_large,
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::unsupportable_profile: return "unsupportable_profile";
    case ErrorKind::no_data_room: return "no_data_room";
    case ErrorKind::registry_infeasible: return "registry_infeasible";
    case ErrorKind::degenerate_channel: return "degenerate_channel";
    case ErrorKind::exact_search_too_large: return "exact_search_too_large";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool condition, const std::string& what)
{
    if (!condition)
        fail(ErrorKind::configuration, what);
}

} // namespace pilotadapt
