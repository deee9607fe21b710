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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace pilotadapt {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// OFDM resource-block geometry.
struct Numerology {
    double symbol_duration_s = 71.4e-6;
    double subcarrier_spacing_hz = 15e3;
    int symbols_per_rb = 14;
    int subcarriers_per_rb = 12;

    int res_per_rb() const { return symbols_per_rb * subcarriers_per_rb; }

    /// LTE normal cyclic prefix: 14 symbols x 12 subcarriers at 15 kHz.
    static Numerology lte() { return {}; }

    void validate() const
    {
        require(symbol_duration_s > 0.0, "symbol_duration_s must be positive");
        require(subcarrier_spacing_hz > 0.0, "subcarrier_spacing_hz must be positive");
        require(symbols_per_rb >= 1, "symbols_per_rb must be >= 1");
        require(subcarriers_per_rb >= 1, "subcarriers_per_rb must be >= 1");
    }
};

struct SystemConfig {
    int num_rbs = 4;
    int num_antennas = 64;
    int max_mux = 4;
    double ul_power = 1.0;
    double dl_power = 1.0;
    double noise_power = 1.0;
    Numerology numerology{};

    void validate() const
    {
        require(num_rbs >= 1, "num_rbs must be >= 1");
        require(num_antennas >= 1, "num_antennas must be >= 1");
        require(max_mux >= 1, "max_mux must be >= 1");
        require(ul_power > 0.0 && dl_power > 0.0, "transmit powers must be positive");
        require(noise_power > 0.0, "noise_power must be positive");
        numerology.validate();
    }
};

enum class Direction { uplink, downlink };

inline std::string_view to_string(Direction d) { return d == Direction::uplink ? "uplink" : "downlink"; }

inline Direction parse_direction(std::string_view s)
{
    if (s == "uplink" || s == "ul")
        return Direction::uplink;
    if (s == "downlink" || s == "dl")
        return Direction::downlink;
    fail(ErrorKind::configuration, "unknown direction '" + std::string(s) + "'");
}

struct User {
    int id = 0;
    int group = 0;
    double large_scale_fading = 1.0; // linear power gain
};

/// Distribution of the large-scale fading gain, expressed in dB.
///
/// The list form is cycled over the users in id order when it is shorter
/// than the population.
struct FadingSpec {
    enum class Kind { constant, log_normal, list };

    Kind kind = Kind::constant;
    double mean_db = 0.0;
    double spread_db = 0.0;
    std::vector<double> values_db;

    static FadingSpec constant(double db) { return {Kind::constant, db, 0.0, {}}; }
    static FadingSpec log_normal(double mean, double spread) { return {Kind::log_normal, mean, spread, {}}; }
    static FadingSpec list(std::vector<double> db) { return {Kind::list, 0.0, 0.0, std::move(db)}; }

    void validate() const
    {
        if (kind == Kind::log_normal)
            require(spread_db >= 0.0, "log-normal fading spread must be non-negative");
        if (kind == Kind::list)
            require(!values_db.empty(), "explicit fading list must be nonempty");
    }

    /// Mean of the linear gain.
    double mean_linear() const
    {
        switch (kind) {
        case Kind::constant: return db_to_linear(mean_db);
        case Kind::log_normal: {
            const double s = spread_db * std::log(10.0) / 10.0;
            return db_to_linear(mean_db) * std::exp(0.5 * s * s);
        }
        case Kind::list: {
            double acc = 0.0;
            for (double v : values_db)
                acc += db_to_linear(v);
            return acc / static_cast<double>(values_db.size());
        }
        }
        return 0.0;
    }
};

class UserPopulation {
public:
    UserPopulation() = default;

    UserPopulation(std::vector<User> users, int num_groups) : users_(std::move(users)), groups_(num_groups)
    {
        require(num_groups >= 1, "population needs at least one group");
        for (std::size_t i = 0; i < users_.size(); ++i) {
            const User& u = users_[i];
            require(u.id == static_cast<int>(i), "user ids must be 0..K-1 in order");
            require(u.group >= 0 && u.group < num_groups, "user group index out of range");
            require(u.large_scale_fading > 0.0 && std::isfinite(u.large_scale_fading),
                    "large-scale fading must be positive and finite");
            groups_[u.group].push_back(u.id);
        }
    }

    int num_users() const { return static_cast<int>(users_.size()); }
    int num_groups() const { return static_cast<int>(groups_.size()); }
    const std::vector<User>& users() const { return users_; }
    const User& user(int id) const { return users_.at(id); }
    const std::vector<std::vector<int>>& groups() const { return groups_; }
    const std::vector<int>& group(int g) const { return groups_.at(g); }

    std::vector<double> fadings() const
    {
        std::vector<double> out(users_.size());
        std::transform(users_.begin(), users_.end(), out.begin(), [](const User& u) { return u.large_scale_fading; });
        return out;
    }

private:
    std::vector<User> users_;
    std::vector<std::vector<int>> groups_;
};

/// Builds K = sum(group_sizes) users; users of group g get consecutive ids.
inline UserPopulation build_population(std::span<const int> group_sizes, const FadingSpec& fading, std::uint64_t seed)
{
    require(!group_sizes.empty(), "group_sizes must be nonempty");
    fading.validate();
    int total = 0;
    for (int s : group_sizes) {
        require(s >= 0, "group sizes must be non-negative");
        total += s;
    }
    require(total >= 1, "population is empty");

    Rng rng(derive_seed(seed, {0x66616465ULL}));
    std::vector<User> users;
    users.reserve(total);
    for (int g = 0; g < static_cast<int>(group_sizes.size()); ++g) {
        for (int i = 0; i < group_sizes[g]; ++i) {
            const int id = static_cast<int>(users.size());
            double db = fading.mean_db;
            if (fading.kind == FadingSpec::Kind::log_normal)
                db = fading.mean_db + fading.spread_db * rng.normal();
            else if (fading.kind == FadingSpec::Kind::list)
                db = fading.values_db[id % fading.values_db.size()];
            users.push_back({id, g, db_to_linear(db)});
        }
    }
    return UserPopulation(std::move(users), static_cast<int>(group_sizes.size()));
}

/// gamma_g = |G_g| / K.
inline std::vector<double> group_fractions(const UserPopulation& pop)
{
    require(pop.num_users() >= 1, "group_fractions needs a nonempty population");
    std::vector<double> out;
    out.reserve(pop.num_groups());
    const double k = pop.num_users();
    for (const auto& g : pop.groups())
        out.push_back(static_cast<double>(g.size()) / k);
    return out;
}

/// Splits K users as evenly as possible over G groups; the first K mod G
/// groups get one extra user.
inline std::vector<int> equal_group_sizes(int num_users, int num_groups)
{
    require(num_groups >= 1, "need at least one group");
    std::vector<int> out(num_groups, num_users / num_groups);
    for (int g = 0; g < num_users % num_groups; ++g)
        ++out[g];
    return out;
}

} // namespace pilotadapt
