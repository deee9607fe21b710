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

#include <cstdint>
#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "channel.hpp"
#include "core_model.hpp"
#include "error.hpp"
#include "estimation.hpp"
#include "scheduler.hpp"

namespace pilotadapt {

enum class SchedulerMode { exact, greedy };
enum class OutputFormat { csv, json };

inline std::string_view to_string(SchedulerMode m) { return m == SchedulerMode::exact ? "exact" : "greedy"; }

/// Everything a simulation run needs. Antenna count and multiplexing order
/// in `system` are overwritten by each sweep point.
struct ExperimentConfig {
    SystemConfig system;
    std::vector<ChannelProfile> profiles = builtin_profiles();
    std::optional<std::vector<int>> group_sizes; // unset: N_RB * Umux users split evenly
    FadingSpec fading = FadingSpec::constant(10.0);
    std::vector<int> antennas{64};
    std::vector<int> mux{4};
    int trials = 10;
    SchedulerMode scheduler = SchedulerMode::exact;
    PickerPolicy picker = PickerPolicy::random;
    bool optimize_rb_mapping = false;
    std::vector<Direction> directions{Direction::uplink};
    std::string output;
    OutputFormat format = OutputFormat::csv;
    std::uint64_t seed = 1;
    int workers = 0;
    ExactSearchBudget budget;
    int estimation_trials = 200;
    double estimation_threshold = kDefaultNmseThreshold;

    void validate() const
    {
        require(!antennas.empty() && !mux.empty(), "antenna and multiplexing sweeps must be nonempty");
        require(trials >= 1, "trials must be >= 1");
        require(!profiles.empty(), "at least one channel profile is required");
        require(!directions.empty(), "at least one direction is required");
        require(estimation_trials >= 1, "estimation_trials must be >= 1");
        require(estimation_threshold > 0.0, "estimation_threshold must be positive");
        for (int m : antennas)
            require(m >= 1, "antenna counts must be >= 1");
        for (int u : mux)
            require(u >= 1, "multiplexing orders must be >= 1");
        if (group_sizes)
            require(group_sizes->size() == profiles.size(), "group_sizes needs one entry per profile");
        for (const auto& p : profiles)
            p.validate();
        fading.validate();
        SystemConfig s = system;
        s.num_antennas = antennas.front();
        s.max_mux = mux.front();
        s.validate();
    }

    std::vector<int> sizes_for(int mux_order) const
    {
        if (group_sizes)
            return *group_sizes;
        return equal_group_sizes(system.num_rbs * mux_order, static_cast<int>(profiles.size()));
    }
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Strips a trailing '#' comment that is not inside a quoted string.
inline std::string strip_comment(std::string_view line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"')
            quoted = !quoted;
        else if (line[i] == '#' && !quoted)
            return std::string(line.substr(0, i));
    }
    return std::string(line);
}

template <class T>
T get_as(const nlohmann::json& v, const std::string& key)
{
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::configuration, "config key '" + key + "' has the wrong type");
    }
}

inline std::vector<int> int_list(const nlohmann::json& v, const std::string& key)
{
    if (v.is_number_integer())
        return {v.get<int>()};
    return get_as<std::vector<int>>(v, key);
}

} // namespace detail

/// Parses the flat `key = value` format into a JSON object. Values are JSON
/// literals (numbers, quoted strings, arrays, booleans) or bare words.
inline nlohmann::json parse_key_values(std::string_view text)
{
    nlohmann::json out = nlohmann::json::object();
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = detail::trim(detail::strip_comment(line));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::configuration, "config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (key.empty() || value.empty())
            fail(ErrorKind::configuration, "config line " + std::to_string(lineno) + ": empty key or value");
        if (out.contains(key))
            fail(ErrorKind::configuration, "config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        auto parsed = nlohmann::json::parse(value, nullptr, false);
        out[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
    }
    return out;
}

/// Builds an ExperimentConfig from a flat JSON object; unknown keys are
/// rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    require(j.is_object(), "config must be a key/value object");
    ExperimentConfig c;
    std::vector<std::string> profile_names;
    bool profiles_given = false;
    std::map<std::string, std::pair<double, double>> custom;
    std::map<std::string, std::vector<Tap>> custom_taps;
    std::optional<std::string> fading_kind;
    double fading_mean = 10.0, fading_spread = 0.0;
    std::vector<double> fading_values;

    for (const auto& item : j.items()) {
        using detail::get_as;
        const std::string& key = item.key();
        const nlohmann::json& v = item.value();
        if (key == "num_rbs") c.system.num_rbs = get_as<int>(v, key);
        else if (key == "antennas") c.antennas = detail::int_list(v, key);
        else if (key == "mux") c.mux = detail::int_list(v, key);
        else if (key == "trials") c.trials = get_as<int>(v, key);
        else if (key == "ul_power") c.system.ul_power = get_as<double>(v, key);
        else if (key == "dl_power") c.system.dl_power = get_as<double>(v, key);
        else if (key == "noise_power") c.system.noise_power = get_as<double>(v, key);
        else if (key == "symbol_duration_s") c.system.numerology.symbol_duration_s = get_as<double>(v, key);
        else if (key == "subcarrier_spacing_hz") c.system.numerology.subcarrier_spacing_hz = get_as<double>(v, key);
        else if (key == "symbols_per_rb") c.system.numerology.symbols_per_rb = get_as<int>(v, key);
        else if (key == "subcarriers_per_rb") c.system.numerology.subcarriers_per_rb = get_as<int>(v, key);
        else if (key == "fading") fading_kind = get_as<std::string>(v, key);
        else if (key == "fading_mean_db") fading_mean = get_as<double>(v, key);
        else if (key == "fading_spread_db") fading_spread = get_as<double>(v, key);
        else if (key == "fading_values_db") fading_values = get_as<std::vector<double>>(v, key);
        else if (key == "profiles") {
            profiles_given = true;
            if (v.is_string()) {
                const auto s = v.get<std::string>();
                require(s == "builtin:table1", "profiles must be \"builtin:table1\" or a list of names");
                for (const auto& p : builtin_profiles())
                    profile_names.push_back(p.name);
            } else {
                profile_names = get_as<std::vector<std::string>>(v, key);
            }
        } else if (key.rfind("profile.", 0) == 0) {
            const auto fd = get_as<std::vector<double>>(v, key);
            require(fd.size() == 2, "config key '" + key + "' must be [doppler_hz, delay_spread_s]");
            custom[key.substr(8)] = {fd[0], fd[1]};
        } else if (key.rfind("taps.", 0) == 0) {
            const auto rows = get_as<std::vector<std::vector<double>>>(v, key);
            std::vector<Tap> taps;
            double total = 0.0;
            for (const auto& r : rows) {
                require(r.size() == 2, "config key '" + key + "' rows must be [delay_s, power]");
                taps.push_back({r[0], r[1]});
                total += r[1];
            }
            require(total > 0.0, "config key '" + key + "' has zero total power");
            for (auto& t : taps)
                t.power /= total;
            custom_taps[key.substr(5)] = std::move(taps);
        } else if (key == "group_sizes") {
            if (v.is_string())
                require(v.get<std::string>() == "equal", "group_sizes must be \"equal\" or a list");
            else
                c.group_sizes = get_as<std::vector<int>>(v, key);
        } else if (key == "scheduler") {
            const auto s = get_as<std::string>(v, key);
            require(s == "exact" || s == "greedy", "scheduler must be exact or greedy");
            c.scheduler = s == "exact" ? SchedulerMode::exact : SchedulerMode::greedy;
        } else if (key == "picker") c.picker = parse_picker(get_as<std::string>(v, key));
        else if (key == "rb_mapping") {
            const auto s = get_as<std::string>(v, key);
            require(s == "fixed" || s == "optimized", "rb_mapping must be fixed or optimized");
            c.optimize_rb_mapping = s == "optimized";
        } else if (key == "direction") {
            const auto s = get_as<std::string>(v, key);
            c.directions = s == "both" ? std::vector<Direction>{Direction::uplink, Direction::downlink}
                                       : std::vector<Direction>{parse_direction(s)};
        } else if (key == "output") c.output = get_as<std::string>(v, key);
        else if (key == "format") {
            const auto s = get_as<std::string>(v, key);
            require(s == "csv" || s == "json", "format must be csv or json");
            c.format = s == "csv" ? OutputFormat::csv : OutputFormat::json;
        } else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
        else if (key == "workers") c.workers = get_as<int>(v, key);
        else if (key == "exact_max_users") c.budget.max_users = get_as<int>(v, key);
        else if (key == "exact_max_transitions") c.budget.max_transitions = get_as<double>(v, key);
        else if (key == "estimation_trials") c.estimation_trials = get_as<int>(v, key);
        else if (key == "estimation_threshold") c.estimation_threshold = get_as<double>(v, key);
        else fail(ErrorKind::configuration, "unknown config key '" + key + "'");
    }

    if (profiles_given || !custom.empty()) {
        if (!profiles_given)
            for (const auto& [name, _] : custom)
                profile_names.push_back(name);
        c.profiles.clear();
        const auto builtin = builtin_profiles();
        for (const auto& name : profile_names) {
            ChannelProfile p;
            if (auto it = custom.find(name); it != custom.end()) {
                p = ChannelProfile::bracket(name, it->second.first, it->second.second);
            } else {
                auto b = std::find_if(builtin.begin(), builtin.end(), [&](const auto& x) { return x.name == name; });
                require(b != builtin.end(), "profile '" + name + "' is neither builtin nor defined");
                p = *b;
            }
            if (auto t = custom_taps.find(name); t != custom_taps.end())
                p.taps = t->second;
            c.profiles.push_back(std::move(p));
        }
    }
    for (const auto& [name, _] : custom_taps)
        require(std::any_of(c.profiles.begin(), c.profiles.end(), [&](const auto& p) { return p.name == name; }),
                "taps given for unknown profile '" + name + "'");

    if (fading_kind) {
        if (*fading_kind == "constant") c.fading = FadingSpec::constant(fading_mean);
        else if (*fading_kind == "log_normal" || *fading_kind == "lognormal")
            c.fading = FadingSpec::log_normal(fading_mean, fading_spread);
        else if (*fading_kind == "list") c.fading = FadingSpec::list(fading_values);
        else fail(ErrorKind::configuration, "fading must be constant, log_normal or list");
    } else {
        c.fading = FadingSpec::constant(fading_mean);
    }
    c.validate();
    return c;
}

/// JSON if the first significant character is '{', flat key/value otherwise.
inline ExperimentConfig parse_config(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        auto j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded())
            fail(ErrorKind::configuration, "malformed JSON config");
        return config_from_json(j);
    }
    return config_from_json(parse_key_values(text));
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::configuration, "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace pilotadapt
