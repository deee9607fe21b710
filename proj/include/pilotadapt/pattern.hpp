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
#include <span>
#include <string>
#include <vector>

#include "channel.hpp"
#include "core_model.hpp"
#include "error.hpp"

namespace pilotadapt {

struct RePosition {
    int symbol = 0;
    int subcarrier = 0;

    friend auto operator<=>(const RePosition&, const RePosition&) = default;
};

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

/// Pilot RE count of a regular pattern: ceil(Ns/ds) * ceil(Nsc/dsc) * Umux.
inline int pilot_count(PilotSpacing spacing, const Numerology& num, int mux)
{
    return ceil_div(num.symbols_per_rb, spacing.time) * ceil_div(num.subcarriers_per_rb, spacing.freq) * mux;
}

/// Set of pilot REs inside one RB, anchored on a regular (time, frequency)
/// lattice with one cluster of Umux REs per anchor.
class PilotPattern {
public:
    PilotPattern() = default;

    PilotSpacing spacing() const { return spacing_; }
    int mux() const { return mux_; }
    int symbols() const { return symbols_; }
    int subcarriers() const { return subcarriers_; }
    int res_per_rb() const { return symbols_ * subcarriers_; }
    int size() const { return static_cast<int>(positions_.size()); }
    double overhead() const { return static_cast<double>(size()) / res_per_rb(); }

    /// Sorted by (symbol, subcarrier).
    const std::vector<RePosition>& positions() const { return positions_; }

    /// Anchor REs of the lattice, one per cluster.
    const std::vector<RePosition>& anchors() const { return anchors_; }

    /// Indexed by RE e = symbol * N_SC + subcarrier.
    const std::vector<bool>& mask() const { return mask_; }
    bool is_pilot(int re) const { return mask_[re]; }
    bool contains(int symbol, int subcarrier) const { return mask_[symbol * subcarriers_ + subcarrier]; }

    /// Rows are subcarriers (top row = highest), columns are symbols.
    std::string grid_map() const
    {
        std::string out;
        for (int n = subcarriers_ - 1; n >= 0; --n) {
            for (int t = 0; t < symbols_; ++t)
                out += contains(t, n) ? 'P' : '.';
            out += '\n';
        }
        return out;
    }

    friend bool operator==(const PilotPattern& a, const PilotPattern& b)
    {
        return a.spacing_ == b.spacing_ && a.mux_ == b.mux_ && a.positions_ == b.positions_;
    }

private:
    friend PilotPattern build_pattern(PilotSpacing, const Numerology&, int);

    PilotSpacing spacing_{};
    int mux_ = 0;
    int symbols_ = 0;
    int subcarriers_ = 0;
    std::vector<RePosition> anchors_;
    std::vector<RePosition> positions_;
    std::vector<bool> mask_;
};

/// Builds the regular pattern for a spacing.
///
/// Anchors sit at (a*ds, b*dsc). Each anchor claims Umux REs, scanning
/// upward in frequency from the anchor and wrapping to the next symbol at
/// the RB edge; REs already claimed by an earlier cluster are skipped so
/// clusters never overlap.
inline PilotPattern build_pattern(PilotSpacing spacing, const Numerology& num, int mux)
{
    num.validate();
    require(spacing.time >= 1 && spacing.time <= num.symbols_per_rb, "time spacing outside [1, N_s]");
    require(spacing.freq >= 1 && spacing.freq <= num.subcarriers_per_rb, "frequency spacing outside [1, N_SC]");
    require(mux >= 1, "multiplexing order must be >= 1");

    const int n_re = num.res_per_rb();
    const int count = pilot_count(spacing, num, mux);
    if (count >= n_re)
        fail(ErrorKind::no_data_room, "pilot pattern with spacing (" + std::to_string(spacing.time) + "," +
                                          std::to_string(spacing.freq) + ") and Umux=" + std::to_string(mux) +
                                          " needs " + std::to_string(count) + " of " + std::to_string(n_re) +
                                          " REs, no data room");

    PilotPattern p;
    p.spacing_ = spacing;
    p.mux_ = mux;
    p.symbols_ = num.symbols_per_rb;
    p.subcarriers_ = num.subcarriers_per_rb;
    p.mask_.assign(n_re, false);

    const int nsc = num.subcarriers_per_rb;
    for (int t = 0; t < num.symbols_per_rb; t += spacing.time) {
        for (int n = 0; n < nsc; n += spacing.freq) {
            p.anchors_.push_back({t, n});
            int re = t * nsc + n;
            for (int placed = 0; placed < mux; re = (re + 1) % n_re) {
                if (!p.mask_[re]) {
                    p.mask_[re] = true;
                    ++placed;
                }
            }
        }
    }
    for (int re = 0; re < n_re; ++re)
        if (p.mask_[re])
            p.positions_.push_back({re / nsc, re % nsc});
    return p;
}

/// The admissible pattern set. Spacings are pairwise distinct and the set
/// is no larger than the number of channel classes.
class PatternRegistry {
public:
    PatternRegistry(std::vector<PilotPattern> patterns, int num_groups) : patterns_(std::move(patterns))
    {
        require(!patterns_.empty(), "pattern registry must be nonempty");
        require(static_cast<int>(patterns_.size()) <= num_groups,
                "pattern registry larger than the number of channel classes");
        for (std::size_t i = 0; i < patterns_.size(); ++i)
            for (std::size_t j = i + 1; j < patterns_.size(); ++j)
                require(patterns_[i].spacing() != patterns_[j].spacing(),
                        "pattern registry contains two patterns with the same spacing");
    }

    int size() const { return static_cast<int>(patterns_.size()); }
    const std::vector<PilotPattern>& patterns() const { return patterns_; }
    const PilotPattern& operator[](int i) const { return patterns_.at(i); }

private:
    std::vector<PilotPattern> patterns_;
};

/// Fixed pattern sized for the worst channel class.
inline PilotPattern conventional_pattern(std::span<const ChannelProfile> profiles, const Numerology& num, int mux)
{
    require(!profiles.empty(), "conventional_pattern needs at least one profile");
    PilotSpacing worst{};
    int worst_count = -1;
    for (const auto& profile : profiles) {
        const PilotSpacing s = max_spacing(profile, num);
        const int c = pilot_count(s, num, mux);
        const bool better_tie = c == worst_count && (s.time < worst.time || (s.time == worst.time && s.freq < worst.freq));
        if (c > worst_count || better_tie) {
            worst = s;
            worst_count = c;
        }
    }
    return build_pattern(worst, num, mux);
}

/// Sparsest registry pattern whose spacings do not exceed the group's maxima.
inline const PilotPattern& select_pattern_for_group(const PatternRegistry& registry,
                                                    const ChannelProfile& group_profile, const Numerology& num)
{
    const PilotSpacing limit = max_spacing(group_profile, num);
    const PilotPattern* best = nullptr;
    for (const auto& p : registry.patterns()) {
        if (p.spacing().time > limit.time || p.spacing().freq > limit.freq)
            continue;
        if (best == nullptr || p.size() < best->size() ||
            (p.size() == best->size() && p.spacing().time > best->spacing().time))
            best = &p;
    }
    if (best == nullptr)
        fail(ErrorKind::registry_infeasible, "registry infeasible for profile " + group_profile.name);
    return *best;
}

/// One pattern per distinct maximum spacing, in profile order.
inline PatternRegistry default_registry(std::span<const ChannelProfile> profiles, const Numerology& num, int mux)
{
    require(!profiles.empty(), "default_registry needs at least one profile");
    std::vector<PilotPattern> patterns;
    for (const auto& profile : profiles) {
        const PilotSpacing s = max_spacing(profile, num);
        const bool seen = std::any_of(patterns.begin(), patterns.end(),
                                      [&](const PilotPattern& p) { return p.spacing() == s; });
        if (!seen)
            patterns.push_back(build_pattern(s, num, mux));
    }
    return PatternRegistry(std::move(patterns), static_cast<int>(profiles.size()));
}

} // namespace pilotadapt
