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
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "channel.hpp"
#include "core_model.hpp"
#include "error.hpp"
#include "pattern.hpp"
#include "phy.hpp"
#include "rng.hpp"

namespace pilotadapt {

struct RbAllocation {
    std::vector<int> users; // ascending ids
    PilotPattern pattern;
    int group = -1;         // owning group in grouping mode, -1 otherwise
};

struct ScheduleAssignment {
    std::vector<RbAllocation> rbs;
};

struct ScheduleResult {
    ScheduleAssignment assignment;
    double rate = 0.0; // mean per-RB spectral efficiency
    std::string method;
};

/// Checks the multiplexing cap and cross-RB disjointness, and in grouping
/// mode that every RB serves only its group with a pattern fine enough for
/// the group's statistics.
inline void validate_assignment(const ScheduleAssignment& a, const UserPopulation& pop, const SystemConfig& cfg,
                                std::span<const ChannelProfile> profiles = {})
{
    require(static_cast<int>(a.rbs.size()) == cfg.num_rbs, "assignment must cover every RB");
    std::vector<bool> used(pop.num_users(), false);
    for (const auto& rb : a.rbs) {
        require(static_cast<int>(rb.users.size()) <= cfg.max_mux, "RB exceeds the multiplexing limit");
        for (int u : rb.users) {
            require(u >= 0 && u < pop.num_users(), "assignment references an unknown user");
            require(!used[u], "user scheduled on more than one RB");
            used[u] = true;
            if (rb.group >= 0)
                require(pop.user(u).group == rb.group, "user scheduled outside its group's RBs");
        }
        if (rb.group >= 0 && !profiles.empty()) {
            const PilotSpacing limit = max_spacing(profiles[rb.group], cfg.numerology);
            require(rb.pattern.spacing().time <= limit.time && rb.pattern.spacing().freq <= limit.freq,
                    "RB pattern too sparse for its group");
        }
    }
}

/// Per-RB Gram data of the whole population for one realization and
/// direction. Shared by the schedulers and the evaluator.
class ScheduleContext {
public:
    ScheduleContext(const ChannelRealization& real, const UserPopulation& pop, const SystemConfig& cfg, Direction dir)
        : cfg_(cfg), dir_(dir), fadings_(pop.fadings())
    {
        require(real.num_users() == pop.num_users(), "realization and population disagree on K");
        require(real.num_rbs() == cfg.num_rbs, "realization and config disagree on N_RB");
        std::vector<int> all(pop.num_users());
        std::iota(all.begin(), all.end(), 0);
        grams_.reserve(cfg.num_rbs);
        for (int r = 0; r < cfg.num_rbs; ++r)
            grams_.emplace_back(real, r, all);
    }

    const SystemConfig& config() const { return cfg_; }
    Direction direction() const { return dir_; }
    int num_users() const { return static_cast<int>(fadings_.size()); }
    int num_rbs() const { return cfg_.num_rbs; }

    double rb_rate(int rb, std::span<const int> users, const PilotPattern& pattern) const
    {
        if (pattern.size() >= pattern.res_per_rb())
            fail(ErrorKind::no_data_room, "pilot pattern covers the whole RB");
        return grams_[rb].spectral_efficiency(dir_, users, pattern, fadings_, cfg_);
    }

private:
    SystemConfig cfg_;
    Direction dir_;
    std::vector<double> fadings_;
    std::vector<RbGram> grams_;
};

/// Mean over RBs of the per-RB spectral efficiency; empty RBs count as 0.
inline double evaluate_schedule(const ScheduleContext& ctx, const ScheduleAssignment& a)
{
    double acc = 0.0;
    for (int r = 0; r < ctx.num_rbs(); ++r)
        if (!a.rbs[r].users.empty())
            acc += ctx.rb_rate(r, a.rbs[r].users, a.rbs[r].pattern);
    return acc / ctx.num_rbs();
}

inline double evaluate_schedule(const ChannelRealization& real, const UserPopulation& pop,
                                const ScheduleAssignment& a, const SystemConfig& cfg, Direction dir)
{
    return evaluate_schedule(ScheduleContext(real, pop, cfg, dir), a);
}

struct ExactSearchBudget {
    int max_users = 20;
    double max_transitions = 2e9;
};

/// Number of (state, subset) transitions the subset DP visits.
inline double exact_search_work(int users, int rbs, int mux)
{
    double per_stage = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= std::min(mux, users); ++j) {
        per_stage += binom * std::ldexp(1.0, users - j);
        binom = binom * (users - j) / (j + 1);
    }
    return per_stage * rbs;
}

namespace detail {

inline std::vector<int> mask_to_users(std::uint64_t mask)
{
    std::vector<int> out;
    while (mask) {
        out.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return out;
}

// Calls fn(sub) for every sub of `mask` with popcount <= limit, including 0.
template <class Fn>
void for_each_small_subset(std::uint64_t mask, int limit, Fn&& fn)
{
    std::uint64_t bits[64];
    int n = 0;
    for (std::uint64_t m = mask; m; m &= m - 1)
        bits[n++] = m & (~m + 1);
    auto rec = [&](auto&& self, int start, int left, std::uint64_t acc) -> void {
        fn(acc);
        if (left == 0)
            return;
        for (int i = start; i < n; ++i)
            self(self, i + 1, left - 1, acc | bits[i]);
    };
    rec(rec, 0, limit, 0);
}

} // namespace detail

/// Exact maximizer of the mean per-RB rate over all assignments of users to
/// RBs with at most Umux users per RB, every RB using the same pattern.
///
/// Dynamic program over RBs with the set of already-scheduled users as
/// state. Instances over the budget are rejected with
/// ErrorKind::exact_search_too_large; nothing is approximated.
inline ScheduleResult conventional_schedule_exact(const ScheduleContext& ctx, const PilotPattern& pattern,
                                                  ExactSearchBudget budget = {})
{
    const int k = ctx.num_users();
    const int nrb = ctx.num_rbs();
    const int mux = ctx.config().max_mux;
    const double work = exact_search_work(k, nrb, mux);
    if (k > budget.max_users || work > budget.max_transitions)
        fail(ErrorKind::exact_search_too_large,
             "exact conventional search with K=" + std::to_string(k) + ", N_RB=" + std::to_string(nrb) +
                 ", Umux=" + std::to_string(mux) + " exceeds the subset-state budget; use the greedy scheduler");

    const std::size_t states = std::size_t{1} << k;
    const double neg_inf = -std::numeric_limits<double>::infinity();

    // rate[r][T] for |T| <= Umux
    std::vector<std::vector<double>> rate(nrb, std::vector<double>(states, neg_inf));
    for (int r = 0; r < nrb; ++r)
        detail::for_each_small_subset(states - 1, mux, [&](std::uint64_t t) {
            rate[r][t] = t == 0 ? 0.0 : ctx.rb_rate(r, detail::mask_to_users(t), pattern);
        });

    std::vector<double> prev(states, neg_inf), cur(states, neg_inf);
    std::vector<std::vector<std::uint64_t>> choice(nrb, std::vector<std::uint64_t>(states, 0));
    prev[0] = 0.0;
    for (int r = 0; r < nrb; ++r) {
        const int reach = std::min(k, (r + 1) * mux);
        std::fill(cur.begin(), cur.end(), neg_inf);
        for (std::uint64_t s = 0; s < states; ++s) {
            if (std::popcount(s) > reach)
                continue;
            double best = neg_inf;
            std::uint64_t arg = 0;
            detail::for_each_small_subset(s, mux, [&](std::uint64_t t) {
                const double base = prev[s ^ t];
                if (base == neg_inf)
                    return;
                const double v = base + rate[r][t];
                if (v > best) {
                    best = v;
                    arg = t;
                }
            });
            cur[s] = best;
            choice[r][s] = arg;
        }
        std::swap(prev, cur);
    }

    std::uint64_t end = 0;
    for (std::uint64_t s = 0; s < states; ++s)
        if (prev[s] > prev[end])
            end = s;

    ScheduleResult out;
    out.method = "exact";
    out.assignment.rbs.resize(nrb);
    std::uint64_t s = end;
    for (int r = nrb - 1; r >= 0; --r) {
        const std::uint64_t t = choice[r][s];
        out.assignment.rbs[r] = {detail::mask_to_users(t), pattern, -1};
        s ^= t;
    }
    out.rate = evaluate_schedule(ctx, out.assignment);
    return out;
}

/// RB by RB, keep adding the unscheduled user with the largest positive
/// marginal rate until the RB is full or nobody helps.
inline ScheduleResult conventional_schedule_greedy(const ScheduleContext& ctx, const PilotPattern& pattern)
{
    const int k = ctx.num_users();
    const int mux = ctx.config().max_mux;
    std::vector<bool> taken(k, false);
    ScheduleResult out;
    out.method = "greedy";
    out.assignment.rbs.resize(ctx.num_rbs());
    for (int r = 0; r < ctx.num_rbs(); ++r) {
        std::vector<int> current;
        double current_rate = 0.0;
        while (static_cast<int>(current.size()) < mux) {
            int best_user = -1;
            double best_rate = current_rate;
            for (int u = 0; u < k; ++u) {
                if (taken[u])
                    continue;
                auto trial = current;
                trial.insert(std::upper_bound(trial.begin(), trial.end(), u), u);
                const double v = ctx.rb_rate(r, trial, pattern);
                if (v > best_rate) {
                    best_rate = v;
                    best_user = u;
                }
            }
            if (best_user < 0)
                break;
            taken[best_user] = true;
            current.insert(std::upper_bound(current.begin(), current.end(), best_user), best_user);
            current_rate = best_rate;
        }
        out.assignment.rbs[r] = {std::move(current), pattern, -1};
    }
    out.rate = evaluate_schedule(ctx, out.assignment);
    return out;
}

inline ScheduleResult conventional_schedule_exact(const ChannelRealization& real, const UserPopulation& pop,
                                                  const SystemConfig& cfg, const PilotPattern& pattern, Direction dir,
                                                  ExactSearchBudget budget = {})
{
    return conventional_schedule_exact(ScheduleContext(real, pop, cfg, dir), pattern, budget);
}

inline ScheduleResult conventional_schedule_greedy(const ChannelRealization& real, const UserPopulation& pop,
                                                   const SystemConfig& cfg, const PilotPattern& pattern,
                                                   Direction dir)
{
    return conventional_schedule_greedy(ScheduleContext(real, pop, cfg, dir), pattern);
}

/// Fixed RB pre-assignment: group g owns RBs
/// ceil(N_RB*|G_1..G_{g-1}|/K) .. ceil(N_RB*|G_1..G_g|/K) - 1 (0-based).
inline std::vector<int> rb_ownership(const UserPopulation& pop, int num_rbs)
{
    std::vector<int> owner(num_rbs, -1);
    const int k = pop.num_users();
    int before = 0;
    for (int g = 0; g < pop.num_groups(); ++g) {
        const int upto = before + static_cast<int>(pop.group(g).size());
        const int lo = ceil_div(num_rbs * before, k);
        const int hi = ceil_div(num_rbs * upto, k);
        for (int r = lo; r < hi; ++r)
            owner[r] = g;
        before = upto;
    }
    return owner;
}

enum class PickerPolicy { random, round_robin };

inline std::string_view to_string(PickerPolicy p) { return p == PickerPolicy::random ? "random" : "round_robin"; }

inline PickerPolicy parse_picker(std::string_view s)
{
    if (s == "random")
        return PickerPolicy::random;
    if (s == "round_robin" || s == "round-robin")
        return PickerPolicy::round_robin;
    fail(ErrorKind::configuration, "unknown picker policy '" + std::string(s) + "'");
}

/// Grouping-based pattern adaptation and scheduling with fixed RB
/// pre-assignment.
///
/// Each group's owned RBs carry the sparsest registry pattern feasible for
/// the group. Members are ordered (uniformly shuffled, or in id order for
/// round-robin) and dealt to the owned RBs without reuse, as evenly as
/// possible and at most Umux per RB.
inline ScheduleAssignment grouping_schedule(const UserPopulation& pop, const SystemConfig& cfg,
                                            const PatternRegistry& registry,
                                            std::span<const ChannelProfile> profiles, PickerPolicy picker,
                                            std::uint64_t seed)
{
    cfg.validate();
    require(static_cast<int>(profiles.size()) >= pop.num_groups(), "every group needs a channel profile");
    const auto owner = rb_ownership(pop, cfg.num_rbs);
    Rng rng(derive_seed(seed, {0x7069636bULL}));

    ScheduleAssignment out;
    out.rbs.resize(cfg.num_rbs);
    for (int g = 0; g < pop.num_groups(); ++g) {
        std::vector<int> owned;
        for (int r = 0; r < cfg.num_rbs; ++r)
            if (owner[r] == g)
                owned.push_back(r);
        if (owned.empty())
            continue;
        std::vector<int> members = pop.group(g);
        if (members.empty())
            fail(ErrorKind::configuration, "group " + std::to_string(g) + " owns RBs but has no users");

        if (picker == PickerPolicy::random)
            for (std::size_t i = members.size() - 1; i > 0; --i)
                std::swap(members[i], members[rng.below(i + 1)]);

        const PilotPattern& pattern = select_pattern_for_group(registry, profiles[g], cfg.numerology);
        const int slots = static_cast<int>(owned.size());
        const int take = std::min(static_cast<int>(members.size()), slots * cfg.max_mux);
        int next = 0;
        for (int i = 0; i < slots; ++i) {
            const int count = take / slots + (i < take % slots ? 1 : 0);
            std::vector<int> users(members.begin() + next, members.begin() + next + count);
            std::sort(users.begin(), users.end());
            next += count;
            out.rbs[owned[i]] = {std::move(users), pattern, g};
        }
    }
    return out;
}

/// Optional refinement of the fixed pre-assignment: permutes the per-RB
/// allocations over the RBs and keeps the best-rated ordering. Off by
/// default in the harness.
inline ScheduleAssignment optimize_rb_mapping(const ScheduleAssignment& a, const ScheduleContext& ctx)
{
    const int nrb = ctx.num_rbs();
    require(nrb <= 8, "RB mapping search is limited to 8 RBs");
    std::vector<int> perm(nrb);
    std::iota(perm.begin(), perm.end(), 0);
    ScheduleAssignment best = a;
    double best_rate = evaluate_schedule(ctx, a);
    while (std::next_permutation(perm.begin(), perm.end())) {
        ScheduleAssignment cand;
        cand.rbs.resize(nrb);
        for (int i = 0; i < nrb; ++i)
            cand.rbs[perm[i]] = a.rbs[i];
        const double v = evaluate_schedule(ctx, cand);
        if (v > best_rate) {
            best_rate = v;
            best = std::move(cand);
        }
    }
    return best;
}

} // namespace pilotadapt
