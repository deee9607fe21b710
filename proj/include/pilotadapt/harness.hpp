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
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "asymptotic.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "core_model.hpp"
#include "estimation.hpp"
#include "pattern.hpp"
#include "phy.hpp"
#include "scheduler.hpp"
#include "stats.hpp"

namespace pilotadapt {

inline constexpr const char* kResultCsvHeader = "M,U_mux,trial,direction,R_grp,R_conv,rel_gain,bound,scheduler,seed";

struct ResultRow {
    int antennas = 0;
    int mux = 0;
    int trial = 0;
    Direction direction = Direction::uplink;
    double r_grp = 0.0;
    double r_conv = 0.0;
    double rel_gain = 0.0;
    double bound = 0.0;
    SchedulerMode scheduler = SchedulerMode::exact;
    std::uint64_t seed = 0;
};

/// Worker count: PILOTADAPT_WORKERS wins, then the config, then the
/// hardware concurrency.
inline int resolve_workers(int configured)
{
    if (const char* env = std::getenv("PILOTADAPT_WORKERS")) {
        const int n = std::atoi(env);
        require(n >= 1, "PILOTADAPT_WORKERS must be a positive integer");
        return n;
    }
    if (configured > 0)
        return configured;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception thrown by any job is rethrown after all threads join.
template <class Fn>
void parallel_for(int n, int workers, Fn&& fn)
{
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = n;
            }
        }
    };
    const int threads = std::max(1, std::min(workers, n));
    if (threads == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(body);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

inline std::uint64_t trial_seed(std::uint64_t master, int antennas, int mux, int trial)
{
    return derive_seed(master, {static_cast<std::uint64_t>(antennas), static_cast<std::uint64_t>(mux),
                                static_cast<std::uint64_t>(trial)});
}

/// Everything that depends only on the multiplexing order, not on the draw.
struct SweepPoint {
    SystemConfig system;
    UserPopulation population_template;
    PatternRegistry registry;
    PilotPattern conventional;
    std::vector<double> gammas;
    std::vector<double> overheads; // per group, of its selected pattern
    double bound = 0.0;
};

inline SweepPoint make_sweep_point(const ExperimentConfig& cfg, int antennas, int mux)
{
    SystemConfig sys = cfg.system;
    sys.num_antennas = antennas;
    sys.max_mux = mux;
    sys.validate();
    const auto sizes = cfg.sizes_for(mux);
    auto pop = build_population(sizes, FadingSpec::constant(0.0), 0);
    auto registry = default_registry(cfg.profiles, sys.numerology, mux);
    auto conv = conventional_pattern(cfg.profiles, sys.numerology, mux);
    auto gammas = group_fractions(pop);
    std::vector<double> overheads;
    for (const auto& p : cfg.profiles)
        overheads.push_back(select_pattern_for_group(registry, p, sys.numerology).overhead());
    const double bound = gain_bound(gammas, overheads);
    return {sys, std::move(pop), std::move(registry), std::move(conv), std::move(gammas), std::move(overheads), bound};
}

/// Rejects exact-search configurations that are over budget before any
/// work starts.
inline void check_exact_feasible(const ExperimentConfig& cfg)
{
    if (cfg.scheduler != SchedulerMode::exact)
        return;
    for (int u : cfg.mux) {
        int k = 0;
        for (int s : cfg.sizes_for(u))
            k += s;
        const double work = exact_search_work(k, cfg.system.num_rbs, u);
        if (k > cfg.budget.max_users || work > cfg.budget.max_transitions)
            fail(ErrorKind::exact_search_too_large,
                 "exact conventional scheduling is infeasible for Umux=" + std::to_string(u) + " (K=" +
                     std::to_string(k) + "); set scheduler = greedy");
    }
}

/// One paired Monte Carlo trial from its seed: a fresh population and
/// channel, group-based scheduling versus the conventional optimizer on the
/// same realization. Returns one row per configured direction.
inline std::vector<ResultRow> replay_trial(const ExperimentConfig& cfg, const SweepPoint& point, int trial,
                                           std::uint64_t seed)
{
    const auto sizes = cfg.sizes_for(point.system.max_mux);
    const auto pop = build_population(sizes, cfg.fading, derive_seed(seed, {1}));
    const auto real = generate_realization(pop, cfg.profiles, point.system, derive_seed(seed, {2}));
    const auto grouping = grouping_schedule(pop, point.system, point.registry, cfg.profiles, cfg.picker,
                                            derive_seed(seed, {3}));
    validate_assignment(grouping, pop, point.system, cfg.profiles);

    std::vector<ResultRow> rows;
    for (Direction dir : cfg.directions) {
        const ScheduleContext ctx(real, pop, point.system, dir);
        const auto assignment = cfg.optimize_rb_mapping ? optimize_rb_mapping(grouping, ctx) : grouping;
        const double r_grp = evaluate_schedule(ctx, assignment);
        const auto conv = cfg.scheduler == SchedulerMode::exact
            ? conventional_schedule_exact(ctx, point.conventional, cfg.budget)
            : conventional_schedule_greedy(ctx, point.conventional);
        validate_assignment(conv.assignment, pop, point.system);
        ResultRow row;
        row.antennas = point.system.num_antennas;
        row.mux = point.system.max_mux;
        row.trial = trial;
        row.direction = dir;
        row.r_grp = r_grp;
        row.r_conv = conv.rate;
        row.rel_gain = conv.rate > 0.0 ? r_grp / conv.rate - 1.0 : 0.0;
        row.bound = point.bound;
        row.scheduler = cfg.scheduler;
        row.seed = seed;
        rows.push_back(row);
    }
    return rows;
}

inline std::vector<ResultRow> replay_trial(const ExperimentConfig& cfg, int antennas, int mux, int trial,
                                           std::uint64_t seed)
{
    return replay_trial(cfg, make_sweep_point(cfg, antennas, mux), trial, seed);
}

/// Spectral efficiency of both schemes for every (M, Umux, trial), rows
/// ordered by M, Umux, trial, direction regardless of worker count.
inline std::vector<ResultRow> run_fig3(const ExperimentConfig& cfg)
{
    cfg.validate();
    check_exact_feasible(cfg);

    struct Job {
        const SweepPoint* point;
        int trial;
    };
    std::vector<SweepPoint> points;
    for (int m : cfg.antennas)
        for (int u : cfg.mux)
            points.push_back(make_sweep_point(cfg, m, u));
    std::vector<Job> jobs;
    for (const auto& p : points)
        for (int t = 0; t < cfg.trials; ++t)
            jobs.push_back({&p, t});

    std::vector<std::vector<ResultRow>> results(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), resolve_workers(cfg.workers), [&](int i) {
        const Job& job = jobs[i];
        const auto seed = trial_seed(cfg.seed, job.point->system.num_antennas, job.point->system.max_mux, job.trial);
        results[i] = replay_trial(cfg, *job.point, job.trial, seed);
    });

    std::vector<ResultRow> rows;
    for (auto& r : results)
        rows.insert(rows.end(), r.begin(), r.end());
    return rows;
}

struct GainSummary {
    int antennas = 0;
    int mux = 0;
    Direction direction = Direction::uplink;
    int trials = 0;
    double mean_r_grp = 0.0;
    double mean_r_conv = 0.0;
    double mean_gain = 0.0;
    double gain_standard_error = 0.0;
    double bound = 0.0;
};

struct Fig4Result {
    std::vector<ResultRow> rows;
    std::vector<GainSummary> summary;
};

/// Relative-gain sweep: per-trial rows plus per-(M, Umux, direction) mean
/// gain next to the asymptotic bound.
inline Fig4Result run_fig4(const ExperimentConfig& cfg)
{
    Fig4Result out;
    out.rows = run_fig3(cfg);
    for (int m : cfg.antennas)
        for (int u : cfg.mux)
            for (Direction d : cfg.directions) {
                std::vector<double> gains, grp, conv;
                double bound = 0.0;
                for (const auto& r : out.rows)
                    if (r.antennas == m && r.mux == u && r.direction == d) {
                        gains.push_back(r.rel_gain);
                        grp.push_back(r.r_grp);
                        conv.push_back(r.r_conv);
                        bound = r.bound;
                    }
                out.summary.push_back({m, u, d, static_cast<int>(gains.size()), mean(grp), mean(conv), mean(gains),
                                       standard_error(gains), bound});
            }
    return out;
}

inline std::string format_double(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string rows_to_csv(const std::vector<ResultRow>& rows)
{
    std::string out = kResultCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        char seed[32];
        std::snprintf(seed, sizeof seed, "%" PRIu64, r.seed);
        out += std::to_string(r.antennas) + ',' + std::to_string(r.mux) + ',' + std::to_string(r.trial) + ',' +
            std::string(to_string(r.direction)) + ',' + format_double(r.r_grp) + ',' + format_double(r.r_conv) + ',' +
            format_double(r.rel_gain) + ',' + format_double(r.bound) + ',' + std::string(to_string(r.scheduler)) +
            ',' + seed + '\n';
    }
    return out;
}

inline nlohmann::json rows_to_json(const std::vector<ResultRow>& rows)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows)
        out.push_back({{"M", r.antennas},
                       {"U_mux", r.mux},
                       {"trial", r.trial},
                       {"direction", to_string(r.direction)},
                       {"R_grp", r.r_grp},
                       {"R_conv", r.r_conv},
                       {"rel_gain", r.rel_gain},
                       {"bound", r.bound},
                       {"scheduler", to_string(r.scheduler)},
                       {"seed", r.seed}});
    return out;
}

inline std::string summary_to_csv(const std::vector<GainSummary>& summary)
{
    std::string out = "M,U_mux,direction,trials,mean_R_grp,mean_R_conv,mean_gain,gain_se,bound\n";
    for (const auto& s : summary)
        out += std::to_string(s.antennas) + ',' + std::to_string(s.mux) + ',' + std::string(to_string(s.direction)) +
            ',' + std::to_string(s.trials) + ',' + format_double(s.mean_r_grp) + ',' + format_double(s.mean_r_conv) +
            ',' + format_double(s.mean_gain) + ',' + format_double(s.gain_standard_error) + ',' +
            format_double(s.bound) + '\n';
    return out;
}

// ---------- pattern, asymptotic and estimation reports ----------

inline nlohmann::json pattern_to_json(const PilotPattern& p)
{
    nlohmann::json pos = nlohmann::json::array();
    for (const auto& x : p.positions())
        pos.push_back({x.symbol, x.subcarrier});
    return {{"spacing", {p.spacing().time, p.spacing().freq}},
            {"size", p.size()},
            {"overhead", p.overhead()},
            {"mux", p.mux()},
            {"positions", pos}};
}

inline nlohmann::json patterns_report(const ExperimentConfig& cfg)
{
    nlohmann::json out = nlohmann::json::array();
    const Numerology& num = cfg.system.numerology;
    for (int u : cfg.mux) {
        const auto registry = default_registry(cfg.profiles, num, u);
        nlohmann::json entry{{"U_mux", u}, {"registry", nlohmann::json::array()}, {"groups", nlohmann::json::array()}};
        for (const auto& p : registry.patterns())
            entry["registry"].push_back(pattern_to_json(p));
        for (const auto& prof : cfg.profiles) {
            const auto limit = max_spacing(prof, num);
            const auto raw = unclamped_spacing(prof, num);
            const auto& sel = select_pattern_for_group(registry, prof, num);
            entry["groups"].push_back({{"profile", prof.name},
                                       {"max_spacing", {limit.time, limit.freq}},
                                       {"unclamped_spacing", {raw.time, raw.freq}},
                                       {"selected_spacing", {sel.spacing().time, sel.spacing().freq}},
                                       {"selected_size", sel.size()}});
        }
        entry["conventional"] = pattern_to_json(conventional_pattern(cfg.profiles, num, u));
        out.push_back(entry);
    }
    return out;
}

inline std::string patterns_text(const ExperimentConfig& cfg)
{
    std::string out;
    const Numerology& num = cfg.system.numerology;
    char line[256];
    for (int u : cfg.mux) {
        const auto registry = default_registry(cfg.profiles, num, u);
        std::snprintf(line, sizeof line, "U_mux=%d  N_RE=%d  registry size=%d\n", u, num.res_per_rb(), registry.size());
        out += line;
        for (const auto& prof : cfg.profiles) {
            const auto& sel = select_pattern_for_group(registry, prof, num);
            std::snprintf(line, sizeof line, "  %-8s max spacing (%d,%d) -> pattern (%d,%d), %d pilot REs, overhead %.4f\n",
                          prof.name.c_str(), max_spacing(prof, num).time, max_spacing(prof, num).freq,
                          sel.spacing().time, sel.spacing().freq, sel.size(), sel.overhead());
            out += line;
        }
        const auto conv = conventional_pattern(cfg.profiles, num, u);
        std::snprintf(line, sizeof line, "  conventional: spacing (%d,%d), %d pilot REs, overhead %.4f\n",
                      conv.spacing().time, conv.spacing().freq, conv.size(), conv.overhead());
        out += line;
        for (const auto& p : registry.patterns()) {
            std::snprintf(line, sizeof line, "\n  pattern (%d,%d): %d pilot REs, overhead %.4f\n", p.spacing().time,
                          p.spacing().freq, p.size(), p.overhead());
            out += line;
            out += p.grid_map();
        }
        out += '\n';
    }
    return out;
}

/// Closed-form SINR, rate limits and gain bound for each sweep point.
inline nlohmann::json asymptotics_report(const ExperimentConfig& cfg)
{
    nlohmann::json out = nlohmann::json::array();
    for (Direction d : cfg.directions)
        for (int m : cfg.antennas)
            for (int u : cfg.mux) {
                const auto point = make_sweep_point(cfg, m, u);
                const auto model = make_asymptotic_model(point.system, point.gammas, cfg.fading, d);
                std::vector<int> sizes;
                for (const auto& prof : cfg.profiles)
                    sizes.push_back(select_pattern_for_group(point.registry, prof, point.system.numerology).size());
                const double eta_bar = cfg.fading.mean_linear();
                const auto limits = asymptotic_rates(model, sizes, point.system.numerology.res_per_rb(), m, u);
                out.push_back({{"direction", to_string(d)},
                               {"M", m},
                               {"U_mux", u},
                               {"alpha", model.alpha},
                               {"beta", model.beta},
                               {"eta_bar", eta_bar},
                               {"deterministic_sinr", deterministic_sinr(model, eta_bar, eta_bar, m, u)},
                               {"sinr_bar", sinr_bar(model, m, u)},
                               {"R_grp_limit_per_user", limits.grouping},
                               {"R_conv_limit_per_user", limits.conventional},
                               {"gain_bound", point.bound}});
            }
    return out;
}

struct EstimationRow {
    std::string profile;
    EstimationReport report;
    bool at_max_spacing = false;
};

/// NMSE at each profile's maximum spacing and at twice that spacing, on
/// paired channel draws.
inline std::vector<EstimationRow> estimation_sweep(const ExperimentConfig& cfg)
{
    std::vector<EstimationRow> rows;
    const Numerology& num = cfg.system.numerology;
    for (std::size_t g = 0; g < cfg.profiles.size(); ++g) {
        const auto& prof = cfg.profiles[g];
        const auto s = max_spacing(prof, num);
        const auto seed = derive_seed(cfg.seed, {0x657374ULL, g});
        rows.push_back({prof.name, interpolation_nmse(prof, s, num, cfg.estimation_trials, seed), true});
        rows.push_back({prof.name, interpolation_nmse(prof, {2 * s.time, 2 * s.freq}, num, cfg.estimation_trials, seed),
                        false});
    }
    return rows;
}

inline std::string estimation_to_csv(const std::vector<EstimationRow>& rows, double threshold)
{
    std::string out = "profile,spacing_s,spacing_sc,nmse,nmse_db,below_threshold,fallback,trials\n";
    for (const auto& r : rows) {
        std::string fallback = r.report.time_fallback && r.report.freq_fallback ? "both"
            : r.report.time_fallback                                            ? "time"
            : r.report.freq_fallback                                            ? "freq"
                                                                                : "none";
        out += r.profile + ',' + std::to_string(r.report.spacing.time) + ',' + std::to_string(r.report.spacing.freq) +
            ',' + format_double(r.report.nmse) + ',' + format_double(r.report.nmse_db) + ',' +
            (r.report.nmse < threshold ? "yes" : "no") + ',' + fallback + ',' +
            std::to_string(r.report.trials) + '\n';
    }
    return out;
}

} // namespace pilotadapt
