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

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <pilotadapt/config.hpp>
#include <pilotadapt/harness.hpp>

using namespace pilotadapt;

namespace {

const char* kSmall = R"(
# two classes, tiny sweep
num_rbs = 2
antennas = [8, 16]
mux = 2
trials = 3
profiles = ["EVA70", "ETU300"]
fading = log_normal
fading_mean_db = 10
fading_spread_db = 3
direction = both
scheduler = exact
seed = 5
)";

std::size_t count_lines(const std::string& s)
{
    std::size_t n = 0;
    for (char c : s)
        n += c == '\n';
    return n;
}

} // namespace

TEST(Config, FlatKeyValues)
{
    const auto c = parse_config(kSmall);
    EXPECT_EQ(c.system.num_rbs, 2);
    EXPECT_EQ(c.antennas, (std::vector<int>{8, 16}));
    EXPECT_EQ(c.mux, (std::vector<int>{2}));
    ASSERT_EQ(c.profiles.size(), 2u);
    EXPECT_EQ(c.profiles[1].name, "ETU300");
    EXPECT_EQ(c.fading.kind, FadingSpec::Kind::log_normal);
    EXPECT_EQ(c.directions.size(), 2u);
    EXPECT_EQ(c.seed, 5u);
    EXPECT_EQ(c.sizes_for(2), (std::vector<int>{2, 2}));
    EXPECT_DOUBLE_EQ(c.estimation_threshold, kDefaultNmseThreshold);
}

TEST(Config, JsonMatchesFlat)
{
    const auto a = parse_config(R"({"num_rbs": 2, "antennas": [8, 16], "mux": 2, "profiles": ["EVA70", "ETU300"],
                                    "seed": 5, "direction": "downlink", "scheduler": "greedy"})");
    EXPECT_EQ(a.system.num_rbs, 2);
    EXPECT_EQ(a.scheduler, SchedulerMode::greedy);
    EXPECT_EQ(a.directions, (std::vector<Direction>{Direction::downlink}));
}

TEST(Config, CustomProfilesAndTaps)
{
    const auto c = parse_config(R"(
profiles = ["slow", "ETU70"]
profile.slow = [10, 1e-6]
taps.slow = [[0, 0.7], [5e-7, 0.2], [1e-6, 0.1]]
group_sizes = [3, 5]
)");
    ASSERT_EQ(c.profiles.size(), 2u);
    EXPECT_EQ(c.profiles[0].taps.size(), 3u);
    EXPECT_DOUBLE_EQ(c.profiles[0].max_doppler_hz, 10.0);
    EXPECT_EQ(c.sizes_for(7), (std::vector<int>{3, 5}));
}

TEST(Config, Errors)
{
    auto kind_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::degenerate_channel; // sentinel: nothing thrown
    };
    EXPECT_EQ(kind_of("bogus = 3"), ErrorKind::configuration);
    EXPECT_EQ(kind_of("trials = 0"), ErrorKind::configuration);
    EXPECT_EQ(kind_of("antennas = []"), ErrorKind::configuration);
    EXPECT_EQ(kind_of("trials = \"ten\""), ErrorKind::configuration);
    EXPECT_EQ(kind_of("no equals sign"), ErrorKind::configuration);
    EXPECT_EQ(kind_of("seed = 1\nseed = 2"), ErrorKind::configuration);
    EXPECT_EQ(kind_of("{ \"num_rbs\": "), ErrorKind::configuration);
    EXPECT_EQ(kind_of("profiles = [\"nope\"]"), ErrorKind::configuration);
    EXPECT_EQ(kind_of("scheduler = fastest"), ErrorKind::configuration);
    EXPECT_EQ(kind_of("group_sizes = [1, 2]"), ErrorKind::configuration); // four builtin profiles
    EXPECT_THROW(load_config("/nonexistent/config.toml"), Error);
}

TEST(Harness, CsvHeaderAndRowCount)
{
    auto c = parse_config(kSmall);
    c.antennas = {8};
    c.directions = {Direction::uplink};
    const auto rows = run_fig3(c);
    ASSERT_EQ(rows.size(), 3u);
    const auto csv = rows_to_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "M,U_mux,trial,direction,R_grp,R_conv,rel_gain,bound,scheduler,seed");
    EXPECT_EQ(count_lines(csv), 4u);
    for (int t = 0; t < 3; ++t) {
        EXPECT_EQ(rows[t].trial, t);
        EXPECT_GE(rows[t].r_grp, 0.0);
        EXPECT_GE(rows[t].r_conv, 0.0);
        EXPECT_GE(rows[t].bound, 0.0);
    }
}

TEST(Harness, DeterministicAcrossRunsAndWorkerCounts)
{
    auto c = parse_config(kSmall);
    c.workers = 1;
    const auto one = rows_to_csv(run_fig3(c));
    const auto again = rows_to_csv(run_fig3(c));
    c.workers = 4;
    const auto four = rows_to_csv(run_fig3(c));
    EXPECT_EQ(one, again);
    EXPECT_EQ(one, four);
    EXPECT_EQ(count_lines(one), 1u + 2 * 3 * 2);
    c.seed = 6;
    EXPECT_NE(rows_to_csv(run_fig3(c)), one);
}

TEST(Harness, RowsReplayFromTheirSeed)
{
    const auto c = parse_config(kSmall);
    const auto rows = run_fig3(c);
    for (const auto& r : rows) {
        const auto replayed = replay_trial(c, r.antennas, r.mux, r.trial, r.seed);
        bool found = false;
        for (const auto& x : replayed)
            if (x.direction == r.direction) {
                EXPECT_EQ(x.r_grp, r.r_grp);
                EXPECT_EQ(x.r_conv, r.r_conv);
                found = true;
            }
        EXPECT_TRUE(found);
        EXPECT_EQ(r.seed, trial_seed(c.seed, r.antennas, r.mux, r.trial));
    }
}

TEST(Harness, ExactSchedulerOverBudgetAbortsUpFront)
{
    auto c = parse_config(kSmall);
    c.budget.max_users = 3;
    try {
        run_fig3(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::exact_search_too_large);
        EXPECT_NE(std::string(e.what()).find("greedy"), std::string::npos);
    }
    c.scheduler = SchedulerMode::greedy;
    EXPECT_NO_THROW(run_fig3(c));
}

TEST(Harness, SingleGroupHasNoGain)
{
    auto c = parse_config(R"(
num_rbs = 2
antennas = 16
mux = 2
trials = 4
profiles = ["ETU300"]
direction = both
seed = 3
)");
    const auto res = run_fig4(c);
    ASSERT_EQ(res.summary.size(), 2u);
    for (const auto& s : res.summary) {
        EXPECT_LE(s.mean_gain, 1e-12);
        EXPECT_EQ(s.bound, 0.0);
    }
    for (const auto& r : res.rows)
        EXPECT_LE(r.rel_gain, 1e-12);
}

TEST(Harness, Fig4SummaryMatchesRows)
{
    auto c = parse_config(kSmall);
    c.scheduler = SchedulerMode::greedy;
    const auto res = run_fig4(c);
    ASSERT_EQ(res.summary.size(), 4u);
    for (const auto& s : res.summary) {
        double acc = 0.0;
        int n = 0;
        for (const auto& r : res.rows)
            if (r.antennas == s.antennas && r.direction == s.direction) {
                acc += r.rel_gain;
                ++n;
            }
        EXPECT_EQ(s.trials, n);
        EXPECT_NEAR(s.mean_gain, acc / n, 1e-12);
    }
    EXPECT_EQ(summary_to_csv(res.summary).substr(0, 8), "M,U_mux,");
}

TEST(Harness, JsonRowsCarryTheSameFields)
{
    auto c = parse_config(kSmall);
    c.trials = 1;
    const auto rows = run_fig3(c);
    const auto j = rows_to_json(rows);
    ASSERT_EQ(j.size(), rows.size());
    EXPECT_EQ(j[0]["M"], rows[0].antennas);
    EXPECT_EQ(j[0]["scheduler"], "exact");
    EXPECT_EQ(j[0]["seed"].get<std::uint64_t>(), rows[0].seed);
}

TEST(Harness, WorkerResolution)
{
    ::unsetenv("PILOTADAPT_WORKERS");
    EXPECT_EQ(resolve_workers(3), 3);
    EXPECT_GE(resolve_workers(0), 1);
    ::setenv("PILOTADAPT_WORKERS", "2", 1);
    EXPECT_EQ(resolve_workers(3), 2);
    ::setenv("PILOTADAPT_WORKERS", "zero", 1);
    EXPECT_THROW(resolve_workers(3), Error);
    ::unsetenv("PILOTADAPT_WORKERS");
}

TEST(Reports, PatternsForTableOne)
{
    ExperimentConfig c;
    const auto j = patterns_report(c);
    const auto text = patterns_text(c);
    for (const char* line : {"pattern (14,12): 4 pilot REs", "pattern (14,6): 8 pilot REs",
                             "pattern (14,3): 16 pilot REs", "pattern (11,3): 32 pilot REs"})
        EXPECT_NE(text.find(line), std::string::npos) << line;
    EXPECT_FALSE(j.empty());
}

TEST(Reports, AsymptoticsHandArithmetic)
{
    ExperimentConfig c; // constant 10 dB, M = 64, Umux = 4
    const auto j = asymptotics_report(c);
    ASSERT_FALSE(j.empty());
    const double want = 10.0 / (1.0 / 64 + 4 * 10.0 / 64);
    EXPECT_NEAR(j[0]["deterministic_sinr"].get<double>(), want, 1e-9);
    EXPECT_NEAR(j[0]["sinr_bar"].get<double>(), want, 1e-9);
}

TEST(Reports, EstimationSweepFlagsThreshold)
{
    auto c = parse_config("profiles = [\"ETU300\"]\nestimation_trials = 50");
    const auto rows = estimation_sweep(c);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].report.spacing, (PilotSpacing{11, 3}));
    EXPECT_EQ(rows[1].report.spacing, (PilotSpacing{22, 6}));
    const auto csv = estimation_to_csv(rows, c.estimation_threshold);
    std::istringstream in(csv);
    std::string header, first, second;
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, second);
    EXPECT_NE(first.find(",yes,"), std::string::npos);
    EXPECT_NE(second.find(",no,"), std::string::npos);
}
