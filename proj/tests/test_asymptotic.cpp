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

#include <cmath>
#include <numbers>
#include <vector>

#include <pilotadapt/asymptotic.hpp>
#include <pilotadapt/phy.hpp>
#include <pilotadapt/scheduler.hpp>

using namespace pilotadapt;

namespace {

SystemConfig small_config(int antennas, int mux)
{
    SystemConfig cfg;
    cfg.num_antennas = antennas;
    cfg.max_mux = mux;
    return cfg;
}

AsymptoticModel model_for(Direction dir, FadingSpec fading = FadingSpec::constant(0.0), double noise = 1.0)
{
    auto cfg = small_config(100, 10);
    cfg.noise_power = noise;
    return make_asymptotic_model(cfg, {1.0}, fading, dir);
}

double log2p(double x) { return std::log2(1.0 + x); }

} // namespace

TEST(DeterministicSinr, HandArithmetic)
{
    EXPECT_NEAR(deterministic_sinr(model_for(Direction::uplink), 1.0, 1.0, 100, 10), 1.0 / 0.11, 1e-12);
    EXPECT_NEAR(deterministic_sinr(model_for(Direction::downlink), 1.0, 1.0, 100, 10), 1.0 / 0.11, 1e-12);
}

TEST(DeterministicSinr, NoiseFreeLimit)
{
    for (Direction d : {Direction::uplink, Direction::downlink})
        EXPECT_DOUBLE_EQ(deterministic_sinr(model_for(d, FadingSpec::constant(0.0), 0.0), 3.0, 3.0, 96, 6), 16.0);
}

TEST(DeterministicSinr, ModelRatios)
{
    const auto m = make_asymptotic_model(small_config(64, 4), {0.5, 0.5}, FadingSpec::constant(10.0),
                                         Direction::uplink);
    EXPECT_DOUBLE_EQ(m.alpha, 4.0 / 64.0);
    EXPECT_DOUBLE_EQ(m.beta, 4.0 / 168.0);
    EXPECT_THROW(deterministic_sinr(m, 1.0, 1.0, 0, 4), Error);
}

TEST(SinrBar, PointMassIdentity)
{
    const auto m = model_for(Direction::uplink, FadingSpec::constant(7.0));
    const double eta = db_to_linear(7.0);
    EXPECT_NEAR(sinr_bar(m, 100, 10), deterministic_sinr(m, eta, eta, 100, 10), 1e-12);
    // zero spread log-normal is a point mass as well
    const auto z = model_for(Direction::downlink, FadingSpec::log_normal(7.0, 0.0));
    EXPECT_NEAR(sinr_bar(z, 100, 10), deterministic_sinr(z, eta, eta, 100, 10), 1e-12);
}

TEST(SinrBar, TwoPointDistribution)
{
    const auto m = model_for(Direction::uplink, FadingSpec::list({linear_to_db(0.5), linear_to_db(2.0)}));
    // the interference term uses the mean gain 1.25
    const double d = 0.01 + 10 * 1.25 / 100.0;
    const double want = std::exp2((log2p(0.5 / d) + log2p(2.0 / d)) / 2.0) - 1.0;
    EXPECT_NEAR(sinr_bar(m, 100, 10), want, 1e-12);
    // with the interference gain pinned to 1 the denominator is 0.11
    const double pinned = std::exp2((log2p(0.5 / 0.11) + log2p(2.0 / 0.11)) / 2.0) - 1.0;
    EXPECT_NEAR(sinr_bar(m, 100, 10, 1.0), pinned, 1e-12);
}

TEST(SinrBar, JensenDirection)
{
    for (double spread : {1.0, 4.0, 8.0})
        for (Direction dir : {Direction::uplink, Direction::downlink}) {
            const auto m = model_for(dir, FadingSpec::log_normal(10.0, spread));
            const double bar = m.fading.mean_linear();
            const double mean_sinr =
                expect_over_fading(m.fading, [&](double eta) { return deterministic_sinr(m, eta, bar, 100, 10); });
            EXPECT_LT(sinr_bar(m, 100, 10), mean_sinr);
        }
}

TEST(ExpectOverFading, LogNormalQuadratureMatchesDenseIntegration)
{
    // composite Simpson over +-12 sigma of the dB-domain Gaussian
    const FadingSpec f = FadingSpec::log_normal(3.0, 6.0);
    auto g = [](double eta) { return std::log2(1.0 + 5.0 * eta / (1.0 + eta)); };
    const int n = 20000;
    const double lo = -12.0, hi = 12.0, h = (hi - lo) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double z = lo + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * g(std::pow(10.0, (3.0 + 6.0 * z) / 10.0)) * std::exp(-0.5 * z * z);
    }
    acc *= h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
    EXPECT_NEAR(expect_over_fading(f, g), acc, 1e-9);
    // the mean of the linear gain has a closed form
    EXPECT_NEAR(expect_over_fading(f, [](double eta) { return eta; }), f.mean_linear(), 1e-9 * f.mean_linear());
}

TEST(GaussHermite, IntegratesPolynomialsExactly)
{
    const auto r = gauss_hermite(64);
    double m0 = 0, m2 = 0, m4 = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double x = r.nodes[i];
        m0 += r.weights[i];
        m2 += r.weights[i] * x * x;
        m4 += r.weights[i] * x * x * x * x;
    }
    const double sp = std::sqrt(std::numbers::pi);
    EXPECT_NEAR(m0, sp, 1e-12);
    EXPECT_NEAR(m2, sp / 2.0, 1e-12);
    EXPECT_NEAR(m4, 3.0 * sp / 4.0, 1e-11);
}

TEST(AsymptoticRates, ScalarOracle)
{
    const std::vector<double> gammas{0.25, 0.25, 0.25, 0.25};
    const std::vector<int> sizes{4, 8, 16, 32};
    for (Direction dir : {Direction::uplink, Direction::downlink}) {
        const auto m = make_asymptotic_model(small_config(64, 4), gammas, FadingSpec::constant(10.0), dir);
        const auto r = asymptotic_rates(m, sizes, 168, 64, 4);
        const double s = 10.0 / (1.0 / 64 + 4 * 10.0 / 64);
        const double l = std::log2(1.0 + s);
        const double grp = 0.25 * ((164 + 160 + 152 + 136) / 168.0) * l;
        const double conv = (136 / 168.0) * l;
        EXPECT_NEAR(r.grouping, grp, 1e-12);
        EXPECT_NEAR(r.conventional, conv, 1e-12);
        EXPECT_GT(r.grouping, r.conventional);
    }
}

TEST(AsymptoticRates, SingleGroupLimitsEqualAndVanishingSinr)
{
    const auto m = make_asymptotic_model(small_config(64, 4), {1.0}, FadingSpec::constant(10.0), Direction::uplink);
    const std::vector<int> one{24};
    const auto r = asymptotic_rates(m, one, 168, 64, 4);
    EXPECT_DOUBLE_EQ(r.grouping, r.conventional);

    const auto quiet = make_asymptotic_model(small_config(64, 4), {0.5, 0.5}, FadingSpec::constant(-200.0),
                                             Direction::downlink);
    const std::vector<int> two{4, 24};
    const auto q = asymptotic_rates(quiet, two, 168, 64, 4);
    EXPECT_LT(q.grouping, 1e-15);
    EXPECT_LT(q.conventional, 1e-15);
    const std::vector<int> full{4, 168};
    EXPECT_THROW(asymptotic_rates(quiet, full, 168, 64, 4), Error);
}

TEST(AsymptoticRates, GroupingLimitDominatesConventional)
{
    Rng rng(3);
    for (int it = 0; it < 500; ++it) {
        const int g = 1 + static_cast<int>(rng.below(5));
        std::vector<double> gammas(g);
        double tot = 0;
        for (auto& x : gammas)
            tot += (x = rng.uniform() + 1e-3);
        for (auto& x : gammas)
            x /= tot;
        std::vector<int> sizes(g);
        for (auto& s : sizes)
            s = 1 + static_cast<int>(rng.below(100));
        const auto m = make_asymptotic_model(small_config(64, 4), gammas, FadingSpec::log_normal(5.0, 3.0),
                                             Direction::uplink);
        const auto r = asymptotic_rates(m, sizes, 168, 64, 4);
        EXPECT_GE(r.grouping, r.conventional - 1e-12);
    }
}

TEST(GainBound, Examples)
{
    const std::vector<double> quarter(4, 0.25);
    const std::vector<double> rho{1.0 / 24, 1.0 / 12, 1.0 / 6, 1.0 / 3};
    EXPECT_NEAR(gain_bound(quarter, rho), 0.265625, 1e-12);
    const std::vector<double> same(4, 0.2);
    EXPECT_NEAR(gain_bound(quarter, same), 0.0, 1e-15);
    const std::vector<double> single{1.0, 0.0, 0.0, 0.0};
    EXPECT_NEAR(gain_bound(single, rho), 0.0, 1e-15);
    const std::vector<double> bad{0.1, 1.0, 0.0, 0.0};
    EXPECT_THROW(gain_bound(quarter, bad), Error);
}

TEST(GainBound, NonNegativeAndMonotoneInLargestOverhead)
{
    Rng rng(8);
    for (int it = 0; it < 300; ++it) {
        const int g = 2 + static_cast<int>(rng.below(4));
        std::vector<double> gammas(g, 1.0 / g), rho(g);
        for (auto& r : rho)
            r = 0.5 * rng.uniform();
        EXPECT_GE(gain_bound(gammas, rho), -1e-15);
        int top = 0;
        for (int i = 1; i < g; ++i)
            if (rho[i] > rho[top])
                top = i;
        auto more = rho;
        more[top] += 0.1;
        EXPECT_GE(gain_bound(gammas, more), gain_bound(gammas, rho));
    }
}

TEST(Theorem1Check, SummaryArithmetic)
{
    const std::vector<double> grp{2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    const std::vector<double> conv{1, 1, 1, 1, 1, 1, 1, 1, 1, 12};
    const auto s = theorem1_check(grp, conv);
    EXPECT_EQ(s.trials, 10);
    EXPECT_DOUBLE_EQ(s.superiority, 0.9);
    EXPECT_NEAR(s.mean_difference, (1 + 2 + 3 + 4 + 5 + 6 + 7 + 8 + 9 - 1) / 10.0, 1e-12);
    const std::vector<double> few{1, 2, 3};
    EXPECT_THROW(theorem1_check(few, few), Error);
}

TEST(Theorem1Check, SingleGroupDominancePole)
{
    SystemConfig cfg;
    cfg.num_rbs = 2;
    cfg.num_antennas = 8;
    cfg.max_mux = 2;
    const std::vector<ChannelProfile> profiles{builtin_profiles()[3]};
    const std::vector<int> sizes{4};
    std::vector<double> grp, conv;
    for (std::uint64_t t = 0; t < 10; ++t) {
        const auto pop = build_population(sizes, FadingSpec::constant(10.0), t);
        const auto real = generate_realization(pop, profiles, cfg, 100 + t);
        const auto registry = default_registry(profiles, cfg.numerology, 2);
        const auto pattern = conventional_pattern(profiles, cfg.numerology, 2);
        ScheduleContext ctx(real, pop, cfg, Direction::uplink);
        grp.push_back(evaluate_schedule(ctx, grouping_schedule(pop, cfg, registry, profiles, PickerPolicy::random, t)));
        conv.push_back(conventional_schedule_exact(ctx, pattern).rate);
    }
    EXPECT_EQ(theorem1_check(grp, conv).superiority, 0.0);
}

namespace {

double relative_sinr_error(int antennas, int users, Direction dir, std::uint64_t seed)
{
    SystemConfig cfg;
    cfg.num_rbs = 3;
    cfg.num_antennas = antennas;
    cfg.max_mux = users;
    const std::vector<int> sizes{users};
    const FadingSpec fading = FadingSpec::constant(10.0);
    const auto pop = build_population(sizes, fading, seed);
    const std::vector<ChannelProfile> profiles{builtin_profiles()[3]};
    const auto real = generate_realization(pop, profiles, cfg, seed);
    const double measured = mean_re_sinr(real, pop.fadings(), cfg, dir, 500);
    const auto model = make_asymptotic_model(cfg, {1.0}, fading, dir);
    const double eta = db_to_linear(10.0);
    const double de = deterministic_sinr(model, eta, eta, antennas, users);
    return std::abs(measured - de) / de;
}

} // namespace

// Fixed U = 8: the stated convergence property of the deterministic equivalent.
TEST(DeterministicSinr, EmpiricalMeanWithinFifteenPercentAtM128)
{
    for (Direction dir : {Direction::uplink, Direction::downlink}) {
        const double e64 = relative_sinr_error(64, 8, dir, 41);
        const double e128 = relative_sinr_error(128, 8, dir, 41);
        EXPECT_LT(e128, 0.15) << to_string(dir);
        EXPECT_LT(e128, e64) << to_string(dir);
    }
}

// U grows with M at fixed U/M: the regime in which the equivalent is a limit.
TEST(DeterministicSinr, ConvergesAtFixedLoadRatio)
{
    for (Direction dir : {Direction::uplink, Direction::downlink}) {
        const double e32 = relative_sinr_error(32, 4, dir, 5);
        const double e256 = relative_sinr_error(256, 32, dir, 5);
        EXPECT_LT(e256, e32) << to_string(dir);
        EXPECT_LT(e256, 0.10) << to_string(dir);
    }
}
