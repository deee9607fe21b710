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

#include <numeric>
#include <set>
#include <vector>

#include <pilotadapt/core_model.hpp>

using namespace pilotadapt;

TEST(CoreModel, EqualGroupsWithConstantTenDbFading)
{
    const std::vector<int> sizes{4, 4, 4, 4};
    const auto pop = build_population(sizes, FadingSpec::constant(10.0), 1);
    ASSERT_EQ(pop.num_users(), 16);
    ASSERT_EQ(pop.num_groups(), 4);
    for (const auto& g : pop.groups())
        EXPECT_EQ(g.size(), 4u);
    // eta * P / sigma^2 = 10 dB with unit power and noise
    SystemConfig cfg;
    for (const auto& u : pop.users())
        EXPECT_DOUBLE_EQ(u.large_scale_fading * cfg.ul_power / cfg.noise_power, 10.0);
}

TEST(CoreModel, SingleUserSingleGroup)
{
    const std::vector<int> sizes{1};
    const auto pop = build_population(sizes, FadingSpec::constant(0.0), 3);
    EXPECT_EQ(pop.num_users(), 1);
    const auto gamma = group_fractions(pop);
    ASSERT_EQ(gamma.size(), 1u);
    EXPECT_DOUBLE_EQ(gamma[0], 1.0);
}

TEST(CoreModel, UnequalFractions)
{
    const std::vector<int> sizes{6, 3, 3};
    const auto pop = build_population(sizes, FadingSpec::log_normal(0.0, 8.0), 5);
    const auto gamma = group_fractions(pop);
    EXPECT_DOUBLE_EQ(gamma[0], 0.5);
    EXPECT_DOUBLE_EQ(gamma[1], 0.25);
    EXPECT_DOUBLE_EQ(gamma[2], 0.25);
}

TEST(CoreModel, EqualFourWaySplitFractions)
{
    const std::vector<int> sizes{7, 7, 7, 7};
    for (double g : group_fractions(build_population(sizes, FadingSpec::constant(0.0), 0)))
        EXPECT_DOUBLE_EQ(g, 0.25);
}

TEST(CoreModel, EmptyPopulationIsConfigurationError)
{
    const std::vector<int> zeros{0, 0};
    const std::vector<int> none;
    try {
        build_population(zeros, FadingSpec::constant(0.0), 0);
        FAIL() << "expected configuration error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::configuration);
    }
    EXPECT_THROW(build_population(none, FadingSpec::constant(0.0), 0), Error);
    const std::vector<int> negative{2, -1};
    EXPECT_THROW(build_population(negative, FadingSpec::constant(0.0), 0), Error);
}

TEST(CoreModel, EmptyGroupAllowed)
{
    const std::vector<int> sizes{3, 0, 2};
    const auto pop = build_population(sizes, FadingSpec::constant(0.0), 0);
    EXPECT_TRUE(pop.group(1).empty());
    EXPECT_DOUBLE_EQ(group_fractions(pop)[1], 0.0);
}

TEST(CoreModel, PartitionAndFractionSumProperty)
{
    Rng rng(99);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<int> sizes(1 + rng.below(6));
        for (auto& s : sizes)
            s = static_cast<int>(rng.below(9));
        sizes[0] += 1;
        const auto pop = build_population(sizes, FadingSpec::log_normal(-3.0, 6.0), rng.next());
        std::set<int> seen;
        std::size_t total = 0;
        for (const auto& g : pop.groups()) {
            total += g.size();
            seen.insert(g.begin(), g.end());
        }
        EXPECT_EQ(total, static_cast<std::size_t>(pop.num_users()));
        EXPECT_EQ(seen.size(), static_cast<std::size_t>(pop.num_users()));
        const auto gamma = group_fractions(pop);
        EXPECT_NEAR(std::accumulate(gamma.begin(), gamma.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(CoreModel, SameSeedSameFading)
{
    const std::vector<int> sizes{5, 5};
    const auto a = build_population(sizes, FadingSpec::log_normal(0.0, 8.0), 42);
    const auto b = build_population(sizes, FadingSpec::log_normal(0.0, 8.0), 42);
    const auto c = build_population(sizes, FadingSpec::log_normal(0.0, 8.0), 43);
    EXPECT_EQ(a.fadings(), b.fadings());
    EXPECT_NE(a.fadings(), c.fadings());
}

TEST(CoreModel, ExplicitFadingListCycles)
{
    const std::vector<int> sizes{3};
    const auto pop = build_population(sizes, FadingSpec::list({0.0, 10.0}), 0);
    EXPECT_DOUBLE_EQ(pop.user(0).large_scale_fading, 1.0);
    EXPECT_DOUBLE_EQ(pop.user(1).large_scale_fading, 10.0);
    EXPECT_DOUBLE_EQ(pop.user(2).large_scale_fading, 1.0);
}

TEST(CoreModel, LogNormalMeanLinear)
{
    // ln(eta) ~ N(0, s^2) with s = 8 ln(10)/10
    const double s = 0.8 * std::log(10.0);
    EXPECT_NEAR(FadingSpec::log_normal(0.0, 8.0).mean_linear(), std::exp(s * s / 2.0), 1e-12);
}

TEST(CoreModel, ConfigValidation)
{
    SystemConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.numerology.res_per_rb(), 168);
    cfg.noise_power = 0.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.numerology.symbols_per_rb = 0;
    EXPECT_THROW(cfg.validate(), Error);
}
