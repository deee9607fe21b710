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
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "core_model.hpp"
#include "error.hpp"
#include "stats.hpp"

namespace pilotadapt {

/// Large-system limit description: alpha = Umux/M, beta = Umux/N_RE,
/// group fractions and the large-scale fading law.
struct AsymptoticModel {
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<double> gammas;
    FadingSpec fading;
    Direction direction = Direction::uplink;
    double ul_power = 1.0;
    double dl_power = 1.0;
    double noise_power = 1.0;

    double power() const { return direction == Direction::uplink ? ul_power : dl_power; }
};

inline AsymptoticModel make_asymptotic_model(const SystemConfig& cfg, std::vector<double> gammas,
                                             const FadingSpec& fading, Direction dir)
{
    AsymptoticModel m;
    m.alpha = static_cast<double>(cfg.max_mux) / cfg.num_antennas;
    m.beta = static_cast<double>(cfg.max_mux) / cfg.numerology.res_per_rb();
    m.gammas = std::move(gammas);
    m.fading = fading;
    m.direction = dir;
    m.ul_power = cfg.ul_power;
    m.dl_power = cfg.dl_power;
    m.noise_power = cfg.noise_power;
    return m;
}

/// Deterministic equivalent of the per-RE SINR of a user with gain eta_k.
///
/// Uplink: the interference sum over the U scheduled users (the user itself
/// included) is replaced by U * eta_bar.
inline double deterministic_sinr(const AsymptoticModel& model, double eta_k, double eta_bar, int antennas,
                                 int users)
{
    require(antennas >= 1 && users >= 1, "deterministic_sinr needs M, U >= 1");
    const double m = antennas;
    const double p = model.power();
    if (model.direction == Direction::uplink)
        return eta_k * p / (model.noise_power / m + users * eta_bar * p / m);
    return eta_k * p / (model.noise_power / m + (users / m) * eta_k * p);
}

/// Expectation of f(eta) under the model's fading law.
template <class Fn>
double expect_over_fading(const FadingSpec& fading, Fn&& fn)
{
    switch (fading.kind) {
    case FadingSpec::Kind::constant: return fn(db_to_linear(fading.mean_db));
    case FadingSpec::Kind::list: {
        double acc = 0.0;
        for (double v : fading.values_db)
            acc += fn(db_to_linear(v));
        return acc / static_cast<double>(fading.values_db.size());
    }
    case FadingSpec::Kind::log_normal: {
        if (fading.spread_db == 0.0)
            return fn(db_to_linear(fading.mean_db));
        static const QuadratureRule rule = gauss_hermite(64);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double db = fading.mean_db + fading.spread_db * std::numbers::sqrt2 * rule.nodes[i];
            acc += rule.weights[i] * fn(db_to_linear(db));
        }
        return acc / std::sqrt(std::numbers::pi);
    }
    }
    return 0.0;
}

/// 2^E[log2(1 + SINR_det(eta))] - 1.
/// eta_bar defaults to the mean of the configured fading distribution.
inline double sinr_bar(const AsymptoticModel& model, int antennas, int users, std::optional<double> mean_gain = {})
{
    const double eta_bar = mean_gain.value_or(model.fading.mean_linear());
    const double e_log = expect_over_fading(model.fading, [&](double eta) {
        return std::log2(1.0 + deterministic_sinr(model, eta, eta_bar, antennas, users));
    });
    return std::exp2(e_log) - 1.0;
}

struct AsymptoticRates {
    double grouping = 0.0;     // limit of R_grp / Umux
    double conventional = 0.0; // limit of R_conv / Umux
};

namespace detail {
// Worst overhead among groups that actually hold users.
inline double max_present(std::span<const double> gammas, std::span<const double> values)
{
    double out = 0.0;
    for (std::size_t g = 0; g < values.size(); ++g)
        if (gammas[g] > 0.0)
            out = std::max(out, values[g]);
    return out;
}
} // namespace detail

/// Per-multiplexed-user rate limits of the grouping and conventional
/// schemes for the given per-group pattern sizes.
inline AsymptoticRates asymptotic_rates(const AsymptoticModel& model, std::span<const int> pattern_sizes, int res_per_rb,
                                        int antennas, int users)
{
    require(pattern_sizes.size() == model.gammas.size(), "one pattern size per group expected");
    std::vector<double> rho(pattern_sizes.size());
    for (std::size_t g = 0; g < rho.size(); ++g) {
        require(pattern_sizes[g] < res_per_rb, "pattern sizes must leave data room");
        rho[g] = static_cast<double>(pattern_sizes[g]) / res_per_rb;
    }
    const double log_term = std::log2(1.0 + sinr_bar(model, antennas, users));
    AsymptoticRates out;
    for (std::size_t g = 0; g < rho.size(); ++g)
        out.grouping += model.gammas[g] * (1.0 - rho[g]) * log_term;
    out.conventional = (1.0 - detail::max_present(model.gammas, rho)) * log_term;
    return out;
}

/// Asymptotic relative gain sum_g gamma_g (1 - rho_g) / (1 - max rho) - 1.
inline double gain_bound(std::span<const double> gammas, std::span<const double> overhead_ratios)
{
    require(gammas.size() == overhead_ratios.size(), "one overhead ratio per group expected");
    double acc = 0.0;
    for (std::size_t g = 0; g < gammas.size(); ++g) {
        require(overhead_ratios[g] >= 0.0 && overhead_ratios[g] < 1.0, "overhead ratios must lie in [0, 1)");
        acc += gammas[g] * (1.0 - overhead_ratios[g]);
    }
    return acc / (1.0 - detail::max_present(gammas, overhead_ratios)) - 1.0;
}

struct SuperioritySummary {
    int trials = 0;
    double superiority = 0.0; // fraction of trials with R_grp > R_conv
    double mean_difference = 0.0;
    double standard_error = 0.0;
};

/// Paired comparison of Monte Carlo R_grp and R_conv samples.
inline SuperioritySummary theorem1_check(std::span<const double> grouping, std::span<const double> conventional)
{
    require(grouping.size() == conventional.size(), "paired samples must have equal length");
    require(grouping.size() >= 10, "theorem1_check needs at least 10 paired trials");
    std::vector<double> diff(grouping.size());
    int wins = 0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = grouping[i] - conventional[i];
        wins += grouping[i] > conventional[i] ? 1 : 0;
    }
    return {static_cast<int>(diff.size()), static_cast<double>(wins) / diff.size(), mean(diff),
            standard_error(diff)};
}

} // namespace pilotadapt
