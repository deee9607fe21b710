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

#include <array>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace pilotadapt {

using cd = std::complex<double>;

struct Tap {
    double delay_s = 0.0;
    double power = 1.0;
};

/// Second-order statistics class of a user's channel: maximum Doppler
/// shift, maximum delay spread and the power-delay profile realizing it.
struct ChannelProfile {
    std::string name;
    double max_doppler_hz = 0.0;
    double max_delay_spread_s = 0.0;
    std::vector<Tap> taps;

    /// Two equal-power taps at 0 and at the maximum delay spread.
    static ChannelProfile bracket(std::string name, double doppler_hz, double delay_spread_s)
    {
        return {std::move(name), doppler_hz, delay_spread_s, {{0.0, 0.5}, {delay_spread_s, 0.5}}};
    }

    void validate() const
    {
        require(max_doppler_hz > 0.0, "profile " + name + ": Doppler must be positive");
        require(max_delay_spread_s > 0.0, "profile " + name + ": delay spread must be positive");
        require(!taps.empty(), "profile " + name + ": needs at least one tap");
        double total = 0.0;
        for (const Tap& t : taps) {
            require(t.delay_s >= 0.0 && t.delay_s <= max_delay_spread_s * (1.0 + 1e-12),
                    "profile " + name + ": tap delay outside [0, max delay spread]");
            require(t.power >= 0.0, "profile " + name + ": tap power must be non-negative");
            total += t.power;
        }
        require(std::abs(total - 1.0) < 1e-9, "profile " + name + ": tap powers must sum to 1");
    }
};

/// Pilot spacing in symbols (time) and subcarriers (frequency).
struct PilotSpacing {
    int time = 1;
    int freq = 1;

    friend auto operator<=>(const PilotSpacing&, const PilotSpacing&) = default;
};

namespace detail {
// Guards floor() against quotients like 0.99999999999 that are exactly 1.
inline int robust_floor(double x) { return static_cast<int>(std::floor(x + 1e-9)); }
} // namespace detail

/// Largest spacings at twice the Nyquist pilot density, before clamping.
inline PilotSpacing unclamped_spacing(const ChannelProfile& profile, const Numerology& num)
{
    const double t = 1.0 / (4.0 * profile.max_doppler_hz * num.symbol_duration_s);
    const double f = 1.0 / (4.0 * profile.max_delay_spread_s * num.subcarrier_spacing_hz);
    // saturate before the int conversion; very slow channels give huge quotients
    return {detail::robust_floor(std::min(t, 1e9)), detail::robust_floor(std::min(f, 1e9))};
}

/// Maximum admissible pilot spacing, clamped to the RB grid.
inline PilotSpacing max_spacing(const ChannelProfile& profile, const Numerology& num)
{
    profile.validate();
    num.validate();
    const PilotSpacing raw = unclamped_spacing(profile, num);
    if (raw.time < 1 || raw.freq < 1)
        fail(ErrorKind::unsupportable_profile,
             "profile " + profile.name + " unsupportable by numerology: channel varies faster than one "
             "symbol or subcarrier");
    return {std::min(raw.time, num.symbols_per_rb), std::min(raw.freq, num.subcarriers_per_rb)};
}

/// The four EPA/EVA/ETU classes used for the default experiment.
inline std::vector<ChannelProfile> builtin_profiles()
{
    return {
        ChannelProfile::bracket("EPA5", 5.0, 0.41e-6),
        ChannelProfile::bracket("EVA70", 70.0, 2.51e-6),
        ChannelProfile::bracket("ETU70", 70.0, 4.69e-6),
        ChannelProfile::bracket("ETU300", 300.0, 4.69e-6),
    };
}

inline constexpr int kDopplerSinusoids = 32;

/// Sum-of-sinusoids Rayleigh process sampled once per OFDM symbol.
///
/// Arrival angles are equally spaced with a common random rotation and each
/// sinusoid has an independent random phase, which gives the classical
/// J0(2 pi f T dt) autocorrelation and unit power. All spectral lines lie in
/// [-f, +f].
inline std::vector<cd> doppler_series(double doppler_hz, double symbol_duration_s, int length, Rng& rng)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double rotation = two_pi * rng.uniform();
    std::array<double, kDopplerSinusoids> omega{};
    std::array<double, kDopplerSinusoids> phase{};
    for (int i = 0; i < kDopplerSinusoids; ++i) {
        const double theta = (two_pi * i + rotation) / kDopplerSinusoids;
        omega[i] = two_pi * doppler_hz * symbol_duration_s * std::cos(theta);
        phase[i] = two_pi * rng.uniform();
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(kDopplerSinusoids));
    std::vector<cd> out(length);
    for (int t = 0; t < length; ++t) {
        cd acc{0.0, 0.0};
        for (int i = 0; i < kDopplerSinusoids; ++i)
            acc += std::polar(1.0, omega[i] * t + phase[i]);
        out[t] = acc * scale;
    }
    return out;
}

/// Tapped-delay-line frequency response of one user over num_rbs adjacent
/// RBs. Layout is [rb][symbol][subcarrier][antenna]; subcarrier phases use
/// the global subcarrier index rb * N_SC + n.
inline std::vector<cd> user_response(const ChannelProfile& profile, const Numerology& num, int num_rbs,
                                     int antennas, std::uint64_t seed)
{
    const int ns = num.symbols_per_rb;
    const int nsc = num.subcarriers_per_rb;
    const int num_sc = num_rbs * nsc;
    const auto taps = static_cast<int>(profile.taps.size());

    std::vector<cd> steering(static_cast<std::size_t>(num_sc) * taps);
    for (int n = 0; n < num_sc; ++n)
        for (int l = 0; l < taps; ++l)
            steering[n * taps + l] = std::sqrt(profile.taps[l].power) *
                std::polar(1.0, -2.0 * std::numbers::pi * n * num.subcarrier_spacing_hz * profile.taps[l].delay_s);

    std::vector<cd> out(static_cast<std::size_t>(num_rbs) * ns * nsc * antennas);
    std::vector<cd> series(static_cast<std::size_t>(taps) * ns);
    for (int m = 0; m < antennas; ++m) {
        for (int l = 0; l < taps; ++l) {
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(l)}));
            auto s = doppler_series(profile.max_doppler_hz, num.symbol_duration_s, ns, rng);
            std::copy(s.begin(), s.end(), series.begin() + static_cast<std::ptrdiff_t>(l) * ns);
        }
        for (int r = 0; r < num_rbs; ++r)
            for (int t = 0; t < ns; ++t)
                for (int n = 0; n < nsc; ++n) {
                    const int g = r * nsc + n;
                    cd acc{0.0, 0.0};
                    for (int l = 0; l < taps; ++l)
                        acc += series[l * ns + t] * steering[g * taps + l];
                    out[((static_cast<std::size_t>(r) * ns + t) * nsc + n) * antennas + m] = acc;
                }
    }
    return out;
}

/// Small-scale fading of every user on every RE of every RB, M antennas each.
class ChannelRealization {
public:
    ChannelRealization(int users, int rbs, const Numerology& num, int antennas, std::uint64_t seed,
                       std::vector<int> user_profile)
        : users_(users), rbs_(rbs), symbols_(num.symbols_per_rb), subcarriers_(num.subcarriers_per_rb),
          antennas_(antennas), seed_(seed), user_profile_(std::move(user_profile)),
          data_(static_cast<std::size_t>(users) * rbs * symbols_ * subcarriers_ * antennas)
    {
    }

    int num_users() const { return users_; }
    int num_rbs() const { return rbs_; }
    int symbols() const { return symbols_; }
    int subcarriers() const { return subcarriers_; }
    int res_per_rb() const { return symbols_ * subcarriers_; }
    int antennas() const { return antennas_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<int>& user_profile() const { return user_profile_; }

    std::span<const cd> at(int user, int rb, int symbol, int subcarrier) const
    {
        return {data_.data() + offset(user, rb, symbol, subcarrier), static_cast<std::size_t>(antennas_)};
    }
    std::span<cd> at(int user, int rb, int symbol, int subcarrier)
    {
        return {data_.data() + offset(user, rb, symbol, subcarrier), static_cast<std::size_t>(antennas_)};
    }

    /// RE index e = symbol * N_SC + subcarrier.
    std::span<const cd> at(int user, int rb, int re) const
    {
        return at(user, rb, re / subcarriers_, re % subcarriers_);
    }

    /// Contiguous block of one user, layout [rb][symbol][subcarrier][antenna].
    std::span<cd> user_block(int user)
    {
        const std::size_t len = static_cast<std::size_t>(rbs_) * symbols_ * subcarriers_ * antennas_;
        return {data_.data() + user * len, len};
    }

private:
    std::size_t offset(int user, int rb, int symbol, int subcarrier) const
    {
        return ((((static_cast<std::size_t>(user) * rbs_ + rb) * symbols_ + symbol) * subcarriers_ + subcarrier) *
                antennas_);
    }

    int users_, rbs_, symbols_, subcarriers_, antennas_;
    std::uint64_t seed_;
    std::vector<int> user_profile_;
    std::vector<cd> data_;
};

/// Draws an independent channel for every user from its group's profile.
/// User k uses the stream derive_seed(seed, {k}), so the result does not
/// depend on generation order.
inline ChannelRealization generate_realization(const UserPopulation& pop, std::span<const ChannelProfile> profiles,
                                               const SystemConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    require(static_cast<int>(profiles.size()) >= pop.num_groups(), "every group needs a channel profile");
    for (const auto& p : profiles)
        p.validate();

    std::vector<int> user_profile;
    user_profile.reserve(pop.num_users());
    for (const User& u : pop.users())
        user_profile.push_back(u.group);

    ChannelRealization out(pop.num_users(), cfg.num_rbs, cfg.numerology, cfg.num_antennas, seed, user_profile);
    for (const User& u : pop.users()) {
        auto block = user_response(profiles[u.group], cfg.numerology, cfg.num_rbs, cfg.num_antennas,
                                   derive_seed(seed, {static_cast<std::uint64_t>(u.id)}));
        std::copy(block.begin(), block.end(), out.user_block(u.id).begin());
    }
    return out;
}

} // namespace pilotadapt
