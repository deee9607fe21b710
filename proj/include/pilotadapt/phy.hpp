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

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "channel.hpp"
#include "core_model.hpp"
#include "error.hpp"
#include "pattern.hpp"

namespace pilotadapt {

namespace detail {

inline cd inner(std::span<const cd> a, std::span<const cd> b)
{
    cd acc{0.0, 0.0};
    for (std::size_t m = 0; m < a.size(); ++m)
        acc += std::conj(a[m]) * b[m];
    return acc;
}

inline double norm2(std::span<const cd> a)
{
    double acc = 0.0;
    for (const cd& x : a)
        acc += std::norm(x);
    return acc;
}

} // namespace detail

/// MRC combiner: w = h.
inline std::vector<cd> mrc_combiner(std::span<const cd> h) { return {h.begin(), h.end()}; }

/// MRT precoder: w = M h / ||h||, so that ||w|| = M.
inline std::vector<cd> mrt_precoder(std::span<const cd> h)
{
    const double n = std::sqrt(detail::norm2(h));
    if (!(n > 0.0))
        fail(ErrorKind::degenerate_channel, "MRT precoder for a zero-norm channel");
    const double scale = static_cast<double>(h.size()) / n;
    std::vector<cd> w(h.size());
    for (std::size_t m = 0; m < h.size(); ++m)
        w[m] = h[m] * scale;
    return w;
}

/// Uplink SINR of user k under MRC at one RE.
///
/// h_set holds the channels of all users scheduled on the RE and fadings
/// their large-scale gains, in the same order.
inline double uplink_sinr(std::span<const std::span<const cd>> h_set, int k, std::span<const double> fadings,
                          const SystemConfig& cfg)
{
    const auto& hk = h_set[k];
    if (!(detail::norm2(hk) > 0.0))
        fail(ErrorKind::degenerate_channel, "uplink SINR for a zero-norm channel");
    const auto w = mrc_combiner(hk);
    const double signal = fadings[k] * cfg.ul_power * std::norm(detail::inner(w, hk));
    double interference = 0.0;
    for (std::size_t j = 0; j < h_set.size(); ++j)
        if (static_cast<int>(j) != k)
            interference += fadings[j] * cfg.ul_power * std::norm(detail::inner(w, h_set[j]));
    const double noise = detail::norm2(w) * cfg.noise_power;
    return signal / (interference + noise);
}

/// Downlink SINR of user k under MRT at one RE; every scheduled user is
/// precoded with w_j = M h_j / ||h_j||.
inline double downlink_sinr(std::span<const std::span<const cd>> h_set, int k, std::span<const double> fadings,
                            const SystemConfig& cfg)
{
    const double m = static_cast<double>(h_set[k].size());
    const auto wk = mrt_precoder(h_set[k]);
    const double signal = fadings[k] * cfg.dl_power * std::norm(detail::inner(wk, h_set[k]));
    double interference = 0.0;
    for (std::size_t j = 0; j < h_set.size(); ++j) {
        if (static_cast<int>(j) == k)
            continue;
        const auto wj = mrt_precoder(h_set[j]);
        interference += fadings[k] * cfg.dl_power * std::norm(detail::inner(wj, h_set[k]));
    }
    return signal / (interference + m * m * cfg.noise_power);
}

/// Per-RE cross powers |h_a^H h_b|^2 and norms ||h_a||^2 of a user set on
/// one RB. Both SINR expressions depend on the channels only through these,
/// so any subset of the members can be scored without touching the M-long
/// vectors again.
class RbGram {
public:
    RbGram(const ChannelRealization& real, int rb, std::vector<int> members)
        : members_(std::move(members)), users_(static_cast<int>(members_.size())), res_(real.res_per_rb()),
          norm2_(static_cast<std::size_t>(res_) * users_), cross_(static_cast<std::size_t>(res_) * users_ * users_)
    {
        for (int e = 0; e < res_; ++e) {
            for (int a = 0; a < users_; ++a) {
                const auto ha = real.at(members_[a], rb, e);
                const double na = detail::norm2(ha);
                if (!(na > 0.0))
                    fail(ErrorKind::degenerate_channel, "zero-norm channel in RB " + std::to_string(rb));
                norm2_[e * users_ + a] = na;
                cross_[(static_cast<std::size_t>(e) * users_ + a) * users_ + a] = na * na;
                for (int b = a + 1; b < users_; ++b) {
                    const double p = std::norm(detail::inner(ha, real.at(members_[b], rb, e)));
                    cross_[(static_cast<std::size_t>(e) * users_ + a) * users_ + b] = p;
                    cross_[(static_cast<std::size_t>(e) * users_ + b) * users_ + a] = p;
                }
            }
        }
    }

    const std::vector<int>& members() const { return members_; }
    int res() const { return res_; }
    double norm2(int re, int a) const { return norm2_[re * users_ + a]; }
    double cross(int re, int a, int b) const { return cross_[(static_cast<std::size_t>(re) * users_ + a) * users_ + b]; }

    /// SINR of local member subset[i] among subset at RE re. Fadings are
    /// indexed by local member index.
    double sinr(Direction dir, std::span<const int> subset, std::size_t i, int re, std::span<const double> fadings,
                const SystemConfig& cfg) const
    {
        const int k = subset[i];
        const double nk = norm2(re, k);
        if (dir == Direction::uplink) {
            double interference = 0.0;
            for (std::size_t j = 0; j < subset.size(); ++j)
                if (j != i)
                    interference += fadings[subset[j]] * cross(re, k, subset[j]);
            return fadings[k] * cfg.ul_power * nk * nk /
                (cfg.ul_power * interference + nk * cfg.noise_power);
        }
        // |w_j^H h_k|^2 = M^2 |h_j^H h_k|^2 / ||h_j||^2; the M^2 cancels the noise scaling
        double interference = 0.0;
        for (std::size_t j = 0; j < subset.size(); ++j)
            if (j != i)
                interference += cross(re, subset[j], k) / norm2(re, subset[j]);
        return fadings[k] * cfg.dl_power * nk / (fadings[k] * cfg.dl_power * interference + cfg.noise_power);
    }

    /// Per-RB spectral efficiency of a subset of local members.
    double spectral_efficiency(Direction dir, std::span<const int> subset, const PilotPattern& pattern,
                               std::span<const double> fadings, const SystemConfig& cfg) const
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < subset.size(); ++i)
            for (int e = 0; e < res_; ++e)
                if (!pattern.is_pilot(e))
                    acc += std::log2(1.0 + sinr(dir, subset, i, e, fadings, cfg));
        return acc / res_;
    }

private:
    std::vector<int> members_;
    int users_;
    int res_;
    std::vector<double> norm2_;
    std::vector<double> cross_;
};

struct RbRate {
    double spectral_efficiency = 0.0;
    /// sinr[i] holds user i's SINR on each data RE, in RE order.
    std::vector<std::vector<double>> sinr;
};

/// Average per-RE spectral efficiency of RB rb with the given users and
/// pilot pattern. fadings is indexed by user id.
inline RbRate rb_spectral_efficiency(const ChannelRealization& real, int rb, std::span<const int> users,
                                     const PilotPattern& pattern, std::span<const double> fadings,
                                     const SystemConfig& cfg, Direction dir)
{
    require(static_cast<int>(users.size()) <= cfg.max_mux, "more users on an RB than the multiplexing limit");
    require(pattern.res_per_rb() == real.res_per_rb(), "pattern and realization disagree on RB size");
    if (pattern.size() >= pattern.res_per_rb())
        fail(ErrorKind::no_data_room, "pilot pattern covers the whole RB");

    RbGram gram(real, rb, {users.begin(), users.end()});
    std::vector<double> local_fading(users.size());
    std::vector<int> subset(users.size());
    for (std::size_t i = 0; i < users.size(); ++i) {
        local_fading[i] = fadings[users[i]];
        subset[i] = static_cast<int>(i);
    }

    RbRate out;
    out.sinr.resize(users.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < users.size(); ++i) {
        for (int e = 0; e < gram.res(); ++e) {
            if (pattern.is_pilot(e))
                continue;
            const double s = gram.sinr(dir, subset, i, e, local_fading, cfg);
            out.sinr[i].push_back(s);
            acc += std::log2(1.0 + s);
        }
    }
    out.spectral_efficiency = acc / gram.res();
    return out;
}

/// Mean SINR over users and the first `samples` REs (RB-major order) when
/// every user of the realization shares each RE. Used to compare against
/// deterministic equivalents.
inline double mean_re_sinr(const ChannelRealization& real, std::span<const double> fadings, const SystemConfig& cfg,
                           Direction dir, int samples)
{
    const int total = real.num_rbs() * real.res_per_rb();
    require(samples >= 1 && samples <= total, "sample count exceeds the REs of the realization");
    std::vector<int> all(real.num_users());
    for (int k = 0; k < real.num_users(); ++k)
        all[k] = k;
    double acc = 0.0;
    int taken = 0;
    for (int rb = 0; rb < real.num_rbs() && taken < samples; ++rb) {
        const RbGram gram(real, rb, all);
        for (int e = 0; e < gram.res() && taken < samples; ++e, ++taken)
            for (std::size_t i = 0; i < all.size(); ++i)
                acc += gram.sinr(dir, all, i, e, fadings, cfg);
    }
    return acc / (static_cast<double>(samples) * real.num_users());
}

} // namespace pilotadapt
