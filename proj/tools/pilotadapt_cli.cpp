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

// Command-line front end: pattern registry dump, Monte Carlo runs, the
// relative-gain sweep, closed-form asymptotics and the pilot-spacing check.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <pilotadapt.hpp>

namespace {

using namespace pilotadapt;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    int workers = 0;
};

ExperimentConfig load(const Options& opt)
{
    ExperimentConfig cfg = opt.config.empty() ? ExperimentConfig{} : load_config(opt.config);
    if (opt.seed)
        cfg.seed = *opt.seed;
    if (!opt.out.empty())
        cfg.output = opt.out;
    if (!opt.format.empty())
        cfg.format = opt.format == "json" ? OutputFormat::json : OutputFormat::csv;
    if (opt.workers > 0)
        cfg.workers = opt.workers;
    cfg.validate();
    return cfg;
}

void emit(const std::string& text, const std::string& path)
{
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        fail(ErrorKind::configuration, "cannot write output file '" + path + "'");
    f << text;
}

void report_error(std::string_view kind, const std::string& message)
{
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pilot-pattern adaptation simulator for MU-MIMO OFDM"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--config", opt.config, "Experiment config (key = value or JSON)");
    app.add_option("--seed", opt.seed, "Master seed (overrides config)");
    app.add_option("--out", opt.out, "Output file (default: standard output)");
    app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--workers", opt.workers, "Worker threads (PILOTADAPT_WORKERS overrides)")->check(CLI::PositiveNumber);

    auto* patterns = app.add_subcommand("patterns", "Print the pattern registry, grid maps and overheads");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo spectral efficiency, grouping vs conventional");
    auto* sweep = app.add_subcommand("sweep", "Relative gain per (M, Umux) with the asymptotic bound");
    auto* asymptotics = app.add_subcommand("asymptotics", "Deterministic equivalents, rate limits and gain bound");
    auto* estimation = app.add_subcommand("validate-estimation", "Interpolation NMSE at maximum and doubled spacing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", e.what());
        return 2;
    }

    try {
        const ExperimentConfig cfg = load(opt);
        const bool json = cfg.format == OutputFormat::json;

        if (*patterns) {
            emit(json ? patterns_report(cfg).dump(2) + "\n" : patterns_text(cfg), cfg.output);
        } else if (*simulate) {
            const auto rows = run_fig3(cfg);
            emit(json ? rows_to_json(rows).dump(2) + "\n" : rows_to_csv(rows), cfg.output);
        } else if (*sweep) {
            const auto result = run_fig4(cfg);
            if (json) {
                nlohmann::json summary = nlohmann::json::array();
                for (const auto& s : result.summary)
                    summary.push_back({{"M", s.antennas},
                                       {"U_mux", s.mux},
                                       {"direction", to_string(s.direction)},
                                       {"trials", s.trials},
                                       {"mean_R_grp", s.mean_r_grp},
                                       {"mean_R_conv", s.mean_r_conv},
                                       {"mean_gain", s.mean_gain},
                                       {"gain_se", s.gain_standard_error},
                                       {"bound", s.bound}});
                emit(nlohmann::json{{"rows", rows_to_json(result.rows)}, {"summary", summary}}.dump(2) + "\n",
                     cfg.output);
            } else {
                if (!cfg.output.empty())
                    emit(rows_to_csv(result.rows), cfg.output);
                std::cout << summary_to_csv(result.summary);
            }
        } else if (*asymptotics) {
            const auto report = asymptotics_report(cfg);
            if (json) {
                emit(report.dump(2) + "\n", cfg.output);
            } else {
                std::string text = "direction,M,U_mux,alpha,beta,eta_bar,deterministic_sinr,sinr_bar,"
                                   "R_grp_limit_per_user,R_conv_limit_per_user,gain_bound\n";
                for (const auto& r : report)
                    text += r["direction"].get<std::string>() + ',' + std::to_string(r["M"].get<int>()) + ',' +
                        std::to_string(r["U_mux"].get<int>()) + ',' + format_double(r["alpha"]) + ',' +
                        format_double(r["beta"]) + ',' + format_double(r["eta_bar"]) + ',' +
                        format_double(r["deterministic_sinr"]) + ',' + format_double(r["sinr_bar"]) + ',' +
                        format_double(r["R_grp_limit_per_user"]) + ',' + format_double(r["R_conv_limit_per_user"]) +
                        ',' + format_double(r["gain_bound"]) + '\n';
                emit(text, cfg.output);
            }
        } else if (*estimation) {
            const auto rows = estimation_sweep(cfg);
            if (json) {
                nlohmann::json out = nlohmann::json::array();
                for (const auto& r : rows)
                    out.push_back({{"profile", r.profile},
                                   {"spacing", {r.report.spacing.time, r.report.spacing.freq}},
                                   {"max_spacing", r.at_max_spacing},
                                   {"nmse", r.report.nmse},
                                   {"nmse_db", r.report.nmse_db},
                                   {"below_threshold", r.report.nmse < cfg.estimation_threshold},
                                   {"time_fallback", r.report.time_fallback},
                                   {"freq_fallback", r.report.freq_fallback},
                                   {"trials", r.report.trials}});
                emit(out.dump(2) + "\n", cfg.output);
            } else {
                emit(estimation_to_csv(rows, cfg.estimation_threshold), cfg.output);
            }
        }
    } catch (const Error& e) {
        report_error(to_string(e.kind()), e.what());
        return 1;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return 1;
    }
    return 0;
}
