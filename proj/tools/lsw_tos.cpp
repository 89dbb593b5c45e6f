// lsw_tos: simulate series, run stationarity tests, estimate localized
// autocovariance, and drive Monte Carlo studies.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "lsw/config.hpp"
#include "lsw/lsw.hpp"

#ifndef LSW_CONFIG_DIR
#define LSW_CONFIG_DIR "configs"
#endif

namespace {

namespace fs = std::filesystem;

constexpr int exit_usage = 1;
constexpr int exit_data = 2;

/// Writes to the named file, or stdout when the name is empty or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw lsw::InputError("cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

/// A config argument is a path, or the name of a bundled configuration.
fs::path resolve_config(const std::string& arg) {
    if (fs::exists(arg)) return arg;
    for (const char* ext : {".toml", ".json"}) {
        const fs::path p = fs::path(LSW_CONFIG_DIR) / (arg + ext);
        if (fs::exists(p)) return p;
    }
    const fs::path stem = fs::path(arg).stem();
    for (const char* ext : {".toml", ".json"}) {
        const fs::path p = fs::path(LSW_CONFIG_DIR) / (stem.string() + ext);
        if (fs::exists(p)) return p;
    }
    throw lsw::InputError("no configuration file or bundled preset named '" + arg + "'");
}

void print_report(std::ostream& os, const lsw::TosReport& r, bool json) {
    if (json) {
        os << lsw::to_json(r).dump(2) << '\n';
        return;
    }
    using lsw::format_sig;
    os << "method: " << lsw::to_string(r.method) << '\n'
       << "gamma: " << format_sig(r.nominal_size) << '\n'
       << "tests: " << r.n_tests << '\n'
       << "overall p: " << format_sig(r.overall_p) << '\n'
       << "reject stationarity: " << (r.reject ? "yes" : "no") << '\n';
    if (r.psr) {
        const auto& d = *r.psr;
        os << "blocks: " << d.blocks << " x " << d.block_length << ", frequencies: " << d.frequencies
           << ", tapers: " << d.tapers << '\n'
           << "time effect: " << format_sig(d.time_statistic) << " on " << d.time_df << " df\n"
           << "interaction: " << format_sig(d.interaction_statistic) << " on " << d.interaction_df
           << " df, p = " << format_sig(d.interaction_p) << '\n';
    } else {
        os << "significant coefficients: " << r.significant.size() << '\n';
        if (!r.significant.empty()) os << "spectral_level,haar_level,location,statistic,p_value\n";
        for (const auto& c : r.significant) {
            os << c.spectral_level << ',' << c.haar_level << ',' << c.location << ',' << format_sig(c.statistic) << ','
               << format_sig(c.p_value) << '\n';
        }
    }
}

void write_lacv_csv(std::ostream& os, const lsw::LacvEstimate& e) {
    os << "lag,c_hat,ci_low,ci_high\n";
    for (std::size_t i = 0; i < e.lags.size(); ++i) {
        os << e.lags[i] << ',' << lsw::format_sig(e.c_hat[i]) << ',' << lsw::format_sig(e.ci_low[i]) << ','
           << lsw::format_sig(e.ci_high[i]) << '\n';
    }
}

nlohmann::json lacv_json(const lsw::LacvEstimate& e) {
    nlohmann::json j{{"z", e.z},           {"index", e.index},     {"lags", e.lags},       {"c_hat", e.c_hat},
                     {"variance", e.variance}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high}};
    if (e.as_correlation) {
        j["correlation"] = {{"value", e.as_correlation->value},
                            {"ci_low", e.as_correlation->ci_low},
                            {"ci_high", e.as_correlation->ci_high}};
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wavelet-based tests of second-order stationarity and localized autocovariance"};
    app.require_subcommand(1);
    bool json = false;
    app.add_flag("--json", json, "Write reports as JSON");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Simulate a preset model");
    std::string sim_preset, sim_out;
    std::size_t sim_T = 512;
    std::uint64_t sim_seed = 1;
    sim->add_option("preset", sim_preset, "Model preset (S1-S7, SHD1-7, SHT1-7, P1-P4, AC1-AC4)")->required();
    sim->add_option("--t", sim_T, "Series length (power of two)")->capture_default_str();
    sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
    sim->add_option("--out", sim_out, "Output file (default stdout)");

    // hwtos
    auto* hw = app.add_subcommand("hwtos", "Haar wavelet test of stationarity");
    std::string hw_file, hw_control = "bonferroni";
    double hw_gamma = 0.05;
    hw->add_option("file", hw_file, "Series file, one value per line")->required();
    hw->add_option("--gamma", hw_gamma, "Nominal size")->capture_default_str();
    hw->add_option("--control", hw_control, "Multiple-comparison control")
        ->check(CLI::IsMember({"bonferroni", "fdr"}))
        ->capture_default_str();

    // psr
    auto* ps = app.add_subcommand("psr", "Priestley-Subba Rao test");
    std::string ps_file;
    double ps_gamma = 0.05;
    ps->add_option("file", ps_file, "Series file, one value per line")->required();
    ps->add_option("--gamma", ps_gamma, "Nominal size")->capture_default_str();

    // lacv
    auto* la = app.add_subcommand("lacv", "Localized autocovariance with confidence intervals");
    std::string la_file, la_plot, la_out;
    std::size_t la_nz = 0;
    int la_lag_max = 10;
    bool la_corr = false;
    la->add_option("file", la_file, "Series file, one value per line")->required();
    la->add_option("--nz", la_nz, "Time index (1-based)")->required();
    la->add_option("--lag-max", la_lag_max, "Largest lag")->capture_default_str();
    la->add_option("--plot", la_plot, "Write an SVG plot");
    la->add_option("--out", la_out, "CSV output file (default stdout)");
    la->add_flag("--correlation", la_corr, "Plot the autocorrelation view");

    // mc
    auto* mc = app.add_subcommand("mc", "Monte Carlo studies");
    mc->require_subcommand(1);
    std::string mc_config, mc_out, mc_log, mc_plot_dir;
    int mc_workers = 0;
    std::optional<int> mc_N;
    auto add_mc_options = [&](CLI::App* sub) {
        sub->add_option("--config", mc_config, "Config file (.toml/.json) or bundled preset name")->required();
        sub->add_option("--out", mc_out, "Output file (default stdout)");
        sub->add_option("--workers", mc_workers, "Worker threads (default $LSW_WORKERS or all cores)");
        sub->add_option("--n", mc_N, "Override the number of replications");
    };
    auto* mc_size = mc->add_subcommand("size", "Empirical size table");
    auto* mc_power = mc->add_subcommand("power", "Empirical power table");
    auto* mc_norm = mc->add_subcommand("normality", "Sampling densities of c_hat");
    for (auto* s : {mc_size, mc_power}) {
        add_mc_options(s);
        s->add_option("--log", mc_log, "JSON-lines progress log (resumable)");
    }
    add_mc_options(mc_norm);
    mc_norm->add_option("--plot-dir", mc_plot_dir, "Directory for SVG density grids");

    // load-quake
    auto* lq = app.add_subcommand("load-quake", "Extract one series from the earthquake/explosion file");
    std::string lq_path, lq_series = "eqP", lq_out;
    lq->add_option("path", lq_path, "4096-value data file")->required();
    lq->add_option("--series", lq_series, "Series to extract")
        ->check(CLI::IsMember({"eqP", "eqQ", "exP", "exQ"}))
        ->capture_default_str();
    lq->add_option("--out", lq_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_usage;
    }

    try {
        if (*sim) {
            const auto x = lsw::simulate(lsw::preset(sim_preset), sim_T, lsw::Seed{sim_seed});
            Output out(sim_out);
            lsw::write_series(out.stream(), x);
        } else if (*hw) {
            const auto x = lsw::read_series(hw_file);
            print_report(std::cout, lsw::hwtos(x, hw_gamma, lsw::parse_control(hw_control)), json);
        } else if (*ps) {
            const auto x = lsw::read_series(ps_file);
            print_report(std::cout, lsw::psr(x, ps_gamma), json);
        } else if (*la) {
            const auto x = lsw::read_series(la_file);
            const auto e = lsw::lacv_at_index(x, la_nz, la_lag_max);
            Output out(la_out);
            if (json) {
                out.stream() << lacv_json(e).dump(2) << '\n';
            } else {
                write_lacv_csv(out.stream(), e);
            }
            if (!la_plot.empty()) {
                Output plot(la_plot);
                lsw::svg::write_lacv_plot(plot.stream(), e, la_corr);
            }
        } else if (*mc) {
            auto cfg = lsw::load_study_config(resolve_config(mc_config));
            if (mc_N) cfg.N = *mc_N;
            const std::string want = *mc_size ? "size" : *mc_power ? "power" : "normality";
            if (cfg.study != want) {
                std::cerr << "error: configuration describes a " << cfg.study << " study, not " << want << '\n';
                return exit_usage;
            }
            Output out(mc_out);
            if (want == "normality") {
                const auto r = lsw::run_normality_study(cfg.normality(mc_workers));
                if (json) {
                    nlohmann::json j = lsw::to_json(r);
                    j["effective_config"] = lsw::to_json(cfg);
                    out.stream() << j.dump(2) << '\n';
                } else {
                    auto& os = out.stream();
                    os << "T,lag,mean,sd,skewness,excess_kurtosis,reference\n";
                    for (const auto& c : r.cells) {
                        os << c.T << ',' << c.lag << ',' << lsw::format_sig(c.moments.mean) << ','
                           << lsw::format_sig(c.moments.sd) << ',' << lsw::format_sig(c.moments.skewness) << ','
                           << lsw::format_sig(c.moments.excess_kurtosis) << ','
                           << (c.reference ? lsw::format_sig(*c.reference) : "") << '\n';
                    }
                }
                if (!mc_plot_dir.empty()) {
                    fs::create_directories(mc_plot_dir);
                    for (int lag : cfg.lags) {
                        Output plot((fs::path(mc_plot_dir) / ("density_lag" + std::to_string(lag) + ".svg")).string());
                        lsw::svg::write_density_grid(plot.stream(), r, lag);
                    }
                }
            } else {
                std::vector<lsw::McResult> results;
                const auto runs = cfg.expand(mc_workers);
                for (std::size_t i = 0; i < runs.size(); ++i) {
                    std::optional<lsw::EventLog> log;
                    if (!mc_log.empty()) {
                        log.emplace(runs.size() == 1 ? mc_log : mc_log + "." + runs[i].model + ".T" + std::to_string(runs[i].T));
                    }
                    lsw::EventLog* lp = log ? &*log : nullptr;
                    results.push_back(want == "size" ? lsw::run_size_study(runs[i], lp) : lsw::run_power_study(runs[i], lp));
                    std::cerr << runs[i].model << " T=" << runs[i].T << " done in "
                              << lsw::format_sig(results.back().runtime.seconds, 4) << " s\n";
                }
                if (json) {
                    nlohmann::json j{{"effective_config", lsw::to_json(cfg)}, {"studies", nlohmann::json::array()}};
                    for (const auto& r : results) j["studies"].push_back(lsw::to_json(r));
                    out.stream() << j.dump(2) << '\n';
                } else {
                    lsw::write_rate_table_csv(out.stream(), results, lsw::SigFormat{});
                }
            }
        } else if (*lq) {
            const auto data = lsw::load_quake(lq_path);
            Output out(lq_out);
            lsw::write_series(out.stream(), data.series(lq_series));
        }
    } catch (const lsw::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    } catch (const lsw::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    } catch (const lsw::ConstructionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    }
    return 0;
}
