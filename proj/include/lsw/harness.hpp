#ifndef LSW_HARNESS_HPP
#define LSW_HARNESS_HPP

// Monte Carlo studies: empirical size and power of the stationarity tests,
// coverage of localized autocovariance intervals, and sampling distributions
// of c_hat for the normality figures.
//
// Replication i of a study always draws from replication_seed(master, i), and
// results are reduced in index order, so output does not depend on the
// number of workers or the order in which replications finish.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "lsw/error.hpp"
#include "lsw/kde.hpp"
#include "lsw/lacv.hpp"
#include "lsw/models.hpp"
#include "lsw/rng.hpp"
#include "lsw/stationarity.hpp"

namespace lsw {

// ---------------------------------------------------------------------------
// Worker pool

/// Worker count: explicit value if positive, else $LSW_WORKERS, else the
/// hardware concurrency.
inline int resolve_workers(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("LSW_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

/// Calls body(i) for i in [begin, end) on up to `workers` threads.  The first
/// exception thrown by any call is rethrown after all threads stop.
inline void parallel_for(std::size_t begin, std::size_t end, int workers, const std::function<void(std::size_t)>& body) {
    if (begin >= end) return;
    const auto n = static_cast<std::size_t>(std::max(1, workers));
    if (n == 1 || end - begin == 1) {
        for (std::size_t i = begin; i < end; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{begin};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= end || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(n, end - begin); ++w) pool.emplace_back(run);
    }
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Size and power

enum class StudyKind { size, power };

struct McConfig {
    std::string model = "S1";
    int N = 1000;
    std::size_t T = 512;
    double gamma = 0.05;
    std::vector<TestMethod> methods{TestMethod::psr, TestMethod::hwtos_bonferroni, TestMethod::hwtos_fdr};
    std::uint64_t master_seed = 1;
    HwtosOptions hwtos;
    PsrOptions psr;
    /// 0: resolve_workers() default.
    int workers = 0;
};

/// Result of one replication, one entry per configured method.
struct ReplicationOutcome {
    std::vector<bool> reject;
    std::vector<int> significant;  ///< -1 for PSR
    std::vector<double> p_value;

    friend bool operator==(const ReplicationOutcome&, const ReplicationOutcome&) = default;
};

struct MethodSummary {
    TestMethod method = TestMethod::psr;
    int rejections = 0;
    double rate = 0.0;
    double standard_error = 0.0;
    int n_tests = 0;
    /// histogram[c] = replications with exactly c significant coefficients
    /// (HWTOS only).
    std::vector<int> significant_histogram;
};

struct RuntimeStats {
    double seconds = 0.0;
    double per_replication_ms = 0.0;
    int workers = 1;
    int resumed = 0;
};

struct McResult {
    McConfig config;
    std::vector<MethodSummary> methods;
    std::vector<ReplicationOutcome> outcomes;
    RuntimeStats runtime;

    const MethodSummary& method(TestMethod m) const {
        for (const auto& s : methods) {
            if (s.method == m) return s;
        }
        throw InputError(std::string("method not in study: ") + to_string(m));
    }
};

inline double binomial_se(double p, int n) { return n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0; }

/// Runs every configured test on one series.
inline ReplicationOutcome run_tests(const TimeSeries& x, const McConfig& cfg) {
    ReplicationOutcome o;
    std::optional<HwtosAnalysis> analysis;
    for (TestMethod m : cfg.methods) {
        TosReport r;
        if (m == TestMethod::psr) {
            r = psr(x, cfg.gamma, cfg.psr);
        } else {
            if (!analysis) analysis = hwtos_analyze(x, cfg.hwtos);
            r = hwtos_decide(*analysis, cfg.gamma, m == TestMethod::hwtos_bonferroni ? Control::bonferroni : Control::fdr);
        }
        o.reject.push_back(r.reject);
        o.significant.push_back(m == TestMethod::psr ? -1 : static_cast<int>(r.significant.size()));
        o.p_value.push_back(r.overall_p);
    }
    return o;
}

inline ReplicationOutcome run_replication(const McConfig& cfg, const ModelSpec& spec, std::size_t index) {
    const auto x = simulate(spec, cfg.T, replication_seed(cfg.master_seed, index));
    return run_tests(x, cfg);
}

inline void validate(const McConfig& cfg) {
    if (cfg.N < 1) throw InputError("N must be at least 1");
    if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) throw InputError("gamma must lie in [0, 1)");
    if (cfg.methods.empty()) throw InputError("no test methods selected");
    require_dyadic_length(cfg.T);
    std::set<TestMethod> seen(cfg.methods.begin(), cfg.methods.end());
    if (seen.size() != cfg.methods.size()) throw InputError("duplicate test method");
}

/// Aggregate outcomes in index order.
inline std::vector<MethodSummary> summarize(const McConfig& cfg, const std::vector<ReplicationOutcome>& outcomes) {
    std::vector<MethodSummary> out;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        MethodSummary s;
        s.method = cfg.methods[m];
        s.n_tests = s.method == TestMethod::psr ? 1 : hwtos_test_count(cfg.T, cfg.hwtos);
        for (const auto& o : outcomes) {
            if (o.reject[m]) ++s.rejections;
            if (s.method != TestMethod::psr) {
                const auto c = static_cast<std::size_t>(o.significant[m]);
                if (s.significant_histogram.size() <= c) s.significant_histogram.resize(c + 1, 0);
                ++s.significant_histogram[c];
            }
        }
        s.rate = static_cast<double>(s.rejections) / static_cast<double>(outcomes.size());
        s.standard_error = binomial_se(s.rate, static_cast<int>(outcomes.size()));
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const HwtosOptions& o) {
    return {{"smoothing_halfwidth", o.smoothing_halfwidth},
            {"retained", o.retained},
            {"spectral_levels", o.spectral_levels},
            {"level_rule", o.level_rule == SpectralLevelRule::finest ? "finest" : "coarsest-retained"},
            {"max_haar_coefficients", o.max_haar_coefficients},
            {"variance_inflation", o.variance_inflation},
            {"bias_correct", o.bias_correct}};
}

inline nlohmann::json to_json(const PsrOptions& o) {
    return {{"blocks", o.blocks},
            {"tapers", o.tapers},
            {"first_frequency", o.first_frequency},
            {"frequency_spacing", o.frequency_spacing},
            {"log_floor", o.log_floor}};
}

inline nlohmann::json to_json(const McConfig& c) {
    nlohmann::json methods = nlohmann::json::array();
    for (auto m : c.methods) methods.push_back(to_string(m));
    return {{"model", c.model},     {"N", c.N},
            {"T", c.T},             {"gamma", c.gamma},
            {"methods", methods},   {"master_seed", c.master_seed},
            {"hwtos", to_json(c.hwtos)}, {"psr", to_json(c.psr)}};
}

inline nlohmann::json to_json(const MethodSummary& s) {
    nlohmann::json j{{"method", to_string(s.method)},
                     {"rejections", s.rejections},
                     {"rate", s.rate},
                     {"standard_error", s.standard_error},
                     {"n_tests", s.n_tests}};
    if (s.method != TestMethod::psr) j["significant_histogram"] = s.significant_histogram;
    return j;
}

/// Runtime statistics are left out unless asked for, so the default JSON is a
/// pure function of the configuration.
inline nlohmann::json to_json(const McResult& r, bool include_runtime = false) {
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& s : r.methods) methods.push_back(to_json(s));
    nlohmann::json j{{"config", to_json(r.config)}, {"results", methods}};
    if (include_runtime) {
        j["runtime"] = {{"seconds", r.runtime.seconds},
                        {"per_replication_ms", r.runtime.per_replication_ms},
                        {"workers", r.runtime.workers},
                        {"resumed", r.runtime.resumed}};
    }
    return j;
}

inline nlohmann::json to_json(const ReplicationOutcome& o) {
    return {{"reject", o.reject}, {"significant", o.significant}, {"p", o.p_value}};
}

inline ReplicationOutcome outcome_from_json(const nlohmann::json& j) {
    return {j.at("reject").get<std::vector<bool>>(), j.at("significant").get<std::vector<int>>(),
            j.at("p").get<std::vector<double>>()};
}

inline nlohmann::json to_json(const TosReport& r) {
    nlohmann::json sig = nlohmann::json::array();
    for (const auto& c : r.significant) {
        sig.push_back({{"spectral_level", c.spectral_level},
                       {"haar_level", c.haar_level},
                       {"location", c.location},
                       {"statistic", c.statistic},
                       {"p_value", c.p_value}});
    }
    nlohmann::json j{{"method", to_string(r.method)}, {"gamma", r.nominal_size}, {"reject", r.reject},
                     {"n_tests", r.n_tests},          {"overall_p", r.overall_p}};
    if (r.method != TestMethod::psr) j["significant"] = sig;
    if (r.psr) {
        const auto& d = *r.psr;
        j["psr"] = {{"blocks", d.blocks},
                    {"block_length", d.block_length},
                    {"frequencies", d.frequencies},
                    {"tapers", d.tapers},
                    {"time_statistic", d.time_statistic},
                    {"time_df", d.time_df},
                    {"interaction_statistic", d.interaction_statistic},
                    {"interaction_df", d.interaction_df},
                    {"interaction_p", d.interaction_p}};
    }
    return j;
}

// ---------------------------------------------------------------------------
// Event log

/// JSON-lines progress log.  A study writes a "start" line, a "checkpoint"
/// line after every block of replications (with their outcomes), and a
/// "done" line.  Re-running with the same configuration and log file picks up
/// after the last checkpoint.
class EventLog {
public:
    static constexpr std::size_t checkpoint_every = 100;

    EventLog() = default;
    explicit EventLog(std::string path) : path_(std::move(path)) {}

    bool enabled() const noexcept { return !path_.empty(); }

    /// Outcomes recorded by an earlier run of the same study, by index.
    std::vector<std::optional<ReplicationOutcome>> resume(const nlohmann::json& config, std::size_t N) {
        std::vector<std::optional<ReplicationOutcome>> done(N);
        if (!enabled()) return done;
        std::ifstream in(path_);
        if (!in) return done;
        std::string line;
        bool matched = false;
        long lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error&) {
                break;  // torn final line from an interrupted run
            }
            const auto event = j.value("event", "");
            if (event == "start") {
                matched = j.at("config") == config;
                if (!matched) throw FormatError("log '" + path_ + "' belongs to a different study", lineno);
            } else if (event == "checkpoint" && matched) {
                for (const auto& e : j.at("outcomes")) {
                    const auto i = e.at("index").get<std::size_t>();
                    if (i < N) done[i] = outcome_from_json(e);
                }
            }
        }
        return done;
    }

    void start(const nlohmann::json& config, bool fresh) {
        if (!enabled()) return;
        out_.open(path_, fresh ? std::ios::trunc : std::ios::app);
        if (!out_) throw InputError("cannot write log '" + path_ + "'");
        write({{"event", "start"}, {"config", config}});
    }

    void checkpoint(std::size_t completed, const std::vector<ReplicationOutcome>& outcomes, std::size_t from,
                    std::size_t to) {
        if (!enabled()) return;
        nlohmann::json list = nlohmann::json::array();
        for (std::size_t i = from; i < to; ++i) {
            auto e = to_json(outcomes[i]);
            e["index"] = i;
            list.push_back(std::move(e));
        }
        write({{"event", "checkpoint"}, {"completed", completed}, {"outcomes", list}});
    }

    void done(const nlohmann::json& result) {
        if (!enabled()) return;
        write({{"event", "done"}, {"result", result}});
    }

private:
    void write(const nlohmann::json& j) {
        out_ << j.dump() << '\n';
        out_.flush();
    }

    std::string path_;
    std::ofstream out_;
};

namespace detail {

inline McResult run_study(const McConfig& cfg, EventLog* log) {
    validate(cfg);
    const ModelSpec spec = preset(cfg.model);
    const auto N = static_cast<std::size_t>(cfg.N);
    const int workers = resolve_workers(cfg.workers);
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg_json = to_json(cfg);

    std::vector<std::optional<ReplicationOutcome>> prior(N);
    if (log) prior = log->resume(cfg_json, N);
    const bool any_prior = std::any_of(prior.begin(), prior.end(), [](const auto& o) { return o.has_value(); });
    if (log) log->start(cfg_json, !any_prior);

    McResult r;
    r.config = cfg;
    r.outcomes.resize(N);
    int resumed = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (prior[i]) {
            r.outcomes[i] = *prior[i];
            ++resumed;
        }
    }
    for (std::size_t from = 0; from < N; from += EventLog::checkpoint_every) {
        const std::size_t to = std::min(N, from + EventLog::checkpoint_every);
        std::vector<std::size_t> todo;
        for (std::size_t i = from; i < to; ++i) {
            if (!prior[i]) todo.push_back(i);
        }
        if (todo.empty()) continue;
        parallel_for(0, todo.size(), workers,
                     [&](std::size_t k) { r.outcomes[todo[k]] = run_replication(cfg, spec, todo[k]); });
        if (log) log->checkpoint(to, r.outcomes, from, to);
    }
    r.methods = summarize(cfg, r.outcomes);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.runtime = {secs, 1000.0 * secs / static_cast<double>(std::max<std::size_t>(1, N - resumed)), workers, resumed};
    if (log) log->done(to_json(r));
    return r;
}

}  // namespace detail

inline bool is_power_preset(std::string_view name) {
    return name.size() == 2 && name[0] == 'P' && name[1] >= '1' && name[1] <= '4';
}

/// Empirical size on a stationary S/SHD/SHT preset.
inline McResult run_size_study(const McConfig& cfg, EventLog* log = nullptr) {
    (void)preset(cfg.model);  // unknown names raise here
    if (!is_stationary_preset(cfg.model) || cfg.model.starts_with("AC")) {
        throw InputError("size study needs a stationary preset (S, SHD or SHT family), got '" + cfg.model + "'");
    }
    return detail::run_study(cfg, log);
}

/// Empirical power on P1..P4.
inline McResult run_power_study(const McConfig& cfg, EventLog* log = nullptr) {
    (void)preset(cfg.model);
    if (!is_power_preset(cfg.model)) throw InputError("power study needs one of P1..P4, got '" + cfg.model + "'");
    return detail::run_study(cfg, log);
}

// ---------------------------------------------------------------------------
// Localized autocovariance sampling studies

/// Closed-form autocovariance alpha^tau / (1 - alpha^2) of a unit-innovation
/// AR(1).
inline double ar1_autocovariance(double alpha, int tau) {
    return std::pow(alpha, tau) / (1.0 - alpha * alpha);
}

/// Reference c(z, tau) for the AR(1)-type presets, if one exists: the AR(1)
/// closed form at the local coefficient.
inline std::optional<double> reference_lacv(const ModelSpec& spec, double z, std::size_t T, int tau) {
    if (const auto* a = std::get_if<Arma>(&spec)) {
        if (a->ma().empty() && a->ar().size() <= 1 && a->innovations().kind == InnovationDist::Kind::gaussian) {
            return ar1_autocovariance(a->ar().empty() ? 0.0 : a->ar()[0], tau);
        }
        return std::nullopt;
    }
    if (const auto* v = std::get_if<Tvar1>(&spec)) {
        const auto t = static_cast<std::size_t>(std::lround(z * static_cast<double>(T)));
        return ar1_autocovariance(v->alpha(std::clamp<std::size_t>(t, 1, T), T), tau);
    }
    return std::nullopt;
}

struct NormalityConfig {
    std::string model = "AC2";
    double z = 200.0 / 512.0;
    std::vector<int> lags{0, 1};
    std::vector<std::size_t> T_list{512, 1024, 2048, 4096};
    int N = 1000;
    std::uint64_t master_seed = 1;
    int workers = 0;
};

struct NormalityCell {
    std::size_t T = 0;
    int lag = 0;
    std::vector<double> sample;
    Moments moments;
    DensityCurve density;
    std::optional<double> reference;
};

struct NormalityResult {
    NormalityConfig config;
    std::vector<NormalityCell> cells;  ///< T-major, then lag

    const NormalityCell& cell(std::size_t T, int lag) const {
        for (const auto& c : cells) {
            if (c.T == T && c.lag == lag) return c;
        }
        throw InputError("no such cell");
    }
};

/// Seed of replication i at length T in a normality study.
inline Seed normality_seed(std::uint64_t master, std::size_t T, std::size_t i) {
    return Seed{mix64(master ^ mix64(T)), i};
}

inline NormalityResult run_normality_study(const NormalityConfig& cfg) {
    if (cfg.N < 2) throw InputError("normality study needs N >= 2");
    if (cfg.lags.empty()) throw InputError("no lags selected");
    for (int l : cfg.lags) {
        if (l < 0 || l > 3) throw InputError("normality study lags must lie in 0..3");
    }
    for (auto T : cfg.T_list) {
        if (T != 512 && T != 1024 && T != 2048 && T != 4096) {
            throw InputError("normality study lengths must be among 512, 1024, 2048, 4096");
        }
    }
    const ModelSpec spec = preset(cfg.model);
    const int lag_max = *std::max_element(cfg.lags.begin(), cfg.lags.end());
    const int workers = resolve_workers(cfg.workers);
    NormalityResult res;
    res.config = cfg;
    for (auto T : cfg.T_list) {
        std::vector<LacvEstimate> est(static_cast<std::size_t>(cfg.N));
        parallel_for(0, est.size(), workers, [&](std::size_t i) {
            est[i] = lacv(simulate(spec, T, normality_seed(cfg.master_seed, T, i)), cfg.z, lag_max);
        });
        for (int lag : cfg.lags) {
            NormalityCell c;
            c.T = T;
            c.lag = lag;
            for (const auto& e : est) c.sample.push_back(e.c_hat[static_cast<std::size_t>(lag)]);
            c.moments = sample_moments(c.sample);
            c.density = kde(c.sample);
            c.reference = reference_lacv(spec, cfg.z, T, lag);
            res.cells.push_back(std::move(c));
        }
    }
    return res;
}

inline nlohmann::json to_json(const NormalityResult& r) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
        nlohmann::json j{{"T", c.T},
                         {"lag", c.lag},
                         {"mean", c.moments.mean},
                         {"sd", c.moments.sd},
                         {"skewness", c.moments.skewness},
                         {"excess_kurtosis", c.moments.excess_kurtosis},
                         {"bandwidth", c.density.bandwidth}};
        j["reference"] = c.reference ? nlohmann::json(*c.reference) : nlohmann::json(nullptr);
        cells.push_back(std::move(j));
    }
    std::vector<std::size_t> Ts(r.config.T_list.begin(), r.config.T_list.end());
    return {{"config",
             {{"model", r.config.model},
              {"z", r.config.z},
              {"lags", r.config.lags},
              {"T", Ts},
              {"N", r.config.N},
              {"master_seed", r.config.master_seed}}},
            {"cells", cells}};
}

struct CoverageConfig {
    std::string model = "AC1";
    std::size_t T = 512;
    double z = 100.0 / 512.0;
    int lag_max = 1;
    int N = 200;
    std::uint64_t master_seed = 1;
    /// Compare on c(z, tau)/c(z, 0) instead of c(z, tau).
    bool correlation = false;
    /// Target per lag 0..lag_max.
    std::vector<double> target;
    int workers = 0;
};

struct CoverageResult {
    std::vector<int> covered;  ///< per lag
    int N = 0;

    double rate(int lag) const { return static_cast<double>(covered.at(static_cast<std::size_t>(lag))) / N; }
};

/// Fraction of replications whose +-2 SE interval contains the target.
inline CoverageResult run_coverage_study(const CoverageConfig& cfg) {
    if (cfg.N < 1) throw InputError("N must be at least 1");
    if (cfg.target.size() != static_cast<std::size_t>(cfg.lag_max) + 1) {
        throw InputError("coverage study needs one target per lag");
    }
    const ModelSpec spec = preset(cfg.model);
    std::vector<std::vector<char>> hit(static_cast<std::size_t>(cfg.N));
    parallel_for(0, hit.size(), resolve_workers(cfg.workers), [&](std::size_t i) {
        const auto e = lacv(simulate(spec, cfg.T, replication_seed(cfg.master_seed, i)), cfg.z, cfg.lag_max);
        auto& h = hit[i];
        h.assign(cfg.target.size(), 0);
        for (std::size_t l = 0; l < cfg.target.size(); ++l) {
            if (cfg.correlation) {
                if (!e.as_correlation) continue;
                h[l] = e.as_correlation->ci_low[l] <= cfg.target[l] && cfg.target[l] <= e.as_correlation->ci_high[l];
            } else {
                h[l] = e.ci_low[l] <= cfg.target[l] && cfg.target[l] <= e.ci_high[l];
            }
        }
    });
    CoverageResult r;
    r.N = cfg.N;
    r.covered.assign(cfg.target.size(), 0);
    for (const auto& h : hit) {
        for (std::size_t l = 0; l < h.size(); ++l) r.covered[l] += h[l];
    }
    return r;
}

// ---------------------------------------------------------------------------
// Tables

/// Rows = models, columns PSR, HWTOS(Bon), HWTOS(FDR); rates in percent.
/// Methods a study did not run are left blank.
template <class Format>
void write_rate_table_csv(std::ostream& os, const std::vector<McResult>& rows, Format&& fmt) {
    const TestMethod cols[] = {TestMethod::psr, TestMethod::hwtos_bonferroni, TestMethod::hwtos_fdr};
    os << "model,PSR,HWTOS(Bon),HWTOS(FDR)\n";
    for (const auto& r : rows) {
        os << r.config.model;
        if (r.config.T != 512) os << "@T=" << r.config.T;
        for (auto m : cols) {
            os << ',';
            for (const auto& s : r.methods) {
                if (s.method == m) os << fmt(100.0 * s.rate);
            }
        }
        os << '\n';
    }
}

}  // namespace lsw

#endif  // LSW_HARNESS_HPP
