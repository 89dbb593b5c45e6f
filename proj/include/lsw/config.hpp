#ifndef LSW_CONFIG_HPP
#define LSW_CONFIG_HPP

// Study configuration files (TOML or JSON).  Both formats are read into the
// same JSON tree; the canonical JSON written back by to_json() parses to an
// identical configuration.
//
//   study = "size"            # size | power | normality
//   models = ["S1", "S2"]     # or model = "S1"
//   T = 512                   # or a list
//   N = 1000
//   gamma = 0.05
//   methods = ["psr", "hwtos-bonferroni", "hwtos-fdr"]
//   master_seed = 1
//   [hwtos]                   # optional overrides of HwtosOptions
//   [psr]                     # optional overrides of PsrOptions
//
// Normality studies use `z` and `lags` in place of gamma and methods.

#define TOML_EXCEPTIONS 1
#define TOML_ENABLE_FORMATTERS 1
#include <toml.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lsw/error.hpp"
#include "lsw/harness.hpp"
#include "lsw/stationarity.hpp"

namespace lsw {

struct StudyConfig {
    std::string study = "size";
    std::vector<std::string> models{"S1"};
    std::vector<std::size_t> T{512};
    int N = 1000;
    double gamma = 0.05;
    std::vector<TestMethod> methods{TestMethod::psr, TestMethod::hwtos_bonferroni, TestMethod::hwtos_fdr};
    std::uint64_t master_seed = 1;
    HwtosOptions hwtos;
    PsrOptions psr;
    double z = 200.0 / 512.0;
    std::vector<int> lags{0, 1};

    /// One McConfig per (model, T), model-major.
    std::vector<McConfig> expand(int workers = 0) const {
        std::vector<McConfig> out;
        for (const auto& m : models) {
            for (auto t : T) {
                McConfig c;
                c.model = m;
                c.T = t;
                c.N = N;
                c.gamma = gamma;
                c.methods = methods;
                c.master_seed = master_seed;
                c.hwtos = hwtos;
                c.psr = psr;
                c.workers = workers;
                out.push_back(std::move(c));
            }
        }
        return out;
    }

    NormalityConfig normality(int workers = 0) const {
        if (models.size() != 1) throw InputError("normality study takes exactly one model");
        return NormalityConfig{models.front(), z, lags, T, N, master_seed, workers};
    }
};

namespace detail {

template <class T>
std::vector<T> one_or_many(const nlohmann::json& j) {
    if (j.is_array()) return j.get<std::vector<T>>();
    return {j.get<T>()};
}

inline void read_hwtos(const nlohmann::json& j, HwtosOptions& o) {
    for (const auto& [k, v] : j.items()) {
        if (k == "smoothing_halfwidth") o.smoothing_halfwidth = v.get<int>();
        else if (k == "retained") o.retained = v.get<int>();
        else if (k == "spectral_levels") o.spectral_levels = v.get<int>();
        else if (k == "level_rule") {
            const auto s = v.get<std::string>();
            if (s == "finest") o.level_rule = SpectralLevelRule::finest;
            else if (s == "coarsest-retained") o.level_rule = SpectralLevelRule::coarsest_retained;
            else throw FormatError("hwtos.level_rule must be 'finest' or 'coarsest-retained'");
        } else if (k == "max_haar_coefficients") o.max_haar_coefficients = v.get<int>();
        else if (k == "variance_inflation") o.variance_inflation = v.get<double>();
        else if (k == "bias_correct") o.bias_correct = v.get<bool>();
        else throw FormatError("unknown key hwtos." + k);
    }
}

inline void read_psr(const nlohmann::json& j, PsrOptions& o) {
    for (const auto& [k, v] : j.items()) {
        if (k == "blocks") o.blocks = v.get<int>();
        else if (k == "tapers") o.tapers = v.get<int>();
        else if (k == "first_frequency") o.first_frequency = v.get<int>();
        else if (k == "frequency_spacing") o.frequency_spacing = v.get<int>();
        else if (k == "log_floor") o.log_floor = v.get<double>();
        else throw FormatError("unknown key psr." + k);
    }
}

}  // namespace detail

inline StudyConfig study_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("configuration must be a table/object");
    StudyConfig c;
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "study") c.study = v.get<std::string>();
            else if (k == "model" || k == "models") c.models = detail::one_or_many<std::string>(v);
            else if (k == "T") c.T = detail::one_or_many<std::size_t>(v);
            else if (k == "N") c.N = v.get<int>();
            else if (k == "gamma") c.gamma = v.get<double>();
            else if (k == "methods") {
                c.methods.clear();
                for (const auto& m : v) c.methods.push_back(parse_method(m.get<std::string>()));
            } else if (k == "master_seed") c.master_seed = v.get<std::uint64_t>();
            else if (k == "hwtos") detail::read_hwtos(v, c.hwtos);
            else if (k == "psr") detail::read_psr(v, c.psr);
            else if (k == "z") c.z = v.get<double>();
            else if (k == "lags") c.lags = v.get<std::vector<int>>();
            else throw FormatError("unknown configuration key '" + k + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad configuration value: ") + e.what());
    }
    if (c.study != "size" && c.study != "power" && c.study != "normality") {
        throw FormatError("study must be size, power or normality");
    }
    if (c.models.empty()) throw FormatError("no models listed");
    if (c.T.empty()) throw FormatError("no series lengths listed");
    return c;
}

inline nlohmann::json to_json(const StudyConfig& c) {
    nlohmann::json j{{"study", c.study}, {"models", c.models}, {"T", c.T}, {"N", c.N}, {"master_seed", c.master_seed}};
    if (c.study == "normality") {
        j["z"] = c.z;
        j["lags"] = c.lags;
    } else {
        nlohmann::json methods = nlohmann::json::array();
        for (auto m : c.methods) methods.push_back(to_string(m));
        j["gamma"] = c.gamma;
        j["methods"] = methods;
        j["hwtos"] = to_json(c.hwtos);
        j["psr"] = to_json(c.psr);
    }
    return j;
}

inline nlohmann::json toml_to_json(const std::string& text, const std::string& source) {
    try {
        const auto tbl = toml::parse(text, source);
        std::ostringstream os;
        os << toml::json_formatter{tbl};
        return nlohmann::json::parse(os.str());
    } catch (const toml::parse_error& e) {
        throw FormatError(source + ": " + std::string(e.description()), static_cast<long>(e.source().begin.line));
    }
}

/// Reads a .toml or .json configuration file.
inline StudyConfig load_study_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open configuration '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    if (path.extension() == ".json") {
        try {
            return study_config_from_json(nlohmann::json::parse(buf.str()));
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(path.string() + ": " + e.what());
        }
    }
    return study_config_from_json(toml_to_json(buf.str(), path.string()));
}

}  // namespace lsw

#endif  // LSW_CONFIG_HPP
