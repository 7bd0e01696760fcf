#pragma once

// Flat key/value run configuration. Every key has a default, may be set in a
// JSON config file and may be overridden on the command line; precedence is
// flags > file > defaults.

#include "rrl/backtest.hpp"
#include "rrl/data.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace rrl {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigKey {
    std::string name;
    nlohmann::json default_value;
    std::string help;
};

inline const std::vector<ConfigKey>& config_keys() {
    using nlohmann::json;
    static const std::vector<ConfigKey> keys = {
        {"seed", 42, "reservoir seed (Monte Carlo: base seed)"},
        {"out", "out", "output directory"},
        {"data", "", "input CSV (ts,bid,ask,index_price,funding_rate); empty = synthetic market"},
        {"n_hidden", 100, "reservoir units"},
        {"n_back", 10, "past positions fed back into the reservoir"},
        {"sparsity", 0.75, "probability a hidden weight is zeroed"},
        {"spectral_target", 0.99, "spectral radius of the hidden matrix, in (0, 1)"},
        {"risk_appetite", 1e-5, "utility variance weight lambda"},
        {"decay", 0.999, "EWMA decay / EKF forgetting tau"},
        {"ridge", 1.0, "initial precision is I / ridge"},
        {"fee_rate", 0.0005, "taker fee, fraction of traded notional"},
        {"basis_cap", 0.0005, "funding clamp on the interest/premium gap"},
        {"funding_period_hours", 8, "hours between funding events"},
        {"lookbacks", json::array({1, 5, 20, 60}), "log-mid return horizons in ticks"},
        {"include_spread", true, "relative spread feature"},
        {"include_relative_basis", true, "relative basis feature (needs index_price)"},
        {"include_funding", true, "last funding rate feature"},
        {"zscore_decay", 0.999, "EWMA decay of the feature z-scores"},
        {"feature_clip", 5.0, "z-score clip"},
        {"ir_baseline", 0.0, "daily baseline subtracted in the information ratio"},
        {"n_trials", 250, "Monte Carlo trials"},
        {"jobs", 1, "Monte Carlo worker threads"},
        {"synth_ticks", 525600, "synthetic ticks (525600 = five years of 5-minute bars)"},
        {"synth_seed", 7, "synthetic market seed"},
        {"synth_start_ts", 1577836800, "first synthetic timestamp, Unix seconds"},
        {"synth_interval_seconds", 300, "synthetic tick spacing"},
        {"synth_initial_mid", 10000.0, "synthetic starting mid"},
        {"synth_drift", 0.0, "log-drift of the mid per tick"},
        {"synth_volatility", 0.002, "log-volatility of the mid per tick"},
        {"synth_sine_amplitude", 0.0, "relative amplitude of a cyclical mid component"},
        {"synth_sine_period_ticks", 288.0, "period of the cyclical component"},
        {"synth_spread", 0.0001, "full relative spread"},
        {"synth_spread_jitter", 0.0, "random extra relative spread scale"},
        {"synth_e_quote", 0.0008, "quote-currency interest per funding period"},
        {"synth_e_base", 0.0, "base-currency interest per funding period"},
        {"synth_premium_mean", 0.0, "mean funding premium"},
        {"synth_premium_vol", 0.0002, "stationary std of the funding premium"},
        {"synth_premium_persistence", 0.99, "AR(1) persistence of the premium per tick"},
    };
    return keys;
}

inline nlohmann::json default_config_json() {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& k : config_keys()) j[k.name] = k.default_value;
    return j;
}

inline const ConfigKey* find_key(const std::string& name) {
    for (const auto& k : config_keys())
        if (k.name == name) return &k;
    return nullptr;
}

/// Converts a command-line string to the JSON type of the key's default.
inline nlohmann::json parse_override(const ConfigKey& key, const std::string& text) {
    const auto& d = key.default_value;
    try {
        if (d.is_string()) return text;
        if (d.is_boolean()) {
            if (text == "true" || text == "1") return true;
            if (text == "false" || text == "0") return false;
            throw config_error("");
        }
        if (d.is_number_integer()) {
            std::size_t used = 0;
            const long long v = std::stoll(text, &used);
            if (used != text.size()) throw config_error("");
            return v;
        }
        if (d.is_number()) {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) throw config_error("");
            return v;
        }
        if (d.is_array()) {
            if (!text.empty() && text.front() == '[') return nlohmann::json::parse(text);
            nlohmann::json arr = nlohmann::json::array();
            std::size_t start = 0;
            while (start <= text.size()) {
                const auto pos = text.find(',', start);
                const auto item = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
                if (!item.empty()) arr.push_back(std::stoll(item));
                if (pos == std::string::npos) break;
                start = pos + 1;
            }
            return arr;
        }
    } catch (const config_error&) {
    } catch (const std::exception&) {
    }
    throw config_error("invalid value '" + text + "' for --" + key.name);
}

/// Defaults overlaid with `file` and then `overrides`; unknown keys rejected.
inline nlohmann::json merge_config(const nlohmann::json& file, const nlohmann::json& overrides) {
    nlohmann::json j = default_config_json();
    for (const auto* layer : {&file, &overrides}) {
        if (layer->is_null()) continue;
        if (!layer->is_object()) throw config_error("config must be a JSON object");
        for (const auto& [k, v] : layer->items()) {
            if (!find_key(k)) throw config_error("unknown config key '" + k + "'");
            j[k] = v;
        }
    }
    return j;
}

inline nlohmann::json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config file: ") + e.what());
    }
}

struct RunConfig {
    BacktestConfig backtest;
    SynthConfig synth;
    std::size_t synth_ticks = 525'600;
    std::uint64_t synth_seed = 7;
    std::string data;
    std::uint64_t seed = 42;
    std::string out = "out";
    std::size_t n_trials = 250;
    std::size_t jobs = 1;
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        auto& bt = c.backtest;
        c.seed = j.at("seed").get<std::uint64_t>();
        c.out = j.at("out").get<std::string>();
        c.data = j.at("data").get<std::string>();
        bt.reservoir.n_hidden = j.at("n_hidden").get<std::size_t>();
        bt.reservoir.n_back = j.at("n_back").get<std::size_t>();
        bt.reservoir.sparsity = j.at("sparsity").get<double>();
        bt.reservoir.spectral_target = j.at("spectral_target").get<double>();
        bt.agent.risk_appetite = j.at("risk_appetite").get<double>();
        bt.agent.decay = j.at("decay").get<double>();
        bt.agent.ridge = j.at("ridge").get<double>();
        bt.costs.fee_rate = j.at("fee_rate").get<double>();
        bt.costs.basis_cap = j.at("basis_cap").get<double>();
        bt.costs.funding_period_hours = j.at("funding_period_hours").get<int>();
        bt.features.lookbacks = j.at("lookbacks").get<std::vector<int>>();
        bt.features.include_spread = j.at("include_spread").get<bool>();
        bt.features.include_relative_basis = j.at("include_relative_basis").get<bool>();
        bt.features.include_funding = j.at("include_funding").get<bool>();
        bt.features.zscore_decay = j.at("zscore_decay").get<double>();
        bt.features.clip = j.at("feature_clip").get<double>();
        bt.ir_baseline = j.at("ir_baseline").get<double>();
        c.n_trials = j.at("n_trials").get<std::size_t>();
        c.jobs = j.at("jobs").get<std::size_t>();
        c.synth_ticks = j.at("synth_ticks").get<std::size_t>();
        c.synth_seed = j.at("synth_seed").get<std::uint64_t>();
        auto& s = c.synth;
        s.start_ts = j.at("synth_start_ts").get<std::int64_t>();
        s.interval_seconds = j.at("synth_interval_seconds").get<int>();
        s.initial_mid = j.at("synth_initial_mid").get<double>();
        s.drift = j.at("synth_drift").get<double>();
        s.volatility = j.at("synth_volatility").get<double>();
        s.sine_amplitude = j.at("synth_sine_amplitude").get<double>();
        s.sine_period_ticks = j.at("synth_sine_period_ticks").get<double>();
        s.spread = j.at("synth_spread").get<double>();
        s.spread_jitter = j.at("synth_spread_jitter").get<double>();
        s.e_quote = j.at("synth_e_quote").get<double>();
        s.e_base = j.at("synth_e_base").get<double>();
        s.premium_mean = j.at("synth_premium_mean").get<double>();
        s.premium_vol = j.at("synth_premium_vol").get<double>();
        s.premium_persistence = j.at("synth_premium_persistence").get<double>();
        s.basis_cap = bt.costs.basis_cap;
        s.funding_period_hours = bt.costs.funding_period_hours;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    try {
        c.backtest.validate();
        ReservoirConfig rc = c.backtest.reservoir;
        rc.n_input = c.backtest.features.input_size();
        rc.validate();
        c.synth.validate();
    } catch (const contract_error& e) {
        throw config_error(e.what());
    }
    return c;
}

}  // namespace rrl
