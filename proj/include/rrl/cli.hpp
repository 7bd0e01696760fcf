#pragma once

// Command-line front end: backtest, synth, montecarlo and inspect.

#include "rrl/backtest.hpp"
#include "rrl/config.hpp"
#include "rrl/data.hpp"
#include "rrl/montecarlo.hpp"
#include "rrl/report.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace rrl::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kDataError = 2,
    kConfigError = 3,
    kUsage = 64,
};

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline int fail(std::ostream& err, int code, const std::string& reason, const std::string& detail) {
    err << nlohmann::json{{"error", reason}, {"detail", detail}}.dump() << '\n';
    return code;
}

struct Invocation {
    std::optional<std::string> config_path;
    std::map<std::string, std::string> overrides;
};

inline nlohmann::json resolve(const Invocation& inv) {
    nlohmann::json file;
    if (inv.config_path) file = read_config_file(*inv.config_path);
    nlohmann::json flags = nlohmann::json::object();
    for (const auto& [k, v] : inv.overrides) flags[k] = parse_override(*find_key(k), v);
    return merge_config(file, flags);
}

struct MarketData {
    std::vector<BookSample> samples;
    std::size_t dropped = 0;
};

inline MarketData load_market(const RunConfig& c) {
    if (!c.data.empty()) {
        if (!std::filesystem::exists(c.data)) throw data_not_found("no such file: " + c.data);
        auto loaded = load_csv(c.data);
        return {std::move(loaded.samples), loaded.dropped()};
    }
    return {synth_generate(c.synth, c.synth_seed, c.synth_ticks), 0};
}

inline int cmd_backtest(const nlohmann::json& j, std::ostream& out) {
    const RunConfig c = run_config_from_json(j);
    const auto market = load_market(c);
    const auto result = run(market.samples, c.backtest, c.seed, market.dropped);
    const std::filesystem::path dir(c.out);
    atomic_write(dir / "summary.json", summary_document(result, j));
    atomic_write(dir / "ledger.csv", ledger_csv(result.ledger));
    atomic_write(dir / "daily_stats.csv", daily_stats_csv(result.daily, result.summary));
    atomic_write(dir / "daily.csv", daily_rows_csv(result.daily));
    out << "total_return=" << detail::format_double(result.summary.total_return)
        << " ir=" << detail::format_double(result.summary.ir) << " days=" << result.summary.n_days
        << " out=" << dir.string() << '\n';
    return kOk;
}

inline int cmd_synth(const nlohmann::json& j, std::ostream& out) {
    const RunConfig c = run_config_from_json(j);
    if (c.synth_ticks < 1) throw usage_error("synth_ticks must be >= 1");
    const auto samples = synth_generate(c.synth, c.synth_seed, c.synth_ticks);
    std::ostringstream csv;
    write_csv(csv, samples);
    const auto path = std::filesystem::path(c.out) / "market.csv";
    atomic_write(path, csv.str());
    out << "ticks=" << samples.size() << " out=" << path.string() << '\n';
    return kOk;
}

inline int cmd_montecarlo(const nlohmann::json& j, std::ostream& out) {
    const RunConfig c = run_config_from_json(j);
    if (c.n_trials < 2) throw usage_error("n_trials must be >= 2");
    const auto market = load_market(c);
    const auto mc = monte_carlo(market.samples, c.backtest, c.n_trials, c.seed, c.jobs, market.dropped);
    const std::filesystem::path dir(c.out);
    atomic_write(dir / "trials.csv", trials_csv(mc));
    atomic_write(dir / "montecarlo_table.csv", montecarlo_table_csv(mc));
    atomic_write(dir / "montecarlo.json", montecarlo_document(mc, j));
    out << montecarlo_table_csv(mc);
    return kOk;
}

inline int cmd_inspect(const nlohmann::json& j, std::ostream& out) {
    run_config_from_json(j);
    out << j.dump(2) << '\n';
    return kOk;
}

inline std::string key_help(const ConfigKey& k) {
    return k.help + " [default: " + (k.default_value.is_string() ? k.default_value.get<std::string>()
                                                                  : k.default_value.dump()) + "]";
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout,
                std::ostream& err = std::cerr) {
    CLI::App app{"Echo state network + recurrent reinforcement learning trading research engine"};
    app.require_subcommand(1);

    Invocation inv;
    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const nlohmann::json&, std::ostream&);
    };
    const Sub subs[] = {
        {"backtest", "run one backtest; writes summary.json, ledger.csv, daily_stats.csv, daily.csv", cmd_backtest},
        {"synth", "write a synthetic market CSV to <out>/market.csv", cmd_synth},
        {"montecarlo", "re-draw the reservoir per trial; writes trials.csv, montecarlo_table.csv, montecarlo.json",
         cmd_montecarlo},
        {"inspect", "print the resolved configuration", cmd_inspect},
    };

    std::map<std::string, std::string> raw;
    std::vector<std::pair<CLI::App*, const Sub*>> handles;
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", inv.config_path, "JSON config file");
        for (const auto& k : config_keys()) {
            sub->add_option_function<std::string>(
                "--" + k.name, [&raw, name = k.name](const std::string& v) { raw[name] = v; }, key_help(k));
        }
        handles.emplace_back(sub, &s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return fail(err, kUsage, "usage", e.what());
    }
    inv.overrides = raw;

    try {
        const auto j = resolve(inv);
        for (const auto& [sub, s] : handles)
            if (sub->parsed()) return s->fn(j, out);
        return fail(err, kUsage, "usage", "no subcommand");
    } catch (const data_not_found& e) {
        return fail(err, kDataError, "data_not_found", e.what());
    } catch (const data_error& e) {
        return fail(err, kDataError, "data_invalid", e.what());
    } catch (const config_error& e) {
        return fail(err, kConfigError, "config_invalid", e.what());
    } catch (const usage_error& e) {
        return fail(err, kUsage, "usage", e.what());
    } catch (const contract_error& e) {
        return fail(err, kConfigError, "config_invalid", e.what());
    } catch (const std::exception& e) {
        return fail(err, kFailure, "internal", e.what());
    }
}

}  // namespace rrl::cli
