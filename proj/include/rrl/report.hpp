#pragma once

// Output artifacts: summary JSON, ledger CSV, daily statistics tables
// and Monte Carlo tables. Files are written atomically.

#include "rrl/backtest.hpp"
#include "rrl/data.hpp"
#include "rrl/montecarlo.hpp"
#include "rrl/stats.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace rrl {

/// Writes to `path.tmp` and renames over `path`.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline nlohmann::json to_json(const DistributionStats& d) {
    return {{"count", d.count}, {"mean", d.mean}, {"std", d.stddev}, {"min", d.min}, {"q25", d.q25},
            {"q50", d.q50},     {"q75", d.q75},   {"max", d.max},    {"sum", d.sum}};
}

inline nlohmann::json to_json(const RunSummary& s) {
    return {
        {"seed", s.seed},
        {"n_steps", s.n_steps},
        {"n_days", s.n_days},
        {"gated_steps", s.gated_steps},
        {"total_return", s.total_return},
        {"price_total", s.price_total},
        {"execution_total", s.execution_total},
        {"carry_total", s.carry_total},
        {"ir", s.ir},
        {"ir_degenerate", s.ir_degenerate},
        {"mean_position", s.mean_position},
        {"turnover", s.turnover},
        {"diagnostics",
         {{"precision_resets", s.diagnostics.precision_resets},
          {"dropped_samples", s.diagnostics.dropped_samples},
          {"non_finite_features", s.diagnostics.non_finite_features}}},
    };
}

/// Summary document: run summary, daily statistics and the resolved config.
inline std::string summary_document(const RunResult& r, const nlohmann::json& config_echo) {
    nlohmann::json j;
    j["summary"] = to_json(r.summary);
    j["daily"] = {{"position", to_json(r.daily.position)},
                  {"execution", to_json(r.daily.execution)},
                  {"carry", to_json(r.daily.carry)},
                  {"pnl", to_json(r.daily.pnl)}};
    j["config"] = config_echo;
    return j.dump(2) + "\n";
}

inline std::string ledger_csv(std::span<const StepRecord> ledger) {
    using detail::format_double;
    std::ostringstream out;
    out << "ts,position,gated,price_pnl,execution,carry,net,mu,sigma2,utility\n";
    for (const auto& r : ledger) {
        out << r.ts << ',' << format_double(r.position) << ',' << (r.gated ? 1 : 0) << ','
            << format_double(r.pnl.price_pnl) << ',' << format_double(r.pnl.execution) << ','
            << format_double(r.pnl.carry) << ',' << format_double(r.pnl.net) << ',' << format_double(r.mu)
            << ',' << format_double(r.sigma2) << ',' << format_double(r.utility) << '\n';
    }
    return out.str();
}

/// Rows count/mean/std/min/25%/50%/75%/max/sum/ir by columns
/// position/execution/carry/pnl. Cells that carry no meaning are empty.
inline std::string daily_stats_csv(const DailyStats& d, const RunSummary& s) {
    using detail::format_double;
    std::ostringstream out;
    out << "stat,position,execution,carry,pnl\n";
    const DistributionStats* cols[] = {&d.position, &d.execution, &d.carry, &d.pnl};
    auto row = [&](const char* name, auto get, bool skip_position = false) {
        out << name;
        for (std::size_t i = 0; i < 4; ++i) {
            out << ',';
            if (!(skip_position && i == 0)) out << get(*cols[i]);
        }
        out << '\n';
    };
    row("count", [](const DistributionStats& x) { return std::to_string(x.count); });
    row("mean", [](const DistributionStats& x) { return format_double(x.mean); });
    row("std", [](const DistributionStats& x) { return format_double(x.stddev); });
    row("min", [](const DistributionStats& x) { return format_double(x.min); });
    row("25%", [](const DistributionStats& x) { return format_double(x.q25); });
    row("50%", [](const DistributionStats& x) { return format_double(x.q50); });
    row("75%", [](const DistributionStats& x) { return format_double(x.q75); });
    row("max", [](const DistributionStats& x) { return format_double(x.max); });
    row("sum", [](const DistributionStats& x) { return format_double(x.sum); }, true);
    out << "ir,,,," << format_double(s.ir) << '\n';
    return out.str();
}

inline std::string daily_rows_csv(const DailyStats& d) {
    using detail::format_double;
    std::ostringstream out;
    out << "day_start_ts,steps,position,price,execution,carry,pnl\n";
    for (const auto& r : d.rows) {
        out << r.day * kSecondsPerDay << ',' << r.steps << ',' << format_double(r.position) << ','
            << format_double(r.price) << ',' << format_double(r.execution) << ',' << format_double(r.carry)
            << ',' << format_double(r.pnl) << '\n';
    }
    return out.str();
}

inline std::string trials_csv(const MonteCarloSummary& mc) {
    using detail::format_double;
    std::ostringstream out;
    out << "trial,seed,ok,ir,total_return,error\n";
    for (const auto& t : mc.trials) {
        out << t.index << ',' << t.seed << ',' << (t.ok ? 1 : 0) << ',' << format_double(t.ir) << ','
            << format_double(t.total_return) << ',';
        for (char c : t.error) out << (c == ',' || c == '\n' ? ' ' : c);
        out << '\n';
    }
    return out.str();
}

/// Rows count..max plus se(mean), lb(mean), ub(mean) by columns ir and
/// total_return.
inline std::string montecarlo_table_csv(const MonteCarloSummary& mc) {
    using detail::format_double;
    std::ostringstream out;
    out << "stat,ir,total_return\n";
    const auto& a = mc.ir;
    const auto& b = mc.total_return;
    out << "count," << a.count << ',' << b.count << '\n';
    auto row = [&](const char* name, double x, double y) {
        out << name << ',' << format_double(x) << ',' << format_double(y) << '\n';
    };
    row("mean", a.mean, b.mean);
    row("std", a.stddev, b.stddev);
    row("min", a.min, b.min);
    row("25%", a.q25, b.q25);
    row("50%", a.q50, b.q50);
    row("75%", a.q75, b.q75);
    row("max", a.max, b.max);
    row("se(mean)", mc.ir_mean.se, mc.total_return_mean.se);
    row("lb(mean)", mc.ir_mean.lb, mc.total_return_mean.lb);
    row("ub(mean)", mc.ir_mean.ub, mc.total_return_mean.ub);
    return out.str();
}

inline std::string montecarlo_document(const MonteCarloSummary& mc, const nlohmann::json& config_echo) {
    auto interval = [](const MeanInterval& m) { return nlohmann::json{{"se", m.se}, {"lb", m.lb}, {"ub", m.ub}}; };
    nlohmann::json j;
    j["trials"] = mc.trials.size();
    j["failures"] = mc.failures;
    j["ir"] = to_json(mc.ir);
    j["ir"]["mean_interval"] = interval(mc.ir_mean);
    j["total_return"] = to_json(mc.total_return);
    j["total_return"]["mean_interval"] = interval(mc.total_return_mean);
    j["config"] = config_echo;
    return j.dump(2) + "\n";
}

}  // namespace rrl
