#pragma once

// Ledger rows, per-UTC-day aggregation and summary statistics.

#include "rrl/common.hpp"
#include "rrl/data.hpp"
#include "rrl/market.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace rrl {

struct StepRecord {
    std::int64_t ts = 0;
    double position = 0.0;  ///< realised position after the gate
    bool gated = false;     ///< forced flat
    PnlBreakdown pnl;       ///< realised reward
    /// Expected-reward moments and utility in force when the position was
    /// chosen; the gate reads `mu`.
    double mu = 0.0;
    double sigma2 = 0.0;
    double utility = 0.0;
};

/// count / mean / std / min / quartiles / max / sum of a sample. Sample
/// standard deviation (n - 1); 0 for fewer than two values. Quartiles use
/// linear interpolation between order statistics.
struct DistributionStats {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double q25 = 0.0;
    double q50 = 0.0;
    double q75 = 0.0;
    double max = 0.0;
    double sum = 0.0;
};

inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline DistributionStats describe(std::span<const double> values) {
    DistributionStats d;
    d.count = values.size();
    if (values.empty()) return d;
    for (double v : values) d.sum += v;
    d.mean = d.sum / static_cast<double>(d.count);
    if (d.count > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - d.mean) * (v - d.mean);
        d.stddev = std::sqrt(ss / static_cast<double>(d.count - 1));
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    d.min = sorted.front();
    d.max = sorted.back();
    d.q25 = quantile_sorted(sorted, 0.25);
    d.q50 = quantile_sorted(sorted, 0.50);
    d.q75 = quantile_sorted(sorted, 0.75);
    return d;
}

/// Standard error of the mean and its 95% normal interval.
struct MeanInterval {
    double se = 0.0;
    double lb = 0.0;
    double ub = 0.0;
};

inline MeanInterval mean_interval(const DistributionStats& d) {
    MeanInterval m;
    if (d.count == 0) return m;
    m.se = d.stddev / std::sqrt(static_cast<double>(d.count));
    m.lb = d.mean - 1.96 * m.se;
    m.ub = d.mean + 1.96 * m.se;
    return m;
}

struct degenerate_volatility : numerical_error {
    using numerical_error::numerical_error;
};

inline const double kTradingDaysAnnualisation = std::sqrt(252.0);

/// annualisation * (mean - baseline) / std over per-day net returns.
inline double information_ratio(std::span<const double> daily, double baseline = 0.0,
                                double annualisation = kTradingDaysAnnualisation) {
    if (daily.size() < 2) throw degenerate_volatility("information_ratio: need at least two days");
    const auto d = describe(daily);
    if (!(d.stddev > 0.0)) throw degenerate_volatility("information_ratio: zero dispersion");
    return annualisation * (d.mean - baseline) / d.stddev;
}

struct DailyRow {
    std::int64_t day = 0;  ///< UTC day number
    std::size_t steps = 0;
    double position = 0.0;  ///< mean realised position over the day
    double price = 0.0;
    double execution = 0.0;
    double carry = 0.0;
    double pnl = 0.0;
};

struct DailyStats {
    std::vector<DailyRow> rows;
    DistributionStats position;
    DistributionStats execution;
    DistributionStats carry;
    DistributionStats pnl;

    [[nodiscard]] std::vector<double> pnl_series() const {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r.pnl);
        return v;
    }
};

/// Groups a time-ordered ledger by UTC day.
inline DailyStats aggregate_daily(std::span<const StepRecord> ledger) {
    DailyStats out;
    for (const auto& rec : ledger) {
        const auto day = utc_day(rec.ts);
        if (out.rows.empty() || out.rows.back().day != day) {
            detail::require(out.rows.empty() || day > out.rows.back().day,
                            "aggregate_daily: ledger is not time-ordered");
            out.rows.push_back(DailyRow{.day = day});
        }
        auto& row = out.rows.back();
        ++row.steps;
        row.position += rec.position;
        row.price += rec.pnl.price_pnl;
        row.execution += rec.pnl.execution;
        row.carry += rec.pnl.carry;
        row.pnl += rec.pnl.net;
    }
    std::vector<double> pos, exe, car, pnl;
    for (auto& row : out.rows) {
        row.position /= static_cast<double>(row.steps);
        pos.push_back(row.position);
        exe.push_back(row.execution);
        car.push_back(row.carry);
        pnl.push_back(row.pnl);
    }
    out.position = describe(pos);
    out.execution = describe(exe);
    out.carry = describe(car);
    out.pnl = describe(pnl);
    return out;
}

}  // namespace rrl
