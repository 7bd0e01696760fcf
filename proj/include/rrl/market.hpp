#pragma once

// Perpetual swap economics: quotes, basis, funding and the per-step reward
// split into price, execution and carry. All returns are relative
// (fractions of the reference price).

#include "rrl/common.hpp"

#include <algorithm>
#include <optional>

namespace rrl {

struct BookSample {
    std::int64_t ts = 0;  ///< Unix seconds, UTC.
    double bid = 0.0;
    double ask = 0.0;
    std::optional<double> index_price;
    /// Funding rate charged on the position held at this tick, if a funding
    /// event occurs here.
    std::optional<double> funding_rate;
    std::optional<double> last_traded;

    friend bool operator==(const BookSample&, const BookSample&) = default;
};

struct CostModel {
    double fee_rate = 0.0005;  ///< Taker fee, fraction of traded notional.
    double basis_cap = 0.0005;
    int funding_period_hours = 8;

    void validate() const {
        detail::require(fee_rate >= 0.0, "cost model: fee_rate must be >= 0");
        detail::require(basis_cap >= 0.0, "cost model: basis_cap must be >= 0");
        detail::require(funding_period_hours >= 1, "cost model: funding_period_hours must be >= 1");
    }
};

struct PnlBreakdown {
    double price_pnl = 0.0;
    double execution = 0.0;
    double carry = 0.0;
    double net = 0.0;
};

struct FundingInputs {
    double e_quote = 0.0;
    double e_base = 0.0;
    double premium = 0.0;
};

inline double mid(const BookSample& s) noexcept { return 0.5 * (s.bid + s.ask); }

/// Taker cost per unit of position change: half the spread relative to the
/// mid plus the exchange fee.
inline double half_spread_cost(const BookSample& s, double fee_rate) {
    const double m = mid(s);
    if (!(m > 0.0)) throw std::domain_error("half_spread_cost: mid price must be positive");
    return 0.5 * (s.ask - s.bid) / m + fee_rate;
}

inline double basis(double futures, double index) noexcept { return futures - index; }

inline double relative_basis(double futures, double index) {
    if (!(index > 0.0)) throw std::domain_error("relative_basis: index price must be positive");
    return (futures - index) / index;
}

inline double interest_differential(const FundingInputs& f, int period_hours) {
    detail::require(period_hours >= 1, "interest_differential: period must be >= 1");
    return (f.e_quote - f.e_base) / static_cast<double>(period_hours);
}

/// kappa = premium + clamp(e - premium, -cap, cap). Longs pay when positive.
inline double funding_rate(const FundingInputs& f, double basis_cap, int period_hours) {
    detail::require(basis_cap >= 0.0, "funding_rate: basis cap must be >= 0");
    const double e = interest_differential(f, period_hours);
    return f.premium + std::clamp(e - f.premium, -basis_cap, basis_cap);
}

/// Relative change of the reference price between consecutive ticks.
inline double relative_price_change(double prev_mid, double cur_mid) {
    if (!(prev_mid > 0.0)) throw std::domain_error("relative_price_change: previous mid must be positive");
    return (cur_mid - prev_mid) / prev_mid;
}

/// r = dp * f_prev - delta * |f_new - f_prev| - kappa * f_new.
inline PnlBreakdown step_reward(double prev_f, double new_f, double price_change, double delta,
                                double kappa) {
    PnlBreakdown out;
    out.price_pnl = price_change * prev_f;
    out.execution = -delta * std::abs(new_f - prev_f);
    out.carry = -kappa * new_f;
    out.net = out.price_pnl + out.execution + out.carry;
    return out;
}

}  // namespace rrl
