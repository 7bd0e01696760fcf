#pragma once

// Sequential backtest: features -> reservoir -> readout -> gate -> ledger.

#include "rrl/agent.hpp"
#include "rrl/common.hpp"
#include "rrl/features.hpp"
#include "rrl/market.hpp"
#include "rrl/reservoir.hpp"
#include "rrl/stats.hpp"

#include <span>
#include <vector>

namespace rrl {

enum class GateDecision { trade_freely, force_flat };

/// Trade while the expected net reward is non-negative.
inline GateDecision gate(double mu) noexcept {
    return mu >= 0.0 ? GateDecision::trade_freely : GateDecision::force_flat;
}

struct BacktestConfig {
    ReservoirConfig reservoir;  ///< n_input and seed are filled in by run()
    AgentConfig agent;
    CostModel costs;
    FeatureSpec features;
    double ir_baseline = 0.0;

    void validate() const {
        agent.validate();
        costs.validate();
        features.validate();
    }
};

struct Diagnostics {
    std::size_t precision_resets = 0;
    std::size_t dropped_samples = 0;
    std::size_t non_finite_features = 0;
};

struct RunSummary {
    std::uint64_t seed = 0;
    std::size_t n_steps = 0;
    std::size_t n_days = 0;
    std::size_t gated_steps = 0;
    double total_return = 0.0;
    double price_total = 0.0;
    double execution_total = 0.0;
    double carry_total = 0.0;
    double ir = 0.0;
    /// Fewer than two days or zero daily dispersion; `ir` is reported as 0.
    bool ir_degenerate = false;
    double mean_position = 0.0;
    double turnover = 0.0;  ///< sum of |realised position change|
    Diagnostics diagnostics;
};

struct RunResult {
    RunSummary summary;
    std::vector<StepRecord> ledger;
    DailyStats daily;
};

/// Runs one backtest with the given reservoir weights. The weights are only
/// read. `dropped_upstream` is added to the dropped-sample diagnostic.
inline RunResult run(std::span<const BookSample> stream, const ReservoirWeights& weights,
                     const BacktestConfig& config, std::size_t dropped_upstream = 0) {
    config.validate();
    detail::require(weights.n_input() == config.features.input_size(),
                    "backtest: reservoir input width does not match the feature spec");

    RunResult out;
    auto& sum = out.summary;
    sum.seed = weights.config().seed;
    sum.diagnostics.dropped_samples = dropped_upstream;
    out.ledger.reserve(stream.size());

    FeatureBuilder features(config.features);
    ReservoirState reservoir(weights);
    Agent agent(weights.n_input() + weights.n_hidden() + weights.n_back(), weights.n_back(), config.agent);

    std::optional<double> prev_mid;
    std::optional<std::int64_t> prev_ts;
    double realised_prev = 0.0;

    for (const auto& s : stream) {
        if (prev_ts && s.ts <= *prev_ts) throw data_error("backtest: stream is not strictly time-ordered");
        if (!(s.bid > 0.0) || !(s.ask >= s.bid)) {
            ++sum.diagnostics.dropped_samples;
            continue;
        }
        prev_ts = s.ts;

        const Vector u = features.next(s);
        reservoir.update(u, weights);
        const Vector z = reservoir.augmented(u);

        const double m = mid(s);
        RewardTerms terms;
        terms.price_change = prev_mid ? relative_price_change(*prev_mid, m) : 0.0;
        terms.delta = half_spread_cost(s, config.costs.fee_rate);
        terms.kappa = s.funding_rate.value_or(0.0);
        prev_mid = m;

        const MomentState before = agent.moments();
        const double desired = agent.act(z);
        const bool flat = gate(before.mean) == GateDecision::force_flat;
        const double realised = flat ? 0.0 : desired;

        StepRecord rec;
        rec.ts = s.ts;
        rec.position = realised;
        rec.gated = flat;
        rec.pnl = step_reward(realised_prev, realised, terms.price_change, terms.delta, terms.kappa);
        rec.mu = before.mean;
        rec.sigma2 = before.variance;
        rec.utility = utility(before, config.agent.risk_appetite);

        // The readout keeps learning from its own desired positions while the
        // book is held flat; otherwise the moments could never recover.
        const UtilityReport report = agent.learn(terms);
        if (report.precision_reset) ++sum.diagnostics.precision_resets;
        reservoir.push_feedback(desired);

        sum.turnover += std::abs(realised - realised_prev);
        sum.mean_position += realised;
        sum.price_total += rec.pnl.price_pnl;
        sum.execution_total += rec.pnl.execution;
        sum.carry_total += rec.pnl.carry;
        sum.total_return += rec.pnl.net;
        if (flat) ++sum.gated_steps;
        realised_prev = realised;
        out.ledger.push_back(rec);
    }

    sum.n_steps = out.ledger.size();
    if (sum.n_steps > 0) sum.mean_position /= static_cast<double>(sum.n_steps);
    sum.diagnostics.non_finite_features = features.non_finite_count();
    out.daily = aggregate_daily(out.ledger);
    sum.n_days = out.daily.rows.size();
    try {
        const auto daily = out.daily.pnl_series();
        sum.ir = information_ratio(daily, config.ir_baseline);
    } catch (const degenerate_volatility&) {
        sum.ir = 0.0;
        sum.ir_degenerate = true;
    }
    return out;
}

/// Builds the reservoir from `config` with `seed` and runs the backtest.
inline RunResult run(std::span<const BookSample> stream, const BacktestConfig& config, std::uint64_t seed,
                     std::size_t dropped_upstream = 0) {
    config.validate();
    ReservoirConfig rc = config.reservoir;
    rc.n_input = config.features.input_size();
    rc.seed = seed;
    const auto weights = ReservoirWeights::build(rc);
    return run(stream, weights, config, dropped_upstream);
}

}  // namespace rrl
