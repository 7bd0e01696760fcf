#include <gtest/gtest.h>

#include "rrl/backtest.hpp"
#include "rrl/data.hpp"
#include "rrl/montecarlo.hpp"

namespace rrl {
namespace {

BacktestConfig small_config() {
    BacktestConfig c;
    c.reservoir.n_hidden = 30;
    c.reservoir.n_back = 4;
    return c;
}

std::vector<BookSample> market(std::size_t n, std::uint64_t seed = 5) {
    SynthConfig s;
    s.volatility = 0.003;
    s.spread_jitter = 0.0001;
    s.premium_vol = 0.001;
    return synth_generate(s, seed, n);
}

TEST(Gate, ThresholdAtZero) {
    EXPECT_EQ(gate(0.0), GateDecision::trade_freely);
    EXPECT_EQ(gate(0.002), GateDecision::trade_freely);
    EXPECT_EQ(gate(-1e-9), GateDecision::force_flat);
}

TEST(Backtest, EmptyStream) {
    const std::vector<BookSample> none;
    const auto r = run(none, small_config(), 1);
    EXPECT_EQ(r.summary.n_steps, 0u);
    EXPECT_EQ(r.summary.total_return, 0.0);
    EXPECT_TRUE(r.summary.ir_degenerate);
}

TEST(Backtest, LedgerConservation) {
    const auto m = market(6000);
    const auto r = run(m, small_config(), 11);
    ASSERT_EQ(r.ledger.size(), m.size());
    double price = 0, exe = 0, carry = 0, net = 0;
    for (const auto& rec : r.ledger) {
        EXPECT_NEAR(rec.pnl.net, rec.pnl.price_pnl + rec.pnl.execution + rec.pnl.carry, 1e-15);
        price += rec.pnl.price_pnl;
        exe += rec.pnl.execution;
        carry += rec.pnl.carry;
        net += rec.pnl.net;
    }
    EXPECT_NEAR(r.summary.total_return, net, 1e-10);
    EXPECT_NEAR(r.summary.price_total, price, 1e-10);
    EXPECT_NEAR(r.summary.execution_total, exe, 1e-10);
    EXPECT_NEAR(r.summary.carry_total, carry, 1e-10);
    double daily = 0;
    for (const auto& row : r.daily.rows) daily += row.pnl;
    EXPECT_NEAR(daily, net, 1e-10);
}

TEST(Backtest, GatedStepsAreFlatAndPositionsBounded) {
    const auto m = market(6000, 8);
    const auto r = run(m, small_config(), 3);
    std::size_t gated = 0;
    for (const auto& rec : r.ledger) {
        EXPECT_LT(std::abs(rec.position), 1.0);
        EXPECT_EQ(rec.gated, rec.mu < 0.0);
        if (rec.mu < 0.0) {
            EXPECT_EQ(rec.position, 0.0);
            ++gated;
        }
    }
    EXPECT_EQ(gated, r.summary.gated_steps);
}

TEST(Backtest, FirstTickHasNoPriceChange) {
    const auto m = market(10);
    const auto r = run(m, small_config(), 3);
    EXPECT_EQ(r.ledger.front().pnl.price_pnl, 0.0);
}

TEST(Backtest, ZeroVolatilityMarketEarnsNothing) {
    SynthConfig s;
    s.volatility = 0.0;
    s.spread = 0.0;
    s.premium_vol = 0.0;
    s.e_quote = 0.0;
    BacktestConfig c = small_config();
    c.costs.fee_rate = 0.0;
    const auto m = synth_generate(s, 1, 3000);
    const auto r = run(m, c, 4);
    EXPECT_EQ(r.summary.total_return, 0.0);
    EXPECT_TRUE(r.summary.ir_degenerate);
    EXPECT_EQ(r.summary.ir, 0.0);
}

TEST(Backtest, DeterministicForSeed) {
    const auto m = market(3000);
    const auto a = run(m, small_config(), 21);
    const auto b = run(m, small_config(), 21);
    ASSERT_EQ(a.ledger.size(), b.ledger.size());
    for (std::size_t i = 0; i < a.ledger.size(); ++i) {
        EXPECT_EQ(a.ledger[i].position, b.ledger[i].position);
        EXPECT_EQ(a.ledger[i].pnl.net, b.ledger[i].pnl.net);
    }
    EXPECT_EQ(a.summary.total_return, b.summary.total_return);
    const auto c = run(m, small_config(), 22);
    EXPECT_NE(a.summary.total_return, c.summary.total_return);
}

TEST(Backtest, WeightsAreNotModified) {
    BacktestConfig c = small_config();
    ReservoirConfig rc = c.reservoir;
    rc.n_input = c.features.input_size();
    const auto w = ReservoirWeights::build(rc);
    const auto copy = w;
    run(market(2000), w, c);
    EXPECT_TRUE(w == copy);
}

TEST(Backtest, CostsOnlyReduceReturnOnFixedPositions) {
    // Repricing the same realised positions without execution costs can only
    // raise every step's reward.
    const auto m = market(4000);
    const auto r = run(m, small_config(), 9);
    double free = 0;
    for (const auto& rec : r.ledger) {
        EXPECT_LE(rec.pnl.net, rec.pnl.price_pnl + rec.pnl.carry);
        free += rec.pnl.price_pnl + rec.pnl.carry;
    }
    EXPECT_GE(free, r.summary.total_return);
}

TEST(Backtest, CarryOnlyOnFundingTicks) {
    const auto m = market(2000);
    const auto r = run(m, small_config(), 2);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i].funding_rate) {
            EXPECT_EQ(r.ledger[i].pnl.carry, 0.0);
        }
    }
}

TEST(Backtest, RejectsUnorderedStream) {
    auto m = market(10);
    std::swap(m[3], m[4]);
    EXPECT_THROW(run(m, small_config(), 1), data_error);
}

TEST(Backtest, SkipsCrossedQuotes) {
    auto m = market(100);
    std::swap(m[50].bid, m[50].ask);
    m[50].ask -= 1.0;
    const auto r = run(m, small_config(), 1, 3);
    EXPECT_EQ(r.summary.n_steps, 99u);
    EXPECT_EQ(r.summary.diagnostics.dropped_samples, 4u);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
    const auto m = market(1500);
    const auto one = monte_carlo(m, small_config(), 6, 42, 1);
    const auto many = monte_carlo(m, small_config(), 6, 42, 8);
    ASSERT_EQ(one.trials.size(), many.trials.size());
    for (std::size_t i = 0; i < one.trials.size(); ++i) {
        EXPECT_EQ(one.trials[i].seed, many.trials[i].seed);
        EXPECT_EQ(one.trials[i].ir, many.trials[i].ir);
        EXPECT_EQ(one.trials[i].total_return, many.trials[i].total_return);
    }
    EXPECT_EQ(one.ir.mean, many.ir.mean);
}

TEST(MonteCarlo, IdenticalSeedsCollapseInterval) {
    const auto m = market(1500);
    const std::vector<std::uint64_t> seeds(4, 77);
    const auto mc = monte_carlo(m, small_config(), seeds, 2);
    EXPECT_EQ(mc.failures, 0u);
    EXPECT_EQ(mc.total_return.stddev, 0.0);
    EXPECT_EQ(mc.total_return_mean.lb, mc.total_return.mean);
    EXPECT_EQ(mc.total_return_mean.ub, mc.total_return.mean);
}

TEST(MonteCarlo, NeedsTwoTrials) {
    const auto m = market(100);
    EXPECT_THROW(monte_carlo(m, small_config(), 1, 42), contract_error);
}

}  // namespace
}  // namespace rrl
