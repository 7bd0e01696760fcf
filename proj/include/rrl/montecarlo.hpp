#pragma once

// Monte Carlo over reservoir initialisations: every trial re-draws the fixed
// reservoir weights from its own seed and backtests the same stream.

#include "rrl/backtest.hpp"
#include "rrl/stats.hpp"

#include <algorithm>
#include <atomic>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace rrl {

struct TrialResult {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    double ir = 0.0;
    double total_return = 0.0;
    std::string error;
};

struct MonteCarloSummary {
    std::vector<TrialResult> trials;
    std::size_t failures = 0;
    DistributionStats ir;
    MeanInterval ir_mean;
    DistributionStats total_return;
    MeanInterval total_return_mean;
};

/// Seed of trial `i`: splitmix64 of base + i.
inline std::uint64_t trial_seed(std::uint64_t base, std::size_t i) noexcept {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(i) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::vector<std::uint64_t> trial_seeds(std::uint64_t base, std::size_t n) {
    std::vector<std::uint64_t> seeds(n);
    for (std::size_t i = 0; i < n; ++i) seeds[i] = trial_seed(base, i);
    return seeds;
}

/// Aggregates successful trials in index order.
inline MonteCarloSummary summarise_trials(std::vector<TrialResult> trials) {
    MonteCarloSummary out;
    out.trials = std::move(trials);
    std::vector<double> ir, tr;
    for (const auto& t : out.trials) {
        if (!t.ok) {
            ++out.failures;
            continue;
        }
        ir.push_back(t.ir);
        tr.push_back(t.total_return);
    }
    out.ir = describe(ir);
    out.ir_mean = mean_interval(out.ir);
    out.total_return = describe(tr);
    out.total_return_mean = mean_interval(out.total_return);
    return out;
}

/// Runs one trial per seed on up to `jobs` threads. Results do not depend on
/// `jobs` or scheduling order.
inline MonteCarloSummary monte_carlo(std::span<const BookSample> stream, const BacktestConfig& config,
                                     std::span<const std::uint64_t> seeds, std::size_t jobs = 1,
                                     std::size_t dropped_upstream = 0) {
    detail::require(seeds.size() >= 2, "monte_carlo: need at least two trials");
    config.validate();
    std::vector<TrialResult> results(seeds.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1)) {
            TrialResult& r = results[i];
            r.index = i;
            r.seed = seeds[i];
            try {
                const auto res = run(stream, config, seeds[i], dropped_upstream);
                r.ir = res.summary.ir;
                r.total_return = res.summary.total_return;
                r.ok = true;
            } catch (const std::exception& e) {
                r.ok = false;
                r.error = e.what();
            }
        }
    };

    jobs = std::clamp<std::size_t>(jobs, 1, seeds.size());
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    return summarise_trials(std::move(results));
}

inline MonteCarloSummary monte_carlo(std::span<const BookSample> stream, const BacktestConfig& config,
                                     std::size_t n_trials, std::uint64_t base_seed, std::size_t jobs = 1,
                                     std::size_t dropped_upstream = 0) {
    detail::require(n_trials >= 2, "monte_carlo: need at least two trials");
    const auto seeds = trial_seeds(base_seed, n_trials);
    return monte_carlo(stream, config, seeds, jobs, dropped_upstream);
}

}  // namespace rrl
