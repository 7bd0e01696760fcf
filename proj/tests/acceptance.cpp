// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include "gradient_path.hpp"
#include "oracles.hpp"
#include "rrl/rrl.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>

namespace {

using namespace rrl;

struct Verdict {
    bool ok = true;
    std::string detail;

    void check(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

Verdict echo_state_property() {
    Verdict v;
    for (double target : {0.5, 0.9, 0.99}) {
        ReservoirConfig c;
        c.n_input = 1;
        c.n_hidden = 100;
        c.spectral_target = target;
        c.seed = 17;
        const auto w = ReservoirWeights::build(c);
        std::mt19937_64 rng(101);
        std::uniform_real_distribution<double> init(-1.0, 1.0);
        std::normal_distribution<double> drive;
        ReservoirState a(w), b(w);
        Vector xa(100), xb(100);
        for (Eigen::Index i = 0; i < 100; ++i) {
            xa[i] = init(rng);
            xb[i] = init(rng);
        }
        a.set_activations(xa);
        b.set_activations(xb);
        for (int t = 0; t < 1000; ++t) {
            const Vector u = Vector::Constant(1, drive(rng));
            a.update(u, w);
            b.update(u, w);
        }
        const double gap = (a.activations() - b.activations()).cwiseAbs().maxCoeff();
        v.check(gap < 1e-6, fmt("rho=%.2f final gap %.3g", target, gap));
    }
    return v;
}

Verdict reservoir_construction() {
    Verdict v;
    ReservoirConfig c;
    const double n = static_cast<double>(c.n_hidden * c.n_hidden);
    const double sigma = std::sqrt(c.sparsity * (1.0 - c.sparsity) / n);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        c.seed = seed;
        const auto w = ReservoirWeights::build(c);
        const double rho = oracle::lapack_spectral_radius(w.hidden());
        v.check(std::abs(rho - c.spectral_target) < 1e-9, fmt("seed %.0f radius %.15g", double(seed), rho));
        const double zeros = static_cast<double>((w.hidden().array() == 0.0).count()) / n;
        v.check(std::abs(zeros - c.sparsity) < 3.0 * sigma, fmt("seed %.0f zero fraction %.4f", double(seed), zeros));
    }
    return v;
}

Verdict gradient_correctness() {
    Verdict v;
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto t = oracle::random_gradient_toy(rng);
        const Vector fd = t.central_difference(1e-6);
        const Vector an = testing_support::analytic_gradient(t);
        worst = std::max(worst, (an - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff());
    }
    v.check(worst < 1e-5, fmt("worst relative error %.3g", worst));
    if (v.ok) v.detail = fmt("worst relative error %.3g", worst);
    return v;
}

Verdict ekf_fixtures() {
    Verdict v;
    auto one = ReadoutState::initial(1, 0, 1.0);
    const auto a = ekf_update(one, Vector::Constant(1, 2.0), 1.0, 1.0);
    v.check(std::abs(a.q - 5.0) < 1e-12 && std::abs(one.weights[0] - 0.4) < 1e-12 &&
                std::abs(one.precision(0, 0) - 0.2) < 1e-12,
            "tau=1 hand case");
    auto half = ReadoutState::initial(1, 0, 1.0);
    const auto b = ekf_update(half, Vector::Constant(1, 2.0), 0.5, 1.0);
    v.check(std::abs(b.q - 9.0) < 1e-12 && std::abs(half.weights[0] - 4.0 / 9.0) < 1e-12 &&
                std::abs(half.precision(0, 0) - 1.0 / 9.0) < 1e-12,
            "tau=0.5 hand case");

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    auto s = ReadoutState::initial(8, 2, 1.0);
    double asym = 0.0;
    bool pd = true;
    for (int i = 0; i < 10'000; ++i) {
        Vector g(8);
        for (auto& x : g) x = 0.1 * n01(rng);
        const auto out = ekf_update(s, g, 0.999, 1.0);
        v.check(!out.reset, "precision reset during random updates");
        asym = std::max(asym, (s.precision - s.precision.transpose()).cwiseAbs().maxCoeff());
        if (i % 100 == 99) {
            Eigen::SelfAdjointEigenSolver<Matrix> eig(s.precision);
            pd = pd && eig.eigenvalues().minCoeff() > 0.0;
        }
    }
    v.check(asym < 1e-10, fmt("asymmetry %.3g", asym));
    v.check(pd, "precision lost positive definiteness");
    return v;
}

Verdict economics_identities() {
    Verdict v;
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> pos(-1.0, 1.0), unit(0.0, 1.0);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 100'000; ++i) {
        const double a = pos(rng);
        const double b = i % 5 == 0 ? a : pos(rng);
        const auto p = step_reward(a, b, 0.01 * n01(rng), 0.01 * unit(rng) + 1e-7, 0.001 * n01(rng));
        v.check(std::abs(p.net - (p.price_pnl + p.execution + p.carry)) <= 1e-15, "decomposition");
        v.check((p.execution == 0.0) == (a == b), "execution zero iff unchanged");

        const FundingInputs f{0.01 * n01(rng), 0.01 * n01(rng), 0.002 * n01(rng)};
        const double zeta = 0.001 * unit(rng);
        const double kappa = funding_rate(f, zeta, 8);
        v.check(std::abs(kappa - f.premium) <= zeta + 1e-18, "funding clamp");
    }
    return v;
}

Verdict ledger_conservation() {
    Verdict v;
    SynthConfig sc;
    sc.premium_vol = 0.001;
    const auto m = synth_generate(sc, 2, 50'000);
    const auto r = run(m, BacktestConfig{}, 42);
    double price = 0, exe = 0, carry = 0, net = 0;
    std::size_t gated = 0;
    for (const auto& rec : r.ledger) {
        price += rec.pnl.price_pnl;
        exe += rec.pnl.execution;
        carry += rec.pnl.carry;
        net += rec.pnl.net;
        if (rec.mu < 0.0) {
            ++gated;
            v.check(rec.position == 0.0, "position held while mu < 0");
        }
    }
    v.check(r.ledger.size() == 50'000, "ledger length");
    v.check(std::abs(r.summary.total_return - net) < 1e-10, "total_return");
    v.check(std::abs(r.summary.price_total - price) < 1e-10, "price_total");
    v.check(std::abs(r.summary.execution_total - exe) < 1e-10, "execution_total");
    v.check(std::abs(r.summary.carry_total - carry) < 1e-10, "carry_total");
    if (v.ok) v.detail = fmt("%.0f ticks, %.0f gated", double(r.ledger.size()), double(gated));
    return v;
}

Verdict learning_sanity() {
    Verdict v;
    constexpr std::size_t n = 5000;
    int positive = 0, cheaper = 0;
    for (int s = 0; s < 20; ++s) {
        SynthConfig sc;
        sc.drift = 2e-4;
        sc.volatility = 2e-3;
        sc.premium_vol = 0.0;
        sc.e_quote = 0.0;
        sc.spread = 0.0;
        const auto free_market = synth_generate(sc, 100 + s, n);
        sc.spread = 0.001;  // 10 bp quoted spread
        const auto costly_market = synth_generate(sc, 100 + s, n);

        BacktestConfig free_cfg;
        free_cfg.costs.fee_rate = 0.0;
        BacktestConfig costly_cfg;
        costly_cfg.costs.fee_rate = 0.0005;

        const auto r0 = run(free_market, free_cfg, 1000 + s);
        const auto r1 = run(costly_market, costly_cfg, 1000 + s);
        positive += r0.summary.total_return > 0.0;
        cheaper += r1.summary.turnover / n < r0.summary.turnover / n;
    }
    v.check(positive >= 19, fmt("positive return on %.0f/20 seeds", positive));
    v.check(cheaper >= 19, fmt("turnover reduced on %.0f/20 seeds", cheaper));
    if (v.ok) v.detail = fmt("positive %.0f/20, turnover reduced %.0f/20", positive, cheaper);
    return v;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12; }

bool matches(const DistributionStats& d, const oracle::Described& o) {
    return d.count == o.count && close(d.mean, o.mean) && close(d.stddev, o.stddev) && close(d.min, o.min) &&
           close(d.q25, o.q25) && close(d.q50, o.q50) && close(d.q75, o.q75) && close(d.max, o.max) &&
           close(d.sum, o.sum);
}

Verdict statistics_oracle() {
    Verdict v;
    SynthConfig sc;
    sc.premium_vol = 0.001;
    BacktestConfig cfg;
    cfg.reservoir.n_hidden = 40;
    const auto m = synth_generate(sc, 4, 288 * 30);
    const auto r = run(m, cfg, 8);

    // Brute-force daily grouping keyed by floor(ts / 86400).
    std::map<std::int64_t, std::array<long double, 5>> days;
    for (const auto& rec : r.ledger) {
        auto& d = days[static_cast<std::int64_t>(std::floor(static_cast<long double>(rec.ts) / 86400.0L))];
        d[0] += rec.position;
        d[1] += rec.pnl.execution;
        d[2] += rec.pnl.carry;
        d[3] += rec.pnl.net;
        d[4] += 1;
    }
    std::vector<double> pos, exe, carry, pnl;
    for (const auto& [day, d] : days) {
        pos.push_back(static_cast<double>(d[0] / d[4]));
        exe.push_back(static_cast<double>(d[1]));
        carry.push_back(static_cast<double>(d[2]));
        pnl.push_back(static_cast<double>(d[3]));
    }
    v.check(r.daily.rows.size() == days.size(), "day count");
    v.check(matches(r.daily.position, oracle::describe(pos)), "daily position stats");
    v.check(matches(r.daily.execution, oracle::describe(exe)), "daily execution stats");
    v.check(matches(r.daily.carry, oracle::describe(carry)), "daily carry stats");
    v.check(matches(r.daily.pnl, oracle::describe(pnl)), "daily pnl stats");
    const auto o = oracle::describe(pnl);
    v.check(close(r.summary.ir, std::sqrt(252.0) * o.mean / o.stddev), "information ratio");

    const auto mc = monte_carlo(m, cfg, 8, 42, 2);
    std::vector<double> irs, trs;
    for (const auto& t : mc.trials) {
        irs.push_back(t.ir);
        trs.push_back(t.total_return);
    }
    const auto oi = oracle::describe(irs);
    v.check(matches(mc.ir, oi), "trial ir stats");
    v.check(matches(mc.total_return, oracle::describe(trs)), "trial return stats");
    const double se = oi.stddev / std::sqrt(static_cast<double>(oi.count));
    v.check(close(mc.ir_mean.se, se) && close(mc.ir_mean.lb, oi.mean - 1.96 * se) &&
                close(mc.ir_mean.ub, oi.mean + 1.96 * se),
            "trial ir interval");

    DistributionStats table;
    table.count = 250;
    table.mean = 1.160;
    table.stddev = 0.299;
    const auto ci = mean_interval(table);
    v.check(std::round(ci.se * 1000) == 19 && std::round(ci.lb * 1000) == 1123 && std::round(ci.ub * 1000) == 1197,
            fmt("reproduced lb %.4f ub %.4f", ci.lb, ci.ub));
    return v;
}

Verdict determinism() {
    Verdict v;
    const nlohmann::json echo = default_config_json();
    SynthConfig sc;
    sc.premium_vol = 0.001;
    const auto m = synth_generate(sc, 6, 5000);
    BacktestConfig cfg;
    const auto a = summary_document(run(m, cfg, 42), echo);
    const auto b = summary_document(run(m, cfg, 42), echo);
    v.check(a == b, "backtest summary bytes differ");

    cfg.reservoir.n_hidden = 40;
    const auto one = montecarlo_document(monte_carlo(m, cfg, 16, 42, 1), echo);
    const auto eight = montecarlo_document(monte_carlo(m, cfg, 16, 42, 8), echo);
    v.check(one == eight, "Monte Carlo document differs between 1 and 8 jobs");
    return v;
}

struct Criterion {
    const char* name;
    double limit_seconds;
    std::function<Verdict()> body;
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {"echo_state_property", 5, echo_state_property},
        {"reservoir_construction", 5, reservoir_construction},
        {"gradient_correctness", 10, gradient_correctness},
        {"ekf_fixtures", 10, ekf_fixtures},
        {"economics_identities", 0, economics_identities},
        {"ledger_conservation_and_gating", 60, ledger_conservation},
        {"learning_sanity", 300, learning_sanity},
        {"statistics_oracle", 0, statistics_oracle},
        {"determinism", 0, determinism},
    };

    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.body();
        } catch (const std::exception& e) {
            v.ok = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
            v.ok = false;
            v.detail = fmt("runtime %.2f s over limit %.0f s", secs, c.limit_seconds);
        }
        failed += !v.ok;
        std::printf("[%s] %d %s (%.2f s)%s%s\n", v.ok ? "PASS" : "FAIL", index, c.name, secs,
                    v.detail.empty() ? "" : ": ", v.detail.c_str());
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
