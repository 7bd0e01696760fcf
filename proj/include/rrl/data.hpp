#pragma once

// Book sample streams: CSV ingestion/serialisation and a seeded synthetic
// perpetual swap market.

#include "rrl/common.hpp"
#include "rrl/market.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace rrl {

struct data_not_found : data_error {
    using data_error::data_error;
};

struct LoadedStream {
    std::vector<BookSample> samples;
    std::size_t dropped_crossed = 0;      ///< bid > ask
    std::size_t dropped_nonpositive = 0;  ///< bid or ask <= 0

    [[nodiscard]] std::size_t dropped() const noexcept { return dropped_crossed + dropped_nonpositive; }
};

inline constexpr std::int64_t kSecondsPerDay = 86'400;

/// UTC day number (days since the Unix epoch, floored).
inline std::int64_t utc_day(std::int64_t ts) noexcept {
    return ts >= 0 ? ts / kSecondsPerDay : -((-ts + kSecondsPerDay - 1) / kSecondsPerDay);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

/// "YYYY-MM-DDTHH:MM:SS[.fff][Z|+00:00]" (a space may replace the T).
inline std::optional<std::int64_t> parse_iso8601_utc(std::string_view s) {
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':')
        return std::nullopt;
    auto field = [&](std::size_t pos, std::size_t len) { return parse_int(s.substr(pos, len)); };
    const auto y = field(0, 4), mo = field(5, 2), d = field(8, 2), h = field(11, 2),
               mi = field(14, 2), se = field(17, 2);
    if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
    auto rest = s.substr(19);
    if (!rest.empty() && rest.front() == '.') {
        std::size_t i = 1;
        while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
        rest.remove_prefix(i);
    }
    if (!(rest.empty() || rest == "Z" || rest == "+00:00")) return std::nullopt;
    using namespace std::chrono;
    const year_month_day ymd{year{static_cast<int>(*y)}, month{static_cast<unsigned>(*mo)},
                             day{static_cast<unsigned>(*d)}};
    if (!ymd.ok() || *h > 23 || *mi > 59 || *se > 60) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * kSecondsPerDay + *h * 3600 + *mi * 60 + *se;
}

inline std::optional<std::int64_t> parse_timestamp(std::string_view s) {
    if (auto v = parse_int(s)) return v;
    return parse_iso8601_utc(s);
}

/// Shortest representation that parses back to the same double.
/// Shortest round-trip text; negative zero prints as "0".
inline std::string format_double(double v) {
    if (v == 0.0) v = 0.0;
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace detail

/// Parses a book stream. Header columns `ts,bid,ask,index_price,funding_rate`
/// are required (any order, extra columns ignored; `last_traded` is read when
/// present). Crossed or non-positive quotes are dropped and counted;
/// unparsable rows and non-increasing timestamps are errors.
inline LoadedStream parse_csv(std::istream& in, const std::string& source = "<stream>") {
    LoadedStream out;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw data_error(source + ":" + std::to_string(line_no) + ": " + what);
    };

    std::map<std::string, std::size_t, std::less<>> col;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) break;
    }
    if (line_no == 0 || detail::trim(line).empty()) fail("missing header");
    {
        const auto names = detail::split_csv(line);
        for (std::size_t i = 0; i < names.size(); ++i) col.emplace(std::string(names[i]), i);
        for (const char* required : {"ts", "bid", "ask", "index_price", "funding_rate"}) {
            if (!col.contains(required)) fail(std::string("missing column '") + required + "'");
        }
    }
    const std::size_t i_ts = col["ts"], i_bid = col["bid"], i_ask = col["ask"],
                      i_idx = col["index_price"], i_fund = col["funding_rate"];
    constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
    const std::size_t i_last = col.contains("last_traded") ? col["last_traded"] : kAbsent;
    const std::size_t width = col.size();

    std::optional<std::int64_t> last_ts;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != width) fail("expected " + std::to_string(width) + " fields, got " + std::to_string(f.size()));

        BookSample s;
        const auto ts = detail::parse_timestamp(f[i_ts]);
        if (!ts) fail("unparsable timestamp '" + std::string(f[i_ts]) + "'");
        const auto bid = detail::parse_double(f[i_bid]);
        const auto ask = detail::parse_double(f[i_ask]);
        if (!bid || !ask) fail("unparsable bid/ask");
        s.ts = *ts;
        s.bid = *bid;
        s.ask = *ask;
        auto optional_field = [&](std::size_t i, const char* name) -> std::optional<double> {
            if (f[i].empty()) return std::nullopt;
            auto v = detail::parse_double(f[i]);
            if (!v) fail(std::string("unparsable ") + name);
            return v;
        };
        s.index_price = optional_field(i_idx, "index_price");
        s.funding_rate = optional_field(i_fund, "funding_rate");
        if (i_last != kAbsent) s.last_traded = optional_field(i_last, "last_traded");

        if (last_ts && s.ts <= *last_ts) fail("timestamps must be strictly increasing");
        last_ts = s.ts;

        if (!(s.bid > 0.0) || !(s.ask > 0.0)) {
            ++out.dropped_nonpositive;
            continue;
        }
        if (s.bid > s.ask) {
            ++out.dropped_crossed;
            continue;
        }
        if (s.index_price && !(*s.index_price > 0.0)) s.index_price.reset();
        out.samples.push_back(s);
    }
    return out;
}

inline LoadedStream load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_not_found("cannot open " + path.string());
    return parse_csv(in, path.string());
}

inline void write_csv(std::ostream& out, const std::vector<BookSample>& samples) {
    out << "ts,bid,ask,index_price,funding_rate\n";
    for (const auto& s : samples) {
        out << s.ts << ',' << detail::format_double(s.bid) << ',' << detail::format_double(s.ask) << ',';
        if (s.index_price) out << detail::format_double(*s.index_price);
        out << ',';
        if (s.funding_rate) out << detail::format_double(*s.funding_rate);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Synthetic market

struct SynthConfig {
    std::int64_t start_ts = 1'577'836'800;  ///< 2020-01-01T00:00:00Z
    int interval_seconds = 300;
    double initial_mid = 10'000.0;
    /// Log-drift and volatility of the mid per tick.
    double drift = 0.0;
    double volatility = 0.002;
    double sine_amplitude = 0.0;  ///< relative amplitude of a cyclical component
    double sine_period_ticks = 288.0;
    double spread = 0.0001;        ///< full quoted spread relative to the mid
    double spread_jitter = 0.0;    ///< extra |N(0,1)| * jitter relative spread
    /// Funding: interest rates per funding period and an AR(1) premium.
    double e_quote = 0.0008;
    double e_base = 0.0;
    double premium_mean = 0.0;
    double premium_vol = 0.0002;
    double premium_persistence = 0.99;
    double basis_cap = 0.0005;
    int funding_period_hours = 8;
    bool emit_index = true;

    void validate() const {
        detail::require(interval_seconds >= 1, "synth: interval_seconds must be >= 1");
        detail::require(initial_mid > 0.0, "synth: initial_mid must be > 0");
        detail::require(volatility >= 0.0, "synth: volatility must be >= 0");
        detail::require(std::abs(sine_amplitude) < 1.0, "synth: |sine_amplitude| must be < 1");
        detail::require(sine_period_ticks > 0.0, "synth: sine_period_ticks must be > 0");
        detail::require(spread >= 0.0 && spread_jitter >= 0.0, "synth: spreads must be >= 0");
        detail::require(premium_persistence >= 0.0 && premium_persistence < 1.0,
                        "synth: premium_persistence must lie in [0, 1)");
        detail::require(funding_period_hours >= 1, "synth: funding_period_hours must be >= 1");
        detail::require(basis_cap >= 0.0, "synth: basis_cap must be >= 0");
    }
};

/// Geometric random walk mid with optional drift and cycle, symmetric quotes
/// around it, an index tracking the mid through the premium, and funding
/// events on the funding grid (UTC-aligned).
inline std::vector<BookSample> synth_generate(const SynthConfig& cfg, std::uint64_t seed, std::size_t n_ticks) {
    cfg.validate();
    detail::require(n_ticks >= 1, "synth: n_ticks must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const std::int64_t funding_every = static_cast<std::int64_t>(cfg.funding_period_hours) * 3600;
    const double innovation = cfg.premium_vol * std::sqrt(1.0 - cfg.premium_persistence * cfg.premium_persistence);

    std::vector<BookSample> out;
    out.reserve(n_ticks);
    double log_mid = std::log(cfg.initial_mid);
    double premium_dev = 0.0;
    for (std::size_t t = 0; t < n_ticks; ++t) {
        if (t > 0) log_mid += cfg.drift - 0.5 * cfg.volatility * cfg.volatility + cfg.volatility * normal(rng);
        const double cycle =
            1.0 + cfg.sine_amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / cfg.sine_period_ticks);
        const double m = std::exp(log_mid) * cycle;
        const double rel_spread = cfg.spread + cfg.spread_jitter * std::abs(normal(rng));
        premium_dev = cfg.premium_persistence * premium_dev + innovation * normal(rng);
        const double premium = cfg.premium_mean + premium_dev;

        BookSample s;
        s.ts = cfg.start_ts + static_cast<std::int64_t>(t) * cfg.interval_seconds;
        s.bid = m * (1.0 - 0.5 * rel_spread);
        s.ask = m * (1.0 + 0.5 * rel_spread);
        if (cfg.emit_index) s.index_price = m / (1.0 + premium);
        if (s.ts % funding_every == 0) {
            s.funding_rate = funding_rate(FundingInputs{cfg.e_quote, cfg.e_base, premium}, cfg.basis_cap,
                                          cfg.funding_period_hours);
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace rrl
