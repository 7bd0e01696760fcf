#pragma once

// Order-book features for the reservoir input: a constant bias followed by
// EWMA z-scored log-mid returns, relative spread, relative basis and the last
// funding rate.

#include "rrl/common.hpp"
#include "rrl/market.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

namespace rrl {

enum class Normalisation { ewma_zscore };

struct FeatureSpec {
    std::vector<int> lookbacks{1, 5, 20, 60};
    bool include_spread = true;
    bool include_relative_basis = true;
    bool include_funding = true;
    Normalisation normalisation = Normalisation::ewma_zscore;
    double zscore_decay = 0.999;
    double clip = 5.0;

    [[nodiscard]] std::size_t feature_count() const noexcept {
        return lookbacks.size() + (include_spread ? 1 : 0) + (include_relative_basis ? 1 : 0) +
               (include_funding ? 1 : 0);
    }

    /// Reservoir input width, bias included.
    [[nodiscard]] std::size_t input_size() const noexcept { return 1 + feature_count(); }

    void validate() const {
        detail::require(feature_count() >= 1, "features: at least one feature is required");
        for (int k : lookbacks) detail::require(k >= 1, "features: lookbacks must be >= 1");
        detail::require(zscore_decay > 0.0 && zscore_decay < 1.0,
                        "features: zscore_decay must lie in (0, 1)");
        detail::require(clip > 0.0, "features: clip must be > 0");
    }
};

/// Exponentially weighted z-score. The first observation seeds the mean and
/// scores 0; afterwards the mean and variance are updated before scoring.
class EwmaZScore {
public:
    explicit EwmaZScore(double decay) : decay_(decay) {}

    double operator()(double x) {
        if (!seeded_) {
            mean_ = x;
            var_ = 0.0;
            seeded_ = true;
            return 0.0;
        }
        mean_ = decay_ * mean_ + (1.0 - decay_) * x;
        const double dev = x - mean_;
        var_ = decay_ * var_ + (1.0 - decay_) * dev * dev;
        return var_ > 0.0 ? dev / std::sqrt(var_) : 0.0;
    }

    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double variance() const noexcept { return var_; }

private:
    double decay_;
    double mean_ = 0.0;
    double var_ = 0.0;
    bool seeded_ = false;
};

class FeatureBuilder {
public:
    explicit FeatureBuilder(FeatureSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        max_lookback_ = static_cast<std::size_t>(
            spec_.lookbacks.empty() ? 0 : *std::max_element(spec_.lookbacks.begin(), spec_.lookbacks.end()));
        scalers_.assign(spec_.feature_count(), EwmaZScore(spec_.zscore_decay));
    }

    /// Feature vector for the next tick. Features without enough history
    /// emit 0 and do not touch their normaliser.
    Vector next(const BookSample& s) {
        const double m = mid(s);
        log_mids_.push_back(m > 0.0 ? std::log(m) : std::numeric_limits<double>::quiet_NaN());
        if (log_mids_.size() > max_lookback_ + 1) log_mids_.pop_front();
        if (s.funding_rate) last_funding_ = *s.funding_rate;

        Vector u(static_cast<Eigen::Index>(spec_.input_size()));
        u[0] = 1.0;
        Eigen::Index slot = 1;
        std::size_t k = 0;
        auto emit = [&](std::optional<double> raw) {
            double z = 0.0;
            if (raw) {
                if (std::isfinite(*raw)) {
                    z = std::clamp(scalers_[k](*raw), -spec_.clip, spec_.clip);
                } else {
                    ++non_finite_;
                }
            }
            u[slot++] = z;
            ++k;
        };

        const std::size_t n = log_mids_.size();
        for (int lb : spec_.lookbacks) {
            const auto h = static_cast<std::size_t>(lb);
            if (n > h) emit(log_mids_[n - 1] - log_mids_[n - 1 - h]);
            else emit(std::nullopt);
        }
        if (spec_.include_spread) emit(m > 0.0 ? (s.ask - s.bid) / m : std::numeric_limits<double>::quiet_NaN());
        if (spec_.include_relative_basis) {
            if (s.index_price && *s.index_price > 0.0) emit(relative_basis(m, *s.index_price));
            else emit(std::nullopt);
        }
        if (spec_.include_funding) {
            if (last_funding_) emit(*last_funding_);
            else emit(std::nullopt);
        }
        return u;
    }

    [[nodiscard]] const FeatureSpec& spec() const noexcept { return spec_; }
    /// Raw features that were non-finite and replaced by 0.
    [[nodiscard]] std::size_t non_finite_count() const noexcept { return non_finite_; }

private:
    FeatureSpec spec_;
    std::size_t max_lookback_ = 0;
    std::deque<double> log_mids_;
    std::vector<EwmaZScore> scalers_;
    std::optional<double> last_funding_;
    std::size_t non_finite_ = 0;
};

}  // namespace rrl
