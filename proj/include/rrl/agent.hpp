#pragma once

// Direct recurrent reinforcement learning readout.
//
// The readout maps the augmented reservoir state z_t to a position
// f_t = tanh(w . z_t) and climbs the gradient of the quadratic utility
//     u_t = mu_t - (lambda / 2) sigma_t^2
// of the EWMA net-reward moments with an extended Kalman filter step.
//
// Position sensitivity keeps a two-step recurrence: f_t depends on w
// directly and through f_{t-1}, which sits in the last feedback slot of z_t.
// With n the index of that slot,
//     df_t/dw = (1 - f_t^2) [ z_t + w_n (1 - f_{t-1}^2) z_{t-1} ].
// Deeper dependencies are truncated.

#include "rrl/common.hpp"
#include "rrl/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

namespace rrl {

struct AgentConfig {
    double risk_appetite = 1e-5;  ///< lambda
    double decay = 0.999;         ///< tau, EWMA decay and EKF forgetting
    double ridge = 1.0;           ///< beta, initial precision is I / beta

    void validate() const {
        detail::require(risk_appetite > 0.0, "agent: risk_appetite must be > 0");
        detail::require(decay > 0.0 && decay <= 1.0, "agent: decay must lie in (0, 1]");
        detail::require(ridge > 0.0, "agent: ridge must be > 0 (precision is I / ridge)");
    }
};

struct MomentState {
    double mean = 0.0;
    double variance = 0.0;

    friend bool operator==(const MomentState&, const MomentState&) = default;
};

/// mean <- tau mean + (1 - tau) r, then variance uses the updated mean.
inline MomentState update_moments(const MomentState& m, double r, double tau) {
    MomentState out;
    out.mean = tau * m.mean + (1.0 - tau) * r;
    const double dev = r - out.mean;
    out.variance = tau * m.variance + (1.0 - tau) * dev * dev;
    return out;
}

inline double utility(const MomentState& m, double risk_appetite) noexcept {
    return m.mean - 0.5 * risk_appetite * m.variance;
}

/// lambda = ir / sigma with a non-annualised information ratio.
inline double risk_appetite_from_ir(double ir, double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("risk_appetite_from_ir: sigma must be positive");
    return ir / sigma;
}

/// Converts an annualised information ratio to a per-period one.
inline double per_period_ir(double annualised_ir, double periods_per_year = 252.0) {
    return annualised_ir / std::sqrt(periods_per_year);
}

inline constexpr double kMaxPosition = kOpenUnitMax;

inline double position(const Vector& w, const Vector& z) {
    detail::require(w.size() == z.size(), "position: dimension mismatch");
    const double a = w.dot(z);
    if (!std::isfinite(a)) throw numerical_error("position: non-finite activation");
    return std::clamp(std::tanh(a), -kMaxPosition, kMaxPosition);
}

/// Quantities from the previous tick needed by the recurrence.
struct RecurrenceCache {
    Vector z;            ///< z_{t-1}
    double position = 0; ///< f_{t-1}
    Vector sensitivity;  ///< df_{t-1}/dw
};

struct ReadoutState {
    Vector weights;
    Matrix precision;
    RecurrenceCache prev;
    /// Index of the newest feedback slot in z, if the reservoir has feedback.
    std::optional<Eigen::Index> feedback_index;

    static ReadoutState initial(std::size_t dim, std::size_t n_back, double ridge) {
        detail::require(dim >= 1, "readout: dimension must be >= 1");
        detail::require(n_back <= dim, "readout: n_back exceeds dimension");
        detail::require(ridge > 0.0, "readout: ridge must be > 0");
        const auto d = static_cast<Eigen::Index>(dim);
        ReadoutState s;
        s.weights = Vector::Zero(d);
        s.precision = Matrix::Identity(d, d) / ridge;
        s.prev.z = Vector::Zero(d);
        s.prev.sensitivity = Vector::Zero(d);
        if (n_back > 0) s.feedback_index = d - 1;
        return s;
    }
};

/// df_t/dw for the current tick given the cached previous tick.
inline Vector position_sensitivity(const Vector& w, const Vector& z, double f,
                                   const RecurrenceCache& prev,
                                   std::optional<Eigen::Index> feedback_index) {
    const double slope = 1.0 - f * f;
    Vector d = slope * z;
    if (feedback_index && prev.z.size() == z.size()) {
        const double through_feedback =
            w[*feedback_index] * slope * (1.0 - prev.position * prev.position);
        d.noalias() += through_feedback * prev.z;
    }
    return d;
}

/// du/dr for the utility of the moments updated with reward r.
///
/// mu' = (1 - tau) and sigma2' = 2 tau (1 - tau)(r - mu) once the variance
/// recurrence is differentiated through the updated mean.
inline double utility_slope(double reward, const MomentState& updated, double tau,
                            double risk_appetite) noexcept {
    return (1.0 - tau) * (1.0 - risk_appetite * tau * (reward - updated.mean));
}

/// Per-tick market terms that enter the reward.
struct RewardTerms {
    double price_change = 0.0;  ///< relative mid change since the last tick
    double delta = 0.0;         ///< taker cost per unit position change
    double kappa = 0.0;         ///< funding rate charged at this tick
};

struct GradientInputs {
    double reward = 0.0;
    MomentState moments;  ///< already updated with `reward`
    RewardTerms terms;
    double position = 0.0;
    double prev_position = 0.0;
    const Vector* sensitivity = nullptr;       ///< df_t/dw
    const Vector* prev_sensitivity = nullptr;  ///< df_{t-1}/dw
};

/// Assembles du/dw = du/dr [ dr/df_t df_t/dw + dr/df_{t-1} df_{t-1}/dw ] with
///   dr/df_t     = -delta sign(df) - kappa
///   dr/df_{t-1} = dp + delta sign(df).
inline Vector utility_gradient(const GradientInputs& in, double tau, double risk_appetite) {
    detail::require(in.sensitivity && in.prev_sensitivity, "utility_gradient: missing sensitivities");
    detail::require(in.sensitivity->size() == in.prev_sensitivity->size(),
                    "utility_gradient: sensitivity sizes differ");
    auto check = [](double v, const char* term) {
        if (!std::isfinite(v)) throw numerical_error(std::string("utility_gradient: non-finite ") + term);
    };
    const double du_dr = utility_slope(in.reward, in.moments, tau, risk_appetite);
    check(du_dr, "du/dr");
    const double s = sign(in.position - in.prev_position);
    const double dr_df = -in.terms.delta * s - in.terms.kappa;
    check(dr_df, "dr/df_t");
    const double dr_dprev = in.terms.price_change + in.terms.delta * s;
    check(dr_dprev, "dr/df_{t-1}");
    Vector g = (du_dr * dr_df) * *in.sensitivity;
    g.noalias() += (du_dr * dr_dprev) * *in.prev_sensitivity;
    if (!g.allFinite()) throw numerical_error("utility_gradient: non-finite df/dw");
    return g;
}

struct EkfOutcome {
    bool reset = false;
    double q = 0.0;
};

/// One extended Kalman filter ascent step:
///   q = 1 + g' P g / tau,  k = P g / (q tau),  w += k,
///   P <- (P / tau - k k' q) tau, resymmetrised.
/// On a non-positive q or a precision that loses positivity, P is reset to
/// I / ridge and the step is reported.
inline EkfOutcome ekf_update(ReadoutState& s, const Vector& grad, double tau, double ridge) {
    detail::require(grad.size() == s.weights.size(), "ekf_update: gradient size mismatch");
    EkfOutcome out;
    const Vector pg = s.precision * grad;
    out.q = 1.0 + grad.dot(pg) / tau;
    auto reset = [&] {
        const auto d = s.weights.size();
        s.precision = Matrix::Identity(d, d) / ridge;
        out.reset = true;
    };
    if (!(out.q > 0.0) || !std::isfinite(out.q)) {
        reset();
        return out;
    }
    const Vector k = pg / (out.q * tau);
    if (!k.allFinite()) {
        reset();
        return out;
    }
    s.weights += k;
    // (P / tau - q k k') tau == P - tau q k k'
    s.precision.noalias() -= (tau * out.q) * (k * k.transpose());
    s.precision = 0.5 * (s.precision + s.precision.transpose()).eval();
    if (!s.precision.allFinite() || (s.precision.diagonal().array() <= 0.0).any()) reset();
    return out;
}

struct UtilityReport {
    double utility = 0.0;
    Vector gradient;
    PnlBreakdown reward;
    MomentState moments;
    bool precision_reset = false;
};

/// Sequential agent: choose a position, observe the reward, learn.
class Agent {
public:
    Agent(std::size_t dim, std::size_t n_back, const AgentConfig& config)
        : config_(config), state_(ReadoutState::initial(dim, n_back, config.ridge)) {
        config_.validate();
    }

    /// Position for z_t under the current weights; caches the sensitivity.
    double act(const Vector& z) {
        detail::require(z.size() == state_.weights.size(), "agent: state size mismatch");
        pending_z_ = z;
        pending_f_ = position(state_.weights, z);
        pending_sensitivity_ =
            position_sensitivity(state_.weights, z, pending_f_, state_.prev, state_.feedback_index);
        has_pending_ = true;
        return pending_f_;
    }

    /// Rewards the pending position against the previous one, updates the
    /// moments and applies the EKF step.
    UtilityReport learn(const RewardTerms& terms) {
        detail::require(has_pending_, "agent: learn() called without act()");
        has_pending_ = false;
        UtilityReport rep;
        const double prev_f = state_.prev.position;
        rep.reward = step_reward(prev_f, pending_f_, terms.price_change, terms.delta, terms.kappa);
        moments_ = update_moments(moments_, rep.reward.net, config_.decay);
        rep.moments = moments_;
        rep.utility = utility(moments_, config_.risk_appetite);

        GradientInputs in;
        in.reward = rep.reward.net;
        in.moments = moments_;
        in.terms = terms;
        in.position = pending_f_;
        in.prev_position = prev_f;
        in.sensitivity = &pending_sensitivity_;
        in.prev_sensitivity = &state_.prev.sensitivity;
        rep.gradient = utility_gradient(in, config_.decay, config_.risk_appetite);

        const EkfOutcome ekf = ekf_update(state_, rep.gradient, config_.decay, config_.ridge);
        rep.precision_reset = ekf.reset;
        if (ekf.reset) ++precision_resets_;

        state_.prev.z = std::move(pending_z_);
        state_.prev.position = pending_f_;
        state_.prev.sensitivity = std::move(pending_sensitivity_);
        return rep;
    }

    std::pair<double, UtilityReport> step(const Vector& z, const RewardTerms& terms) {
        const double f = act(z);
        return {f, learn(terms)};
    }

    [[nodiscard]] const MomentState& moments() const noexcept { return moments_; }
    [[nodiscard]] const ReadoutState& readout() const noexcept { return state_; }
    [[nodiscard]] ReadoutState& readout() noexcept { return state_; }
    [[nodiscard]] const AgentConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::size_t precision_resets() const noexcept { return precision_resets_; }

private:
    AgentConfig config_;
    ReadoutState state_;
    MomentState moments_;
    Vector pending_z_;
    Vector pending_sensitivity_;
    double pending_f_ = 0.0;
    bool has_pending_ = false;
    std::size_t precision_resets_ = 0;
};

}  // namespace rrl
