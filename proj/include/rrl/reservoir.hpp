#pragma once

// Echo state network reservoir: fixed random weights, recurrent activations
// and the augmented state handed to the trading readout.

#include "rrl/common.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstddef>
#include <random>

namespace rrl {

enum class Activation { tanh };

struct ReservoirConfig {
    /// External inputs including the leading constant bias.
    std::size_t n_input = 1;
    std::size_t n_hidden = 100;
    /// Number of past positions fed back into the reservoir.
    std::size_t n_back = 10;
    /// Probability that an entry of the hidden matrix is zeroed.
    double sparsity = 0.75;
    double spectral_target = 0.99;
    std::uint64_t seed = 42;
    Activation activation = Activation::tanh;

    void validate() const {
        detail::require(n_input >= 1, "reservoir: n_input must be >= 1");
        detail::require(n_hidden >= 1, "reservoir: n_hidden must be >= 1");
        detail::require(sparsity >= 0.0 && sparsity < 1.0,
                        "reservoir: sparsity must lie in [0, 1)");
        detail::require(spectral_target > 0.0 && spectral_target < 1.0,
                        "reservoir: spectral_target must lie in (0, 1)");
    }

    /// Length of the augmented state [u, x, feedback].
    [[nodiscard]] std::size_t augmented_size() const noexcept {
        return n_input + n_hidden + n_back;
    }
};

/// Largest absolute eigenvalue of a square matrix.
///
/// Uses a dense real Schur decomposition. Reservoir matrices are
/// non-symmetric and their dominant eigenvalue is frequently a complex pair,
/// which plain power iteration does not resolve to the required accuracy.
inline double spectral_radius(const Matrix& m) {
    detail::require(m.rows() == m.cols(), "spectral_radius: matrix must be square");
    if (m.size() == 0) return 0.0;
    if (!m.allFinite()) throw contract_error("spectral_radius: non-finite entries");
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw numerical_error("spectral_radius: eigenvalue iteration did not converge");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// The three fixed random matrices of the reservoir. Immutable once built.
class ReservoirWeights {
public:
    /// Draws non-negative uniform hidden weights, zeroes each entry with
    /// probability `sparsity`, flips the sign of each survivor with
    /// probability 1/2, then rescales to `spectral_target`. Input and
    /// feedback weights are standard normal. Deterministic in `seed`.
    static ReservoirWeights build(const ReservoirConfig& config) {
        config.validate();
        const auto n_h = static_cast<Eigen::Index>(config.n_hidden);
        const auto n_in = static_cast<Eigen::Index>(config.n_input);
        const auto n_b = static_cast<Eigen::Index>(config.n_back);

        std::mt19937_64 rng(config.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        Matrix input(n_h, n_in);
        for (Eigen::Index j = 0; j < n_in; ++j)
            for (Eigen::Index i = 0; i < n_h; ++i) input(i, j) = normal(rng);

        Matrix hidden(n_h, n_h);
        for (Eigen::Index j = 0; j < n_h; ++j) {
            for (Eigen::Index i = 0; i < n_h; ++i) {
                const double magnitude = unit(rng);
                const bool dropped = unit(rng) < config.sparsity;
                const bool flipped = unit(rng) < 0.5;
                hidden(i, j) = dropped ? 0.0 : (flipped ? -magnitude : magnitude);
            }
        }
        const double rho = spectral_radius(hidden);
        if (!(rho > 0.0)) {
            throw numerical_error(
                "reservoir: hidden matrix has zero spectral radius; cannot rescale");
        }
        hidden *= config.spectral_target / rho;

        Matrix back(n_h, n_b);
        for (Eigen::Index j = 0; j < n_b; ++j)
            for (Eigen::Index i = 0; i < n_h; ++i) back(i, j) = normal(rng);

        return ReservoirWeights(config, std::move(input), std::move(hidden), std::move(back));
    }

    /// Assembles weights from explicit matrices (tests, fixtures).
    static ReservoirWeights from_matrices(Matrix input, Matrix hidden, Matrix back) {
        detail::require(hidden.rows() == hidden.cols(), "reservoir: hidden matrix must be square");
        detail::require(input.rows() == hidden.rows() && back.rows() == hidden.rows(),
                        "reservoir: row counts must equal n_hidden");
        ReservoirConfig cfg;
        cfg.n_input = static_cast<std::size_t>(input.cols());
        cfg.n_hidden = static_cast<std::size_t>(hidden.rows());
        cfg.n_back = static_cast<std::size_t>(back.cols());
        return ReservoirWeights(cfg, std::move(input), std::move(hidden), std::move(back));
    }

    [[nodiscard]] const Matrix& input() const noexcept { return input_; }
    [[nodiscard]] const Matrix& hidden() const noexcept { return hidden_; }
    [[nodiscard]] const Matrix& back() const noexcept { return back_; }
    [[nodiscard]] std::size_t n_input() const noexcept { return config_.n_input; }
    [[nodiscard]] std::size_t n_hidden() const noexcept { return config_.n_hidden; }
    [[nodiscard]] std::size_t n_back() const noexcept { return config_.n_back; }
    [[nodiscard]] const ReservoirConfig& config() const noexcept { return config_; }

    friend bool operator==(const ReservoirWeights& a, const ReservoirWeights& b) {
        auto same = [](const Matrix& x, const Matrix& y) {
            return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
        };
        return same(a.input_, b.input_) && same(a.hidden_, b.hidden_) && same(a.back_, b.back_);
    }

private:
    ReservoirWeights(const ReservoirConfig& cfg, Matrix input, Matrix hidden, Matrix back)
        : config_(cfg), input_(std::move(input)), hidden_(std::move(hidden)), back_(std::move(back)) {}

    ReservoirConfig config_;
    Matrix input_;
    Matrix hidden_;
    Matrix back_;
};

/// Recurrent activations plus the feedback buffer of past positions
/// (oldest first). Single owner; advance once per tick.
class ReservoirState {
public:
    ReservoirState(std::size_t n_hidden, std::size_t n_back)
        : x_(Vector::Zero(static_cast<Eigen::Index>(n_hidden))),
          feedback_(Vector::Zero(static_cast<Eigen::Index>(n_back))) {}

    explicit ReservoirState(const ReservoirWeights& w) : ReservoirState(w.n_hidden(), w.n_back()) {}

    /// x <- tanh(W_in u + W_hidden x + W_back feedback), clamped inside (-1, 1).
    const Vector& update(const Vector& u, const ReservoirWeights& w) {
        detail::require(u.size() == w.input().cols(), "reservoir update: input size mismatch");
        detail::require(x_.size() == w.hidden().rows() && feedback_.size() == w.back().cols(),
                        "reservoir update: state does not match weights");
        if (!u.allFinite()) throw contract_error("reservoir update: non-finite input");
        Vector pre = w.input() * u;
        pre.noalias() += w.hidden() * x_;
        if (feedback_.size() > 0) pre.noalias() += w.back() * feedback_;
        x_ = pre.array().tanh().cwiseMax(-kOpenUnitMax).cwiseMin(kOpenUnitMax).matrix();
        return x_;
    }

    /// Shifts the buffer left and stores `f` in the newest slot.
    void push_feedback(double f) {
        if (!(std::abs(f) <= 1.0)) throw contract_error("push_feedback: |f| must be <= 1");
        const Eigen::Index n = feedback_.size();
        if (n == 0) return;
        for (Eigen::Index i = 0; i + 1 < n; ++i) feedback_[i] = feedback_[i + 1];
        feedback_[n - 1] = f;
    }

    /// [u, x, feedback].
    [[nodiscard]] Vector augmented(const Vector& u) const {
        Vector z(u.size() + x_.size() + feedback_.size());
        z << u, x_, feedback_;
        return z;
    }

    [[nodiscard]] const Vector& activations() const noexcept { return x_; }
    [[nodiscard]] const Vector& feedback() const noexcept { return feedback_; }

    void set_activations(const Vector& x) {
        detail::require(x.size() == x_.size(), "set_activations: size mismatch");
        x_ = x;
    }

private:
    Vector x_;
    Vector feedback_;
};

}  // namespace rrl
