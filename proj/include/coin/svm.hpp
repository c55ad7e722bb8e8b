#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>

#include "coin/core.hpp"

namespace coin {

struct SvmTrainConfig {
    std::size_t epochs = 200;
    double eta0 = 0.1;
    double decay = 0.01;   // step size eta0 / (1 + decay * t)
    double reg = 1e-3;     // L2 penalty on the weights (bias unregularized)
    std::uint64_t seed = 0;
};

/// Linear SVM used as the augmentation discriminator: real samples are the
/// +1 class, generated candidates the -1 class. Exposes the geometric signed
/// distance to the decision boundary and the logistic "real" probability
/// derived from it.
class LinearSvm {
public:
    LinearSvm() = default;

    /// Direct construction, mainly for tests and deserialization.
    LinearSvm(FeatureVector weights, double bias)
        : weights_(std::move(weights)), bias_(bias), trained_(true) {}

    bool trained() const { return trained_; }
    const FeatureVector& weights() const { return weights_; }
    double bias() const { return bias_; }
    double reg_strength() const { return reg_strength_; }

    /// Epoch-by-epoch regularized hinge objective recorded during training.
    const std::vector<double>& loss_history() const { return loss_history_; }

    /// (w.x + b) / |w|; zero when |w| = 0, so a degenerate discriminator is
    /// maximally uncertain rather than undefined.
    double signed_distance(const FeatureVector& x) const {
        require_trained();
        if (x.size() != weights_.size()) {
            throw std::invalid_argument("LinearSvm: input dimension " + std::to_string(x.size()) +
                                        " does not match weights dimension " +
                                        std::to_string(weights_.size()));
        }
        const double w_norm = norm(weights_);
        if (w_norm == 0.0) return 0.0;
        return (dot(weights_, x) + bias_) / w_norm;
    }

    /// exp(d) / (exp(d) + 1) evaluated stably; clamped into the open (0,1)
    /// so extreme signed distances never underflow to an exact 0 or 1.
    double real_probability(const FeatureVector& x) const {
        const double d = signed_distance(x);
        double p;
        if (d >= 0.0) {
            p = 1.0 / (1.0 + std::exp(-d));
        } else {
            const double e = std::exp(d);
            p = e / (1.0 + e);
        }
        if (p < std::numeric_limits<double>::min()) p = std::numeric_limits<double>::min();
        const double one_minus = 1.0 - std::numeric_limits<double>::epsilon() / 2;
        if (p > one_minus) p = one_minus;
        return p;
    }

    friend LinearSvm train_svm(const std::vector<FeatureVector>& real,
                               const std::vector<FeatureVector>& generated,
                               const SvmTrainConfig& config);

private:
    void require_trained() const {
        if (!trained_) throw std::invalid_argument("LinearSvm: discriminator has not been trained");
    }

    FeatureVector weights_;
    double bias_ = 0.0;
    double reg_strength_ = 0.0;
    bool trained_ = false;
    std::vector<double> loss_history_;
};

namespace detail {

inline double svm_objective(const std::vector<const FeatureVector*>& xs, const std::vector<int>& ys,
                            const FeatureVector& w, double b, double reg) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double margin = ys[i] * (dot(w, *xs[i]) + b);
        if (margin < 1.0) hinge += 1.0 - margin;
    }
    return 0.5 * reg * dot(w, w) + hinge / static_cast<double>(xs.size());
}

} // namespace detail

/// Full-batch subgradient descent on the L2-regularized hinge loss with a
/// decaying step size. When the two sides are unbalanced, the smaller one is
/// resampled with replacement (seeded) so each carries equal weight. Each
/// epoch's step is backtracked (halved) if it would increase the objective,
/// so the recorded loss sequence is non-increasing.
inline LinearSvm train_svm(const std::vector<FeatureVector>& real,
                           const std::vector<FeatureVector>& generated,
                           const SvmTrainConfig& config) {
    if (real.empty() || generated.empty()) {
        throw std::invalid_argument("train_svm: both classes must be non-empty");
    }
    if (config.epochs < 1 || !(config.eta0 > 0.0)) {
        throw std::invalid_argument("train_svm: epochs must be >= 1 and eta0 > 0");
    }
    const std::size_t d = real.front().size();
    for (const auto& x : real) {
        if (x.size() != d) throw std::invalid_argument("train_svm: dimension mismatch in real set");
    }
    for (const auto& x : generated) {
        if (x.size() != d) throw std::invalid_argument("train_svm: dimension mismatch in generated set");
    }

    std::vector<const FeatureVector*> xs;
    std::vector<int> ys;
    const std::size_t n = std::max(real.size(), generated.size());
    xs.reserve(2 * n);
    ys.reserve(2 * n);
    std::mt19937_64 rng(config.seed);
    auto push_side = [&](const std::vector<FeatureVector>& side, int label) {
        for (const auto& x : side) {
            xs.push_back(&x);
            ys.push_back(label);
        }
        if (side.size() < n) {
            std::uniform_int_distribution<std::size_t> pick(0, side.size() - 1);
            for (std::size_t k = side.size(); k < n; ++k) {
                xs.push_back(&side[pick(rng)]);
                ys.push_back(label);
            }
        }
    };
    push_side(real, +1);
    push_side(generated, -1);

    LinearSvm svm;
    svm.weights_.assign(d, 0.0);
    svm.bias_ = 0.0;
    svm.reg_strength_ = config.reg;
    svm.loss_history_.reserve(config.epochs);

    FeatureVector grad_w(d);
    double objective = detail::svm_objective(xs, ys, svm.weights_, svm.bias_, config.reg);
    const auto inv_n = 1.0 / static_cast<double>(xs.size());

    for (std::size_t t = 1; t <= config.epochs; ++t) {
        for (std::size_t j = 0; j < d; ++j) grad_w[j] = config.reg * svm.weights_[j];
        double grad_b = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double margin = ys[i] * (dot(svm.weights_, *xs[i]) + svm.bias_);
            if (margin < 1.0) {
                const double scale = -ys[i] * inv_n;
                const FeatureVector& x = *xs[i];
                for (std::size_t j = 0; j < d; ++j) grad_w[j] += scale * x[j];
                grad_b += scale;
            }
        }

        double eta = config.eta0 / (1.0 + config.decay * static_cast<double>(t));
        FeatureVector w_next(d);
        for (int attempt = 0; attempt < 60; ++attempt) {
            for (std::size_t j = 0; j < d; ++j) w_next[j] = svm.weights_[j] - eta * grad_w[j];
            const double b_next = svm.bias_ - eta * grad_b;
            const double obj_next = detail::svm_objective(xs, ys, w_next, b_next, config.reg);
            if (obj_next <= objective) {
                svm.weights_ = w_next;
                svm.bias_ = b_next;
                objective = obj_next;
                break;
            }
            eta *= 0.5;
        }
        svm.loss_history_.push_back(objective);
    }

    svm.trained_ = true;
    return svm;
}

} // namespace coin
