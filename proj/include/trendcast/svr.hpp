#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trendcast/errors.hpp"

namespace trendcast {

/// Hyperparameters of the epsilon-insensitive SVR with RBF kernel.
/// gamma = 0 is a permitted degenerate case (constant kernel).
struct SvrHyperParams {
    double C = 1.0;
    double epsilon = 0.1;
    double gamma = 1.0;

    void validate() const {
        if (!(C > 0.0) || !std::isfinite(C))
            throw ParameterError("SvrHyperParams: C must be positive, got " + std::to_string(C));
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
            throw ParameterError("SvrHyperParams: epsilon must be >= 0, got " +
                                 std::to_string(epsilon));
        if (!(gamma >= 0.0) || !std::isfinite(gamma))
            throw ParameterError("SvrHyperParams: gamma must be >= 0, got " +
                                 std::to_string(gamma));
    }
};

inline double rbf_kernel(double x, double z, double gamma) {
    const double d = x - z;
    return std::exp(-gamma * d * d);
}

/// scikit-learn's 'scale' convention: 1 / (n_features * population variance).
inline double gamma_scale(std::span<const double> features, int features_per_sample = 1) {
    if (features.empty()) throw DegenerateFeatureError("gamma_scale: empty feature list");
    double mean = 0.0;
    for (const double v : features) mean += v;
    mean /= static_cast<double>(features.size());
    double var = 0.0;
    for (const double v : features) var += (v - mean) * (v - mean);
    var /= static_cast<double>(features.size());
    if (!(var > 0.0)) throw DegenerateFeatureError("gamma_scale: zero feature variance");
    return 1.0 / (static_cast<double>(features_per_sample) * var);
}

/// Trained model: the kernel expansion f(x) = sum_i beta_i K(s_i, x) + bias,
/// restricted to rows with beta != 0.
struct SvrModel {
    std::vector<double> support_inputs;
    std::vector<double> beta; // alpha_i - alpha_i^* per support input
    double bias = 0.0;
    SvrHyperParams params;
};

struct SolverReport {
    long iterations = 0;
    double final_kkt_violation = 0.0;
    double dual_objective = 0.0; // maximization form
    bool converged = false;
    // In-sample f(x_i), reconstructed from the final gradient at no extra cost.
    std::vector<double> train_predictions;
};

inline double predict(const SvrModel& model, double x) {
    double acc = model.bias;
    for (std::size_t i = 0; i < model.beta.size(); ++i)
        acc += model.beta[i] * rbf_kernel(model.support_inputs[i], x, model.params.gamma);
    return acc;
}

namespace detail {

// The training feature is usually a uniformly spaced scaled ordinal grid, so
// the Gram matrix is Toeplitz: K(i, j) depends only on |i - j| and one table
// of n entries replaces n^2 kernel evaluations.
class ToeplitzRbf {
public:
    ToeplitzRbf(std::size_t n, double step, double gamma) : table_(n) {
        for (std::size_t d = 0; d < n; ++d) {
            const double dist = step * static_cast<double>(d);
            table_[d] = std::exp(-gamma * dist * dist);
        }
    }
    double at(std::size_t i, std::size_t j) const { return table_[i > j ? i - j : j - i]; }

private:
    std::vector<double> table_;
};

// Full precomputed Gram for small inputs.
class DenseRbf {
public:
    DenseRbf(std::span<const double> x, double gamma) : n_(x.size()), gram_(n_ * n_) {
        for (std::size_t i = 0; i < n_; ++i) {
            gram_[i * n_ + i] = 1.0;
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double k = rbf_kernel(x[i], x[j], gamma);
                gram_[i * n_ + j] = k;
                gram_[j * n_ + i] = k;
            }
        }
    }
    double at(std::size_t i, std::size_t j) const { return gram_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> gram_;
};

// On-demand evaluation for large irregular inputs.
class DirectRbf {
public:
    DirectRbf(std::span<const double> x, double gamma) : x_(x.begin(), x.end()), gamma_(gamma) {}
    double at(std::size_t i, std::size_t j) const { return rbf_kernel(x_[i], x_[j], gamma_); }

private:
    std::vector<double> x_;
    double gamma_;
};

inline std::optional<double> uniform_step(std::span<const double> x) {
    if (x.size() < 3) return std::nullopt;
    const double span = x.back() - x.front();
    const double h = span / static_cast<double>(x.size() - 1);
    const double tol = 1e-9 * std::max(1.0, std::abs(span));
    for (std::size_t i = 1; i + 1 < x.size(); ++i)
        if (std::abs(x[i] - (x.front() + h * static_cast<double>(i))) > tol) return std::nullopt;
    return h;
}

struct SmoOutcome {
    std::vector<double> alpha; // 2n: [alpha; alpha*]
    std::vector<double> gradient;
    long iterations = 0;
    double violation = 0.0;
    double bias = 0.0;
    bool converged = false;
};

// Sequential minimal optimization on the 2n-variable dual
//   min 1/2 a^T Q a + p^T a,  sum_k s_k a_k = 0,  0 <= a_k <= C
// with s = +1 on the alpha half, -1 on the alpha* half, and
// p = [eps - y; eps + y]. Pairs are chosen by maximal violation with a
// second-order gain refinement for the partner index.
template <class Kernel>
SmoOutcome solve_smo(std::span<const double> y, double C, double eps, const Kernel& kern,
                     double tol, long max_iter) {
    const std::size_t n = y.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    constexpr double kTau = 1e-12;

    SmoOutcome out;
    out.alpha.assign(2 * n, 0.0);
    out.gradient.resize(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        out.gradient[k] = eps - y[k];
        out.gradient[k + n] = eps + y[k];
    }
    double* a = out.alpha.data();
    double* G = out.gradient.data();

    double sel_max = -kInf, sel_min = kInf;
    for (;;) {
        // i = argmax of -s_k G_k over the "can move up" set.
        sel_max = -kInf;
        std::size_t i = kNone;
        for (std::size_t k = 0; k < n; ++k)
            if (a[k] < C && -G[k] > sel_max) { sel_max = -G[k]; i = k; }
        for (std::size_t k = n; k < 2 * n; ++k)
            if (a[k] > 0.0 && G[k] > sel_max) { sel_max = G[k]; i = k; }

        // M plus the second-order partner j over the "can move down" set.
        sel_min = kInf;
        std::size_t j = kNone;
        double best_gain = -kInf;
        const std::size_t pi = (i == kNone) ? 0 : (i < n ? i : i - n);
        auto consider = [&](std::size_t k, double value, std::size_t pk) {
            if (value < sel_min) sel_min = value;
            if (i == kNone) return;
            const double b = sel_max - value;
            if (b <= 0.0) return;
            double eta = 2.0 * (1.0 - kern.at(pi, pk));
            if (eta < kTau) eta = kTau;
            const double gain = b * b / eta;
            if (gain > best_gain) { best_gain = gain; j = k; }
        };
        for (std::size_t k = 0; k < n; ++k)
            if (a[k] > 0.0) consider(k, -G[k], k);
        for (std::size_t k = n; k < 2 * n; ++k)
            if (a[k] < C) consider(k, G[k], k - n);

        out.violation = sel_max - sel_min;
        if (out.violation <= tol || j == kNone) {
            out.converged = out.violation <= tol;
            break;
        }
        if (out.iterations >= max_iter) break;

        const std::size_t pj = j < n ? j : j - n;
        double eta = 2.0 * (1.0 - kern.at(pi, pj));
        if (eta < kTau) eta = kTau;
        const double vj = j < n ? -G[j] : G[j];
        const double u_star = (sel_max - vj) / eta;
        const double room_i = (i < n) ? C - a[i] : a[i];
        const double room_j = (j < n) ? a[j] : C - a[j];
        const double u = std::min({u_star, room_i, room_j});

        if (i < n) { a[i] += u; if (u == room_i) a[i] = C; }
        else       { a[i] -= u; if (u == room_i) a[i] = 0.0; }
        if (j < n) { a[j] -= u; if (u == room_j) a[j] = 0.0; }
        else       { a[j] += u; if (u == room_j) a[j] = C; }

        for (std::size_t k = 0; k < n; ++k) {
            const double diff = u * (kern.at(k, pi) - kern.at(k, pj));
            G[k] += diff;
            G[k + n] -= diff;
        }
        ++out.iterations;
    }

    // Bias from free variables; midpoint of the KKT interval otherwise.
    double bias_sum = 0.0;
    long bias_count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (a[k] > 0.0 && a[k] < C) { bias_sum += -G[k]; ++bias_count; }
        if (a[k + n] > 0.0 && a[k + n] < C) { bias_sum += G[k + n]; ++bias_count; }
    }
    out.bias = bias_count > 0 ? bias_sum / static_cast<double>(bias_count)
                              : 0.5 * (sel_max + sel_min);
    return out;
}

} // namespace detail

/// Fit the epsilon-SVR dual to KKT violation <= tol. max_iter == 0 selects the
/// default budget of 200 * n pair updates; any budget is capped at 2,000,000.
/// On an exhausted budget the best-so-far model is returned with
/// converged == false; the dual objective never decreases across updates, so
/// best-so-far is simply the final state.
inline std::pair<SvrModel, SolverReport> train_svr(std::span<const double> x,
                                                   std::span<const double> y,
                                                   const SvrHyperParams& params,
                                                   double tol = 1e-3, long max_iter = 0) {
    if (x.size() != y.size())
        throw ParameterError("train_svr: |x| = " + std::to_string(x.size()) +
                             " but |y| = " + std::to_string(y.size()));
    if (x.empty()) throw ParameterError("train_svr: empty training set");
    params.validate();
    if (!(tol > 0.0)) throw ParameterError("train_svr: tol must be positive");

    const std::size_t n = x.size();
    constexpr long kHardCap = 2'000'000;
    long budget = max_iter > 0 ? max_iter : 200 * static_cast<long>(n);
    budget = std::min(budget, kHardCap);

    constexpr std::size_t kDenseLimit = 1024;
    detail::SmoOutcome smo;
    if (const auto step = detail::uniform_step(x)) {
        smo = detail::solve_smo(y, params.C, params.epsilon,
                                detail::ToeplitzRbf(n, *step, params.gamma), tol, budget);
    } else if (n <= kDenseLimit) {
        smo = detail::solve_smo(y, params.C, params.epsilon, detail::DenseRbf(x, params.gamma),
                                tol, budget);
    } else {
        smo = detail::solve_smo(y, params.C, params.epsilon, detail::DirectRbf(x, params.gamma),
                                tol, budget);
    }

    SvrModel model;
    model.params = params;
    model.bias = smo.bias;
    for (std::size_t k = 0; k < n; ++k) {
        const double beta = smo.alpha[k] - smo.alpha[k + n];
        if (beta != 0.0) {
            model.support_inputs.push_back(x[k]);
            model.beta.push_back(beta);
        }
    }

    SolverReport report;
    report.iterations = smo.iterations;
    report.final_kkt_violation = smo.violation;
    report.converged = smo.converged;
    // D = 1/2 a^T (G - p) + p^T a = 1/2 a^T (G + p); report the maximization form.
    double d_obj = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        d_obj += smo.alpha[k] * (smo.gradient[k] + (params.epsilon - y[k]));
        d_obj += smo.alpha[k + n] * (smo.gradient[k + n] + (params.epsilon + y[k]));
    }
    report.dual_objective = -0.5 * d_obj;
    report.train_predictions.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        report.train_predictions[k] = smo.gradient[k] - params.epsilon + y[k] + smo.bias;
    return {std::move(model), std::move(report)};
}

} // namespace trendcast
