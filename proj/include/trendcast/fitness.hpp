#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "trendcast/errors.hpp"
#include "trendcast/scaler.hpp"
#include "trendcast/svr.hpp"

namespace trendcast {

/// Mean absolute percentage error, in percent.
inline double mape(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw ShapeError("mape: |actual| = " + std::to_string(actual.size()) +
                         " but |predicted| = " + std::to_string(predicted.size()));
    if (actual.empty()) throw ShapeError("mape: empty inputs");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0)
            throw DivisionError("mape: zero actual at index " + std::to_string(i));
        sum += std::abs(actual[i] - predicted[i]) / std::abs(actual[i]);
    }
    return 100.0 * sum / static_cast<double>(actual.size());
}

struct SolverSettings {
    double tol = 1e-3;
    long max_iter = 0; // 0 = default budget
};

/// Inputs of the dual-horizon score: the full scaled training data plus the
/// row where the recent window (last five calendar years of training) starts.
/// MAPEs are computed on the original price scale via `price_scaler`.
struct FitnessContext {
    std::vector<double> train_x; // scaled, strictly increasing
    std::vector<double> train_y; // scaled
    std::size_t recent_start_row = 0;
    ScalerParams price_scaler;
    SolverSettings solver;
    // Optional tally of non-converged solver runs, for the run log.
    std::atomic<long>* nonconverged = nullptr;

    void validate() const {
        if (train_x.size() != train_y.size() || train_x.empty())
            throw ShapeError("FitnessContext: train_x/train_y size mismatch or empty");
        if (recent_start_row >= train_x.size())
            throw ParameterError("FitnessContext: recent_start_row out of range");
    }
};

/// Arithmetic mean of the full-training MAPE and the recent-window MAPE of
/// one model trained on the whole training set. In-sample by construction;
/// test rows are never touched. Non-convergence still yields a finite score
/// from the best-so-far model so the GA stays total over its box.
inline double dual_horizon_fitness(const FitnessContext& ctx, const SvrHyperParams& params) {
    ctx.validate();
    const auto [model, report] =
        train_svr(ctx.train_x, ctx.train_y, params, ctx.solver.tol, ctx.solver.max_iter);
    if (!report.converged && ctx.nonconverged) ctx.nonconverged->fetch_add(1);

    const std::size_t n = ctx.train_y.size();
    std::vector<double> actual(n), predicted(n);
    for (std::size_t i = 0; i < n; ++i) {
        actual[i] = ctx.price_scaler.inverse_transform(ctx.train_y[i]);
        predicted[i] = ctx.price_scaler.inverse_transform(report.train_predictions[i]);
    }
    const double full = mape(actual, predicted);
    const double recent = mape(std::span<const double>(actual).subspan(ctx.recent_start_row),
                               std::span<const double>(predicted).subspan(ctx.recent_start_row));
    return 0.5 * (full + recent);
}

/// Rolling-forward validation scheme: fixed-length training window, scored on
/// the following validation segment, advanced by `step` rows.
struct RollingScheme {
    std::size_t window = 0;
    std::size_t step = 0;
    std::size_t validation = 0;

    void validate(std::size_t train_length) const {
        if (window == 0 || step == 0 || validation == 0)
            throw ConfigError("RollingScheme: window, step and validation must be positive");
        if (window + validation > train_length)
            throw ConfigError("RollingScheme: window + validation = " +
                              std::to_string(window + validation) + " exceeds training length " +
                              std::to_string(train_length));
    }

    std::size_t positions(std::size_t train_length) const {
        validate(train_length);
        return (train_length - window - validation) / step + 1;
    }
};

/// Out-of-sample MAPE per rolling position. Templated on the x/y views so
/// tests can instrument data access; views need only size() and operator[].
template <class XView, class YView>
std::vector<double> rolling_forward_details(const XView& train_x, const YView& train_y,
                                            const RollingScheme& scheme,
                                            const SvrHyperParams& params,
                                            const ScalerParams& price_scaler,
                                            const SolverSettings& solver = {}) {
    const std::size_t n = train_y.size();
    scheme.validate(n);
    std::vector<double> scores;
    for (std::size_t start = 0; start + scheme.window + scheme.validation <= n;
         start += scheme.step) {
        std::vector<double> wx(scheme.window), wy(scheme.window);
        for (std::size_t i = 0; i < scheme.window; ++i) {
            wx[i] = train_x[start + i];
            wy[i] = train_y[start + i];
        }
        const auto [model, report] = train_svr(wx, wy, params, solver.tol, solver.max_iter);
        std::vector<double> actual(scheme.validation), predicted(scheme.validation);
        for (std::size_t i = 0; i < scheme.validation; ++i) {
            const std::size_t row = start + scheme.window + i;
            actual[i] = price_scaler.inverse_transform(train_y[row]);
            predicted[i] = price_scaler.inverse_transform(predict(model, train_x[row]));
        }
        scores.push_back(mape(actual, predicted));
    }
    return scores;
}

/// Mean validation MAPE over all rolling positions.
inline double rolling_forward_fitness(std::span<const double> train_x,
                                      std::span<const double> train_y,
                                      const RollingScheme& scheme, const SvrHyperParams& params,
                                      const ScalerParams& price_scaler,
                                      const SolverSettings& solver = {}) {
    const auto scores = rolling_forward_details(train_x, train_y, scheme, params, price_scaler,
                                                solver);
    double sum = 0.0;
    for (const double s : scores) sum += s;
    return sum / static_cast<double>(scores.size());
}

} // namespace trendcast
