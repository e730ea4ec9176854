#pragma once

#include <algorithm>
#include <span>

#include "trendcast/errors.hpp"

namespace trendcast {

/// Min-max scaling parameters for one channel. Fit on training data only;
/// transforming values outside [min, max] (test-period ordinals) is intended
/// extrapolation and maps outside [0, 1].
struct ScalerParams {
    double min = 0.0;
    double max = 1.0;

    double transform(double x) const { return (x - min) / (max - min); }
    double inverse_transform(double s) const { return s * (max - min) + min; }
};

inline ScalerParams fit_minmax(std::span<const double> values) {
    if (values.empty()) throw EmptyInputError("fit_minmax: no values");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*hi > *lo))
        throw DegenerateScalerError("fit_minmax: constant sample, min == max == " +
                                    std::to_string(*lo));
    return ScalerParams{*lo, *hi};
}

inline double transform(const ScalerParams& p, double x) { return p.transform(x); }
inline double inverse_transform(const ScalerParams& p, double s) { return p.inverse_transform(s); }

} // namespace trendcast
