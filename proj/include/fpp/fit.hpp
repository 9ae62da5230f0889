#pragma once

// Log-log decay fits: ordinary least squares of log(value) against
// log(1 + t). Shared by the quadrature oracle and the trajectory diagnostics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace fpp {

/// Fits with r² below this are flagged as not following a power law.
inline constexpr double power_law_r2_threshold = 0.995;

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares: need >= 2 paired samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    // Exact fits can leave syy at roundoff level; treat them as perfect.
    f.r_squared = syy > 0.0 ? std::min(1.0, sxy * sxy / (sxx * syy)) : 1.0;
    return f;
}

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;
    std::size_t samples = 0;
    bool power_law = false;      // r² >= power_law_r2_threshold
    bool inside_horizon = true;  // t1 within the box-contamination horizon

    bool warning() const { return !power_law || !inside_horizon; }
};

/// Fit log(values) ~ slope·log(1+t) + intercept, given log-values directly
/// (so that underflowing norms can still be fitted).
inline DecayFit fit_log_values(std::span<const double> times, std::span<const double> log_values,
                               double horizon = std::numeric_limits<double>::infinity()) {
    if (times.size() != log_values.size()) throw std::invalid_argument("fit: times and values differ in length");
    std::vector<double> x(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(log_values[i])) throw std::domain_error("fit: zero or non-finite value in fit window");
        x[i] = std::log1p(times[i]);
    }
    const LineFit lf = least_squares(x, log_values);
    DecayFit f;
    f.slope = lf.slope;
    f.intercept = lf.intercept;
    f.r_squared = lf.r_squared;
    f.t0 = times.front();
    f.t1 = times.back();
    f.samples = times.size();
    f.power_law = f.r_squared >= power_law_r2_threshold;
    f.inside_horizon = f.t1 <= horizon;
    return f;
}

/// n log-uniform times on [t0, t1], endpoints included.
inline std::vector<double> log_spaced(double t0, double t1, std::size_t n) {
    if (!(t0 > 0.0 && t1 > t0) || n < 2) throw std::invalid_argument("log_spaced: need 0 < t0 < t1 and n >= 2");
    std::vector<double> t(n);
    const double a = std::log(t0), b = std::log(t1);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    t.front() = t0;
    t.back() = t1;
    return t;
}

}  // namespace fpp
