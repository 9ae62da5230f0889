#pragma once

// Exact linear semigroup e^{-σ(|k|)t} on the lattice, its long/short-wave
// parts, and whole-space probes of the low/high-frequency decay estimates.

#include "fpp/errors.hpp"
#include "fpp/fit.hpp"
#include "fpp/grid.hpp"
#include "fpp/model.hpp"
#include "fpp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fpp {

inline SpectralField propagate(const SpectralField& f, double t, const ModelParams& p) {
    if (!(t >= 0.0)) throw std::invalid_argument("propagate: t must be >= 0");
    return apply_radial_multiplier(f, [&](double r) { return std::exp(-sigma(r, p) * t); });
}

/// G_L(t)∗u = χ(D) e^{-σt} u.
inline SpectralField green_low(const SpectralField& f, double t, double R, const ModelParams& p) {
    if (!(t >= 0.0)) throw std::invalid_argument("green_low: t must be >= 0");
    if (!(R > 0.0 && R < 1.0)) throw std::invalid_argument("green_low: R must lie in (0, 1)");
    return apply_radial_multiplier(f, [&](double r) { return cutoff_chi(r, R) * std::exp(-sigma(r, p) * t); });
}

/// G_H(t)∗u = (1 - χ(D)) e^{-σt} u.
inline SpectralField green_high(const SpectralField& f, double t, double R, const ModelParams& p) {
    if (!(t >= 0.0)) throw std::invalid_argument("green_high: t must be >= 0");
    if (!(R > 0.0 && R < 1.0)) throw std::invalid_argument("green_high: R must lie in (0, 1)");
    return apply_radial_multiplier(f, [&](double r) { return cutoff_chi_complement(r, R) * std::exp(-sigma(r, p) * t); });
}

/// Tail log-slope above which a ratio series counts as growing.
inline constexpr double bounded_slope_tolerance = 0.05;

struct ProbeReport {
    std::vector<double> times;
    std::vector<double> ratios;      // may underflow to 0 at late times
    std::vector<double> log_ratios;  // exact log form of the same values
    double sup_ratio = 0.0;          // over t >= 1
    double tail_slope = 0.0;         // d log(ratio) / d log t on the tail window
    bool bounded = false;
    std::optional<double> fitted_rate;  // exponential rate, gain-case high-frequency probe
};

namespace detail {

// Tail window: the later half of the samples with t >= 1 (at least two).
inline void finish_probe(ProbeReport& rep) {
    std::vector<double> x, y;
    rep.sup_ratio = 0.0;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        if (rep.times[i] < 1.0) continue;
        rep.sup_ratio = std::max(rep.sup_ratio, rep.ratios[i]);
        x.push_back(std::log(rep.times[i]));
        y.push_back(rep.log_ratios[i]);
    }
    if (x.size() < 2) throw std::invalid_argument("probe: need at least two sample times >= 1");
    const std::size_t start = x.size() - std::max<std::size_t>(2, (x.size() + 1) / 2);
    std::vector<double> tx(x.begin() + static_cast<long>(start), x.end());
    std::vector<double> ty(y.begin() + static_cast<long>(start), y.end());
    if (std::any_of(ty.begin(), ty.end(), [](double v) { return v == -std::numeric_limits<double>::infinity(); })) {
        rep.tail_slope = -std::numeric_limits<double>::infinity();
    } else {
        rep.tail_slope = least_squares(tx, ty).slope;
    }
    rep.bounded = rep.tail_slope <= bounded_slope_tolerance;
}

inline void check_samples(const std::vector<double>& t) {
    if (t.empty()) throw std::invalid_argument("probe: no sample times");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] >= 0.0)) throw std::invalid_argument("probe: sample times must be >= 0");
        if (i && !(t[i] > t[i - 1])) throw std::invalid_argument("probe: sample times must increase");
    }
}

}  // namespace detail

/// Low-frequency L¹→L² estimate: ratios(t) = ‖Λ^l G_L(t)∗φ‖ (1+t)^{n/4α + l/2α} / ‖φ‖_{L¹}.
/// `exponent_shift` strengthens the claimed decay (falsification control).
inline ProbeReport probe_low_frequency(const RadialProfile& profile, double l, const std::vector<double>& t_samples,
                                       const ModelParams& p, double R = default_cutoff_radius,
                                       double exponent_shift = 0.0, double tol = default_quadrature_tol) {
    detail::check_samples(t_samples);
    if (!profile.l1_norm_hint || !(*profile.l1_norm_hint > 0.0))
        throw std::invalid_argument("probe_low_frequency: profile needs a positive L1 norm");
    const double e = -decay_exponent(l, p) + exponent_shift;
    const double log_l1 = std::log(*profile.l1_norm_hint);
    ProbeReport rep;
    rep.times = t_samples;
    for (double t : t_samples) {
        double lv;
        try {
            lv = radial_weighted_l2_log(profile, l, t, p, Window::low(R), tol);
        } catch (const QuadratureError& err) {
            throw QuadratureError(std::string("low-frequency probe: ") + err.what(), t);
        }
        const double lr = lv + e * std::log1p(t) - log_l1;
        rep.log_ratios.push_back(lr);
        rep.ratios.push_back(std::exp(lr));
    }
    detail::finish_probe(rep);
    return rep;
}

/// High-frequency estimate.
///   gain (α >= 1): fits ‖Λ^l G_H(t)∗φ‖ ≈ C e^{-ct} over samples t >= 1,
///                  ratios(t) = ‖Λ^l G_H(t)∗φ‖ e^{ct} / ‖Λ^l φ‖;
///   loss (α < 1):  ratios(t) = ‖Λ^l G_H(t)∗φ‖ (1+t)^{β/2ᾱ} / ‖Λ^{β+l} φ‖.
inline ProbeReport probe_high_frequency(const RadialProfile& profile, double l, double beta,
                                        const std::vector<double>& t_samples, const ModelParams& p,
                                        double R = default_cutoff_radius, double tol = default_quadrature_tol) {
    detail::check_samples(t_samples);
    ProbeReport rep;
    rep.times = t_samples;
    std::vector<double> lv;
    for (double t : t_samples) {
        try {
            lv.push_back(radial_weighted_l2_log(profile, l, t, p, Window::high(R), tol));
        } catch (const QuadratureError& err) {
            throw QuadratureError(std::string("high-frequency probe: ") + err.what(), t);
        }
    }
    if (p.alpha >= 1.0) {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < t_samples.size(); ++i)
            if (t_samples[i] >= 1.0 && std::isfinite(lv[i])) {
                x.push_back(t_samples[i]);
                y.push_back(lv[i]);
            }
        if (x.size() < 2) throw std::invalid_argument("probe_high_frequency: need two finite samples with t >= 1");
        const double rate = -least_squares(x, y).slope;
        rep.fitted_rate = rate;
        const double ref = radial_weighted_l2_log(profile, l, 0.0, p, Window::full(), tol);
        for (std::size_t i = 0; i < t_samples.size(); ++i) rep.log_ratios.push_back(lv[i] + rate * t_samples[i] - ref);
    } else {
        if (!(beta > 0.0)) throw std::invalid_argument("probe_high_frequency: beta must be positive when alpha < 1");
        const double ab = 1.0 - p.alpha;
        const double ref = radial_weighted_l2_log(profile, beta + l, 0.0, p, Window::full(), tol);
        for (std::size_t i = 0; i < t_samples.size(); ++i)
            rep.log_ratios.push_back(lv[i] + beta / (2.0 * ab) * std::log1p(t_samples[i]) - ref);
    }
    for (double lr : rep.log_ratios) rep.ratios.push_back(std::exp(lr));
    detail::finish_probe(rep);
    return rep;
}

}  // namespace fpp
