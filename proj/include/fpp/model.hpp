#pragma once

// Model constants and Fourier symbols for
//
//     u_t - m Δu_t + (-Δ)^α u = u^(θ+1),   x ∈ R^n.
//
// In Fourier variables the linear flow is û(t,ξ) = exp(-σ(|ξ|) t) û0(ξ) with
// σ(r) = r^(2α) / (1 + m r²), and the nonlinearity enters through the
// smoothing operator B⁻¹ = (1 - mΔ)⁻¹.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpp {

struct ModelParams {
    int n = 1;           // spatial dimension, 1..3
    double m = 1.0;      // coefficient of -Δu_t
    double alpha = 1.0;  // fractional order
    double theta = 1.0;  // nonlinearity u^(θ+1); positive integer

    int power() const { return static_cast<int>(theta) + 1; }

    /// ᾱ = 1 - α, defined only in the regularity-loss range α < 1.
    std::optional<double> alpha_bar() const {
        if (alpha < 1.0) return 1.0 - alpha;
        return std::nullopt;
    }
};

inline void check_params(const ModelParams& p) {
    if (p.n < 1 || p.n > 3)
        throw std::invalid_argument("model: n must be 1, 2 or 3 (got " + std::to_string(p.n) + ")");
    if (!(p.m > 0.0) || !std::isfinite(p.m))
        throw std::invalid_argument("model: m must be positive");
    if (!(p.alpha > 0.0) || !std::isfinite(p.alpha))
        throw std::invalid_argument("model: alpha must be positive");
    if (!(p.theta >= 1.0) || p.theta != std::floor(p.theta) || p.theta > 64.0)
        throw std::invalid_argument("model: theta must be a positive integer");
}

inline constexpr double default_cutoff_radius = 0.5;

enum class Regime { gain, loss };

inline const char* to_string(Regime r) { return r == Regime::gain ? "gain" : "loss"; }

/// Exponent of the algebraic decay (1+t)^(-n/(4α) - l/(2α)) of ‖Λ^l u(t)‖_{L²}.
inline double decay_exponent(double l, const ModelParams& p) {
    if (l < 0.0) throw std::invalid_argument("decay_exponent: l must be >= 0");
    return -p.n / (4.0 * p.alpha) - l / (2.0 * p.alpha);
}

struct RegimeReport {
    ModelParams params;
    Regime regime = Regime::gain;
    bool theta_ok = false;  // θ > 4α/n
    double s = 0.0;         // regularity of the data
    bool s_ok = false;
    double n0 = 0.0;        // highest derivative order with the full decay rate
    std::vector<std::string> warnings;

    bool hypotheses_hold() const { return theta_ok && s_ok; }
    double decay_exponent(double l) const { return fpp::decay_exponent(l, params); }
};

/// Checks the global-existence hypotheses for data in H^s. Failed hypotheses
/// are reported as warnings; only invalid parameters throw.
inline RegimeReport validate(const ModelParams& p, double s) {
    check_params(p);
    if (!(s >= 0.0) || !std::isfinite(s))
        throw std::invalid_argument("validate: s must be a nonnegative real");

    RegimeReport rep;
    rep.params = p;
    rep.s = s;
    rep.regime = p.alpha >= 1.0 ? Regime::gain : Regime::loss;
    rep.theta_ok = p.theta > 4.0 * p.alpha / p.n;
    if (!rep.theta_ok) rep.warnings.push_back("theta <= 4*alpha/n: outside the small-data decay theorem");

    if (rep.regime == Regime::gain) {
        rep.s_ok = s > p.n / 2.0;
        rep.n0 = s;
        if (!rep.s_ok) rep.warnings.push_back("s <= n/2: outside the regularity-gain theorem");
    } else {
        const double ab = 1.0 - p.alpha;
        const double jmax = std::floor(s / (2.0 * ab));
        const double shift = p.n / (2.0 * p.alpha) * ab;
        rep.s_ok = jmax >= p.n / (2.0 * p.alpha) + 1.5 * ab;
        // N0 = α·min{ s - (n/2α)ᾱ, ([s/2ᾱ] - 1)ᾱ - (n/2α)ᾱ + 2 }
        const double n0 = p.alpha * std::min(s - shift, (jmax - 1.0) * ab - shift + 2.0);
        rep.n0 = std::clamp(n0, 0.0, s);
        if (!rep.s_ok) rep.warnings.push_back("[s/(2*alpha_bar)] < n/(2*alpha) + 1.5*alpha_bar: outside the regularity-loss theorem");
    }
    return rep;
}

/// Dissipation symbol σ(r) = r^(2α) / (1 + m r²).
inline double sigma(double r, const ModelParams& p) {
    if (r <= 0.0) return 0.0;
    return std::pow(r, 2.0 * p.alpha) / (1.0 + p.m * r * r);
}

/// Symbol of B⁻¹ = (1 - mΔ)⁻¹.
inline double b_inverse(double r, const ModelParams& p) {
    return 1.0 / (1.0 + p.m * r * r);
}

namespace detail {
inline double bump_edge(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
}  // namespace detail

/// Smooth cutoff: 1 on r <= R, 0 on r >= 2R, C^∞ and monotone in between,
/// symmetric about 1.5R (χ(1.5R) = 1/2).
inline double cutoff_chi(double r, double R = default_cutoff_radius) {
    if (!(R > 0.0 && R < 1.0)) throw std::invalid_argument("cutoff_chi: R must lie in (0, 1)");
    if (r <= R) return 1.0;
    if (r >= 2.0 * R) return 0.0;
    const double a = detail::bump_edge(2.0 - r / R);
    const double b = detail::bump_edge(r / R - 1.0);
    return a / (a + b);
}

/// 1 - χ(r), evaluated without cancellation near r = R.
inline double cutoff_chi_complement(double r, double R = default_cutoff_radius) {
    if (!(R > 0.0 && R < 1.0)) throw std::invalid_argument("cutoff_chi: R must lie in (0, 1)");
    if (r <= R) return 0.0;
    if (r >= 2.0 * R) return 1.0;
    const double a = detail::bump_edge(2.0 - r / R);
    const double b = detail::bump_edge(r / R - 1.0);
    return b / (a + b);
}

/// Largest r at which σ is increasing; +∞ when α >= 1 (σ monotone).
inline double sigma_peak(const ModelParams& p) {
    if (p.alpha >= 1.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(p.alpha / (p.m * (1.0 - p.alpha)));
}

}  // namespace fpp
