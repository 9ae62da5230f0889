#pragma once

// Whole-space ground truth for the linear flow with radially symmetric data.
//
// For û0 radial, Plancherel reduces every weighted L² norm of the linear
// solution to a one-dimensional integral
//
//     ‖Λ^l W·G(t)∗φ‖²_{L²} = ω_{n-1} ∫₀^∞ r^{2l+n-1} w(r)² e^{-2σ(r)t} |û0(r)|² dr,
//
// with w ∈ {1, χ, 1-χ}. Profiles use the unitary Fourier transform, so the
// integral equals the physical-space L² norm squared with no 2π factors.
//
// The integrand is evaluated in log form and rescaled by its running maximum,
// which keeps very late times (norms far below the double range) usable for
// slope fits.

#include "fpp/errors.hpp"
#include "fpp/fit.hpp"
#include "fpp/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <queue>
#include <stdexcept>
#include <variant>
#include <vector>

namespace fpp {

/// |û0(r)| <= bound · exp(-width² r² / 2).
struct GaussianTail {
    double width = 1.0;
    double bound = 1.0;
};

/// |û0(r)| <= bound · r^(-exponent) for r >= 1.
struct PowerTail {
    double exponent = 1.0;
    double bound = 1.0;
};

/// û0(r) = 0 for r >= radius.
struct CompactSupport {
    double radius = 1.0;
};

using DecayClass = std::variant<GaussianTail, PowerTail, CompactSupport>;

struct RadialProfile {
    std::function<std::complex<double>(double)> value;
    std::function<double(double)> log_magnitude;  // optional log|û0(r)|, used in far tails
    std::optional<double> l1_norm_hint;           // ‖φ‖_{L¹} of the physical datum
    DecayClass decay_class;

    double log_abs(double r) const {
        if (log_magnitude) return log_magnitude(r);
        const double a = std::abs(value(r));
        return a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
    }
};

/// Physical datum A·exp(-|x|²/(2w²)) in n dimensions; unitary transform
/// A wⁿ exp(-w² r²/2), L¹ norm A (2π)^{n/2} wⁿ.
inline RadialProfile gaussian_profile(int n, double width, double amplitude) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian_profile: width must be positive");
    const double a = amplitude * std::pow(width, n);
    RadialProfile p;
    p.value = [a, width](double r) { return std::complex<double>(a * std::exp(-0.5 * width * width * r * r), 0.0); };
    const double la = std::log(std::abs(a));
    p.log_magnitude = [la, width](double r) { return la - 0.5 * width * width * r * r; };
    p.l1_norm_hint = std::abs(amplitude) * std::pow(2.0 * std::numbers::pi, 0.5 * n) * std::pow(width, n);
    p.decay_class = GaussianTail{width, std::abs(a)};
    return p;
}

/// Spectral profile A·(1 + r²)^(-p/2): the Bessel potential kernel, which is
/// positive and integrable, so its L¹ norm is (2π)^{n/2}·A. It lies in H^s
/// exactly for s < p - n/2.
inline RadialProfile power_tail_profile(int n, double exponent, double amplitude) {
    if (!(exponent > 0.0)) throw std::invalid_argument("power_tail_profile: exponent must be positive");
    RadialProfile p;
    p.value = [amplitude, exponent](double r) {
        return std::complex<double>(amplitude * std::pow(1.0 + r * r, -0.5 * exponent), 0.0);
    };
    const double la = std::log(std::abs(amplitude));
    p.log_magnitude = [la, exponent](double r) {
        // log(1 + r²) without overflow at huge r
        const double l1r2 = r > 1e150 ? 2.0 * std::log(r) : std::log1p(r * r);
        return la - 0.5 * exponent * l1r2;
    };
    p.l1_norm_hint = std::abs(amplitude) * std::pow(2.0 * std::numbers::pi, 0.5 * n);
    p.decay_class = PowerTail{exponent, std::abs(amplitude)};
    return p;
}

/// Smooth bump A·exp(1 - 1/(1 - (r/ρ)²)) on r < ρ.
inline RadialProfile compact_profile(double radius, double amplitude) {
    if (!(radius > 0.0)) throw std::invalid_argument("compact_profile: radius must be positive");
    RadialProfile p;
    p.value = [radius, amplitude](double r) {
        const double q = r / radius;
        if (q >= 1.0) return std::complex<double>(0.0, 0.0);
        return std::complex<double>(amplitude * std::exp(1.0 - 1.0 / (1.0 - q * q)), 0.0);
    };
    p.decay_class = CompactSupport{radius};
    return p;
}

/// The same profile multiplied by a constant.
inline RadialProfile scaled(const RadialProfile& p, double a) {
    RadialProfile q = p;
    q.value = [v = p.value, a](double r) { return a * v(r); };
    if (p.log_magnitude) {
        const double la = std::log(std::abs(a));
        q.log_magnitude = [lm = p.log_magnitude, la](double r) { return la + lm(r); };
    }
    if (p.l1_norm_hint) q.l1_norm_hint = std::abs(a) * *p.l1_norm_hint;
    std::visit([&](auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (!std::is_same_v<D, CompactSupport>) d.bound *= std::abs(a);
    }, q.decay_class);
    return q;
}

/// Surface area ω_{n-1} = 2π^{n/2}/Γ(n/2) of the unit sphere in Rⁿ.
inline double sphere_area(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi;
        default: throw std::invalid_argument("sphere_area: n must be 1, 2 or 3");
    }
}

struct Window {
    enum class Kind { full, low, high, cross };
    Kind kind = Kind::full;
    double R = default_cutoff_radius;

    static Window full() { return {Kind::full, default_cutoff_radius}; }
    static Window low(double R = default_cutoff_radius) { return {Kind::low, R}; }
    static Window high(double R = default_cutoff_radius) { return {Kind::high, R}; }
    /// Squared weight χ(1-χ); the cross term of the low/high split.
    static Window cross(double R = default_cutoff_radius) { return {Kind::cross, R}; }

    /// log of the squared weight w(r)².
    double log_weight2(double r) const {
        switch (kind) {
            case Kind::full: return 0.0;
            case Kind::low: return 2.0 * safe_log(cutoff_chi(r, R));
            case Kind::high: return 2.0 * safe_log(cutoff_chi_complement(r, R));
            case Kind::cross: return safe_log(cutoff_chi(r, R)) + safe_log(cutoff_chi_complement(r, R));
        }
        return 0.0;
    }

private:
    static double safe_log(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }
};

inline constexpr double default_quadrature_tol = 1e-8;

namespace detail {

// 15-point Gauss–Kronrod rule with embedded 7-point Gauss rule.
inline constexpr double gk_x[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk_wk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// Roots of σ(r)·t = level on the increasing and (α < 1) decreasing branches.
inline std::vector<double> sigma_level_crossings(const ModelParams& p, double t, double level) {
    std::vector<double> out;
    if (t <= 0.0) return out;
    const double target = level / t;
    auto bisect = [&](double lo, double hi, bool increasing) {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const bool above = sigma(mid, p) >= target;
            if (above == increasing) hi = mid; else lo = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double peak = sigma_peak(p);
    if (std::isinf(peak)) {
        double hi = 1.0;
        while (sigma(hi, p) < target && hi < 1e12) hi *= 2.0;
        if (sigma(hi, p) >= target) out.push_back(bisect(0.0, hi, true));
    } else if (sigma(peak, p) >= target) {
        out.push_back(bisect(0.0, peak, true));
        double hi = 2.0 * peak;
        while (sigma(hi, p) > target && hi < 1e300) hi *= 2.0;
        out.push_back(bisect(peak, hi, false));
    }
    return out;
}

struct Panel {
    double a, b;
    bool log_var;  // integrate in s = ln r
    double value;  // in units of exp(shift)
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

class RadialIntegrator {
public:
    RadialIntegrator(const RadialProfile& prof, double l, double t, const ModelParams& p, Window w, double tol)
        : prof_(prof), l_(l), t_(t), tol_(tol), p_(p), w_(w), log_omega_(std::log(sphere_area(p.n))),
          power_(2.0 * l + p.n - 1.0) {}

    /// log of the integrand in r.
    double log_f(double r) const {
        if (r <= 0.0) return power_ == 0.0 ? log_f_nonzero(0.0, 0.0) : -inf();
        return log_f_nonzero(r, power_ * std::log(r));
    }

    /// Returns log ∫ (or -∞ when identically zero).
    double integrate(std::size_t budget) {
        shift_ = -inf();
        panels_.clear();
        build_initial_panels();
        for (;;) {
            extend_tail();
            refine(budget);
            if (tail_converged()) break;
        }
        const double total = sum_value();
        if (!(total > 0.0)) return -inf();
        return shift_ + std::log(total);
    }

private:
    static double inf() { return std::numeric_limits<double>::infinity(); }

    double log_f_nonzero(double r, double log_rpow) const {
        const double lw = w_.log_weight2(r);
        if (lw == -inf()) return -inf();
        const double lu = prof_.log_abs(r);
        if (lu == -inf()) return -inf();
        return log_omega_ + log_rpow + lw - 2.0 * sigma(r, p_) * t_ + 2.0 * lu;
    }

    double log_f_s(double s) const {
        const double r = std::exp(s);
        // integrand in s picks up the Jacobian dr = r ds
        return log_f_nonzero(r, (power_ + 1.0) * s);
    }

    // Evaluates a panel; rescales stored panels if a new maximum appears.
    Panel eval(double a, double b, bool log_var) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double lv[15];
        double mx = -inf();
        auto f = [&](double x) { return log_var ? log_f_s(x) : log_f(x); };
        lv[7] = f(c);
        for (int j = 0; j < 7; ++j) {
            lv[j] = f(c - h * gk_x[j]);
            lv[14 - j] = f(c + h * gk_x[j]);
        }
        for (double v : lv) mx = std::max(mx, v);
        if (mx > shift_ + 30.0 || shift_ == -inf()) rescale(std::max(mx, shift_));
        auto e = [&](double v) { return v == -inf() ? 0.0 : std::exp(v - shift_); };
        double k = gk_wk[7] * e(lv[7]);
        double g = gk_wg[3] * e(lv[7]);
        double asc = 0.0;
        for (int j = 0; j < 7; ++j) {
            const double s = e(lv[j]) + e(lv[14 - j]);
            k += gk_wk[j] * s;
            if (j % 2 == 1) g += gk_wg[j / 2] * s;
        }
        const double mean = 0.5 * k;
        asc = gk_wk[7] * std::abs(e(lv[7]) - mean);
        for (int j = 0; j < 7; ++j) asc += gk_wk[j] * (std::abs(e(lv[j]) - mean) + std::abs(e(lv[14 - j]) - mean));
        k *= h;
        g *= h;
        asc *= h;
        double err = std::abs(k - g);
        if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
        // Floor at roundoff of the panel value so that refinement terminates.
        err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * std::abs(k));
        if (!std::isfinite(k) || !std::isfinite(err)) throw QuadratureError("radial quadrature: non-finite integrand", t_);
        ++evaluations_;
        return Panel{a, b, log_var, k, err};
    }

    void rescale(double new_shift) {
        if (new_shift == -inf()) return;
        if (shift_ != -inf()) {
            const double f = std::exp(shift_ - new_shift);
            for (auto& pn : panels_) {
                pn.value *= f;
                pn.error *= f;
            }
        }
        shift_ = new_shift;
    }

    void add_panel(double a, double b, bool log_var) {
        if (b > a) panels_.push_back(eval(a, b, log_var));
    }

    void build_initial_panels() {
        const double R = w_.R;
        lo_ = (w_.kind == Window::Kind::high) ? R : 0.0;
        hi_ = (w_.kind == Window::Kind::low || w_.kind == Window::Kind::cross) ? 2.0 * R : inf();
        if (const auto* cs = std::get_if<CompactSupport>(&prof_.decay_class)) hi_ = std::min(hi_, cs->radius);

        std::vector<double> bp{R, 2.0 * R, 1.0};
        for (double level : {1.0, 30.0})
            for (double r : sigma_level_crossings(p_, t_, level)) bp.push_back(r);
        if (std::isfinite(sigma_peak(p_))) bp.push_back(sigma_peak(p_));
        if (const auto* g = std::get_if<GaussianTail>(&prof_.decay_class)) {
            bp.push_back(1.0 / g->width);
            bp.push_back(4.0 / g->width);
        }
        std::sort(bp.begin(), bp.end());

        split_ = std::isfinite(hi_) ? hi_ : std::max({1.0, 2.0 * R, lo_});
        std::vector<double> lin{lo_};
        for (double x : bp)
            if (x > lo_ && x < split_) lin.push_back(x);
        lin.push_back(split_);
        // Near r = 0 the integrand is a power of r; geometric panels resolve
        // the moving concentration near σ(r)t ≈ 1 cheaply.
        for (std::size_t i = 0; i + 1 < lin.size(); ++i) {
            double a = lin[i], b = lin[i + 1];
            if (a == 0.0) {
                double x = b;
                std::vector<double> g;
                for (int k = 0; k < 12; ++k) {
                    x *= 0.25;
                    g.push_back(x);
                }
                double prev = 0.0;
                for (auto it = g.rbegin(); it != g.rend(); ++it) {
                    add_panel(prev, *it, false);
                    prev = *it;
                }
                add_panel(prev, b, false);
            } else {
                add_panel(a, b, false);
            }
        }
        if (!std::isfinite(hi_)) {
            s_end_ = std::log(split_);
            s_bp_.clear();
            for (double x : bp)
                if (x > split_) s_bp_.push_back(std::log(x));
        }
    }

    // log of an upper bound on ∫_{exp(s)}^∞ of the integrand.
    double log_tail_bound(double s) const {
        const double r = std::exp(s);
        double extra = 0.0;
        if (std::isinf(sigma_peak(p_))) extra = -2.0 * sigma(r, p_) * t_;  // σ nondecreasing beyond r
        if (const auto* pt = std::get_if<PowerTail>(&prof_.decay_class)) {
            const double q = 2.0 * pt->exponent - 2.0 * l_ - p_.n;
            if (!(q > 0.0)) return inf();
            return log_omega_ + 2.0 * std::log(pt->bound) - q * s - std::log(q) + extra;
        }
        if (const auto* g = std::get_if<GaussianTail>(&prof_.decay_class)) {
            const double w2 = g->width * g->width;
            const double slope = 2.0 * w2 * r - power_ / r;
            if (!(slope > 0.0)) return inf();
            return log_omega_ + 2.0 * std::log(g->bound) + power_ * s - w2 * r * r - std::log(slope) + extra;
        }
        return -inf();
    }

    void extend_tail() {
        if (std::isfinite(hi_)) return;
        if (const auto* pt = std::get_if<PowerTail>(&prof_.decay_class)) {
            if (!(2.0 * pt->exponent - 2.0 * l_ - p_.n > 0.0))
                throw QuadratureError("radial quadrature: non-convergent tail (profile decays too slowly for this l)", t_);
        }
        for (;;) {
            const double total = sum_value();
            const double target = total > 0.0 ? shift_ + std::log(total) + std::log(1e-3 * tol_) : -inf();
            const double lb = log_tail_bound(s_end_);
            if (lb < target || lb == -inf()) return;
            if (total == 0.0 && lb < -700.0) return;
            if (s_end_ > 700.0) throw QuadratureError("radial quadrature: non-convergent tail", t_);
            double next = s_end_ + 1.0;
            for (double b : s_bp_)
                if (b > s_end_ && b < next) next = b;
            add_panel(s_end_, next, true);
            s_end_ = next;
        }
    }

    double sum_value() const {
        double s = 0.0;
        for (const auto& pn : panels_) s += pn.value;
        return s;
    }

    bool tail_converged() const {
        if (std::isfinite(hi_)) return true;
        const double total = sum_value();
        if (!(total > 0.0)) return true;
        const double lb = log_tail_bound(s_end_);
        return lb < shift_ + std::log(total) + std::log(1e-3 * tol_);
    }

    // Global adaptive bisection of the panel with the largest error estimate.
    void refine(std::size_t budget) {
        std::priority_queue<Panel> heap(panels_.begin(), panels_.end());
        panels_.clear();
        double total = 0.0, err = 0.0;
        for (auto h = heap; !h.empty(); h.pop()) {
            total += h.top().value;
            err += h.top().error;
        }
        while (err > 0.25 * tol_ * std::abs(total) && !heap.empty()) {
            if (evaluations_ > budget) throw QuadratureError("radial quadrature: tolerance not reached within budget", t_);
            Panel worst = heap.top();
            heap.pop();
            const double old_shift = shift_;
            const double m = 0.5 * (worst.a + worst.b);
            Panel left = eval(worst.a, m, worst.log_var);
            Panel right = eval(m, worst.b, worst.log_var);
            if (shift_ != old_shift) {
                // A new maximum moved the scale; bring the queued panels along.
                const double f = std::exp(old_shift - shift_);
                std::vector<Panel> tmp;
                for (; !heap.empty(); heap.pop()) {
                    Panel pn = heap.top();
                    pn.value *= f;
                    pn.error *= f;
                    tmp.push_back(pn);
                }
                worst.value *= f;
                worst.error *= f;
                heap = std::priority_queue<Panel>(tmp.begin(), tmp.end());
                total *= f;
                err *= f;
            }
            total += left.value + right.value - worst.value;
            err = std::max(0.0, err + left.error + right.error - worst.error);
            heap.push(left);
            heap.push(right);
        }
        for (; !heap.empty(); heap.pop()) panels_.push_back(heap.top());
    }

    const RadialProfile& prof_;
    double l_, t_, tol_;
    ModelParams p_;
    Window w_;
    double log_omega_;
    double power_;
    double shift_ = -std::numeric_limits<double>::infinity();
    double lo_ = 0.0, hi_ = 0.0, split_ = 1.0, s_end_ = 0.0;
    std::vector<double> s_bp_;
    std::vector<Panel> panels_;
    std::size_t evaluations_ = 0;
};

inline double radial_log_integral(const RadialProfile& prof, double l, double t, const ModelParams& p, Window w,
                                  double tol) {
    RadialIntegrator integ(prof, l, t, p, w, tol);
    return integ.integrate(200000);
}

}  // namespace detail

/// log ‖Λ^l W·G(t)∗φ‖_{L²}; -∞ for a vanishing result. The value at tol is
/// cross-checked against tol/2 and the finer result returned.
inline double radial_weighted_l2_log(const RadialProfile& profile, double l, double t, const ModelParams& params,
                                     Window window = Window::full(), double tol = default_quadrature_tol) {
    check_params(params);
    if (!(l >= 0.0)) throw std::invalid_argument("radial_weighted_l2: l must be >= 0");
    if (!(t >= 0.0)) throw std::invalid_argument("radial_weighted_l2: t must be >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("radial_weighted_l2: tol must be positive");
    if (!(window.R > 0.0 && window.R < 1.0)) throw std::invalid_argument("radial_weighted_l2: R must lie in (0, 1)");
    const double coarse = detail::radial_log_integral(profile, l, t, params, window, tol);
    const double fine = detail::radial_log_integral(profile, l, t, params, window, 0.5 * tol);
    if (coarse == -std::numeric_limits<double>::infinity() || fine == -std::numeric_limits<double>::infinity()) {
        if (coarse != fine) throw QuadratureError("radial quadrature: tolerance-halving disagreement", t);
        return fine;
    }
    if (std::abs(std::expm1(coarse - fine)) > tol)
        throw QuadratureError("radial quadrature: tolerance-halving disagreement", t);
    return 0.5 * fine;
}

/// ‖Λ^l W·G(t)∗φ‖_{L²} (may underflow to 0 at very late times; use the log
/// form for fits).
inline double radial_weighted_l2(const RadialProfile& profile, double l, double t, const ModelParams& params,
                                 Window window = Window::full(), double tol = default_quadrature_tol) {
    return std::exp(radial_weighted_l2_log(profile, l, t, params, window, tol));
}

/// Least-squares slope of log ‖Λ^l W·G(t)∗φ‖ against log(1+t) at log-uniform
/// times on [t0, t1].
inline DecayFit oracle_decay_fit(const RadialProfile& profile, double l, const ModelParams& params, double t0,
                                 double t1, std::size_t n_samples, Window window = Window::full(),
                                 double tol = default_quadrature_tol) {
    if (!(t0 > 0.0) || !(t1 >= 100.0 * t0)) throw std::invalid_argument("oracle_decay_fit: need t1/t0 >= 100");
    if (n_samples < 3) throw std::invalid_argument("oracle_decay_fit: need at least 3 samples");
    const auto times = log_spaced(t0, t1, n_samples);
    std::vector<double> lv(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) lv[i] = radial_weighted_l2_log(profile, l, times[i], params, window, tol);
    return fit_log_values(times, lv);
}

}  // namespace fpp
