#pragma once

// Norm time series, decay fits, the time-weighted functionals that control
// the small-data iteration, and the product-rule probe.

#include "fpp/errors.hpp"
#include "fpp/fft.hpp"
#include "fpp/fit.hpp"
#include "fpp/grid.hpp"
#include "fpp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpp {

enum class Component { full, low, high };
enum class NormType { seminorm, sobolev, linf };

inline const char* to_string(Component c) {
    switch (c) {
        case Component::full: return "full";
        case Component::low: return "low";
        case Component::high: return "high";
    }
    return "?";
}

inline const char* to_string(NormType t) {
    switch (t) {
        case NormType::seminorm: return "seminorm";
        case NormType::sobolev: return "sobolev";
        case NormType::linf: return "linf";
    }
    return "?";
}

/// seminorm: ‖Λ^l w‖_{L²};  sobolev: ‖Λ^l w‖_{H^q};  linf: ‖w‖_{L^∞}
/// where w is the selected component of u.
struct NormDescriptor {
    double l = 0.0;
    NormType type = NormType::seminorm;
    Component component = Component::full;
    double q = 0.0;  // Sobolev index, sobolev type only

    std::string label() const {
        auto num = [](double v) {
            std::string s = std::to_string(v);
            s.erase(s.find_last_not_of('0') + 1);
            if (!s.empty() && s.back() == '.') s.pop_back();
            return s;
        };
        std::string out = std::string(to_string(component)) + "_" + to_string(type);
        if (type != NormType::linf) out += "_l" + num(l);
        if (type == NormType::sobolev) out += "_q" + num(q);
        return out;
    }
    friend bool operator==(const NormDescriptor&, const NormDescriptor&) = default;
};

struct NormSeries {
    std::vector<double> times;
    std::vector<double> values;
    NormDescriptor descriptor;

    void push(double t, double v) {
        if (!times.empty() && !(t > times.back())) throw std::invalid_argument("NormSeries: times must increase");
        if (!(v >= 0.0)) throw std::invalid_argument("NormSeries: values must be nonnegative");
        times.push_back(t);
        values.push_back(v);
    }
};

namespace detail {

inline double component_norm(const SpectralField& f, const NormDescriptor& d, double R) {
    const auto w2 = [&](double r) {
        switch (d.component) {
            case Component::full: return 1.0;
            case Component::low: { const double c = cutoff_chi(r, R); return c * c; }
            case Component::high: { const double c = cutoff_chi_complement(r, R); return c * c; }
        }
        return 1.0;
    };
    switch (d.type) {
        case NormType::seminorm:
            return std::sqrt(weighted_energy(f, [&](double r) {
                if (d.l == 0.0) return w2(r);
                return r > 0.0 ? std::pow(r, 2.0 * d.l) * w2(r) : 0.0;
            }));
        case NormType::sobolev:
            return std::sqrt(weighted_energy(f, [&](double r) {
                const double lam = d.l == 0.0 ? 1.0 : (r > 0.0 ? std::pow(r, 2.0 * d.l) : 0.0);
                return lam * std::pow(1.0 + r * r, d.q) * w2(r);
            }));
        case NormType::linf: {
            if (d.component == Component::full) return lp_norm(f, INFINITY);
            const LowHigh s = split_low_high(f, R);
            return lp_norm(d.component == Component::low ? s.low : s.high, INFINITY);
        }
    }
    return 0.0;
}

}  // namespace detail

/// One series per descriptor, evaluated on every (t, field) sample.
inline std::vector<NormSeries> record(std::span<const double> times, std::span<const SpectralField> fields,
                                      const std::vector<NormDescriptor>& descriptors,
                                      double R = default_cutoff_radius) {
    if (times.size() != fields.size()) throw std::invalid_argument("record: times and fields differ in length");
    if (!(R > 0.0 && R < 1.0)) throw std::invalid_argument("record: R must lie in (0, 1)");
    std::vector<NormSeries> out(descriptors.size());
    for (std::size_t k = 0; k < descriptors.size(); ++k) out[k].descriptor = descriptors[k];
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t k = 0; k < descriptors.size(); ++k)
            out[k].push(times[i], detail::component_norm(fields[i], descriptors[k], R));
    return out;
}

/// ‖Λ^l u‖, ‖Λ^l u_L‖ and ‖Λ^l u_H‖ for each l.
inline std::vector<NormSeries> record(std::span<const double> times, std::span<const SpectralField> fields,
                                      const std::vector<double>& l_list, double R = default_cutoff_radius) {
    std::vector<NormDescriptor> d;
    for (double l : l_list) {
        if (!(l >= 0.0)) throw std::invalid_argument("record: l must be >= 0");
        for (Component c : {Component::full, Component::low, Component::high}) d.push_back({l, NormType::seminorm, c});
    }
    return record(times, fields, d, R);
}

inline const NormSeries* find_series(const std::vector<NormSeries>& set, const NormDescriptor& d) {
    for (const auto& s : set)
        if (s.descriptor == d) return &s;
    return nullptr;
}

/// Time after which the slowest box mode has decayed by ~10%: 0.1/σ(2π/L).
inline double contamination_horizon(const GridSpec& g, const ModelParams& p) {
    return 0.1 / sigma(g.wavenumber_step(), p);
}

inline constexpr std::size_t min_fit_samples = 8;

/// OLS of log(value) on log(1+t) over samples in [t0, t1].
inline DecayFit fit_decay(const NormSeries& series, double t0, double t1,
                          double horizon = std::numeric_limits<double>::infinity()) {
    if (!(t1 > t0)) throw std::invalid_argument("fit_decay: empty window");
    std::vector<double> t, lv;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        const double ti = series.times[i];
        if (ti < t0 || ti > t1) continue;
        const double v = series.values[i];
        if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error("fit_decay: zero or non-finite value in window");
        t.push_back(ti);
        lv.push_back(std::log(v));
    }
    if (t.size() < min_fit_samples)
        throw std::invalid_argument("fit_decay: need at least 8 samples in the window, got " + std::to_string(t.size()));
    return fit_log_values(t, lv, horizon);
}

/// 0, step, 2·step, ..., with `upper` always included.
inline std::vector<double> l_grid(double upper, double step = 0.25) {
    if (!(upper >= 0.0) || !(step > 0.0)) throw std::invalid_argument("l_grid: need upper >= 0, step > 0");
    std::vector<double> g;
    for (int k = 0;; ++k) {
        const double l = k * step;
        if (l >= upper - 1e-12) break;
        g.push_back(l);
    }
    g.push_back(upper);
    return g;
}

struct WeightedFunctionals {
    std::vector<double> times;
    std::vector<double> M1;
    std::vector<double> M2;  // loss regime only
    std::vector<double> E;   // loss regime only
    std::vector<double> L;   // loss regime only
    double E0 = 0.0;

    static bool nondecreasing(const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] < v[i - 1]) return false;
        return true;
    }
    bool monotone() const { return nondecreasing(M1) && nondecreasing(M2) && nondecreasing(E) && nondecreasing(L); }
};

/// E0 = ‖u0‖_{H^s} + ‖u0‖_{L¹}.
inline double initial_size(const SpectralField& u0, double s) { return sobolev_norm(u0, s) + lp_norm(u0, 1.0); }

/// Descriptors that weighted_functionals() reads: full seminorms on the
/// l-grid over [0, s] and, in the loss regime, ‖Λ^{jᾱ} u_H‖_{H^{s-2jᾱ}} for
/// j = 0 .. ⌊s/2ᾱ⌋ - 1.
inline std::vector<NormDescriptor> functional_descriptors(const ModelParams& p, double s, double step = 0.25) {
    std::vector<NormDescriptor> d;
    for (double l : l_grid(s, step)) d.push_back({l, NormType::seminorm, Component::full});
    if (auto ab = p.alpha_bar()) {
        const int jmax = static_cast<int>(std::floor(s / (2.0 * *ab))) - 1;
        for (int j = 0; j <= jmax; ++j) d.push_back({j * *ab, NormType::sobolev, Component::high, s - 2.0 * j * *ab});
    }
    return d;
}

/// Discrete running sups / trapezoid integrals of
///   M1² = sup_{l ≤ s} sup_{y ≤ t} (1+y)^{n/2α + l/α} ‖Λ^l u‖²,
///   M2² = same with l ≤ N0 (loss regime),
///   E²  = Σ_j sup_{y ≤ t} (1+y)^{jᾱ - ᾱ/2} ‖Λ^{jᾱ} u_H‖²_{H^{s-2jᾱ}},
///   L²  = Σ_j ∫₀^t (1+τ)^{jᾱ - ᾱ/2} ‖Λ^{jᾱ} u_H‖²_{H^{s-2jᾱ}} dτ.
/// Reported values are the square roots.
inline WeightedFunctionals weighted_functionals(const std::vector<NormSeries>& set, const ModelParams& p, double s,
                                                double e0, double step = 0.25) {
    check_params(p);
    if (!(step > 0.0 && step <= 0.25)) throw std::invalid_argument("weighted_functionals: l-grid spacing must be in (0, 0.25]");
    const RegimeReport rep = validate(p, s);
    const auto desc = functional_descriptors(p, s, step);
    std::vector<const NormSeries*> series;
    for (const auto& d : desc) {
        const NormSeries* ser = find_series(set, d);
        if (!ser) throw std::invalid_argument("weighted_functionals: insufficient l coverage, missing series " + d.label());
        series.push_back(ser);
    }
    const std::vector<double>& times = series.front()->times;
    for (const auto* ser : series)
        if (ser->times != times) throw std::invalid_argument("weighted_functionals: series sampled at different times");

    WeightedFunctionals out;
    out.times = times;
    out.E0 = e0;
    const bool loss = rep.regime == Regime::loss;
    const double ab = loss ? *p.alpha_bar() : 0.0;
    double m1 = 0.0, m2 = 0.0, e2 = 0.0, l2 = 0.0;
    std::vector<double> esup;  // per-j running sups
    std::vector<double> prev;  // integrand at the previous sample
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double y = times[i];
        std::size_t k = 0;
        for (; k < desc.size() && desc[k].type == NormType::seminorm; ++k) {
            const double l = desc[k].l;
            const double v = series[k]->values[i];
            const double w = std::pow(1.0 + y, p.n / (2.0 * p.alpha) + l / p.alpha) * v * v;
            m1 = std::max(m1, w);
            if (loss && l <= rep.n0 + 1e-12) m2 = std::max(m2, w);
        }
        out.M1.push_back(std::sqrt(m1));
        if (!loss) continue;
        const std::size_t nj = desc.size() - k;
        esup.resize(nj, 0.0);
        std::vector<double> cur(nj);
        for (std::size_t j = 0; j < nj; ++j) {
            const double v = series[k + j]->values[i];
            cur[j] = std::pow(1.0 + y, j * ab - 0.5 * ab) * v * v;
            esup[j] = std::max(esup[j], cur[j]);
        }
        e2 = 0.0;
        for (double v : esup) e2 += v;
        if (i > 0) {
            const double dt = y - times[i - 1];
            for (std::size_t j = 0; j < nj; ++j) l2 += 0.5 * dt * (prev[j] + cur[j]);
        }
        prev = std::move(cur);
        out.M2.push_back(std::sqrt(m2));
        out.E.push_back(std::sqrt(e2));
        out.L.push_back(std::sqrt(l2));
    }
    return out;
}

struct ProductProbe {
    double ratio = 0.0;       // ‖Λ^l u^{θ+1}‖ / (‖u‖_∞^θ ‖Λ^l u‖)
    double numerator = 0.0;   // ‖Λ^l u^{θ+1}‖_{L²}
    double linf = 0.0;        // ‖u‖_{L^∞}
    double lambda_l_u = 0.0;  // ‖Λ^l u‖_{L²}
    int padded_points = 0;
};

/// Product estimate ‖Λ^l u^{θ+1}‖ ≤ C ‖u‖_∞^θ ‖Λ^l u‖. The power is formed on
/// a grid with M > (θ+1)N points per axis so that u^{θ+1} is represented
/// without aliasing.
inline ProductProbe probe_product_inequality(const SpectralField& f, double l, const ModelParams& p) {
    check_params(p);
    if (!(l >= 0.0)) throw std::invalid_argument("probe_product_inequality: l must be >= 0");
    const GridSpec& g = f.grid();
    ProductProbe out;
    out.padded_points = fft::fast_size(p.power() * g.points + 2);
    const SpectralField fine = resample(f, out.padded_points);
    const auto u = to_physical(fine);
    std::vector<double> w(u.size());
    double linf = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        linf = std::max(linf, std::abs(u[i]));
        w[i] = std::pow(u[i], p.power());
    }
    const SpectralField pw = to_spectral(fine.grid(), w);
    out.linf = linf;
    out.lambda_l_u = sobolev_seminorm(fine, l);
    out.numerator = sobolev_seminorm(pw, l);
    const double den = std::pow(linf, p.theta) * out.lambda_l_u;
    if (!(den > 0.0)) throw std::domain_error("probe_product_inequality: zero denominator");
    out.ratio = out.numerator / den;
    if (!std::isfinite(out.ratio)) throw NumericalError("probe_product_inequality: non-finite ratio");
    return out;
}

}  // namespace fpp
