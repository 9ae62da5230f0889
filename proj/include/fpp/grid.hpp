#pragma once

// Periodic lattice on [0, L)^n, spectral fields, radial multipliers and the
// discrete norms used throughout the lab.
//
// Coefficients are plain DFT sums in FFT order,
//     ĉ_k = Σ_j u(x_j) e^{-i k·x_j},   u(x_j) = N^{-n} Σ_k ĉ_k e^{i k·x_j},
// so the discrete Parseval identity reads
//     Σ_j |u(x_j)|² hⁿ = (Lⁿ / N^{2n}) Σ_k |ĉ_k|².
// All spectral norms below carry the factor Lⁿ / N^{2n} and therefore agree
// with the physical-space quadrature Σ |u|² hⁿ.

#include "fpp/fft.hpp"
#include "fpp/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace fpp {

using cplx = std::complex<double>;

struct GridSpec {
    int n = 1;              // dimension
    int points = 0;         // N per axis
    double length = 0.0;    // L per axis

    std::size_t size() const {
        std::size_t s = 1;
        for (int d = 0; d < n; ++d) s *= static_cast<std::size_t>(points);
        return s;
    }
    double spacing() const { return length / points; }
    double wavenumber_step() const { return 2.0 * std::numbers::pi / length; }
    /// FFT position j in [0, N) → signed index in [-N/2, N/2).
    int signed_index(int j) const { return j < points / 2 ? j : j - points; }
    /// Inverse of signed_index.
    int position(int s) const { return s >= 0 ? s : s + points; }
    double wavenumber(int j) const { return wavenumber_step() * signed_index(j); }
    /// Lⁿ / N^{2n}: weight turning Σ|ĉ|² into the L² norm squared.
    double spectral_weight() const {
        return std::pow(length, n) / std::pow(static_cast<double>(points), 2 * n);
    }
    double cell_volume() const { return std::pow(spacing(), n); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline GridSpec make_grid(int n, int points, double length) {
    if (n < 1 || n > 3) throw std::invalid_argument("make_grid: dimension must be 1, 2 or 3");
    if (points < 4 || points % 2 != 0) throw std::invalid_argument("make_grid: N must be even and >= 4");
    if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("make_grid: L must be positive");
    return GridSpec{n, points, length};
}

/// Visits every lattice mode: f(flat_index, |k|²). Flat layout is row-major
/// with the last axis fastest, matching FFTW.
template <class F>
void for_each_mode(const GridSpec& g, F&& f) {
    const int N = g.points;
    const double dk = g.wavenumber_step();
    std::vector<double> k2(N);
    for (int j = 0; j < N; ++j) {
        const double k = dk * g.signed_index(j);
        k2[j] = k * k;
    }
    std::size_t idx = 0;
    if (g.n == 1) {
        for (int a = 0; a < N; ++a) f(idx++, k2[a]);
    } else if (g.n == 2) {
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) f(idx++, k2[a] + k2[b]);
    } else {
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                for (int c = 0; c < N; ++c) f(idx++, k2[a] + k2[b] + k2[c]);
    }
}

/// |k| for every mode, in flat order.
inline std::vector<double> wavenumber_magnitudes(const GridSpec& g) {
    std::vector<double> r(g.size());
    for_each_mode(g, [&](std::size_t i, double k2) { r[i] = std::sqrt(k2); });
    return r;
}

/// Flat index of the mode -k for the mode at flat index i.
inline std::size_t mirror_index(const GridSpec& g, std::size_t i) {
    const std::size_t N = static_cast<std::size_t>(g.points);
    std::size_t out = 0;
    std::size_t stride = 1;
    for (int d = 0; d < g.n; ++d) {
        const std::size_t j = i % N;
        i /= N;
        out += ((N - j) % N) * stride;
        stride *= N;
    }
    return out;
}

class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(const GridSpec& g) : grid_(g), coeffs_(g.size()) {}
    SpectralField(const GridSpec& g, std::vector<cplx> coeffs) : grid_(g), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != grid_.size()) throw std::invalid_argument("SpectralField: coefficient count does not match grid");
    }

    const GridSpec& grid() const { return grid_; }
    std::span<const cplx> coefficients() const { return coeffs_; }
    std::span<cplx> coefficients() { return coeffs_; }
    std::size_t size() const { return coeffs_.size(); }
    cplx operator[](std::size_t i) const { return coeffs_[i]; }
    cplx& operator[](std::size_t i) { return coeffs_[i]; }

    SpectralField& operator+=(const SpectralField& o) {
        require_same_grid(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        require_same_grid(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    SpectralField& operator*=(double a) {
        for (auto& c : coeffs_) c *= a;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    bool all_finite() const {
        for (const auto& c : coeffs_)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }

private:
    void require_same_grid(const SpectralField& o) const {
        if (!(o.grid_ == grid_)) throw std::invalid_argument("SpectralField: grid mismatch");
    }

    GridSpec grid_{};
    std::vector<cplx> coeffs_;
};

/// Conjugate-averages ĉ_k and ĉ_{-k} so the field represents real data.
inline void enforce_hermitian(SpectralField& f) {
    const GridSpec& g = f.grid();
    auto c = f.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const std::size_t j = mirror_index(g, i);
        if (j < i) continue;
        if (j == i) {
            c[i] = cplx(c[i].real(), 0.0);
        } else {
            const cplx avg = 0.5 * (c[i] + std::conj(c[j]));
            c[i] = avg;
            c[j] = std::conj(avg);
        }
    }
}

inline SpectralField to_spectral(const GridSpec& g, std::span<const double> samples) {
    if (samples.size() != g.size()) throw std::invalid_argument("to_spectral: sample count does not match grid");
    auto& plan = fft::cached_plan(g.n, g.points, fft::Direction::forward);
    cplx* buf = plan.data();
    for (std::size_t i = 0; i < samples.size(); ++i) buf[i] = samples[i];
    plan.execute_in_place();
    SpectralField out(g, std::vector<cplx>(buf, buf + g.size()));
    enforce_hermitian(out);
    return out;
}

/// Complex physical values; real data has vanishing imaginary parts.
inline std::vector<cplx> to_physical_complex(const SpectralField& f) {
    const GridSpec& g = f.grid();
    auto& plan = fft::cached_plan(g.n, g.points, fft::Direction::backward);
    std::vector<cplx> out(g.size());
    plan.execute(f.coefficients(), out);
    const double scale = 1.0 / static_cast<double>(g.size());
    for (auto& v : out) v *= scale;
    return out;
}

inline std::vector<double> to_physical(const SpectralField& f) {
    auto z = to_physical_complex(f);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
    return out;
}

/// Samples u(x) at the nodes x_j = j·h, using the periodic image nearest the
/// origin so that data centred at 0 is represented symmetrically.
inline std::vector<double> sample_physical(const GridSpec& g, const std::function<double(std::span<const double>)>& u) {
    std::vector<double> out(g.size());
    const int N = g.points;
    const double h = g.spacing();
    std::array<double, 3> x{};
    std::size_t idx = 0;
    auto coord = [&](int j) { return h * g.signed_index(j); };
    if (g.n == 1) {
        for (int a = 0; a < N; ++a) {
            x[0] = coord(a);
            out[idx++] = u(std::span<const double>(x.data(), 1));
        }
    } else if (g.n == 2) {
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                x[0] = coord(a);
                x[1] = coord(b);
                out[idx++] = u(std::span<const double>(x.data(), 2));
            }
    } else {
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                for (int c = 0; c < N; ++c) {
                    x[0] = coord(a);
                    x[1] = coord(b);
                    x[2] = coord(c);
                    out[idx++] = u(std::span<const double>(x.data(), 3));
                }
    }
    return out;
}

/// û_k ↦ g(|k|) û_k.
template <class G>
SpectralField apply_radial_multiplier(const SpectralField& f, G&& g) {
    SpectralField out = f;
    auto c = out.coefficients();
    for_each_mode(f.grid(), [&](std::size_t i, double k2) { c[i] *= g(std::sqrt(k2)); });
    return out;
}

/// Weighted spectral sum Σ w(|k|) |ĉ_k|² · Lⁿ/N^{2n}.
template <class W>
double weighted_energy(const SpectralField& f, W&& w) {
    const auto c = f.coefficients();
    double acc = 0.0;
    for_each_mode(f.grid(), [&](std::size_t i, double k2) {
        const double a = std::norm(c[i]);
        if (a != 0.0) acc += w(std::sqrt(k2)) * a;
    });
    return acc * f.grid().spectral_weight();
}

/// ‖Λ^l u‖_{L²}, spectral weight |k|^l. The zero mode counts only for l = 0.
inline double sobolev_seminorm(const SpectralField& f, double l) {
    if (!(l >= 0.0)) throw std::invalid_argument("sobolev_seminorm: l must be >= 0");
    if (l == 0.0) return std::sqrt(weighted_energy(f, [](double) { return 1.0; }));
    return std::sqrt(weighted_energy(f, [l](double r) { return r > 0.0 ? std::pow(r, 2.0 * l) : 0.0; }));
}

/// ‖u‖_{H^s} with weight (1 + |k|²)^s.
inline double sobolev_norm(const SpectralField& f, double s) {
    return std::sqrt(weighted_energy(f, [s](double r) { return std::pow(1.0 + r * r, s); }));
}

/// Physical-space norms: p = 1, 2 by the nodal rule Σ|u|^p hⁿ, p = ∞ by the
/// nodal maximum.
inline double lp_norm(const SpectralField& f, double p) {
    const bool inf = std::isinf(p) && p > 0;
    if (!(inf || p == 1.0 || p == 2.0)) throw std::invalid_argument("lp_norm: p must be 1, 2 or infinity");
    const auto u = to_physical(f);
    if (inf) {
        double m = 0.0;
        for (double v : u) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    if (p == 1.0)
        for (double v : u) acc += std::abs(v);
    else
        for (double v : u) acc += v * v;
    acc *= f.grid().cell_volume();
    return p == 1.0 ? acc : std::sqrt(acc);
}

/// Re ∫ u v̄ dx computed spectrally.
inline double inner_product(const SpectralField& a, const SpectralField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("inner_product: grid mismatch");
    double acc = 0.0;
    const auto ca = a.coefficients();
    const auto cb = b.coefficients();
    for (std::size_t i = 0; i < ca.size(); ++i) acc += (ca[i] * std::conj(cb[i])).real();
    return acc * a.grid().spectral_weight();
}

/// Same trigonometric polynomial on a grid with `points` nodes per axis and
/// the same box. Modes with |index| >= min(N, M)/2 are dropped, so the
/// Nyquist line of the coarser grid never survives a transfer.
inline SpectralField resample(const SpectralField& f, int points) {
    const GridSpec& g = f.grid();
    const GridSpec h = make_grid(g.n, points, g.length);
    SpectralField out(h);
    const int K = std::min(g.points, points) / 2 - 1;
    const double scale = std::pow(static_cast<double>(points) / g.points, g.n);
    auto src = [&](int s) { return static_cast<std::size_t>(g.position(s)); };
    auto dst = [&](int s) { return static_cast<std::size_t>(h.position(s)); };
    const std::size_t N = static_cast<std::size_t>(g.points), M = static_cast<std::size_t>(points);
    for (int a = -K; a <= K; ++a) {
        if (g.n == 1) {
            out[dst(a)] = scale * f[src(a)];
            continue;
        }
        for (int b = -K; b <= K; ++b) {
            if (g.n == 2) {
                out[dst(a) * M + dst(b)] = scale * f[src(a) * N + src(b)];
                continue;
            }
            for (int c = -K; c <= K; ++c)
                out[(dst(a) * M + dst(b)) * M + dst(c)] = scale * f[(src(a) * N + src(b)) * N + src(c)];
        }
    }
    return out;
}

struct LowHigh {
    SpectralField low;
    SpectralField high;
};

/// Long/short-wave decomposition: low = χ(|k|)û, high = (1 - χ(|k|))û.
inline LowHigh split_low_high(const SpectralField& f, double R = default_cutoff_radius) {
    if (!(R > 0.0 && R < 1.0)) throw std::invalid_argument("split_low_high: R must lie in (0, 1)");
    LowHigh out{f, f};
    auto lo = out.low.coefficients();
    auto hi = out.high.coefficients();
    for_each_mode(f.grid(), [&](std::size_t i, double k2) {
        const double r = std::sqrt(k2);
        lo[i] *= cutoff_chi(r, R);
        hi[i] *= cutoff_chi_complement(r, R);
    });
    return out;
}

/// Σ |k|^{2l} χ(1-χ) |û|²: the cross term in
/// ‖Λ^l u‖² = ‖Λ^l u_L‖² + ‖Λ^l u_H‖² + 2·cross.
inline double split_cross_term(const SpectralField& f, double l, double R = default_cutoff_radius) {
    return weighted_energy(f, [&](double r) {
        const double w = cutoff_chi(r, R) * cutoff_chi_complement(r, R);
        if (w == 0.0) return 0.0;
        return (l == 0.0 ? 1.0 : std::pow(r, 2.0 * l)) * w;
    });
}

}  // namespace fpp
