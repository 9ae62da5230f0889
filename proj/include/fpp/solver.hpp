#pragma once

// Exponential time differencing for
//
//     û_t = -σ(|k|) û + b(|k|) N̂(u),   N(u) = u^(θ+1),  b = 1/(1 + m|k|²),
//
// i.e. the Duhamel form u(t) = G(t)∗u0 + ∫ G(t-τ) B⁻¹(u^(θ+1)) dτ with the
// linear part applied exactly. ETD1 freezes N over a step; ETD2 is the
// two-stage (Cox–Matthews ETD2RK) scheme.

#include "fpp/errors.hpp"
#include "fpp/fft.hpp"
#include "fpp/grid.hpp"
#include "fpp/model.hpp"
#include "fpp/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpp {

/// φ₁(z) = (e^z - 1)/z, φ₁(0) = 1.
inline double phi1(double z) {
    if (std::abs(z) < 1e-4) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)));
    return std::expm1(z) / z;
}

/// φ₂(z) = (e^z - 1 - z)/z², φ₂(0) = 1/2.
inline double phi2(double z) {
    // The direct form loses ~|z|⁻¹ ulps to cancellation; the series is
    // accurate to roundoff on |z| < 0.05.
    if (std::abs(z) < 0.05) {
        double term = 0.5, sum = 0.5;
        for (int k = 3; k < 14; ++k) {
            term *= z / k;
            sum += term;
        }
        return sum;
    }
    return (std::expm1(z) - z) / (z * z);
}

enum class Scheme { etd1, etd2 };

inline const char* to_string(Scheme s) { return s == Scheme::etd1 ? "etd1" : "etd2"; }

struct SolverConfig {
    Scheme scheme = Scheme::etd2;
    double dt = 0.05;
    double t_end = 1.0;
    std::optional<double> dealias_fraction;  // default 2/(θ+2)
    std::vector<double> sample_times;
    bool enable_nonlinearity = true;

    double fraction(const ModelParams& p) const { return dealias_fraction.value_or(2.0 / (p.theta + 2.0)); }
};

inline void check_config(const SolverConfig& c, const ModelParams& p) {
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw std::invalid_argument("solver: dt must be positive");
    if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) throw std::invalid_argument("solver: t_end must be >= 0");
    const double f = c.fraction(p);
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("solver: dealias_fraction must lie in (0, 1]");
    for (std::size_t i = 0; i < c.sample_times.size(); ++i) {
        const double t = c.sample_times[i];
        if (!(t >= 0.0 && t <= c.t_end)) throw std::invalid_argument("solver: sample_times must lie in [0, t_end]");
        if (i && !(t > c.sample_times[i - 1])) throw std::invalid_argument("solver: sample_times must increase");
    }
}

/// Running energy budget. With E = ‖u‖² + m‖Λu‖², smooth solutions satisfy
///     E(t) - E(0) + 2∫‖Λ^α u‖² dτ - 2∫∫ u^(θ+2) dx dτ = 0.
struct EnergyLedger {
    double energy0 = 0.0;
    double energy = 0.0;
    double dissipation = 0.0;  // ∫₀^t ‖Λ^α u‖² dτ
    double production = 0.0;   // ∫₀^t ∫ u^(θ+2) dx dτ
    double production_rate = 0.0;  // ∫ u^(θ+2) dx at the current time
};

/// [E(t) - E(0)] + 2∫‖Λ^α u‖² - 2∫∫u^(θ+2), relative to E(0).
inline double energy_balance_residual(const EnergyLedger& l) {
    const double r = (l.energy - l.energy0) + 2.0 * l.dissipation - 2.0 * l.production;
    if (l.energy0 == 0.0) return r;
    return r / l.energy0;
}

struct StepState {
    double t = 0.0;
    SpectralField field;
    EnergyLedger ledger;
    long steps = 0;
    std::optional<SpectralField> nonlinear;  // dealiased u^(θ+1) of `field`, when known
};

/// Highest retained |index| per axis for a dealias fraction.
inline int retained_cutoff(const GridSpec& g, double fraction) {
    const int k = static_cast<int>(std::floor(fraction * g.points / 2.0 + 1e-12));
    return std::clamp(k, 0, g.points / 2 - 1);
}

/// Pointwise powers of band-limited fields without aliasing onto the retained
/// band |j| <= K: the input is zero-padded to M > (θ+2)K points per axis, so
/// every product mode that folds back lands outside the band.
class NonlinearEvaluator {
public:
    NonlinearEvaluator(const GridSpec& g, int power, double fraction)
        : grid_(g), power_(power), cutoff_(retained_cutoff(g, fraction)) {
        if (power < 1) throw std::invalid_argument("NonlinearEvaluator: power must be >= 1");
        padded_ = std::max(g.points, fft::fast_size((power + 1) * cutoff_ + 1));
        padded_size_ = 1;
        for (int d = 0; d < g.n; ++d) padded_size_ *= static_cast<std::size_t>(padded_);
        build_index_map();
    }

    int cutoff() const { return cutoff_; }
    int padded_points() const { return padded_; }

    /// Zeroes every mode outside the retained band.
    SpectralField truncate(const SpectralField& f) const {
        SpectralField out(grid_);
        for (std::size_t i = 0; i < map_.size(); ++i) out[map_[i].coarse] = f[map_[i].coarse];
        return out;
    }

    /// Spectral image of u^power restricted to the retained band.
    SpectralField operator()(const SpectralField& f) const {
        auto& inv = fft::cached_plan(grid_.n, padded_, fft::Direction::backward);
        auto& fwd = fft::cached_plan(grid_.n, padded_, fft::Direction::forward);
        cplx* buf = inv.data();
        std::fill(buf, buf + padded_size_, cplx(0.0, 0.0));
        // Same function on the finer grid: coefficients scale by (M/N)^n.
        const double up = 1.0 / static_cast<double>(grid_.size());
        for (const auto& e : map_) buf[e.fine] = f[e.coarse] * up;
        inv.execute_in_place();
        cplx* fb = fwd.data();
        for (std::size_t i = 0; i < padded_size_; ++i) {
            const double u = buf[i].real();
            fb[i] = cplx(ipow(u, power_), 0.0);
        }
        fwd.execute_in_place();
        SpectralField out(grid_);
        const double down = static_cast<double>(grid_.size()) / static_cast<double>(padded_size_);
        for (const auto& e : map_) out[e.coarse] = fb[e.fine] * down;
        enforce_hermitian(out);
        return out;
    }

private:
    struct Entry {
        std::size_t coarse, fine;
    };

    static double ipow(double u, int k) {
        double r = 1.0;
        for (int i = 0; i < k; ++i) r *= u;
        return r;
    }

    void build_index_map() {
        const int K = cutoff_;
        std::vector<int> band;
        for (int s = -K; s <= K; ++s) band.push_back(s);
        const std::size_t N = static_cast<std::size_t>(grid_.points), M = static_cast<std::size_t>(padded_);
        auto cpos = [&](int s) { return static_cast<std::size_t>(s >= 0 ? s : s + grid_.points); };
        auto fpos = [&](int s) { return static_cast<std::size_t>(s >= 0 ? s : s + padded_); };
        if (grid_.n == 1) {
            for (int a : band) map_.push_back({cpos(a), fpos(a)});
        } else if (grid_.n == 2) {
            for (int a : band)
                for (int b : band) map_.push_back({cpos(a) * N + cpos(b), fpos(a) * M + fpos(b)});
        } else {
            for (int a : band)
                for (int b : band)
                    for (int c : band)
                        map_.push_back({(cpos(a) * N + cpos(b)) * N + cpos(c), (fpos(a) * M + fpos(b)) * M + fpos(c)});
        }
    }

    GridSpec grid_;
    int power_;
    int cutoff_;
    int padded_ = 0;
    std::size_t padded_size_ = 0;
    std::vector<Entry> map_;
};

/// Dealiased spectral image of u^(θ+1).
inline SpectralField nonlinear_term(const SpectralField& f, const ModelParams& p,
                                    std::optional<double> dealias_fraction = std::nullopt) {
    check_params(p);
    const double frac = dealias_fraction.value_or(2.0 / (p.theta + 2.0));
    if (!(frac > 0.0 && frac <= 1.0)) throw std::invalid_argument("nonlinear_term: dealias_fraction must lie in (0, 1]");
    NonlinearEvaluator eval(f.grid(), p.power(), frac);
    SpectralField out = eval(eval.truncate(f));
    if (!out.all_finite()) throw NumericalError("nonlinear_term: overflow in u^(theta+1)");
    return out;
}

/// Per-mode ETD weights for a fixed step size.
struct EtdCoefficients {
    double dt = 0.0;
    std::vector<double> decay;  // e^{-σ dt}
    std::vector<double> w1;     // dt φ₁(-σ dt) b
    std::vector<double> w2;     // dt φ₂(-σ dt) b
    std::vector<double> k2a;    // |k|^{2α}
    std::vector<double> free;   // dt φ₁(-2σ dt): ∫₀^dt e^{-2στ} dτ

    EtdCoefficients(const GridSpec& g, const ModelParams& p, double step) : dt(step) {
        const std::size_t n = g.size();
        decay.resize(n);
        w1.resize(n);
        w2.resize(n);
        k2a.resize(n);
        free.resize(n);
        for_each_mode(g, [&](std::size_t i, double k2) {
            const double r = std::sqrt(k2);
            const double s = sigma(r, p);
            const double b = b_inverse(r, p);
            const double z = -s * dt;
            decay[i] = std::exp(z);
            w1[i] = dt * phi1(z) * b;
            w2[i] = dt * phi2(z) * b;
            k2a[i] = r > 0.0 ? std::pow(r, 2.0 * p.alpha) : 0.0;
            free[i] = dt * phi1(2.0 * z);
        });
    }
};

class EtdStepper {
public:
    EtdStepper(const GridSpec& g, const ModelParams& p, const SolverConfig& c)
        : grid_(g), params_(p), config_(c), eval_(g, p.power(), c.fraction(p)) {
        check_params(p);
        check_config(c, p);
        energy_w_.resize(g.size());
        for_each_mode(g, [&](std::size_t i, double k2) { energy_w_[i] = 1.0 + p.m * k2; });
    }

    const NonlinearEvaluator& evaluator() const { return eval_; }

    StepState initial_state(const SpectralField& u0) const {
        if (!(u0.grid() == grid_)) throw std::invalid_argument("solver: initial field grid mismatch");
        StepState s;
        s.field = config_.enable_nonlinearity ? eval_.truncate(u0) : u0;
        s.ledger.energy0 = s.ledger.energy = energy(s.field);
        refresh_nonlinear(s);
        return s;
    }

    /// Advances by h (defaults to the configured dt).
    void advance(StepState& s, std::optional<double> h = std::nullopt) {
        const double dt = h.value_or(config_.dt);
        if (!(dt > 0.0)) throw std::invalid_argument("solver: step size must be positive");
        const EtdCoefficients& c = coefficients(dt);
        if (!s.nonlinear) refresh_nonlinear(s);
        const auto u = s.field.coefficients();
        const std::size_t n = u.size();
        std::vector<double> g0(n);
        for (std::size_t i = 0; i < n; ++i) g0[i] = std::norm(u[i]);

        SpectralField next(grid_);
        auto v = next.coefficients();
        if (!config_.enable_nonlinearity) {
            for (std::size_t i = 0; i < n; ++i) v[i] = c.decay[i] * u[i];
        } else {
            const auto nl = s.nonlinear->coefficients();
            for (std::size_t i = 0; i < n; ++i) v[i] = c.decay[i] * u[i] + c.w1[i] * nl[i];
            if (config_.scheme == Scheme::etd2) {
                enforce_hermitian(next);
                const SpectralField na = eval_(next);
                const auto nb = na.coefficients();
                for (std::size_t i = 0; i < n; ++i) v[i] += c.w2[i] * (nb[i] - nl[i]);
            }
            enforce_hermitian(next);
        }
        if (!next.all_finite()) throw NumericalError("solver: non-finite state", s.t + dt);

        // Dissipation over the step: each mode is modelled as free decay plus
        // a linear-in-time correction, which is exact for the linear flow.
        const double w = grid_.spectral_weight();
        double diss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (c.k2a[i] == 0.0) continue;
            const double g1 = std::norm(v[i]);
            diss += c.k2a[i] * (c.free[i] * g0[i] + 0.5 * dt * (g1 - c.decay[i] * c.decay[i] * g0[i]));
        }
        const double p0 = s.ledger.production_rate;
        s.field = std::move(next);
        s.t += dt;
        ++s.steps;
        s.nonlinear.reset();
        refresh_nonlinear(s);
        s.ledger.dissipation += w * diss;
        s.ledger.production += 0.5 * dt * (p0 + s.ledger.production_rate);
        s.ledger.energy = energy(s.field);
        if (!std::isfinite(s.ledger.energy)) throw NumericalError("solver: energy overflow", s.t);
    }

    double energy(const SpectralField& f) const {
        double e = 0.0;
        const auto c = f.coefficients();
        for (std::size_t i = 0; i < c.size(); ++i) e += energy_w_[i] * std::norm(c[i]);
        return e * grid_.spectral_weight();
    }

private:
    void refresh_nonlinear(StepState& s) const {
        if (!config_.enable_nonlinearity) {
            s.ledger.production_rate = 0.0;
            return;
        }
        s.nonlinear = eval_(s.field);
        if (!s.nonlinear->all_finite()) throw NumericalError("solver: overflow in u^(theta+1)", s.t);
        // ∫u·u^(θ+1) dx: exact for the band-limited state since the retained
        // band of the product is alias-free.
        s.ledger.production_rate = inner_product(s.field, *s.nonlinear);
    }

    const EtdCoefficients& coefficients(double dt) {
        auto it = cache_.find(dt);
        if (it == cache_.end()) {
            if (cache_.size() > 16) cache_.clear();
            it = cache_.emplace(dt, EtdCoefficients(grid_, params_, dt)).first;
        }
        return it->second;
    }

    GridSpec grid_;
    ModelParams params_;
    SolverConfig config_;
    NonlinearEvaluator eval_;
    std::vector<double> energy_w_;
    std::map<double, EtdCoefficients> cache_;
};

/// One step of the configured scheme.
inline StepState step(const StepState& state, const SolverConfig& config, const ModelParams& params) {
    EtdStepper stepper(state.field.grid(), params, config);
    StepState next = state;
    stepper.advance(next);
    return next;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> fields;
    StepState final_state;
};

/// Integrates to config.t_end, landing exactly on every sample time.
/// `on_sample` sees each recorded (t, field) as it is produced.
inline Trajectory solve(const SpectralField& u0, const ModelParams& params, const SolverConfig& config,
                        const std::function<void(double, const SpectralField&)>& on_sample = {}) {
    EtdStepper stepper(u0.grid(), params, config);
    Trajectory traj;
    StepState s = stepper.initial_state(u0);
    auto record = [&]() {
        traj.times.push_back(s.t);
        traj.fields.push_back(s.field);
        if (on_sample) on_sample(s.t, s.field);
    };
    std::vector<double> stops = config.sample_times;
    stops.push_back(config.t_end);
    std::size_t next_sample = 0;
    if (!config.sample_times.empty() && config.sample_times.front() == 0.0) {
        record();
        ++next_sample;
    }
    const double dt = config.dt;
    for (std::size_t k = next_sample; k < stops.size(); ++k) {
        const double target = stops[k];
        // Whole steps, then one shortened step onto the target.
        while (target - s.t > dt * (1.0 + 1e-9)) stepper.advance(s);
        const double rest = target - s.t;
        if (rest > 1e-12 * std::max(1.0, target)) stepper.advance(s, rest);
        s.t = target;
        if (k < config.sample_times.size()) record();
    }
    traj.final_state = std::move(s);
    return traj;
}

}  // namespace fpp
