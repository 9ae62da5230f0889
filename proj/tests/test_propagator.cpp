#include "fpp/propagator.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace fpp;
using Catch::Approx;
constexpr double pi = std::numbers::pi;

namespace {

SpectralField random_field(const GridSpec& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> v(g.size());
    for (auto& x : v) x = nd(rng);
    return to_spectral(g, v);
}

double max_rel_mode_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = std::max(std::abs(a[i]), std::abs(b[i]));
        if (s > 0.0) m = std::max(m, std::abs(a[i] - b[i]) / s);
    }
    return m;
}

const ModelParams p1{1, 1.0, 1.0, 1.0};

}  // namespace

TEST_CASE("propagate examples") {
    const GridSpec g = make_grid(1, 16, 2 * pi);
    const auto f = random_field(g, 1);
    CHECK(max_rel_mode_diff(propagate(f, 0.0, p1), f) == 0.0);
    const auto one = to_spectral(g, sample_physical(g, [](std::span<const double> x) { return std::cos(x[0]); }));
    const auto e = propagate(one, 2.0, p1);
    CHECK(std::abs(e[1]) / std::abs(one[1]) == Approx(std::exp(-1.0)).epsilon(1e-14));
    const auto c = to_spectral(g, std::vector<double>(16, 3.0));
    CHECK(max_rel_mode_diff(propagate(c, 17.0, p1), c) == 0.0);
    CHECK_THROWS_AS(propagate(f, -1.0, p1), std::invalid_argument);
}

TEST_CASE("semigroup to 1e-13 per mode") {
    const GridSpec g = make_grid(2, 32, 20.0);
    const auto f = random_field(g, 2);
    for (const ModelParams& p : {p1, ModelParams{2, 0.5, 0.4, 2.0}, ModelParams{2, 2.0, 1.6, 2.0}}) {
        const auto a = propagate(propagate(f, 0.7, p), 2.9, p);
        const auto b = propagate(f, 3.6, p);
        CHECK(max_rel_mode_diff(a, b) <= 1e-13);
    }
}

TEST_CASE("contraction in every seminorm and mass invariance") {
    const GridSpec g = make_grid(1, 64, 30.0);
    const auto f = random_field(g, 3);
    for (double t : {0.1, 1.0, 10.0})
        for (double l : {0.0, 0.5, 1.0, 3.0}) CHECK(sobolev_seminorm(propagate(f, t, p1), l) <= sobolev_seminorm(f, l));
    CHECK(propagate(f, 5.0, p1)[0] == f[0]);
}

TEST_CASE("green low + high = propagate") {
    const GridSpec g = make_grid(2, 32, 40.0);
    const auto f = random_field(g, 4);
    const double t = 1.7;
    const auto lo = green_low(f, t, 0.5, p1), hi = green_high(f, t, 0.5, p1), all = propagate(f, t, p1);
    double mag = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) mag = std::max(mag, std::abs(all[i]));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(lo[i] + hi[i] - all[i]) <= 1e-15 * mag);
    for_each_mode(g, [&](std::size_t i, double k2) {
        if (std::sqrt(k2) >= 1.0) CHECK(lo[i] == cplx(0.0, 0.0));
    });
    const auto low_only = apply_radial_multiplier(f, [](double r) { return r <= 0.5 ? 1.0 : 0.0; });
    const auto h = green_high(low_only, t, 0.5, p1);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == cplx(0.0, 0.0));
    const auto l0 = green_low(f, 0.0, 0.5, p1);
    const auto split = split_low_high(f, 0.5);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(l0[i] == split.low[i]);
    CHECK_THROWS(green_low(f, 1.0, 0.0, p1));
    CHECK_THROWS(green_high(f, -1.0, 0.5, p1));
}

TEST_CASE("gain/loss dichotomy on the lattice") {
    const GridSpec g = make_grid(1, 1024, 200.0);
    double inf_gain = INFINITY;
    for_each_mode(g, [&](std::size_t, double k2) {
        const double r = std::sqrt(k2);
        if (r >= 1.0) inf_gain = std::min(inf_gain, sigma(r, p1));
    });
    CHECK(inf_gain > 0.0);
    CHECK(inf_gain >= sigma(1.0, p1));
    const ModelParams lp{1, 1.0, 0.5, 3.0};
    // For α < 1 the high-part decay at fixed t depends on how much mass sits
    // at large |ξ|: compare two truncated profiles.
    const double t = 50.0;
    auto ratio = [&](double cut) {
        const auto p = compact_profile(cut, 1.0);
        return radial_weighted_l2(p, 0.0, t, lp, Window::high()) / radial_weighted_l2(p, 0.0, 0.0, lp, Window::high());
    };
    CHECK(ratio(40.0) > ratio(4.0));
}

TEST_CASE("low-frequency probe") {
    const auto g = gaussian_profile(1, 1.0, 1.0);
    const std::vector<double> ts{0.0, 1.0, 10.0, 1e2, 1e3, 1e4};
    const ProbeReport r = probe_low_frequency(g, 0.0, ts, p1);
    CHECK(r.bounded);
    CHECK(std::abs(r.tail_slope) <= 0.05);
    CHECK(std::isfinite(r.ratios[0]));
    CHECK(r.ratios[0] == Approx(radial_weighted_l2(g, 0.0, 0.0, p1, Window::low()) / *g.l1_norm_hint).epsilon(1e-12));
    const ProbeReport c = probe_low_frequency(g, 0.0, ts, p1, 0.5, 0.1);
    CHECK_FALSE(c.bounded);
    CHECK_THROWS(probe_low_frequency(g, 0.0, {5.0, 1.0}, p1));
    RadialProfile no_l1 = g;
    no_l1.l1_norm_hint.reset();
    CHECK_THROWS(probe_low_frequency(no_l1, 0.0, ts, p1));
}

TEST_CASE("high-frequency probe") {
    const auto g = gaussian_profile(1, 1.0, 1.0);
    std::vector<double> lin;
    for (int i = 0; i <= 19; ++i) lin.push_back(1.0 + i);
    const ProbeReport r = probe_high_frequency(g, 0.0, 0.0, lin, p1);
    REQUIRE(r.fitted_rate.has_value());
    CHECK(*r.fitted_rate > sigma(0.5, p1));
    const ModelParams lp{1, 1.0, 0.5, 3.0};
    const ProbeReport q = probe_high_frequency(g, 0.0, 1.0, log_spaced(1.0, 1e4, 12), lp);
    CHECK(q.bounded);
    CHECK_FALSE(q.fitted_rate.has_value());
    for (std::size_t i = 0; i < q.times.size(); ++i) CHECK(q.log_ratios[i] <= 1e-12);
    const ProbeReport z = probe_high_frequency(g, 0.0, 1.0, {0.0, 1.0, 2.0}, lp);
    CHECK(std::isfinite(z.ratios[0]));
    CHECK_THROWS(probe_high_frequency(g, 0.0, 0.0, {1.0, 2.0}, lp));
}
