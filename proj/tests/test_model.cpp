#include "fpp/model.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace fpp;
using Catch::Approx;

TEST_CASE("validate: gain regime, theta above threshold") {
    const RegimeReport r = validate({1, 1.0, 1.0, 5.0}, 1.0);
    CHECK(r.regime == Regime::gain);
    CHECK(r.theta_ok);
    CHECK(r.s_ok);
    CHECK(r.n0 == 1.0);
    CHECK(r.warnings.empty());
    CHECK(r.hypotheses_hold());
}

TEST_CASE("validate: theta at the 4 alpha / n boundary is rejected") {
    const RegimeReport r = validate({1, 1.0, 1.0, 4.0}, 1.0);
    CHECK_FALSE(r.theta_ok);
    CHECK_FALSE(r.hypotheses_hold());
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("validate: loss regime N0") {
    const RegimeReport r = validate({1, 1.0, 0.5, 3.0}, 4.0);
    CHECK(r.regime == Regime::loss);
    CHECK(r.theta_ok);
    CHECK(r.s_ok);
    CHECK(r.n0 == Approx(1.5).epsilon(1e-14));
    CHECK(*r.params.alpha_bar() == 0.5);
}

TEST_CASE("validate: s condition failures warn instead of throwing") {
    const RegimeReport g = validate({1, 1.0, 1.0, 5.0}, 0.5);
    CHECK_FALSE(g.s_ok);
    CHECK(g.n0 == 0.5);
    const RegimeReport l = validate({1, 1.0, 0.5, 3.0}, 1.0);
    CHECK_FALSE(l.s_ok);
    CHECK(l.n0 >= 0.0);
    CHECK(l.n0 <= 1.0);
}

TEST_CASE("validate: N0 never exceeds s") {
    for (double alpha : {0.2, 0.5, 0.8, 1.0, 1.5})
        for (double s = 0.0; s <= 8.0; s += 0.5) {
            const RegimeReport r = validate({2, 0.7, alpha, 3.0}, s);
            CHECK(r.n0 <= s + 1e-14);
            CHECK(r.n0 >= 0.0);
        }
}

TEST_CASE("parameter errors") {
    CHECK_THROWS_AS(validate({1, 0.0, 1.0, 1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(validate({1, 1.0, -1.0, 1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(validate({1, 1.0, 1.0, 1.5}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(validate({1, 1.0, 1.0, 0.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(validate({4, 1.0, 1.0, 1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(validate({1, 1.0, 1.0, 1.0}, -1.0), std::invalid_argument);
}

TEST_CASE("alpha_bar only in the loss regime") {
    CHECK_FALSE(ModelParams{1, 1.0, 1.0, 1.0}.alpha_bar().has_value());
    CHECK(ModelParams{1, 1.0, 0.25, 1.0}.alpha_bar().value() == 0.75);
}

TEST_CASE("sigma values") {
    const ModelParams p1{1, 1.0, 1.0, 1.0}, p5{1, 1.0, 0.5, 1.0};
    CHECK(sigma(0.0, p1) == 0.0);
    CHECK(sigma(1.0, p1) == 0.5);
    CHECK(sigma(2.0, p5) == Approx(0.4).epsilon(1e-15));
}

TEST_CASE("sigma asymptotics") {
    for (double alpha : {0.3, 0.5, 1.0, 1.7})
        for (double m : {0.5, 1.0, 3.0}) {
            const ModelParams p{1, m, alpha, 1.0};
            for (double r : {1e-3, 1e-4, 1e-6}) CHECK(std::abs(sigma(r, p) / std::pow(r, 2 * alpha) - 1.0) <= 2 * m * r * r);
            for (double r : {1e3, 1e4, 1e6})
                CHECK(std::abs(sigma(r, p) * m / std::pow(r, 2 * alpha - 2) - 1.0) <= 2.0 / (m * r * r));
        }
}

TEST_CASE("b_inverse") {
    const ModelParams p{1, 1.0, 1.0, 1.0}, q{1, 2.0, 1.0, 1.0};
    CHECK(b_inverse(0.0, p) == 1.0);
    CHECK(b_inverse(1.0, p) == 0.5);
    CHECK(b_inverse(3.0, q) == Approx(1.0 / 19.0).epsilon(1e-15));
    double prev = 1.0;
    for (double r = 0.1; r < 50; r += 0.37) {
        const double b = b_inverse(r, q);
        CHECK(b < prev);
        CHECK(b > 0.0);
        prev = b;
    }
}

TEST_CASE("cutoff chi plateaus, midpoint and monotonicity") {
    CHECK(cutoff_chi(0.3, 0.5) == 1.0);
    CHECK(cutoff_chi(0.5, 0.5) == 1.0);
    CHECK(cutoff_chi(1.0, 0.5) == 0.0);
    CHECK(cutoff_chi(0.75, 0.5) == Approx(0.5).epsilon(1e-15));
    double prev = 1.0;
    for (double r = 0.0; r < 1.2; r += 1e-3) {
        const double c = cutoff_chi(r, 0.5);
        CHECK(c <= prev);
        CHECK(c + cutoff_chi_complement(r, 0.5) == Approx(1.0).epsilon(1e-15));
        prev = c;
    }
    CHECK_THROWS_AS(cutoff_chi(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cutoff_chi(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("decay exponent") {
    CHECK(decay_exponent(0.0, {1, 1.0, 1.0, 1.0}) == -0.25);
    CHECK(decay_exponent(1.0, {1, 1.0, 1.0, 1.0}) == -0.75);
    CHECK(decay_exponent(0.0, {2, 1.0, 0.5, 1.0}) == -1.0);
    const ModelParams p{2, 1.0, 0.7, 2.0};
    for (double l = 0.0; l < 5.0; l += 0.25) CHECK(decay_exponent(l + 0.25, p) < decay_exponent(l, p));
    CHECK_THROWS(decay_exponent(-0.1, p));
}

TEST_CASE("sigma peak in the loss regime") {
    const ModelParams p{1, 1.0, 0.5, 1.0};
    const double r = sigma_peak(p);
    CHECK(r == Approx(1.0));
    CHECK(sigma(r, p) >= sigma(0.99 * r, p));
    CHECK(sigma(r, p) >= sigma(1.01 * r, p));
    CHECK(std::isinf(sigma_peak({1, 1.0, 1.0, 1.0})));
}
