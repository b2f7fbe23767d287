#include <doctest.h>

#include <cmath>
#include <random>

#include "ermakov/pinney.hpp"

using namespace ermakov;
using pinney::FundamentalPair;
using pinney::OscillatorSolution;
using pinney::Phase;
using pinney::PinneySolution;
using reduction::FrequencyProfile;
using reduction::Interval;

namespace {

constexpr double kPi = 3.141592653589793;

FrequencyProfile unitProfile(Interval iv = {-2.2, 2.2}) {
    return FrequencyProfile::analytic(expr::Expression::parse("1"), iv);
}

}  // namespace

TEST_SUITE("pinney") {

TEST_CASE("fundamental pair of the unit oscillator") {
    const auto profile = unitProfile();
    const auto pair = pinney::fundamentalPair(profile, 0.0);
    CHECK(pair.wronskian == 1.0);
    for (int i = 0; i <= 40; ++i) {
        const double theta = -2.0 + 4.0 * i / 40.0;
        CHECK(std::abs(pair.nu.value(theta) - std::cos(theta)) < 5e-9);
        CHECK(std::abs(pair.v.value(theta) - std::sin(theta)) < 5e-9);
        CHECK(std::abs(pair.nu.derivative(theta) + std::sin(theta)) < 5e-9);
    }
}

TEST_CASE("fundamental pair with omega^2 = 4") {
    const auto profile = FrequencyProfile::analytic(expr::Expression::parse("4"), {-1.5, 1.5});
    const auto pair = pinney::fundamentalPair(profile, 0.0);
    for (int i = 0; i <= 30; ++i) {
        const double theta = -1.4 + 2.8 * i / 30.0;
        CHECK(std::abs(pair.nu.value(theta) - std::cos(2 * theta)) < 5e-9);
        CHECK(std::abs(pair.v.value(theta) - 0.5 * std::sin(2 * theta)) < 5e-9);
    }
}

TEST_CASE("Wronskian is constant along theta") {
    const auto profile =
        FrequencyProfile::analytic(expr::Expression::parse("1+x^2/4"), {-2.0, 2.0});
    const auto pair = pinney::fundamentalPair(profile, 0.3);
    PinneySolution ps(profile, pair, {1.0, 0.0, 1.0});
    for (int i = 0; i <= 100; ++i) {
        const double theta = -1.9 + 3.8 * i / 100.0;
        CHECK(std::abs(ps.wronskianAt(theta) - 1.0) < 1e-9);
    }
}

TEST_CASE("unit sigma") {
    const auto profile = unitProfile();
    PinneySolution ps(profile, pinney::fundamentalPair(profile, 0.0), {1.0, 0.0, 1.0});
    for (double theta : {-1.5, -0.3, 0.0, 0.8, 2.0}) {
        CHECK(std::abs(ps.sigma(theta) - 1.0) < 5e-9);
        CHECK(std::abs(ps.sigmaPrime(theta)) < 5e-9);
        CHECK(std::abs(ps.pinneyResidual(theta)) < 1e-9);
    }
}

TEST_CASE("sigma from an asymmetric triple") {
    // sigma^2 = 4 cos^2 + sin^2/4 via A = 4, B = 0, C = 1/4 on the unit pair
    const auto profile = unitProfile({-0.2, kPi / 2 + 0.2});
    const auto pair = pinney::fundamentalPair(profile, 0.0);
    PinneySolution ps(profile, pair, {4.0, 0.0, 0.25});
    CHECK(ps.sigma(0.0) == doctest::Approx(2.0).epsilon(1e-10));
    // closed-form second derivative of sqrt(4cos^2 + sin^2/4) at 0 is -15/8
    CHECK(ps.sigmaSecondRaw(0.0) == doctest::Approx(-15.0 / 8.0).epsilon(1e-9));
    // sigma'' + sigma = 1/8 = sigma^-3 there
    CHECK(ps.pinneyResidual(0.0) == doctest::Approx(0.0).epsilon(1e-9));
    for (int i = 0; i <= 64; ++i) {
        const double theta = -0.1 + (kPi / 2 + 0.2) * i / 64.0;
        CHECK(std::abs(ps.pinneyResidual(theta)) < 1e-7);
    }
}

TEST_CASE("triple constraint is enforced") {
    const auto profile = unitProfile();
    auto pair = pinney::fundamentalPair(profile, 0.0);
    CHECK_THROWS_AS(PinneySolution(profile, pair, {1.0, 0.0, 2.0}), ConstraintError);
    // negative-definite quadratic form
    CHECK_THROWS_AS(PinneySolution(profile, pinney::fundamentalPair(profile, 0.0),
                                   {-1.0, 0.0, -1.0}),
                    ConstraintError);
}

TEST_CASE("derived C from the constraint") {
    const auto t = pinney::resolveTriple(2.0, 0.5, 1.0);
    CHECK(t.C == doctest::Approx((1.0 + 0.25) / 2.0));
    CHECK(t.A * t.C - t.B * t.B == doctest::Approx(1.0));
    CHECK_THROWS_AS(pinney::resolveTriple(0.0, 0.0, 1.0), ConstraintError);
}

TEST_CASE("phase examples") {
    const auto profile = unitProfile();
    PinneySolution unitSigma(profile, pinney::fundamentalPair(profile, 0.0), {1.0, 0.0, 1.0});
    Phase ph(unitSigma, 0.0);
    CHECK(ph.alpha(1.3) == doctest::Approx(1.3).epsilon(1e-9));
    CHECK(ph.alpha(-0.7) == doctest::Approx(-0.7).epsilon(1e-9));
    CHECK(ph.alphaPrime(0.5) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("phase of the asymmetric sigma against a Riemann oracle") {
    const auto profile = unitProfile({-0.2, kPi / 2 + 0.2});
    PinneySolution ps(profile, pinney::fundamentalPair(profile, 0.0), {4.0, 0.0, 0.25});
    Phase ph(ps, 0.0);

    // oracle: midpoint Riemann sum of 1/sigma^2 with a million cells
    auto integrand = [](double s) {
        const double c = std::cos(s), sn = std::sin(s);
        return 1.0 / (4.0 * c * c + 0.25 * sn * sn);
    };
    const long n = 1000000;
    double sum = 0.0;
    for (long i = 0; i < n; ++i) sum += integrand((kPi / 2) * (i + 0.5) / n);
    sum *= (kPi / 2) / n;

    CHECK(ph.alpha(kPi / 2) == doctest::Approx(sum).epsilon(1e-9));
    CHECK(ph.alpha(kPi / 2) == doctest::Approx(kPi / 2).epsilon(1e-9));
}

TEST_CASE("alpha' sigma^2 = 1 pointwise") {
    const auto profile =
        FrequencyProfile::analytic(expr::Expression::parse("1+x^2/4"), {-1.5, 1.5});
    PinneySolution ps(profile, pinney::fundamentalPair(profile, 0.0), {1.0, 0.0, 1.0});
    Phase ph(ps, 0.0);
    for (int i = 0; i <= 50; ++i) {
        const double theta = -1.4 + 2.8 * i / 50.0;
        const double s = ps.sigma(theta);
        CHECK(std::abs(ph.alphaPrime(theta) * s * s - 1.0) < 1e-8);
    }
}

TEST_CASE("invariant in the reduced chart") {
    CHECK(pinney::ermakovLewisReduced(std::sin(0.77), std::cos(0.77), 1.0, 0.0) ==
          doctest::Approx(0.5).epsilon(1e-14));
    CHECK(pinney::ermakovLewisReduced(0.0, 0.0, 2.0, 0.3) == 0.0);
}

TEST_CASE("invariant conservation along an oscillator solution") {
    const auto profile =
        FrequencyProfile::analytic(expr::Expression::parse("1+x^2/4"), {-1.5, 1.5});
    PinneySolution ps(profile, pinney::fundamentalPair(profile, 0.0), {1.0, 0.0, 1.0});
    OscillatorSolution base(profile, 0.0, 0.7, -0.4);
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double theta = -1.45 + 2.9 * i / 200.0;
        const double value = pinney::ermakovLewisReduced(
            base.value(theta), base.derivative(theta), ps.sigma(theta), ps.sigmaPrime(theta));
        if (i == 0) {
            lo = hi = value;
        } else {
            lo = std::min(lo, value);
            hi = std::max(hi, value);
        }
    }
    CHECK(hi - lo < 1e-8);
}

TEST_CASE("original-variable invariant: displayed form versus pull-back") {
    // at a state with r' = 0 and sigmaDot = 0 the bracket vanishes and the
    // sign structure is invisible: both give 1/(2 r^2 sigma^2)
    systems::PolarState rest{0.0, 2.0, kPi / 4, 0.0, 0.5};
    const auto atRest = pinney::ermakovLewisOriginal(rest, 1.0, 0.0, 2.0);
    CHECK(atRest.printed == doctest::Approx(0.125));
    CHECK(atRest.pullback == doctest::Approx(0.125));

    // with r' != 0 the displayed minus sign bites: bracket = 1/2 each way
    systems::PolarState moving{0.0, 2.0, kPi / 4, 1.0, 0.5};
    const auto inv = pinney::ermakovLewisOriginal(moving, 1.0, 0.0, 2.0);
    CHECK(inv.printed == doctest::Approx(0.0));
    CHECK(inv.pullback == doctest::Approx(0.25));
    // gap is exactly the squared bracket
    CHECK(inv.pullback - inv.printed == doctest::Approx(0.25));
}

TEST_CASE("pull-back equals the reduced formula under the chart change") {
    std::mt19937_64 rng(777);
    auto unit = [&rng] {
        return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    };
    for (int i = 0; i < 100; ++i) {
        systems::PolarState st;
        st.r = 0.5 + 2.0 * unit();
        st.theta = 0.3 + unit();
        st.rdot = 2.0 * unit() - 1.0;
        st.thetadot = 0.2 + unit();
        const double L = st.r * st.r * st.thetadot;
        const double sigma = 0.5 + unit();
        const double sigmaPrime = 2.0 * unit() - 1.0;
        const double sigmaDot = st.thetadot * sigmaPrime;
        const auto inv = pinney::ermakovLewisOriginal(st, sigma, sigmaDot, L);
        const double reduced = pinney::ermakovLewisReduced(1.0 / st.r, -st.rdot / L, sigma,
                                                           sigmaPrime);
        CHECK(inv.pullback == doctest::Approx(reduced).epsilon(1e-12));
    }
}

TEST_CASE("property: sigma is invariant under the pair rescaling") {
    // (nu, v) -> (c nu, v/c) with (A, B, C) -> (A/c^2, B, C c^2)
    const auto profile =
        FrequencyProfile::analytic(expr::Expression::parse("1+x^2/4"), {-1.5, 1.5});
    const double c = 1.7;
    FundamentalPair scaled{OscillatorSolution(profile, 0.0, c, 0.0),
                           OscillatorSolution(profile, 0.0, 0.0, 1.0 / c), 1.0, 0.0};
    PinneySolution base(profile, pinney::fundamentalPair(profile, 0.0), {2.0, 0.0, 0.5});
    PinneySolution rescaled(profile, scaled, {2.0 / (c * c), 0.0, 0.5 * c * c});
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 10; ++i) {
        const double theta =
            -1.4 + 2.8 * (static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0));
        CHECK(base.sigma(theta) == doctest::Approx(rescaled.sigma(theta)).epsilon(1e-9));
    }
}

}  // TEST_SUITE
