#include <doctest.h>

#include <cmath>
#include <random>

#include "ermakov/systems.hpp"

using namespace ermakov;
using systems::CartesianState;
using systems::ErmakovSystem;
using systems::PolarState;
using systems::SystemClass;

namespace {

constexpr double kPi = 3.141592653589793;

ErmakovSystem toySystem() {
    return ErmakovSystem::fromJson(R"({"class": "toy"})");
}

double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace

TEST_SUITE("systems") {

TEST_CASE("toy accelerations") {
    const auto s = toySystem();
    auto a = systems::cartesianRhs(s, {0.0, 1.0, 1.0, 0.0, 0.0});
    CHECK(a.ax == doctest::Approx(1.0));
    CHECK(a.ay == doctest::Approx(1.0));
    a = systems::cartesianRhs(s, {0.0, 2.0, 1.0, 0.0, 0.0});
    CHECK(a.ax == doctest::Approx(0.125));
    CHECK(a.ay == doctest::Approx(1.0));
}

TEST_CASE("oscillator term uses w(t) squared") {
    const auto s = ErmakovSystem::fromJson(R"({"class": "generalized", "w": "1"})");
    const auto a = systems::cartesianRhs(s, {0.0, 1.0, 1.0, 0.0, 0.0});
    CHECK(a.ax == doctest::Approx(-1.0));
    CHECK(a.ay == doctest::Approx(-1.0));

    const auto s2 = ErmakovSystem::fromJson(R"({"class": "toy", "w": "2"})");
    const auto a2 = systems::cartesianRhs(s2, {0.0, 1.0, 1.0, 0.0, 0.0});
    CHECK(a2.ax == doctest::Approx(-3.0));
}

TEST_CASE("axis poles are rejected") {
    const auto s = toySystem();
    CHECK_THROWS_AS(systems::cartesianRhs(s, {0.0, 0.0, 1.0, 0.0, 0.0}), PoleError);
    CHECK_THROWS_AS(systems::cartesianRhs(s, {0.0, 1.0, 0.0, 0.0, 0.0}), PoleError);
}

TEST_CASE("coordinate transforms") {
    const auto p = systems::toPolar({0.0, 1.0, 1.0, 0.0, 0.0});
    CHECK(p.r == doctest::Approx(std::sqrt(2.0)));
    CHECK(p.theta == doctest::Approx(kPi / 4));
    CHECK(p.rdot == doctest::Approx(0.0));
    CHECK(p.thetadot == doctest::Approx(0.0));

    const auto c = systems::fromPolar({0.0, 2.0, kPi / 6, 0.0, 0.0});
    CHECK(c.x == doctest::Approx(std::sqrt(3.0)));
    CHECK(c.y == doctest::Approx(1.0));

    CHECK_THROWS_AS(systems::toPolar({0.0, 0.0, 0.0, 1.0, 1.0}), PoleError);
}

TEST_CASE("property: transforms invert each other") {
    std::mt19937_64 rng(99101);
    for (int i = 0; i < 1000; ++i) {
        CartesianState st;
        st.x = 0.2 + 3.0 * unit(rng);
        st.y = 0.2 + 3.0 * unit(rng);
        st.vx = 4.0 * unit(rng) - 2.0;
        st.vy = 4.0 * unit(rng) - 2.0;
        const auto back = systems::fromPolar(systems::toPolar(st));
        CHECK(std::abs(back.x - st.x) < 1e-12);
        CHECK(std::abs(back.y - st.y) < 1e-12);
        CHECK(std::abs(back.vx - st.vx) < 1e-12);
        CHECK(std::abs(back.vy - st.vy) < 1e-12);
    }
}

TEST_CASE("displayed polar components at the symmetric point") {
    const auto toy = toySystem();
    const auto f = systems::polarRhs(toy, {0.0, 1.0, kPi / 4, 0.0, 0.0});
    CHECK(f.radial == doctest::Approx(4.0));
    CHECK(f.transversal == doctest::Approx(0.0).epsilon(1e-12));

    const auto gen =
        ErmakovSystem::fromJson(R"({"class": "generalized", "f": "1", "g": "1"})");
    const auto fg = systems::polarRhs(gen, {0.0, 1.0, kPi / 4, 0.0, 0.0});
    CHECK(fg.radial == doctest::Approx(4.0));
}

TEST_CASE("polar components refuse w != 0 and the guard band") {
    const auto s = ErmakovSystem::fromJson(R"({"class": "toy", "w": "1"})");
    CHECK_THROWS_AS(systems::polarRhs(s, {0.0, 1.0, kPi / 4, 0.0, 0.0}), ConstraintError);
    CHECK_THROWS_AS(systems::polarRhs(toySystem(), {0.0, 1.0, 1e-8, 0.0, 0.0}), PoleError);
}

TEST_CASE("toy force map identity on random valid states") {
    // the displayed components equal the transformed Cartesian force exactly
    const auto s = toySystem();
    std::mt19937_64 rng(4242);
    for (int i = 0; i < 1000; ++i) {
        PolarState st;
        st.r = 0.5 + 2.5 * unit(rng);
        st.theta = 0.05 + (kPi / 2 - 0.1) * unit(rng);
        const auto displayed = systems::polarRhs(s, st);
        const auto actual = systems::polarForceFromCartesian(s, st);
        const double scale = std::abs(actual.radial) + std::abs(actual.transversal) + 1.0;
        CHECK(std::abs(displayed.radial - actual.radial) < 1e-10 * scale);
        CHECK(std::abs(displayed.transversal - actual.transversal) < 1e-10 * scale);
    }
}

TEST_CASE("toy forces are odd under point reflection") {
    const auto s = toySystem();
    std::mt19937_64 rng(808);
    for (int i = 0; i < 100; ++i) {
        const double x = 0.3 + 2.0 * unit(rng);
        const double y = 0.3 + 2.0 * unit(rng);
        const auto plus = systems::cartesianRhs(s, {0.0, x, y, 0.0, 0.0});
        const auto minus = systems::cartesianRhs(s, {0.0, -x, -y, 0.0, 0.0});
        CHECK(minus.ax == doctest::Approx(-plus.ax));
        CHECK(minus.ay == doctest::Approx(-plus.ay));
    }
}

TEST_CASE("first-class dynamics match the displayed polar form when C = 0") {
    const auto s = ErmakovSystem::fromJson(
        R"({"class": "kepler_ermakov", "f": "1+x^2", "g": "2", "h": "x", "C": 0})");
    std::mt19937_64 rng(5150);
    for (int i = 0; i < 200; ++i) {
        PolarState st;
        st.r = 0.5 + 2.0 * unit(rng);
        st.theta = 0.1 + (kPi / 2 - 0.2) * unit(rng);
        const auto displayed = systems::polarRhs(s, st);
        const auto actual = systems::polarForceFromCartesian(s, st);
        const double scale = std::abs(actual.radial) + std::abs(actual.transversal) + 1.0;
        CHECK(std::abs(displayed.radial - actual.radial) < 1e-12 * scale);
        CHECK(std::abs(displayed.transversal - actual.transversal) < 1e-12 * scale);
    }
}

TEST_CASE("first-class C term acts radially through H") {
    // f = g = h = 0 and C = 4 turn the H term into -x, -y
    const auto s = ErmakovSystem::fromJson(R"({"class": "kepler_ermakov", "C": 4})");
    const auto a = systems::cartesianRhs(s, {0.0, 1.0, 1.0, 0.0, 0.0});
    CHECK(a.ax == doctest::Approx(-1.0));
    CHECK(a.ay == doctest::Approx(-1.0));

    const double H = systems::keplerH(
        ErmakovSystem::fromJson(R"({"class": "kepler_ermakov", "h": "x", "C": 2})"), 2.0,
        kPi / 4);
    CHECK(H == doctest::Approx(4.0 - 1.0 / std::sqrt(2.0)));
}

TEST_CASE("second-class displayed polar form disagrees with its couplings") {
    // the displayed components correspond to inverse-cube couplings; the
    // class equation uses 1/(y x^2): away from the symmetric point they split
    const auto s =
        ErmakovSystem::fromJson(R"({"class": "generalized", "f": "1", "g": "1"})");
    PolarState st{0.0, 1.0, kPi / 3, 0.0, 0.0};
    const auto displayed = systems::polarRhs(s, st);
    const auto actual = systems::polarForceFromCartesian(s, st);
    CHECK(std::abs(displayed.radial - actual.radial) > 0.1);
}

TEST_CASE("definition documents") {
    const auto s = ErmakovSystem::fromJson(
        R"({"class": "toy", "f": "x", "w": "0", "C": 1.5})");
    CHECK(s.classTag == SystemClass::Toy);
    CHECK(s.hasZeroFrequency());
    const auto round = ErmakovSystem::fromJson(s.toJson());
    CHECK(round.keplerConstant == doctest::Approx(1.5));

    CHECK_THROWS_AS(ErmakovSystem::fromJson(R"({"f": "x"})"), ConstraintError);
    CHECK_THROWS_AS(ErmakovSystem::fromJson(R"({"class": "nope"})"), ConstraintError);
    CHECK_THROWS_AS(ErmakovSystem::fromJson("not json"), ConstraintError);
}

}  // TEST_SUITE
