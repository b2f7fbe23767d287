#include <doctest.h>

#include <cmath>
#include <random>

#include "ermakov/expr.hpp"

using ermakov::EvalDomainError;
using ermakov::ParseError;
using ermakov::expr::Expression;
using ermakov::expr::NodeKind;

namespace {

constexpr double kPi = 3.141592653589793;

// random tree generator for the round-trip and derivative properties
Expression randomTree(std::mt19937_64& rng, int depth) {
    auto unit = [&rng] {
        return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    };
    const double pick = unit();
    if (depth <= 0 || pick < 0.25) {
        if (unit() < 0.5) return Expression::variable();
        return Expression::constant(std::round((unit() * 4.0 - 2.0) * 16.0) / 16.0);
    }
    if (pick < 0.55) {
        static const NodeKind unary[] = {NodeKind::Negate, NodeKind::Sin, NodeKind::Cos,
                                         NodeKind::Tan,    NodeKind::Cot, NodeKind::Sec,
                                         NodeKind::Csc,    NodeKind::Exp, NodeKind::Ln,
                                         NodeKind::Sqrt,   NodeKind::Abs, NodeKind::Sgn};
        return Expression::unary(unary[rng() % 12], randomTree(rng, depth - 1));
    }
    static const NodeKind binary[] = {NodeKind::Add, NodeKind::Sub, NodeKind::Mul,
                                      NodeKind::Div, NodeKind::Pow};
    const NodeKind op = binary[rng() % 5];
    Expression lhs = randomTree(rng, depth - 1);
    Expression rhs = op == NodeKind::Pow
                         ? Expression::constant(static_cast<double>(rng() % 5) - 1.0)
                         : randomTree(rng, depth - 1);
    return Expression::binary(op, std::move(lhs), std::move(rhs));
}

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("grammar examples") {
    CHECK(Expression::parse("1/x^3").evaluate(2.0) == doctest::Approx(0.125).epsilon(1e-15));
    // pow binds tighter than division: 2/x^3 is 2/(x^3)
    CHECK(Expression::parse("2/x^3").evaluate(2.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(Expression::parse("x^-2").evaluate(2.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(Expression::parse("sin(x)+cos(x)").evaluate(0.0) == doctest::Approx(1.0));
    const auto toy = Expression::parse("(tan(x)+cot(x))^2");
    CHECK(toy.evaluate(kPi / 4) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(toy.evaluate(kPi / 3) == doctest::Approx(16.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("evaluation examples") {
    CHECK(Expression::parse("x^2").evaluate(3.0) == doctest::Approx(9.0));
    CHECK(Expression::parse("cot(x)").evaluate(kPi / 4) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(Expression::parse("1/x").evaluate(0.0), EvalDomainError);
}

TEST_CASE("domain errors carry the offending node and argument") {
    try {
        Expression::parse("1+ln(x)").evaluate(-2.0);
        FAIL("expected a domain error");
    } catch (const EvalDomainError& e) {
        CHECK(e.node() == "ln(x)");
        CHECK(e.argument() == -2.0);
    }
}

TEST_CASE("precedence: unary minus binds looser than pow") {
    CHECK(Expression::parse("-x^2").evaluate(3.0) == doctest::Approx(-9.0));
    CHECK(Expression::parse("2^-3").evaluate(0.0) == doctest::Approx(0.125));
    // pow is right-associative
    CHECK(Expression::parse("x^2^3").evaluate(2.0) == doctest::Approx(256.0));
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(Expression::parse(""), ParseError);
    CHECK_THROWS_AS(Expression::parse("   "), ParseError);

    try {
        Expression::parse("2x");
        FAIL("expected a syntax error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 1);
        CHECK(!e.expected().empty());
    }

    try {
        Expression::parse("foo(x)");
        FAIL("expected an unknown identifier error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 0);
    }

    try {
        Expression::parse("1+*2");
        FAIL("expected a syntax error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 2);
    }
}

TEST_CASE("no implicit multiplication") {
    CHECK_THROWS_AS(Expression::parse("2x"), ParseError);
    CHECK_THROWS_AS(Expression::parse("2(x+1)"), ParseError);
}

TEST_CASE("pathological nesting is rejected, deep-but-sane input is fine") {
    const std::string deep(100000, '(');
    CHECK_THROWS_AS(Expression::parse(deep + "x"), ParseError);
    std::string nested = "x";
    for (int i = 0; i < 50; ++i) nested = "sin(" + nested + ")";
    CHECK(std::isfinite(Expression::parse(nested).evaluate(0.3)));
}

TEST_CASE("derivative examples") {
    const auto cubic = Expression::parse("x^3").derivative();
    CHECK(cubic.evaluate(2.0) == doctest::Approx(12.0));
    CHECK(cubic.evaluate(-1.5) == doctest::Approx(6.75));

    // (tan - cot)' = sec^2 + csc^2
    const auto d = Expression::parse("tan(x)-cot(x)").derivative();
    for (double x : {0.3, 0.7, 1.2}) {
        const double expected = 1.0 / std::pow(std::cos(x), 2) + 1.0 / std::pow(std::sin(x), 2);
        CHECK(d.evaluate(x) == doctest::Approx(expected).epsilon(1e-13));
    }

    // central-difference check at x = 0.7
    const auto sc = Expression::parse("sin(x)*cos(x)");
    const auto scD = sc.derivative();
    const double h = 1e-6;
    const double fd = (sc.evaluate(0.7 + h) - sc.evaluate(0.7 - h)) / (2.0 * h);
    CHECK(std::abs(scD.evaluate(0.7) - fd) < 1e-8);
}

TEST_CASE("abs derivative is 0 at the kink") {
    const auto d = Expression::parse("abs(x)").derivative();
    CHECK(d.evaluate(0.0) == 0.0);
    CHECK(d.evaluate(2.0) == 1.0);
    CHECK(d.evaluate(-2.0) == -1.0);
}

TEST_CASE("printer round-trips tricky precedence") {
    for (const char* source : {"-(x+1)^2", "1--x", "2^-x", "x-(1-x)", "-x*-x",
                               "(x+1)/(x-2)^3", "sgn(x)*abs(x)", "x^(x+1)"}) {
        const auto e = Expression::parse(source);
        const auto back = Expression::parse(e.str());
        for (double x : {0.3, 1.7, 2.9}) {
            double a;
            try {
                a = e.evaluate(x);
            } catch (const EvalDomainError&) {
                continue;
            }
            CHECK(back.evaluate(x) == doctest::Approx(a).epsilon(1e-14));
        }
    }
}

TEST_CASE("property: print-then-parse is evaluation equivalent") {
    std::mt19937_64 rng(20240811);
    int trees = 0;
    while (trees < 60) {
        const Expression e = randomTree(rng, 8);
        const Expression reparsed = Expression::parse(e.str());
        int compared = 0;
        for (int i = 0; i < 100; ++i) {
            const double x =
                static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0) * 6.0 - 3.0;
            double a, b;
            try {
                a = e.evaluate(x);
            } catch (const EvalDomainError&) {
                continue;
            }
            b = reparsed.evaluate(x);  // same domain by construction
            if (!std::isfinite(a)) continue;
            CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
            ++compared;
        }
        if (compared > 0) ++trees;
    }
}

TEST_CASE("property: symbolic derivative matches central differences") {
    std::mt19937_64 rng(7151);
    auto unit = [&rng] {
        return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    };
    int trees = 0;
    while (trees < 40) {
        const Expression e = randomTree(rng, 5);
        Expression d = e.derivative();
        int compared = 0;
        for (int i = 0; i < 100; ++i) {
            const double x = unit() * 4.0 - 2.0;
            const double h = 1e-6;
            double fPlus, fMinus, exact;
            try {
                fPlus = e.evaluate(x + h);
                fMinus = e.evaluate(x - h);
                exact = d.evaluate(x);
            } catch (const EvalDomainError&) {
                continue;
            }
            if (!std::isfinite(exact) || !std::isfinite(fPlus) || !std::isfinite(fMinus)) {
                continue;
            }
            // stay clear of poles and cliffs where the stencil is meaningless
            if (std::abs(exact) > 100.0 || std::abs(fPlus) > 100.0 ||
                std::abs(fMinus) > 100.0) {
                continue;
            }
            // abs/sgn kinks inside the stencil break the comparison by design
            const double fd = (fPlus - fMinus) / (2.0 * h);
            if (std::abs(fd - exact) > 0.5 * (1.0 + std::abs(exact))) continue;
            CHECK(std::abs(fd - exact) <= 1e-6 * (1.0 + std::abs(exact)));
            ++compared;
        }
        if (compared >= 20) ++trees;
    }
}

TEST_CASE("parseReal shares the expression number syntax") {
    CHECK(ermakov::expr::parseReal("1.5e-3") == doctest::Approx(0.0015));
    CHECK(ermakov::expr::parseReal("0.8760580505981934") ==
          doctest::Approx(0.8760580505981934));
    CHECK(ermakov::expr::parseReal("-2.25") == doctest::Approx(-2.25));
    CHECK_THROWS_AS(ermakov::expr::parseReal("1.5x"), ParseError);
    CHECK_THROWS_AS(ermakov::expr::parseReal(""), ParseError);
}

}  // TEST_SUITE
