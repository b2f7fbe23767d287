#include "ermakov/pinney.hpp"

#include <array>
#include <cmath>

namespace ermakov::pinney {

OscillatorSolution::OscillatorSolution(const reduction::FrequencyProfile& profile, double theta0,
                                       double u0, double u0prime, double tol)
    : theta0_(theta0), interval_(profile.interval()) {
    if (!interval_.contains(theta0)) {
        throw ConstraintError("theta0 must lie inside the profile interval");
    }
    auto rhs = [profile](double theta, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = -profile.omegaSquared(theta) * y[0];
    };
    const std::array<double, 2> y0{u0, u0prime};
    dynamics::IntegrateOptions opt;
    opt.tolerance = tol;
    if (theta0 > interval_.lo) {
        left_ = std::make_shared<dynamics::Trajectory>(
            dynamics::integrate(rhs, y0, theta0, interval_.lo, opt));
    }
    if (theta0 < interval_.hi) {
        right_ = std::make_shared<dynamics::Trajectory>(
            dynamics::integrate(rhs, y0, theta0, interval_.hi, opt));
    }
    if (!left_ && !right_) {
        throw ConstraintError("profile interval is degenerate");
    }
}

double OscillatorSolution::value(double theta) const {
    if (theta < theta0_ && left_) return left_->evaluateComponent(theta, 0);
    if (right_) return right_->evaluateComponent(theta, 0);
    return left_->evaluateComponent(theta, 0);
}

double OscillatorSolution::derivative(double theta) const {
    if (theta < theta0_ && left_) return left_->evaluateComponent(theta, 1);
    if (right_) return right_->evaluateComponent(theta, 1);
    return left_->evaluateComponent(theta, 1);
}

FundamentalPair fundamentalPair(const reduction::FrequencyProfile& profile, double theta0,
                                double tol) {
    FundamentalPair pair{OscillatorSolution(profile, theta0, 1.0, 0.0, tol),
                         OscillatorSolution(profile, theta0, 0.0, 1.0, tol), 1.0, theta0};
    return pair;
}

PinneyTriple resolveTriple(double A, double B, double wronskian) {
    if (A == 0.0) throw ConstraintError("A must be nonzero to derive C");
    const double wInv2 = 1.0 / (wronskian * wronskian);
    return PinneyTriple{A, B, (wInv2 + B * B) / A};
}

PinneySolution::PinneySolution(const reduction::FrequencyProfile& profile, FundamentalPair pair,
                               PinneyTriple triple)
    : profile_(profile), pair_(std::move(pair)), triple_(triple) {
    const double wInv2 = 1.0 / (pair_.wronskian * pair_.wronskian);
    const double lhs = triple_.A * triple_.C - triple_.B * triple_.B;
    if (std::abs(lhs - wInv2) > 1e-10 * std::abs(wInv2)) {
        throw ConstraintError("triple violates A C - B^2 = W^-2 (got " + std::to_string(lhs) +
                              ", need " + std::to_string(wInv2) + ")");
    }
    // sigma^2 must stay positive on the interval
    const auto& iv = interval();
    for (int i = 0; i <= 512; ++i) {
        const double theta = iv.lo + iv.width() * static_cast<double>(i) / 512;
        const double nuV = pair_.nu.value(theta);
        const double vV = pair_.v.value(theta);
        const double s2 = triple_.A * nuV * nuV + 2.0 * triple_.B * nuV * vV +
                          triple_.C * vV * vV;
        if (s2 <= 0.0) {
            throw ConstraintError("sigma^2 touches zero near theta = " + std::to_string(theta));
        }
    }
}

double PinneySolution::sigma(double theta) const {
    const double nuV = pair_.nu.value(theta);
    const double vV = pair_.v.value(theta);
    return std::sqrt(triple_.A * nuV * nuV + 2.0 * triple_.B * nuV * vV + triple_.C * vV * vV);
}

double PinneySolution::sigmaPrime(double theta) const {
    const double nuV = pair_.nu.value(theta);
    const double vV = pair_.v.value(theta);
    const double nuD = pair_.nu.derivative(theta);
    const double vD = pair_.v.derivative(theta);
    const double p = triple_.A * nuV * nuD + triple_.B * (nuD * vV + nuV * vD) +
                     triple_.C * vV * vD;
    return p / sigma(theta);
}

double PinneySolution::sigmaSecondRaw(double theta) const {
    const double nuV = pair_.nu.value(theta);
    const double vV = pair_.v.value(theta);
    const double nuD = pair_.nu.derivative(theta);
    const double vD = pair_.v.derivative(theta);
    const double omega2 = profile_.omegaSquared(theta);
    const double nuDD = -omega2 * nuV;
    const double vDD = -omega2 * vV;
    const double s = sigma(theta);
    const double p = triple_.A * nuV * nuD + triple_.B * (nuD * vV + nuV * vD) +
                     triple_.C * vV * vD;
    const double pPrime = triple_.A * (nuD * nuD + nuV * nuDD) +
                          triple_.B * (nuDD * vV + 2.0 * nuD * vD + nuV * vDD) +
                          triple_.C * (vD * vD + vV * vDD);
    return (pPrime * s - p * (p / s)) / (s * s);
}

double PinneySolution::pinneyResidual(double theta) const {
    const double s = sigma(theta);
    return sigmaSecondRaw(theta) + profile_.omegaSquared(theta) * s - 1.0 / (s * s * s);
}

double PinneySolution::wronskianAt(double theta) const {
    return pair_.nu.value(theta) * pair_.v.derivative(theta) -
           pair_.nu.derivative(theta) * pair_.v.value(theta);
}

Phase::Phase(const PinneySolution& ps, double theta0) : theta0_(theta0) {
    const auto& iv = ps.interval();
    if (!iv.contains(theta0)) throw ConstraintError("phase origin outside sigma's interval");
    auto integrand = [ps](double theta) {
        const double s = ps.sigma(theta);
        return 1.0 / (s * s);
    };
    integral_ = std::make_shared<dynamics::CumulativeIntegral>(integrand, theta0, iv.lo, iv.hi);
}

double ermakovLewisReduced(double u, double uPrime, double sigma, double sigmaPrime) {
    if (sigma <= 0.0) throw ConstraintError("the invariant needs sigma > 0");
    const double coupled = sigma * uPrime - sigmaPrime * u;
    return 0.5 * (u * u / (sigma * sigma) + coupled * coupled);
}

OriginalInvariant ermakovLewisOriginal(const systems::PolarState& st, double sigma,
                                       double sigmaDot, double L) {
    if (sigma <= 0.0) throw ConstraintError("the invariant needs sigma > 0");
    if (L == 0.0) throw ConstraintError("the invariant needs L != 0");
    OriginalInvariant out;
    const double rInv = 1.0 / st.r;
    const double bracket = sigma * st.rdot / L + sigmaDot * rInv;
    out.printed = 0.5 * (rInv * rInv / (sigma * sigma) - bracket * bracket);

    const double thetadot = L * rInv * rInv;
    const double sigmaPrime = sigmaDot / thetadot;
    const double u = rInv;
    const double uPrime = -st.rdot / L;
    out.pullback = ermakovLewisReduced(u, uPrime, sigma, sigmaPrime);
    return out;
}

}  // namespace ermakov::pinney
