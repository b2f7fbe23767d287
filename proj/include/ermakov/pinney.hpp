#pragma once

#include <memory>

#include "ermakov/dynamics.hpp"
#include "ermakov/reduction.hpp"

namespace ermakov::pinney {

/// One solution of u'' + omega^2(theta) u = 0 with dense output on both
/// sides of its anchor theta0.
class OscillatorSolution {
public:
    OscillatorSolution(const reduction::FrequencyProfile& profile, double theta0, double u0,
                       double u0prime, double tol = 1e-12);

    double theta0() const { return theta0_; }
    const reduction::Interval& interval() const { return interval_; }
    double value(double theta) const;
    double derivative(double theta) const;

private:
    double theta0_;
    reduction::Interval interval_;
    std::shared_ptr<const dynamics::Trajectory> left_;   // theta0 -> interval.lo (may be null)
    std::shared_ptr<const dynamics::Trajectory> right_;  // theta0 -> interval.hi (may be null)
};

struct FundamentalPair {
    OscillatorSolution nu;  // (u, u') = (1, 0) at theta0
    OscillatorSolution v;   // (u, u') = (0, 1) at theta0
    double wronskian = 1.0;
    double theta0 = 0.0;
};

/// Integrate the oscillator pair with unit initial data across the profile's
/// interval. The Wronskian is 1 by construction and constant along theta.
FundamentalPair fundamentalPair(const reduction::FrequencyProfile& profile, double theta0,
                                double tol = 1e-12);

struct PinneyTriple {
    double A = 1.0;
    double B = 0.0;
    double C = 1.0;
};

/// Nonlinear-oscillator solution sigma with
///   sigma^2 = A nu^2 + 2 B nu v + C v^2,   A C - B^2 = W^-2.
/// sigma' comes from the closed-form derivative of sigma^2, never from
/// differencing. Immutable; evaluation anywhere on the interval.
class PinneySolution {
public:
    PinneySolution(const reduction::FrequencyProfile& profile, FundamentalPair pair,
                   PinneyTriple triple);

    const reduction::Interval& interval() const { return pair_.nu.interval(); }
    const PinneyTriple& triple() const { return triple_; }
    double wronskian() const { return pair_.wronskian; }
    double theta0() const { return pair_.theta0; }
    const reduction::FrequencyProfile& profile() const { return profile_; }

    double sigma(double theta) const;
    double sigmaPrime(double theta) const;
    /// Second derivative obtained from the pair's dense output and the
    /// oscillator equation (not from the defining identity), so the
    /// residual sigma'' + omega^2 sigma - sigma^-3 is a real measurement.
    double sigmaSecondRaw(double theta) const;
    double pinneyResidual(double theta) const;
    /// nu v' - nu' v at theta, for Wronskian-constancy audits.
    double wronskianAt(double theta) const;

private:
    reduction::FrequencyProfile profile_;
    FundamentalPair pair_;
    PinneyTriple triple_;
};

/// Resolve a triple where C is derived from the constraint:
/// C = (W^-2 + B^2) / A.
PinneyTriple resolveTriple(double A, double B, double wronskian);

/// Phase alpha(theta) = integral of sigma^-2 from theta0; strictly
/// increasing, alpha(theta0) = 0, alpha' = sigma^-2.
class Phase {
public:
    Phase(const PinneySolution& ps, double theta0);

    double theta0() const { return theta0_; }
    double alpha(double theta) const { return (*integral_)(theta); }
    double alphaPrime(double theta) const { return integral_->derivative(theta); }

private:
    double theta0_;
    std::shared_ptr<const dynamics::CumulativeIntegral> integral_;
};

/// Conserved combination (u^2 / sigma^2 + (sigma u' - sigma' u)^2) / 2.
double ermakovLewisReduced(double u, double uPrime, double sigma, double sigmaPrime);

struct OriginalInvariant {
    double printed = 0.0;   // (sigma^-2 r^-2 - (sigma L^-1 r' + sigmaDot r^-1)^2) / 2
    double pullback = 0.0;  // reduced form through u = 1/r, u' = -r'/L
};

/// The original-variable invariant, both as displayed (minus sign between
/// the bracketed terms, sigmaDot = d sigma/dt) and as the pull-back of the
/// reduced form. The two differ structurally; callers report the gap.
OriginalInvariant ermakovLewisOriginal(const systems::PolarState& st, double sigma,
                                       double sigmaDot, double L);

}  // namespace ermakov::pinney
