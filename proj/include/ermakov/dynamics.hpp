#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ermakov/errors.hpp"

namespace ermakov::dynamics {

/// Right-hand side of y' = f(t, y); writes dy/dt into `dydt`.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct IntegratorStats {
    int order = 5;
    double tolerance = 0.0;
    long steps = 0;
    long accepted = 0;
    long rejected = 0;
    long rhsEvaluations = 0;
};

/// Dense-output solution of an initial-value problem. Samples are stored at
/// the accepted step endpoints together with the state derivative there and,
/// for the adaptive integrator, one extra interpolation vector per step that
/// raises the continuous extension to fourth order (local error O(h^5));
/// without it the evaluation degrades gracefully to cubic Hermite.
/// Evaluation at a stored node reproduces the stored sample bit-exactly.
class Trajectory {
public:
    Trajectory(std::vector<double> times, std::vector<std::vector<double>> states,
               std::vector<std::vector<double>> derivatives, IntegratorStats stats,
               std::vector<std::vector<double>> fifthStage = {});

    std::size_t dimension() const { return dim_; }
    std::size_t sampleCount() const { return times_.size(); }
    double startTime() const { return times_.front(); }
    double endTime() const { return times_.back(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<std::vector<double>>& states() const { return states_; }
    const IntegratorStats& stats() const { return stats_; }

    /// State at any interior point (clamped to the integration span).
    std::vector<double> evaluate(double t) const;
    double evaluateComponent(double t, std::size_t component) const;

private:
    std::size_t segmentIndex(double t) const;

    std::vector<double> times_;
    std::vector<std::vector<double>> states_;
    std::vector<std::vector<double>> derivatives_;
    std::vector<std::vector<double>> fifthStage_;  // per interval; may be empty
    IntegratorStats stats_;
    std::size_t dim_;
    bool increasing_;
};

struct IntegrateOptions {
    double tolerance = 1e-10;   // local error per step, absolute and relative
    long maxSteps = 1000000;
};

/// Adaptive embedded Runge-Kutta 4(5) (Dormand-Prince coefficients).
/// span may run backwards (b < a). Throws IntegrationError on step-size
/// underflow or when the right-hand side leaves its domain; the error
/// reports the last reachable point.
Trajectory integrate(const Rhs& rhs, std::span<const double> y0, double a, double b,
                     const IntegrateOptions& options = {});

/// Classical fixed-step fourth-order Runge-Kutta over `steps` equal steps.
Trajectory integrateFixedRk4(const Rhs& rhs, std::span<const double> y0, double a, double b,
                             long steps);

/// Adaptive Simpson quadrature of f over [a, b] with absolute tolerance tol.
/// Recursion depth is capped at 40; exhausting it throws QuadratureError.
double quadrature(const std::function<double(double)>& f, double a, double b, double tol);

/// Cumulative integral F(t) = integral of f from origin to t, cached on a
/// uniform grid over [lo, hi] with cubic Hermite evaluation between nodes
/// (the integrand supplies exact node derivatives). Immutable once built.
class CumulativeIntegral {
public:
    CumulativeIntegral(const std::function<double(double)>& f, double origin, double lo,
                       double hi, std::size_t cells = 1024, double tol = 1e-13);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double operator()(double t) const;
    double derivative(double t) const { return f_(t); }

private:
    std::function<double(double)> f_;
    double lo_, hi_, h_;
    std::vector<double> values_;  // F at nodes
    std::vector<double> slopes_;  // f at nodes
};

}  // namespace ermakov::dynamics
