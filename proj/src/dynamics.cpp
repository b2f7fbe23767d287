#include "ermakov/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ermakov::dynamics {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// fifth-order minus embedded fourth-order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// weights of the extra vector in the fourth-order continuous extension
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Nested continuous-extension form: with fifth = 0 this is exactly the
// cubic Hermite interpolant; with the integrator's extra vector it is the
// fourth-order dense output of the 5(4) pair.
double denseEval(double t, double t0, double t1, double y0, double y1, double f0, double f1,
                 double fifth) {
    const double h = t1 - t0;
    if (h == 0.0) return y0;
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    const double delta = y1 - y0;
    const double c3 = h * f0 - delta;
    const double c4 = 2.0 * delta - h * (f0 + f1);
    return y0 + s * (delta + s1 * (c3 + s * (c4 + s1 * fifth)));
}

double hermite(double t, double t0, double t1, double y0, double y1, double f0, double f1) {
    return denseEval(t, t0, t1, y0, y1, f0, f1, 0.0);
}

}  // namespace

Trajectory::Trajectory(std::vector<double> times, std::vector<std::vector<double>> states,
                       std::vector<std::vector<double>> derivatives, IntegratorStats stats,
                       std::vector<std::vector<double>> fifthStage)
    : times_(std::move(times)),
      states_(std::move(states)),
      derivatives_(std::move(derivatives)),
      fifthStage_(std::move(fifthStage)),
      stats_(stats),
      dim_(states_.empty() ? 0 : states_.front().size()),
      increasing_(times_.size() < 2 || times_.back() >= times_.front()) {
    if (times_.size() < 1 || times_.size() != states_.size() ||
        times_.size() != derivatives_.size()) {
        throw ConstraintError("trajectory sample arrays are inconsistent");
    }
    if (!fifthStage_.empty() && fifthStage_.size() + 1 != times_.size()) {
        throw ConstraintError("interpolation coefficients do not match the intervals");
    }
}

std::size_t Trajectory::segmentIndex(double t) const {
    if (times_.size() < 2) return 0;
    if (increasing_) {
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - times_.begin());
        if (i == 0) return 0;
        if (i >= times_.size()) return times_.size() - 2;
        return i - 1;
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t, std::greater<double>());
    std::size_t i = static_cast<std::size_t>(it - times_.begin());
    if (i == 0) return 0;
    if (i >= times_.size()) return times_.size() - 2;
    return i - 1;
}

std::vector<double> Trajectory::evaluate(double t) const {
    std::vector<double> out(dim_);
    const std::size_t i = segmentIndex(t);
    // exact node values pass through untouched
    if (t == times_[i]) return states_[i];
    if (i + 1 < times_.size() && t == times_[i + 1]) return states_[i + 1];
    for (std::size_t c = 0; c < dim_; ++c) {
        out[c] = denseEval(t, times_[i], times_[i + 1], states_[i][c], states_[i + 1][c],
                           derivatives_[i][c], derivatives_[i + 1][c],
                           fifthStage_.empty() ? 0.0 : fifthStage_[i][c]);
    }
    return out;
}

double Trajectory::evaluateComponent(double t, std::size_t component) const {
    const std::size_t i = segmentIndex(t);
    if (t == times_[i]) return states_[i][component];
    if (i + 1 < times_.size() && t == times_[i + 1]) return states_[i + 1][component];
    return denseEval(t, times_[i], times_[i + 1], states_[i][component],
                     states_[i + 1][component], derivatives_[i][component],
                     derivatives_[i + 1][component],
                     fifthStage_.empty() ? 0.0 : fifthStage_[i][component]);
}

Trajectory integrate(const Rhs& rhs, std::span<const double> y0, double a, double b,
                     const IntegrateOptions& options) {
    if (a == b) throw ConstraintError("integration span is empty");
    if (options.tolerance <= 0.0) throw ConstraintError("tolerance must be positive");
    const std::size_t n = y0.size();
    const double direction = b > a ? 1.0 : -1.0;
    const double tol = options.tolerance;

    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);

    IntegratorStats stats;
    stats.tolerance = tol;

    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> derivs;
    std::vector<std::vector<double>> fifth;

    double t = a;
    auto evalRhs = [&](double tt, const std::vector<double>& yy, std::vector<double>& out) {
        try {
            rhs(tt, yy, out);
        } catch (const Error& e) {
            throw IntegrationError(
                std::string("right-hand side failed at t = ") + std::to_string(tt) + ": " +
                    e.what(),
                t);
        }
        ++stats.rhsEvaluations;
        for (double v : out) {
            if (!std::isfinite(v)) {
                throw IntegrationError("right-hand side produced a non-finite value at t = " +
                                           std::to_string(tt),
                                       t);
            }
        }
    };

    evalRhs(t, y, k1);
    times.push_back(t);
    states.push_back(y);
    derivs.push_back(k1);

    // starting step from the scale of y and f
    double ynorm = 0.0, fnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ynorm = std::max(ynorm, std::abs(y[i]));
        fnorm = std::max(fnorm, std::abs(k1[i]));
    }
    double h = direction * std::min(std::abs(b - a),
                                    fnorm > 0.0 ? 0.01 * (1.0 + ynorm) / fnorm : 0.1);

    const double hmin = std::abs(b - a) * 1e-15;

    while (direction * (b - t) > 0.0) {
        if (stats.steps++ > options.maxSteps) {
            throw IntegrationError("maximum step count exceeded; reached t = " +
                                       std::to_string(t),
                                   t);
        }
        if (std::abs(h) < hmin) {
            throw IntegrationError("step size underflow; last reachable point t = " +
                                       std::to_string(t),
                                   t);
        }
        if (direction * (t + h - b) > 0.0) h = b - t;

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        evalRhs(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        evalRhs(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        evalRhs(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        evalRhs(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] =
                y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        evalRhs(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        evalRhs(t + h, ynew, k7);

        double errNorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                    e6 * k6[i] + e7 * k7[i]);
            errNorm += (err / sc) * (err / sc);
        }
        errNorm = std::sqrt(errNorm / static_cast<double>(n));

        if (errNorm <= 1.0) {
            std::vector<double> extra(n);
            for (std::size_t i = 0; i < n; ++i) {
                extra[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                d6 * k6[i] + d7 * k7[i]);
            }
            fifth.push_back(std::move(extra));
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            ++stats.accepted;
            times.push_back(t);
            states.push_back(y);
            derivs.push_back(k1);
        } else {
            ++stats.rejected;
        }
        const double factor =
            std::clamp(0.9 * std::pow(std::max(errNorm, 1e-16), -0.2), 0.2, 5.0);
        h *= (errNorm <= 1.0) ? factor : std::min(factor, 1.0);
    }

    return Trajectory(std::move(times), std::move(states), std::move(derivs), stats,
                      std::move(fifth));
}

Trajectory integrateFixedRk4(const Rhs& rhs, std::span<const double> y0, double a, double b,
                             long steps) {
    if (steps <= 0) throw ConstraintError("step count must be positive");
    const std::size_t n = y0.size();
    const double h = (b - a) / static_cast<double>(steps);

    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), ytmp(n);

    IntegratorStats stats;
    stats.order = 4;

    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> derivs;

    auto evalRhs = [&](double tt, const std::vector<double>& yy, std::vector<double>& out) {
        rhs(tt, yy, out);
        ++stats.rhsEvaluations;
    };

    double t = a;
    evalRhs(t, y, k1);
    times.push_back(t);
    states.push_back(y);
    derivs.push_back(k1);

    for (long s = 0; s < steps; ++s) {
        t = a + h * static_cast<double>(s);
        evalRhs(t, y, k1);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + 0.5 * h * k1[i];
        evalRhs(t + 0.5 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + 0.5 * h * k2[i];
        evalRhs(t + 0.5 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * k3[i];
        evalRhs(t + h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        const double tn = (s + 1 == steps) ? b : a + h * static_cast<double>(s + 1);
        evalRhs(tn, y, k1);
        ++stats.steps;
        ++stats.accepted;
        times.push_back(tn);
        states.push_back(y);
        derivs.push_back(k1);
    }

    return Trajectory(std::move(times), std::move(states), std::move(derivs), stats);
}

namespace {

double simpson(double fa, double fm, double fb, double a, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptiveSimpson(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    if (depth >= 40) {
        throw QuadratureError("adaptive quadrature failed to converge on [" +
                              std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return adaptiveSimpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           adaptiveSimpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double quadrature(const std::function<double(double)>& f, double a, double b, double tol) {
    if (tol <= 0.0) throw ConstraintError("quadrature tolerance must be positive");
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = simpson(fa, fm, fb, a, b);
    return adaptiveSimpson(f, a, b, fa, fm, fb, whole, tol, 0);
}

CumulativeIntegral::CumulativeIntegral(const std::function<double(double)>& f, double origin,
                                       double lo, double hi, std::size_t cells, double tol)
    : f_(f), lo_(lo), hi_(hi) {
    if (!(lo < hi)) throw ConstraintError("cumulative integral needs lo < hi");
    if (origin < lo || origin > hi) {
        throw ConstraintError("cumulative integral origin outside [lo, hi]");
    }
    if (cells < 2) cells = 2;
    h_ = (hi - lo) / static_cast<double>(cells);
    values_.resize(cells + 1);
    slopes_.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        slopes_[i] = f(lo + h_ * static_cast<double>(i));
    }
    // integrate cell by cell from lo, then shift so F(origin) = 0;
    // the tolerance tracks each cell's own magnitude
    values_[0] = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double a = lo + h_ * static_cast<double>(i);
        const double rough =
            std::abs(simpson(slopes_[i], f(a + 0.5 * h_), slopes_[i + 1], a, a + h_));
        values_[i + 1] = values_[i] + quadrature(f, a, a + h_, tol * (1.0 + rough));
    }
    const double offset = (*this)(origin);
    for (double& v : values_) v -= offset;
}

double CumulativeIntegral::operator()(double t) const {
    if (t < lo_ - 1e-12 || t > hi_ + 1e-12) {
        throw ConstraintError("cumulative integral evaluated outside its interval");
    }
    const double clamped = std::clamp(t, lo_, hi_);
    auto idx = static_cast<std::size_t>((clamped - lo_) / h_);
    if (idx >= values_.size() - 1) idx = values_.size() - 2;
    const double t0 = lo_ + h_ * static_cast<double>(idx);
    return hermite(clamped, t0, t0 + h_, values_[idx], values_[idx + 1], slopes_[idx],
                   slopes_[idx + 1]);
}

}  // namespace ermakov::dynamics
