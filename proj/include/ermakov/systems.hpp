#pragma once

#include <string>

#include "ermakov/expr.hpp"

namespace ermakov::systems {

enum class SystemClass { KeplerErmakov, Generalized, Toy };

std::string className(SystemClass c);
SystemClass classFromName(const std::string& name);

/// One of the three dynamical system classes. f and g take the ratio y/x,
/// h takes cot(theta) (first class only), w takes t. Immutable after
/// construction.
struct ErmakovSystem {
    SystemClass classTag = SystemClass::Toy;
    expr::Expression f;  // defaults to 0
    expr::Expression g;
    expr::Expression h;
    expr::Expression w;
    double keplerConstant = 0.0;  // C, first class only

    bool hasZeroFrequency() const { return w.isConstant(0.0); }

    /// Build from a definition document:
    ///   {"class": "toy"|"generalized"|"kepler_ermakov",
    ///    "f": "<expr>", "g": "<expr>", "h": "<expr>", "w": "<expr>", "C": <number>}
    /// Omitted expression fields default to "0".
    static ErmakovSystem fromJson(const std::string& jsonText);
    static ErmakovSystem fromJsonFile(const std::string& path);
    std::string toJson() const;
};

struct CartesianState {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;
};

struct PolarState {
    double t = 0.0;
    double r = 0.0;
    double theta = 0.0;
    double rdot = 0.0;
    double thetadot = 0.0;
};

struct Acceleration {
    double ax = 0.0;
    double ay = 0.0;
};

/// Radial and transversal force components, the right-hand sides of
/// r'' - r theta'^2 = radial and r theta'' + 2 r' theta' = transversal.
struct PolarForce {
    double radial = 0.0;
    double transversal = 0.0;
};

/// Guard band around theta = multiples of pi/2 where the trigonometric
/// profiles diverge; polar-side evaluations refuse to sample inside it.
inline constexpr double kPoleGuard = 1e-6;

/// Distance from theta to the nearest multiple of pi/2.
double poleDistance(double theta);
void requireAwayFromPole(double theta);

/// Cartesian accelerations (x'', y'') including the -w(t)^2 * position term.
/// Throws PoleError on an axis pole, EvalDomainError from the stored
/// expressions.
Acceleration cartesianRhs(const ErmakovSystem& s, const CartesianState& st);

/// The class's displayed polar force components; these are the claims the
/// audits test against the actual motion. Requires w identically zero and
/// theta outside the pole guard band.
PolarForce polarRhs(const ErmakovSystem& s, const PolarState& st);

/// Polar components of the actual Cartesian force field at a state (exact
/// coordinate transform of cartesianRhs with the w-term removed).
PolarForce polarForceFromCartesian(const ErmakovSystem& s, const PolarState& st);

/// The first class's H, from H = C r^3 / 4 - h(cot theta) / (r cos theta).
double keplerH(const ErmakovSystem& s, double r, double theta);

PolarState toPolar(const CartesianState& st);
CartesianState fromPolar(const PolarState& st);

}  // namespace ermakov::systems
