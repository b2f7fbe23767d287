#include "ermakov/systems.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ermakov::systems {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

double square(double v) { return v * v; }

// d/dtheta of (tan - cot)^2, built once through the symbolic differentiator.
const expr::Expression& toyTransversalProfile() {
    static const expr::Expression d =
        expr::Expression::parse("(tan(x)-cot(x))^2").derivative();
    return d;
}

}  // namespace

std::string className(SystemClass c) {
    switch (c) {
        case SystemClass::KeplerErmakov: return "kepler_ermakov";
        case SystemClass::Generalized: return "generalized";
        case SystemClass::Toy: return "toy";
    }
    return "?";
}

SystemClass classFromName(const std::string& name) {
    if (name == "kepler_ermakov") return SystemClass::KeplerErmakov;
    if (name == "generalized") return SystemClass::Generalized;
    if (name == "toy") return SystemClass::Toy;
    throw ConstraintError("unknown system class '" + name +
                          "' (expected toy, generalized or kepler_ermakov)");
}

ErmakovSystem ErmakovSystem::fromJson(const std::string& jsonText) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(jsonText);
    } catch (const nlohmann::json::exception& e) {
        throw ConstraintError(std::string("system definition is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("class")) {
        throw ConstraintError("system definition needs a \"class\" field");
    }
    ErmakovSystem s;
    s.classTag = classFromName(j.at("class").get<std::string>());
    auto field = [&](const char* name) {
        if (!j.contains(name)) return expr::Expression::constant(0.0);
        return expr::Expression::parse(j.at(name).get<std::string>());
    };
    s.f = field("f");
    s.g = field("g");
    s.h = field("h");
    s.w = field("w");
    s.keplerConstant = j.value("C", 0.0);
    return s;
}

ErmakovSystem ErmakovSystem::fromJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConstraintError("cannot open system definition file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return fromJson(buf.str());
}

std::string ErmakovSystem::toJson() const {
    nlohmann::ordered_json j;
    j["class"] = className(classTag);
    j["f"] = f.str();
    j["g"] = g.str();
    j["h"] = h.str();
    j["w"] = w.str();
    j["C"] = keplerConstant;
    return j.dump();
}

double poleDistance(double theta) {
    return std::abs(std::remainder(theta, kHalfPi));
}

void requireAwayFromPole(double theta) {
    if (poleDistance(theta) < kPoleGuard) {
        throw PoleError("theta = " + std::to_string(theta) +
                        " is within the guard band of a multiple of pi/2");
    }
}

double keplerH(const ErmakovSystem& s, double r, double theta) {
    const double c = std::cos(theta);
    if (r == 0.0 || c == 0.0) {
        throw PoleError("H is undefined at r = 0 or cos(theta) = 0");
    }
    return 0.25 * s.keplerConstant * r * r * r - s.h.evaluate(1.0 / std::tan(theta)) / (r * c);
}

Acceleration cartesianRhs(const ErmakovSystem& s, const CartesianState& st) {
    if (st.x == 0.0 || st.y == 0.0) {
        throw PoleError(std::string("state on an axis pole: ") +
                        (st.x == 0.0 ? "x = 0" : "y = 0"));
    }
    const double wVal = s.w.evaluate(st.t);
    const double w2 = wVal * wVal;
    Acceleration a;
    switch (s.classTag) {
        case SystemClass::Toy:
            a.ax = -w2 * st.x + 1.0 / (st.x * st.x * st.x);
            a.ay = -w2 * st.y + 1.0 / (st.y * st.y * st.y);
            break;
        case SystemClass::Generalized: {
            const double rho = st.y / st.x;
            a.ax = -w2 * st.x + s.f.evaluate(rho) / (st.y * st.x * st.x);
            a.ay = -w2 * st.y + s.g.evaluate(rho) / (st.x * st.y * st.y);
            break;
        }
        case SystemClass::KeplerErmakov: {
            const double rho = st.y / st.x;
            const double r = std::hypot(st.x, st.y);
            const double r3 = r * r * r;
            const double H = keplerH(s, r, std::atan2(st.y, st.x));
            a.ax = -w2 * st.x - st.x / r3 * H + s.f.evaluate(rho) / (st.x * st.x * st.x);
            a.ay = -w2 * st.y - st.y / r3 * H + s.g.evaluate(rho) / (st.y * st.y * st.y);
            break;
        }
    }
    return a;
}

PolarForce polarRhs(const ErmakovSystem& s, const PolarState& st) {
    if (!s.hasZeroFrequency()) {
        throw ConstraintError("polar components require w identically zero");
    }
    requireAwayFromPole(st.theta);
    const double sinT = std::sin(st.theta);
    const double cosT = std::cos(st.theta);
    const double tanT = sinT / cosT;
    const double cotT = cosT / sinT;
    const double sec2 = 1.0 / (cosT * cosT);
    const double csc2 = 1.0 / (sinT * sinT);
    const double u3 = 1.0 / (st.r * st.r * st.r);

    PolarForce out;
    switch (s.classTag) {
        case SystemClass::Toy:
            out.radial = u3 * square(tanT + cotT);
            out.transversal = -0.5 * u3 * toyTransversalProfile().evaluate(st.theta);
            break;
        case SystemClass::Generalized: {
            const double fV = s.f.evaluate(tanT);
            const double gV = s.g.evaluate(tanT);
            out.radial = u3 * (sec2 * fV + csc2 * gV);
            out.transversal = -u3 * (sec2 * tanT * fV - csc2 * cotT * gV);
            break;
        }
        case SystemClass::KeplerErmakov: {
            const double fV = s.f.evaluate(tanT);
            const double gV = s.g.evaluate(tanT);
            const double hV = s.h.evaluate(cotT);
            out.radial = u3 * (hV / cosT + sec2 * fV + csc2 * gV);
            out.transversal = -u3 * (sec2 * tanT * fV - csc2 * cotT * gV);
            break;
        }
    }
    return out;
}

PolarForce polarForceFromCartesian(const ErmakovSystem& s, const PolarState& st) {
    CartesianState cart = fromPolar(st);
    cart.vx = 0.0;
    cart.vy = 0.0;
    ErmakovSystem noOsc = s;
    noOsc.w = expr::Expression::constant(0.0);
    const Acceleration a = cartesianRhs(noOsc, cart);
    const double sinT = std::sin(st.theta);
    const double cosT = std::cos(st.theta);
    return PolarForce{cosT * a.ax + sinT * a.ay, -sinT * a.ax + cosT * a.ay};
}

PolarState toPolar(const CartesianState& st) {
    if (st.x == 0.0 && st.y == 0.0) {
        throw PoleError("cannot map the origin to polar coordinates");
    }
    PolarState p;
    p.t = st.t;
    p.r = std::hypot(st.x, st.y);
    p.theta = std::atan2(st.y, st.x);
    p.rdot = (st.x * st.vx + st.y * st.vy) / p.r;
    p.thetadot = (st.x * st.vy - st.y * st.vx) / (p.r * p.r);
    return p;
}

CartesianState fromPolar(const PolarState& st) {
    if (st.r <= 0.0) throw ConstraintError("polar state needs r > 0");
    CartesianState c;
    const double sinT = std::sin(st.theta);
    const double cosT = std::cos(st.theta);
    c.t = st.t;
    c.x = st.r * cosT;
    c.y = st.r * sinT;
    c.vx = st.rdot * cosT - st.r * st.thetadot * sinT;
    c.vy = st.rdot * sinT + st.r * st.thetadot * cosT;
    return c;
}

}  // namespace ermakov::systems
