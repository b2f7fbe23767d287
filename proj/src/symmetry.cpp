#include "ermakov/symmetry.hpp"

#include <algorithm>
#include <cmath>

namespace ermakov::symmetry {

Jet2 jetConst(double c) { return {c, 0.0, 0.0}; }

Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
Jet2 operator*(double c, const Jet2& a) { return {c * a.v, c * a.d1, c * a.d2}; }
Jet2 jetSin(const Jet2& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return {s, a.d1 * c, a.d2 * c - a.d1 * a.d1 * s};
}
Jet2 jetCos(const Jet2& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return {c, -a.d1 * s, -a.d2 * s - a.d1 * a.d1 * c};
}
Jet2 jetRecip(const Jet2& a) {
    const double inv = 1.0 / a.v;
    const double inv2 = inv * inv;
    return {inv, -a.d1 * inv2, (2.0 * a.d1 * a.d1 - a.v * a.d2) * inv2 * inv};
}

namespace {

double upow(double u, int m) {
    switch (m) {
        case 0: return 1.0;
        case 1: return u;
        case 2: return u * u;
        default: return std::pow(u, m);
    }
}

struct SigmaJets {
    Jet2 s;   // sigma and its first two derivatives (second via the defining equation)
    Jet2 s1;  // sigma' and its first two derivatives
    Jet2 a;   // alpha, alpha' = sigma^-2, alpha''
};

SigmaJets sigmaJets(const pinney::PinneySolution& ps, const pinney::Phase& ph, double theta) {
    const double s = ps.sigma(theta);
    const double s1 = ps.sigmaPrime(theta);
    const double omega2 = ps.profile().omegaSquared(theta);
    const double omega2Prime = ps.profile().omegaSquaredPrime(theta);
    const double sInv = 1.0 / s;
    const double sInv3 = sInv * sInv * sInv;
    const double s2 = sInv3 - omega2 * s;
    const double s3 = -3.0 * sInv3 * sInv * s1 - omega2Prime * s - omega2 * s1;
    SigmaJets j;
    j.s = {s, s1, s2};
    j.s1 = {s1, s2, s3};
    j.a = {ph.alpha(theta), sInv * sInv, -2.0 * s1 * sInv3};
    return j;
}

}  // namespace

ReducedVectorField::ReducedVectorField(std::string name, int uPowerXi,
                                       std::function<Jet2(double)> coeffXi, int uPowerEta,
                                       std::function<Jet2(double)> coeffEta)
    : name_(std::move(name)),
      mXi_(uPowerXi),
      coeffXi_(std::move(coeffXi)),
      mEta_(uPowerEta),
      coeffEta_(std::move(coeffEta)) {}

double ReducedVectorField::xi(double theta, double u) const {
    return coeffXi_(theta).v * upow(u, mXi_);
}
double ReducedVectorField::eta(double theta, double u) const {
    return coeffEta_(theta).v * upow(u, mEta_);
}
double ReducedVectorField::xiTheta(double theta, double u) const {
    return coeffXi_(theta).d1 * upow(u, mXi_);
}
double ReducedVectorField::xiU(double theta, double u) const {
    return mXi_ == 0 ? 0.0 : mXi_ * coeffXi_(theta).v * upow(u, mXi_ - 1);
}
double ReducedVectorField::etaTheta(double theta, double u) const {
    return coeffEta_(theta).d1 * upow(u, mEta_);
}
double ReducedVectorField::etaU(double theta, double u) const {
    return mEta_ == 0 ? 0.0 : mEta_ * coeffEta_(theta).v * upow(u, mEta_ - 1);
}

std::vector<ReducedVectorField> pointGenerators(const pinney::PinneySolution& ps,
                                                const pinney::Phase& ph) {
    auto jets = [ps, ph](double theta) { return sigmaJets(ps, ph, theta); };
    auto zero = [](double) { return jetConst(0.0); };
    auto one = [](double) { return jetConst(1.0); };

    std::vector<ReducedVectorField> g;
    g.emplace_back("gamma_1", 0, one, 0, zero);
    g.emplace_back(
        "gamma_2", 0,
        [jets](double th) {
            const auto j = jets(th);
            return j.s * j.s * jetSin(2.0 * j.a);
        },
        1,
        [jets](double th) {
            const auto j = jets(th);
            return j.s * j.s1 * jetSin(2.0 * j.a) + jetCos(2.0 * j.a);
        });
    g.emplace_back(
        "gamma_3", 0,
        [jets](double th) {
            const auto j = jets(th);
            return j.s * j.s * jetCos(2.0 * j.a);
        },
        1,
        [jets](double th) {
            const auto j = jets(th);
            return j.s * j.s1 * jetCos(2.0 * j.a) - jetSin(2.0 * j.a);
        });
    g.emplace_back("gamma_4", 0, zero, 0, [jets](double th) {
        const auto j = jets(th);
        return j.s * jetCos(j.a);
    });
    g.emplace_back("gamma_5", 0, zero, 0, [jets](double th) {
        const auto j = jets(th);
        return j.s * jetSin(j.a);
    });
    g.emplace_back(
        "gamma_6", 0,
        [jets](double th) {
            const auto j = jets(th);
            return j.s * j.s;
        },
        1,
        [jets](double th) {
            const auto j = jets(th);
            return j.s * j.s1;
        });
    g.emplace_back("gamma_7", 0, zero, 1, one);
    g.emplace_back(
        "gamma_8", 1,
        [jets](double th) {
            const auto j = jets(th);
            return j.s * jetSin(j.a);
        },
        2,
        [jets](double th) {
            const auto j = jets(th);
            return j.s1 * jetSin(j.a) + jetRecip(j.s) * jetCos(j.a);
        });
    g.emplace_back(
        "gamma_9", 1,
        [jets](double th) {
            const auto j = jets(th);
            return j.s * jetCos(j.a);
        },
        2,
        [jets](double th) {
            const auto j = jets(th);
            return j.s1 * jetCos(j.a) - jetRecip(j.s) * jetSin(j.a);
        });
    return g;
}

claims::ClaimVerdict flowSymmetryTest(const ReducedVectorField& field,
                                      const reduction::FrequencyProfile& profile,
                                      const pinney::OscillatorSolution& baseSolution,
                                      const FlowTestOptions& options) {
    const auto iv = profile.interval();
    const double margin = options.interiorMargin * iv.width();
    double lo = iv.lo + margin;
    double hi = iv.hi - margin;
    if (!(lo < hi)) throw ConstraintError("flow-test interval is degenerate");

    const int n = options.gridN;
    std::vector<double> thetas(n), us(n), ups(n);
    double xiMax = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
        const double th = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        thetas[i] = th;
        us[i] = baseSolution.value(th);
        ups[i] = baseSolution.derivative(th);
        xiMax = std::max(xiMax, std::abs(field.xi(th, us[i])));
        scale = std::max(scale, std::abs(profile.omegaSquared(th) * us[i]));
    }
    scale = std::max(scale, 1e-300);

    // keep the transformed abscissas inside the profile interval
    const double epsMax = *std::max_element(options.epsilons.begin(), options.epsilons.end()) *
                          std::min(1.0, iv.width() / 2.0);
    const double shift = 1.05 * epsMax * xiMax;
    lo = std::max(lo, iv.lo + shift);
    hi = std::min(hi, iv.hi - shift);
    if (!(lo < hi)) throw ConstraintError("generator displacement exceeds the profile interval");
    for (int i = 0; i < n; ++i) {
        thetas[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        us[i] = baseSolution.value(thetas[i]);
        ups[i] = baseSolution.derivative(thetas[i]);
    }

    const int mXi = field.uPowerXi();
    const int mEta = field.uPowerEta();
    // on narrow intervals the nominal eps would displace the graph by a
    // sizable fraction of the domain; keep the flow in its linear regime
    const double epsScale = std::min(1.0, iv.width() / 2.0);
    int retries = 0;

    auto residualFor = [&](double eps, bool& folded) -> double {
        double worst = 0.0;
        folded = false;
        for (int i = 0; i < n; ++i) {
            const double th = thetas[i];
            const double u = us[i];
            const double up = ups[i];
            const double upp = -profile.omegaSquared(th) * u;

            const Jet2 A = field.xiJet(th);
            const Jet2 B = field.etaJet(th);
            // total derivatives of xi(theta, u(theta)) and eta along the graph
            const double xiV = A.v * upow(u, mXi);
            const double xiD = A.d1 * upow(u, mXi) +
                               (mXi ? mXi * A.v * upow(u, mXi - 1) * up : 0.0);
            const double xiDD =
                A.d2 * upow(u, mXi) + (mXi ? 2.0 * mXi * A.d1 * upow(u, mXi - 1) * up : 0.0) +
                (mXi >= 2 ? mXi * (mXi - 1) * A.v * upow(u, mXi - 2) * up * up : 0.0) +
                (mXi ? mXi * A.v * upow(u, mXi - 1) * upp : 0.0);
            const double etaV = B.v * upow(u, mEta);
            const double etaD = B.d1 * upow(u, mEta) +
                                (mEta ? mEta * B.v * upow(u, mEta - 1) * up : 0.0);
            const double etaDD =
                B.d2 * upow(u, mEta) +
                (mEta ? 2.0 * mEta * B.d1 * upow(u, mEta - 1) * up : 0.0) +
                (mEta >= 2 ? mEta * (mEta - 1) * B.v * upow(u, mEta - 2) * up * up : 0.0) +
                (mEta ? mEta * B.v * upow(u, mEta - 1) * upp : 0.0);

            const double thetaNew = th + eps * xiV;
            const double thetaNewD = 1.0 + eps * xiD;
            const double thetaNewDD = eps * xiDD;
            if (thetaNewD <= 0.0) {
                folded = true;
                return 0.0;
            }
            const double uNew = u + eps * etaV;
            const double uNewD = up + eps * etaD;
            const double uNewDD = upp + eps * etaDD;

            const double transformedSecond =
                (uNewDD * thetaNewD - uNewD * thetaNewDD) /
                (thetaNewD * thetaNewD * thetaNewD);
            const double residual =
                std::abs(transformedSecond + profile.omegaSquared(thetaNew) * uNew);
            worst = std::max(worst, residual);
        }
        return worst;
    };

    std::vector<double> epsUsed;
    std::vector<double> residuals;
    for (double eps : options.epsilons) {
        eps *= epsScale;
        bool folded = true;
        double r = 0.0;
        int attempts = 0;
        while (folded && attempts <= options.maxRetries) {
            r = residualFor(eps, folded);
            if (folded) {
                eps /= 10.0;
                ++retries;
            }
            ++attempts;
        }
        if (folded) {
            throw ConstraintError("transformed graph stays non-monotone for " + field.name());
        }
        epsUsed.push_back(eps);
        residuals.push_back(r);
    }

    const double floor = options.roundoffFloor * std::max(1.0, scale);
    bool exact = true;
    for (double r : residuals) exact = exact && r <= floor;

    claims::ClaimVerdict v;
    v.id = field.name();
    v.description = "first-order flow test of " + field.name();
    v.tolerance = options.residualCoefficient;
    v.residualMax = residuals.back();
    v.exactToRoundoff = exact;

    nlohmann::ordered_json detail;
    detail["epsilons"] = epsUsed;
    detail["residuals"] = residuals;
    detail["scale"] = scale;
    if (retries > 0) detail["epsilon_retries"] = retries;
    v.extra = detail;

    if (exact) {
        v.verdict = claims::Verdict::Pass;
        v.note = "transform is an exact solution; residual at the roundoff floor";
        return v;
    }

    // least-squares slope of log residual against log eps, above the floor
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < epsUsed.size(); ++i) {
        if (residuals[i] <= floor) continue;
        const double lx = std::log(epsUsed[i]);
        const double ly = std::log(residuals[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    const double epsMin = *std::min_element(epsUsed.begin(), epsUsed.end());
    const double bound =
        options.residualCoefficient * (epsMin / 1e-4) * (epsMin / 1e-4) * scale;
    const double rAtMin = residuals[std::min_element(epsUsed.begin(), epsUsed.end()) -
                                    epsUsed.begin()];
    v.residualMax = rAtMin;

    if (count < 2) {
        // all but one residual at the noise floor: no slope to fit
        v.verdict = rAtMin <= bound ? claims::Verdict::Pass : claims::Verdict::Fail;
        v.note = "residuals too close to the roundoff floor for an order estimate";
        return v;
    }
    const double p = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    v.orderEstimate = p;
    v.verdict = (p >= options.orderThreshold && rAtMin <= bound) ? claims::Verdict::Pass
                                                                 : claims::Verdict::Fail;
    return v;
}

CommutatorValue commutator(const ReducedVectorField& x, const ReducedVectorField& y,
                           double theta, double u) {
    CommutatorValue out;
    const double xXi = x.xi(theta, u), xEta = x.eta(theta, u);
    const double yXi = y.xi(theta, u), yEta = y.eta(theta, u);
    out.xi = xXi * y.xiTheta(theta, u) + xEta * y.xiU(theta, u) -
             (yXi * x.xiTheta(theta, u) + yEta * x.xiU(theta, u));
    out.eta = xXi * y.etaTheta(theta, u) + xEta * y.etaU(theta, u) -
              (yXi * x.etaTheta(theta, u) + yEta * x.etaU(theta, u));
    return out;
}

ClosureResult closureCheck(const std::vector<ReducedVectorField>& fields,
                           const std::vector<SamplePoint>& samples, double tolerance) {
    const std::size_t nf = fields.size();
    const std::size_t np = samples.size();
    if (np < 3) throw ConstraintError("closure check needs at least 3 sample points");

    // evaluation matrix M[(point, component)][field]
    const std::size_t rows = 2 * np;
    std::vector<std::vector<double>> m(rows, std::vector<double>(nf, 0.0));
    for (std::size_t pIdx = 0; pIdx < np; ++pIdx) {
        for (std::size_t k = 0; k < nf; ++k) {
            m[2 * pIdx][k] = fields[k].xi(samples[pIdx].theta, samples[pIdx].u);
            m[2 * pIdx + 1][k] = fields[k].eta(samples[pIdx].theta, samples[pIdx].u);
        }
    }

    // normal equations; the catalogs are tiny and the samples generic
    std::vector<std::vector<double>> mtm(nf, std::vector<double>(nf, 0.0));
    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = 0; j < nf; ++j) {
            for (std::size_t r = 0; r < rows; ++r) mtm[i][j] += m[r][i] * m[r][j];
        }
    }
    auto solveNormal = [&](const std::vector<double>& b) {
        std::vector<double> rhs(nf, 0.0);
        for (std::size_t i = 0; i < nf; ++i) {
            for (std::size_t r = 0; r < rows; ++r) rhs[i] += m[r][i] * b[r];
        }
        auto a = mtm;
        // Gaussian elimination with partial pivoting
        std::vector<std::size_t> perm(nf);
        for (std::size_t i = 0; i < nf; ++i) perm[i] = i;
        for (std::size_t col = 0; col < nf; ++col) {
            std::size_t pivot = col;
            for (std::size_t r = col + 1; r < nf; ++r) {
                if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
            }
            if (std::abs(a[pivot][col]) < 1e-12) {
                throw ConstraintError(
                    "closure evaluation matrix is rank deficient; add sample points");
            }
            std::swap(a[col], a[pivot]);
            std::swap(rhs[col], rhs[pivot]);
            for (std::size_t r = col + 1; r < nf; ++r) {
                const double f = a[r][col] / a[col][col];
                for (std::size_t c = col; c < nf; ++c) a[r][c] -= f * a[col][c];
                rhs[r] -= f * rhs[col];
            }
        }
        std::vector<double> xSol(nf, 0.0);
        for (std::size_t i = nf; i-- > 0;) {
            double acc = rhs[i];
            for (std::size_t c = i + 1; c < nf; ++c) acc -= a[i][c] * xSol[c];
            xSol[i] = acc / a[i][i];
        }
        return xSol;
    };

    ClosureResult result;
    double worst = 0.0;
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = i + 1; j < nf; ++j) {
            std::vector<double> b(rows, 0.0);
            for (std::size_t pIdx = 0; pIdx < np; ++pIdx) {
                const auto c =
                    commutator(fields[i], fields[j], samples[pIdx].theta, samples[pIdx].u);
                b[2 * pIdx] = c.xi;
                b[2 * pIdx + 1] = c.eta;
            }
            const auto coeff = solveNormal(b);
            double residual = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                double fit = 0.0;
                for (std::size_t k = 0; k < nf; ++k) fit += m[r][k] * coeff[k];
                residual = std::max(residual, std::abs(fit - b[r]));
            }
            worst = std::max(worst, residual);
            result.constants.push_back(coeff);
            nlohmann::ordered_json row;
            row["bracket"] = "[" + fields[i].name() + ", " + fields[j].name() + "]";
            row["constants"] = coeff;
            row["residual"] = residual;
            table.push_back(row);
        }
    }

    claims::ClaimVerdict v;
    v.id = "closure";
    v.description = "least-squares structure constants over the sampled fields";
    v.tolerance = tolerance;
    v.residualMax = worst;
    v.verdict = worst <= tolerance ? claims::Verdict::Pass : claims::Verdict::Fail;
    v.extra = {{"structure_constants", table}, {"sample_count", samples.size()}};
    result.verdict = std::move(v);
    return result;
}

OriginalVectorField::OriginalVectorField(std::string name, bool nonlocal,
                                         std::function<double(const TrajectoryPoint&)> tau,
                                         std::function<double(const TrajectoryPoint&)> rho)
    : name_(std::move(name)), nonlocal_(nonlocal), tau_(std::move(tau)), rho_(std::move(rho)) {}

std::vector<OriginalVectorField> backTransformedGenerators() {
    auto L = [](const TrajectoryPoint& p) { return p.r * p.r * p.thetadot; };
    auto sigmaDot = [](const TrajectoryPoint& p) { return p.thetadot * p.sigmaPrime; };
    auto r2 = [](const TrajectoryPoint& p) { return p.r * p.r; };
    auto r3 = [](const TrajectoryPoint& p) { return p.r * p.r * p.r; };
    auto zero = [](const TrajectoryPoint&) { return 0.0; };

    std::vector<OriginalVectorField> v;
    v.emplace_back("v_1", true, [=](const TrajectoryPoint& p) { return L(p) / r2(p); }, zero);
    v.emplace_back(
        "v_2", true,
        [=](const TrajectoryPoint& p) {
            return p.sigma * p.sigma / r2(p) * L(p) * std::sin(2.0 * p.alpha);
        },
        [=](const TrajectoryPoint& p) {
            return -(p.sigma * sigmaDot(p) * std::sin(2.0 * p.alpha) +
                     std::cos(2.0 * p.alpha)) / r3(p);
        });
    v.emplace_back(
        "v_3", true,
        [=](const TrajectoryPoint& p) {
            return p.sigma * p.sigma / r2(p) * L(p) * std::cos(2.0 * p.alpha);
        },
        [=](const TrajectoryPoint& p) {
            return -(p.sigma * sigmaDot(p) * std::cos(2.0 * p.alpha) -
                     std::sin(2.0 * p.alpha)) / r3(p);
        });
    v.emplace_back("v_4", true, zero, [=](const TrajectoryPoint& p) {
        return -p.sigma / r2(p) * std::cos(p.alpha);
    });
    v.emplace_back("v_5", true, zero, [=](const TrajectoryPoint& p) {
        return -p.sigma / r2(p) * std::sin(p.alpha);
    });
    v.emplace_back(
        "v_6", true,
        [=](const TrajectoryPoint& p) { return p.sigma * p.sigma / r2(p) * L(p); },
        [=](const TrajectoryPoint& p) { return -p.sigma * sigmaDot(p) / r3(p); });
    v.emplace_back("v_7", false, zero,
                   [=](const TrajectoryPoint& p) { return -1.0 / r3(p); });
    v.emplace_back(
        "v_8", true,
        [=](const TrajectoryPoint& p) { return p.sigma / r3(p) * L(p) * std::sin(p.alpha); },
        [=](const TrajectoryPoint& p) {
            return -(sigmaDot(p) * std::sin(p.alpha) + std::cos(p.alpha) / p.sigma) /
                   (r2(p) * r2(p));
        });
    v.emplace_back(
        "v_9", true,
        [=](const TrajectoryPoint& p) { return p.sigma / r3(p) * L(p) * std::cos(p.alpha); },
        [=](const TrajectoryPoint& p) {
            return -(sigmaDot(p) * std::cos(p.alpha) - std::sin(p.alpha) / p.sigma) /
                   (r2(p) * r2(p));
        });
    v.emplace_back("v_10", false, [](const TrajectoryPoint&) { return 1.0; }, zero);
    return v;
}

claims::ClaimVerdict substitutionAudit(const ReducedVectorField* reducedPartner,
                                       const OriginalVectorField& printed,
                                       const std::vector<TrajectoryPoint>& points,
                                       double matchTolerance) {
    claims::ClaimVerdict v;
    v.id = "substitution_" + printed.name();
    v.description = "push-forward conventions compared against " + printed.name();
    v.tolerance = matchTolerance;
    v.verdict = claims::Verdict::ReportOnly;

    if (reducedPartner == nullptr) {
        v.note = "introduced generator; no reduced-chart partner to push forward";
        v.extra = {{"nonlocal", printed.nonlocal()}};
        return v;
    }
    if (points.empty()) throw ConstraintError("substitution audit needs sample points");

    double litTau = 0.0, litRho = 0.0, chainTau = 0.0, chainRho = 0.0;
    double scaleTau = 0.0, scaleRho = 0.0;
    for (const auto& p : points) {
        const double u = 1.0 / p.r;
        const double l = p.r * p.r * p.thetadot;
        const double xi = reducedPartner->xi(p.theta, u);
        const double eta = reducedPartner->eta(p.theta, u);
        const double tauPrinted = printed.tau(p);
        const double rhoPrinted = printed.rho(p);

        const double tauLit = xi * l / (p.r * p.r);
        const double rhoLit = -eta / (p.r * p.r);
        const double tauChain = xi * (p.r * p.r) / l;
        const double rhoChain = -eta * (p.r * p.r);

        litTau = std::max(litTau, std::abs(tauLit - tauPrinted));
        litRho = std::max(litRho, std::abs(rhoLit - rhoPrinted));
        chainTau = std::max(chainTau, std::abs(tauChain - tauPrinted));
        chainRho = std::max(chainRho, std::abs(rhoChain - rhoPrinted));
        scaleTau = std::max(scaleTau, std::abs(tauPrinted));
        scaleRho = std::max(scaleRho, std::abs(rhoPrinted));
    }

    const double litWorst = std::max(litTau, litRho);
    const double chainWorst = std::max(chainTau, chainRho);
    v.residualMax = std::min(litWorst, chainWorst);
    v.extra = {{"literal", {{"tau_max_error", litTau}, {"rho_max_error", litRho}}},
               {"chain_rule", {{"tau_max_error", chainTau}, {"rho_max_error", chainRho}}},
               {"coefficient_scale", {{"tau", scaleTau}, {"rho", scaleRho}}},
               {"matches_literal",
                litWorst <= matchTolerance * (1.0 + std::max(scaleTau, scaleRho))},
               {"matches_chain_rule",
                chainWorst <= matchTolerance * (1.0 + std::max(scaleTau, scaleRho))},
               {"nonlocal", printed.nonlocal()}};
    return v;
}

}  // namespace ermakov::symmetry
