#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ermakov/audit.hpp"

namespace {

namespace fs = std::filesystem;
using ermakov::audit::AuditConfig;
using ermakov::audit::AuditOutcome;
using ermakov::audit::formatDouble;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitClaimFailed = 2;
constexpr int kExitInternal = 3;

struct Options {
    std::string configPath;
    std::string systemPath;
    std::string icText;
    std::string tspanText;
    std::string tolText;
    std::string theta0Text;
    std::string pinneyText;
    std::string claimsText;
    std::string registryPath;
    std::string seedText;
    std::string outPath;
    std::string csvDir;
};

void addCommonFlags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.configPath, "audit configuration file (JSON)");
    cmd->add_option("--system", opt.systemPath, "system definition file (JSON)");
    cmd->add_option("--ic", opt.icText, "initial condition x,y,vx,vy");
    cmd->add_option("--tspan", opt.tspanText, "integration span a,b");
    cmd->add_option("--tol", opt.tolText, "integrator tolerance (default 1e-10)");
    cmd->add_option("--theta0", opt.theta0Text,
                    "reference angle (default: midpoint of the quadrant)");
    cmd->add_option("--pinney", opt.pinneyText, "triple A,B,C with C = auto allowed, or auto");
    cmd->add_option("--claims", opt.claimsText, "comma separated claim ids, or all");
    cmd->add_option("--registry", opt.registryPath, "claim registry file (JSON)");
    cmd->add_option("--seed", opt.seedText, "sample-point seed (default 42)");
    cmd->add_option("--out", opt.outPath, "write the report JSON here");
    cmd->add_option("--csv", opt.csvDir, "directory for CSV exports");
}

std::vector<double> parseNumberList(const std::string& text, std::size_t expected,
                                    const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(ermakov::expr::parseReal(item));
    }
    if (out.size() != expected) {
        throw ermakov::ConstraintError(what + " needs " + std::to_string(expected) +
                                       " comma separated numbers, got '" + text + "'");
    }
    return out;
}

std::vector<std::string> splitIds(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

AuditConfig buildConfig(const Options& opt) {
    AuditConfig cfg;
    if (!opt.configPath.empty()) {
        std::ifstream in(opt.configPath);
        if (!in) {
            throw ermakov::ConstraintError("cannot open config file '" + opt.configPath + "'");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        cfg = AuditConfig::fromJson(buf.str(),
                                    fs::path(opt.configPath).parent_path().string());
    }
    if (!opt.systemPath.empty()) {
        cfg.system = ermakov::systems::ErmakovSystem::fromJsonFile(opt.systemPath);
    }
    if (!opt.icText.empty()) {
        const auto v = parseNumberList(opt.icText, 4, "--ic");
        cfg.ic = {cfg.t0, v[0], v[1], v[2], v[3]};
    }
    if (!opt.tspanText.empty()) {
        const auto v = parseNumberList(opt.tspanText, 2, "--tspan");
        cfg.t0 = v[0];
        cfg.t1 = v[1];
        cfg.ic.t = cfg.t0;
    }
    if (!opt.tolText.empty()) cfg.tolerance = ermakov::expr::parseReal(opt.tolText);
    if (!opt.theta0Text.empty()) cfg.theta0 = ermakov::expr::parseReal(opt.theta0Text);
    if (!opt.pinneyText.empty() && opt.pinneyText != "auto") {
        std::stringstream ss(opt.pinneyText);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
            !std::getline(ss, c, ',')) {
            throw ermakov::ConstraintError("--pinney needs A,B,C (C may be auto) or auto");
        }
        cfg.pinneyA = ermakov::expr::parseReal(a);
        cfg.pinneyB = ermakov::expr::parseReal(b);
        if (c == "auto") {
            cfg.pinneyC.reset();
        } else {
            cfg.pinneyC = ermakov::expr::parseReal(c);
        }
    }
    if (!opt.registryPath.empty()) {
        cfg.registry = ermakov::claims::loadRegistry(opt.registryPath);
    }
    if (!opt.claimsText.empty() && opt.claimsText != "all") {
        cfg.claimIds = splitIds(opt.claimsText);
    }
    if (!opt.seedText.empty()) {
        cfg.seed = static_cast<unsigned long long>(ermakov::expr::parseReal(opt.seedText));
    }
    return cfg;
}

void writeFile(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ermakov::ConstraintError("cannot write '" + path + "'");
    out << content;
}

void writeTrajectoryCsv(const fs::path& dir, const ermakov::dynamics::Trajectory& traj) {
    std::ostringstream os;
    os << "t,x,y,vx,vy\n";
    for (std::size_t i = 0; i < traj.sampleCount(); ++i) {
        os << formatDouble(traj.times()[i]);
        for (double v : traj.states()[i]) os << ',' << formatDouble(v);
        os << '\n';
    }
    writeFile((dir / "trajectory.csv").string(), os.str());
}

void writeReductionCsv(const fs::path& dir,
                       const std::vector<ermakov::reduction::ReductionGridRow>& rows) {
    std::ostringstream os;
    os << "theta,momentum_residual,full_residual,shortened_residual,dropped_term\n";
    for (const auto& row : rows) {
        os << formatDouble(row.theta) << ',' << formatDouble(row.momentumResidual) << ','
           << formatDouble(row.fullResidual) << ',' << formatDouble(row.shortenedResidual)
           << ',' << formatDouble(row.droppedTerm) << '\n';
    }
    writeFile((dir / "reduction_grid.csv").string(), os.str());
}

void writeSigmaCsv(const fs::path& dir, const ermakov::audit::AuditArtifacts& artifacts) {
    if (!artifacts.sigma || !artifacts.phase) return;
    const auto& ps = *artifacts.sigma;
    const auto& ph = *artifacts.phase;
    const auto iv = ps.interval();
    std::ostringstream os;
    os << "theta,sigma,sigma_prime,alpha\n";
    for (int i = 0; i < 201; ++i) {
        const double theta = iv.lo + iv.width() * i / 200.0;
        os << formatDouble(theta) << ',' << formatDouble(ps.sigma(theta)) << ','
           << formatDouble(ps.sigmaPrime(theta)) << ',' << formatDouble(ph.alpha(theta))
           << '\n';
    }
    writeFile((dir / "sigma.csv").string(), os.str());
}

int finishRun(const AuditOutcome& outcome, const Options& opt) {
    if (!opt.outPath.empty()) {
        writeFile(opt.outPath, outcome.report.toJson(true).dump(2) + "\n");
    }
    if (!opt.csvDir.empty()) {
        fs::create_directories(opt.csvDir);
        const fs::path dir(opt.csvDir);
        if (outcome.artifacts.trajectory) writeTrajectoryCsv(dir, *outcome.artifacts.trajectory);
        if (!outcome.artifacts.reductionRows.empty()) {
            writeReductionCsv(dir, outcome.artifacts.reductionRows);
        }
        writeSigmaCsv(dir, outcome.artifacts);
    }
    std::cout << outcome.report.humanTable();
    return outcome.report.anyAssertFailed() ? kExitClaimFailed : kExitOk;
}

int runWithClaims(Options& opt, const std::vector<std::string>& defaultIds) {
    auto cfg = buildConfig(opt);
    if (cfg.claimIds.empty() && !defaultIds.empty()) cfg.claimIds = defaultIds;
    const auto outcome = ermakov::audit::runAudit(cfg);
    return finishRun(outcome, opt);
}

int cmdSimulate(Options& opt) {
    const auto cfg = buildConfig(opt);
    cfg.validate();
    const auto& s = cfg.system;
    auto rhs = [&s](double t, std::span<const double> y, std::span<double> dy) {
        const auto a = ermakov::systems::cartesianRhs(s, {t, y[0], y[1], y[2], y[3]});
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = a.ax;
        dy[3] = a.ay;
    };
    const std::array<double, 4> y0{cfg.ic.x, cfg.ic.y, cfg.ic.vx, cfg.ic.vy};
    ermakov::dynamics::IntegrateOptions iopt;
    iopt.tolerance = cfg.tolerance;
    const auto traj = ermakov::dynamics::integrate(rhs, y0, cfg.t0, cfg.t1, iopt);

    if (!opt.csvDir.empty()) {
        fs::create_directories(opt.csvDir);
        writeTrajectoryCsv(fs::path(opt.csvDir), traj);
    }
    const auto end = traj.evaluate(cfg.t1);
    std::cout << "steps accepted " << traj.stats().accepted << ", rejected "
              << traj.stats().rejected << "\n";
    std::cout << "final state t=" << formatDouble(cfg.t1) << " x=" << formatDouble(end[0])
              << " y=" << formatDouble(end[1]) << " vx=" << formatDouble(end[2])
              << " vy=" << formatDouble(end[3]) << "\n";
    return kExitOk;
}

int cmdClaims(Options& opt, bool list) {
    const auto registry = opt.registryPath.empty()
                              ? ermakov::claims::defaultRegistry()
                              : ermakov::claims::loadRegistry(opt.registryPath);
    if (!opt.outPath.empty()) {
        writeFile(opt.outPath, ermakov::claims::registryToJson(registry).dump(2) + "\n");
    }
    if (list || opt.outPath.empty()) {
        for (const auto& e : registry) {
            std::ostringstream line;
            line << e.id;
            for (std::size_t i = line.str().size(); i < 26; ++i) line << ' ';
            line << ermakov::claims::modeName(e.mode) << "  tol " << formatDouble(e.tolerance)
                 << "  " << e.description;
            std::cout << line.str() << "\n";
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"claim auditor for three classes of Ermakov dynamical systems"};
    app.require_subcommand(1);

    Options opt;
    bool listClaims = false;

    auto* simulate = app.add_subcommand("simulate", "integrate a system in the plane");
    addCommonFlags(simulate, opt);

    auto* reduce = app.add_subcommand(
        "reduce", "audit the momentum law and the reduced oscillator along a trajectory");
    addCommonFlags(reduce, opt);

    auto* pinneyCmd = app.add_subcommand(
        "pinney", "construct sigma on the trajectory's frequency profile and audit it");
    addCommonFlags(pinneyCmd, opt);

    auto* symmetries = app.add_subcommand(
        "symmetries", "flow-test the generator catalogs and audit the substitution rules");
    addCommonFlags(symmetries, opt);

    auto* auditCmd = app.add_subcommand("audit", "run every registered claim");
    addCommonFlags(auditCmd, opt);

    auto* claimsCmd = app.add_subcommand("claims", "inspect the claim registry");
    claimsCmd->add_flag("--list", listClaims, "print the registry");
    claimsCmd->add_option("--registry", opt.registryPath, "claim registry file (JSON)");
    claimsCmd->add_option("--out", opt.outPath, "write the registry JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmdSimulate(opt);
        if (reduce->parsed()) {
            return runWithClaims(opt, {"eq2.3", "reduced_full", "reduced_paper"});
        }
        if (pinneyCmd->parsed()) {
            return runWithClaims(opt, {"wronskian_abel", "pinney_residual", "ELI_reduced",
                                       "ELI_original_printed"});
        }
        if (symmetries->parsed()) {
            std::vector<std::string> ids;
            for (int i = 1; i <= 9; ++i) ids.push_back("gamma_" + std::to_string(i));
            ids.push_back("closure_sl2");
            for (int i = 1; i <= 10; ++i) ids.push_back("substitution_v" + std::to_string(i));
            return runWithClaims(opt, ids);
        }
        if (auditCmd->parsed()) return runWithClaims(opt, {});
        if (claimsCmd->parsed()) return cmdClaims(opt, listClaims);
    } catch (const ermakov::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
