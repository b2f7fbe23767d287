#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ermakov/audit.hpp"

using namespace ermakov;
using audit::AuditConfig;

namespace {

AuditConfig toyConfig() {
    return AuditConfig::fromJson(R"({
        "system": {"class": "toy"},
        "ic": [1, 1, 0.1, -0.1],
        "tspan": [0, 1],
        "tol": 1e-10
    })");
}

const claims::ClaimVerdict& find(const audit::AuditReport& report, const std::string& id) {
    for (const auto& v : report.verdicts) {
        if (v.id == id) return v;
    }
    throw std::runtime_error("claim not in report: " + id);
}

}  // namespace

TEST_SUITE("audit") {

TEST_CASE("default run covers every registered claim once") {
    const auto outcome = audit::runAudit(toyConfig());
    const auto& registry = claims::defaultRegistry();
    REQUIRE(outcome.report.verdicts.size() == registry.size());
    for (std::size_t i = 0; i < registry.size(); ++i) {
        CHECK(outcome.report.verdicts[i].id == registry[i].id);
    }
}

TEST_CASE("toy default verdicts") {
    const auto outcome = audit::runAudit(toyConfig());
    const auto& report = outcome.report;

    CHECK(find(report, "eq2.3").verdict == claims::Verdict::Pass);
    CHECK(find(report, "reduced_full").verdict == claims::Verdict::Pass);
    CHECK(find(report, "reduced_paper").verdict == claims::Verdict::ReportOnly);
    CHECK(find(report, "wronskian_abel").verdict == claims::Verdict::Pass);
    CHECK(find(report, "pinney_residual").verdict == claims::Verdict::Pass);
    CHECK(find(report, "ELI_reduced").verdict == claims::Verdict::Pass);
    CHECK(find(report, "ELI_original_printed").verdict == claims::Verdict::ReportOnly);

    // the profile depends on theta, so the flow claims are recorded only
    for (int i = 2; i <= 9; ++i) {
        const auto& v = find(report, "gamma_" + std::to_string(i));
        CHECK(v.registeredMode == claims::Mode::Assert);
        CHECK(v.effectiveMode == claims::Mode::Report);
        CHECK(v.verdict == claims::Verdict::ReportOnly);
        const bool healthy = v.exactToRoundoff ||
                             (v.orderEstimate.has_value() && *v.orderEstimate >= 1.7);
        CHECK(healthy);
    }
    const auto& g1 = find(report, "gamma_1");
    CHECK(g1.verdict == claims::Verdict::ReportOnly);
    REQUIRE(g1.orderEstimate.has_value());
    CHECK(*g1.orderEstimate > 0.5);
    CHECK(*g1.orderEstimate < 1.5);

    const auto& closure = find(report, "closure_sl2");
    CHECK(closure.effectiveMode == claims::Mode::Report);
    CHECK(*closure.residualMax < 1e-6);

    const auto& s7 = find(report, "substitution_v7");
    CHECK(s7.extra["matches_literal"].get<bool>());

    CHECK_FALSE(report.anyAssertFailed());
}

TEST_CASE("constant-profile run asserts the flow claims") {
    auto cfg = AuditConfig::fromJson(R"({
        "system": {"class": "generalized", "f": "0", "g": "0"},
        "ic": [1, 1, 0.3, -0.2],
        "tspan": [0, 0.8],
        "tol": 1e-10
    })");
    const auto outcome = audit::runAudit(cfg);
    const auto& report = outcome.report;

    CHECK(report.stages["profile"]["constant"].get<bool>());
    CHECK(find(report, "eq2.3").verdict == claims::Verdict::Pass);
    for (int i = 2; i <= 9; ++i) {
        const auto& v = find(report, "gamma_" + std::to_string(i));
        CHECK(v.effectiveMode == claims::Mode::Assert);
        CHECK(v.verdict == claims::Verdict::Pass);
    }
    const auto& closure = find(report, "closure_sl2");
    CHECK(closure.effectiveMode == claims::Mode::Assert);
    CHECK(closure.verdict == claims::Verdict::Pass);

    // with vanishing couplings the momentum is constant, so the shortened
    // and full reduced forms coincide
    const auto& shortened = find(report, "reduced_paper");
    CHECK(shortened.extra["dropped_term_max"].get<double>() < 1e-9);
    CHECK(*shortened.residualMax < 1e-6);

    CHECK_FALSE(report.anyAssertFailed());
}

TEST_CASE("positive angular orientation") {
    auto cfg = AuditConfig::fromJson(R"({
        "system": {"class": "toy"},
        "ic": [1, 1, -0.1, 0.1],
        "tspan": [0, 1],
        "tol": 1e-10
    })");
    const auto outcome = audit::runAudit(cfg);
    CHECK(outcome.report.stages["momentum_law"]["orientation"].get<int>() == 1);
    CHECK(find(outcome.report, "eq2.3").verdict == claims::Verdict::Pass);
    CHECK(find(outcome.report, "reduced_full").verdict == claims::Verdict::Pass);
    CHECK(find(outcome.report, "ELI_reduced").verdict == claims::Verdict::Pass);
    CHECK_FALSE(outcome.report.anyAssertFailed());
}

TEST_CASE("second-quadrant trajectory") {
    // theta0 defaults to the quadrant midpoint 3 pi / 4
    auto cfg = AuditConfig::fromJson(R"({
        "system": {"class": "toy"},
        "ic": [-1, 1, 0.1, 0.1],
        "tspan": [0, 1],
        "tol": 1e-10
    })");
    const auto outcome = audit::runAudit(cfg);
    const double theta0 = outcome.report.stages["momentum_law"]["theta0"].get<double>();
    CHECK(theta0 == doctest::Approx(3.0 * 0.7853981633974483));
    CHECK(find(outcome.report, "eq2.3").verdict == claims::Verdict::Pass);
    CHECK(find(outcome.report, "reduced_full").verdict == claims::Verdict::Pass);
    CHECK(find(outcome.report, "pinney_residual").verdict == claims::Verdict::Pass);
    CHECK_FALSE(outcome.report.anyAssertFailed());
}

TEST_CASE("initial state away from theta0 with an early turning point") {
    // theta starts at 0.588, turns around within 0.1 time units, then sweeps
    // back up; the monotone segment and working interval must cope
    auto cfg = AuditConfig::fromJson(R"({
        "system": {"class": "toy"},
        "ic": [1.2, 0.8, 0.05, -0.12],
        "tspan": [0, 1],
        "tol": 1e-10
    })");
    const auto outcome = audit::runAudit(cfg);
    CHECK(find(outcome.report, "eq2.3").verdict == claims::Verdict::Pass);
    CHECK(find(outcome.report, "reduced_full").verdict == claims::Verdict::Pass);
    CHECK(find(outcome.report, "pinney_residual").verdict == claims::Verdict::Pass);
    CHECK(find(outcome.report, "ELI_reduced").verdict == claims::Verdict::Pass);
    CHECK_FALSE(outcome.report.anyAssertFailed());
}

TEST_CASE("nonzero w fails the pipeline claims with a reason") {
    auto cfg = AuditConfig::fromJson(R"({
        "system": {"class": "toy", "w": "1"},
        "ic": [1, 1, 0.1, -0.1],
        "tspan": [0, 1]
    })");
    const auto outcome = audit::runAudit(cfg);
    const auto& report = outcome.report;
    CHECK(report.anyAssertFailed());
    const auto& v = find(report, "eq2.3");
    CHECK(v.verdict == claims::Verdict::Fail);
    CHECK(v.note.find("w must be identically zero") != std::string::npos);
}

TEST_CASE("identical configurations produce identical canonical reports") {
    const auto first = audit::runAudit(toyConfig());
    const auto second = audit::runAudit(toyConfig());
    CHECK(first.report.toJson(false).dump(2) == second.report.toJson(false).dump(2));
    // the full form differs only in the volatile fields
    auto full = first.report.toJson(true);
    CHECK(full.contains("generated_at"));
    CHECK(full.contains("timing_ms"));
}

TEST_CASE("claim selection") {
    auto cfg = toyConfig();
    cfg.claimIds = {"eq2.3", "pinney_residual"};
    const auto outcome = audit::runAudit(cfg);
    REQUIRE(outcome.report.verdicts.size() == 2);
    CHECK(outcome.report.verdicts[0].id == "eq2.3");
    CHECK(outcome.report.verdicts[1].id == "pinney_residual");

    cfg.claimIds = {"no_such_claim"};
    CHECK_THROWS_AS(audit::runAudit(cfg), ConstraintError);
}

TEST_CASE("configuration validation") {
    auto cfg = toyConfig();
    cfg.ic.y = 0.0;
    CHECK_THROWS_AS(audit::runAudit(cfg), PoleError);

    auto bad = toyConfig();
    bad.t1 = bad.t0;
    CHECK_THROWS_AS(audit::runAudit(bad), ConstraintError);

    CHECK_THROWS_AS(AuditConfig::fromJson("{}"), ConstraintError);
    CHECK_THROWS_AS(AuditConfig::fromJson(R"({"system": {"class": "toy"}, "ic": [1, 2]})"),
                    ConstraintError);
}

TEST_CASE("config may reference the system by path") {
    {
        std::ofstream sys("cfgtest_system.json");
        sys << R"({"class": "toy"})";
    }
    {
        std::ofstream cfg("cfgtest_audit.json");
        cfg << R"({"system": "cfgtest_system.json", "ic": [1, 1, 0.1, -0.1],
                   "tspan": [0, 0.4], "claims": ["eq2.3"]})";
    }
    std::ifstream in("cfgtest_audit.json");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto cfg = AuditConfig::fromJson(buf.str(), ".");
    const auto outcome = audit::runAudit(cfg);
    CHECK(outcome.report.verdicts.size() == 1);
    CHECK(outcome.report.verdicts[0].verdict == claims::Verdict::Pass);
    std::remove("cfgtest_system.json");
    std::remove("cfgtest_audit.json");

    CHECK_THROWS_AS(AuditConfig::fromJson(R"({"system": "missing_file.json"})", "."),
                    ConstraintError);
}

TEST_CASE("registry file round trip") {
    const auto& registry = claims::defaultRegistry();
    const std::string path = "registry_roundtrip_test.json";
    {
        std::ofstream out(path);
        out << claims::registryToJson(registry).dump(2);
    }
    const auto loaded = claims::loadRegistry(path);
    std::remove(path.c_str());
    REQUIRE(loaded.size() == registry.size());
    for (std::size_t i = 0; i < registry.size(); ++i) {
        CHECK(loaded[i].id == registry[i].id);
        CHECK(loaded[i].tolerance == registry[i].tolerance);
        CHECK(loaded[i].mode == registry[i].mode);
    }
}

TEST_CASE("pinney triple from the config reaches the construction") {
    auto cfg = toyConfig();
    cfg.pinneyA = 2.0;
    cfg.pinneyB = 0.0;
    const auto outcome = audit::runAudit(cfg);
    CHECK(outcome.report.stages["pinney"]["A"].get<double>() == 2.0);
    CHECK(outcome.report.stages["pinney"]["C"].get<double>() == doctest::Approx(0.5));
    CHECK(find(outcome.report, "pinney_residual").verdict == claims::Verdict::Pass);

    // an inconsistent explicit triple fails the sigma stage and the
    // dependent claims, never the call itself
    auto bad = toyConfig();
    bad.pinneyC = 3.0;
    const auto broken = audit::runAudit(bad);
    CHECK(find(broken.report, "pinney_residual").verdict == claims::Verdict::Fail);
    CHECK(find(broken.report, "eq2.3").verdict == claims::Verdict::Pass);
}

TEST_CASE("thread cap does not change the verdicts") {
    setenv("ERMAKOV_AUDIT_THREADS", "1", 1);
    const auto serial = audit::runAudit(toyConfig());
    setenv("ERMAKOV_AUDIT_THREADS", "8", 1);
    const auto parallel = audit::runAudit(toyConfig());
    unsetenv("ERMAKOV_AUDIT_THREADS");
    CHECK(serial.report.toJson(false).dump() == parallel.report.toJson(false).dump());
}

}  // TEST_SUITE
