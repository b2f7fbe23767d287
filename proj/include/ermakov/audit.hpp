#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ermakov/claims.hpp"
#include "ermakov/pinney.hpp"
#include "ermakov/reduction.hpp"
#include "ermakov/symmetry.hpp"
#include "ermakov/systems.hpp"

namespace ermakov::audit {

inline constexpr const char* kVersion = "0.1.0";

/// Everything one audit run needs. Flags override file values at the CLI
/// layer; this struct is the merged result.
struct AuditConfig {
    systems::ErmakovSystem system;
    systems::CartesianState ic;
    double t0 = 0.0;
    double t1 = 1.0;
    double tolerance = 1e-10;
    std::optional<double> theta0;  // default: midpoint of the trajectory's quadrant
    double pinneyA = 1.0;
    double pinneyB = 0.0;
    std::optional<double> pinneyC;  // unset: derived from the constraint ("auto")
    std::vector<std::string> claimIds;  // empty: every registered claim
    std::vector<claims::RegistryEntry> registry = claims::defaultRegistry();
    unsigned long long seed = 42;

    /// Parse the config document. `system` may be an inline object or a path
    /// to a definition file (resolved relative to `baseDir` when given).
    static AuditConfig fromJson(const std::string& jsonText, const std::string& baseDir = "");
    nlohmann::ordered_json echo() const;
    void validate() const;
};

struct AuditReport {
    std::string version = kVersion;
    std::string generatedAt;
    unsigned long long seed = 42;
    nlohmann::ordered_json configEcho;
    nlohmann::ordered_json stages;
    std::vector<claims::ClaimVerdict> verdicts;
    std::vector<double> timingMs;  // parallel to verdicts

    /// Full report includes the volatile fields (generated_at, timing);
    /// the canonical form drops them and is byte-stable across identical runs.
    nlohmann::ordered_json toJson(bool includeTiming = true) const;
    std::string humanTable() const;
    bool anyAssertFailed() const;
};

/// Stage artifacts kept alive for exports and follow-up queries.
struct AuditArtifacts {
    std::shared_ptr<const dynamics::Trajectory> trajectory;
    std::vector<reduction::ReductionGridRow> reductionRows;
    std::optional<reduction::Interval> workingInterval;
    std::optional<pinney::PinneySolution> sigma;
    std::optional<pinney::Phase> phase;
};

struct AuditOutcome {
    AuditReport report;
    AuditArtifacts artifacts;
};

/// Run every selected claim. Stage errors turn into FAIL verdicts with an
/// upstream-failure note on the dependent claims; the call itself only
/// throws on an invalid configuration.
AuditOutcome runAudit(const AuditConfig& cfg);

/// Claim fan-out width: ERMAKOV_AUDIT_THREADS when set, otherwise the
/// machine parallelism.
unsigned auditThreadCount();

/// Write a floating point value with 17 significant digits (the CSV and
/// report number format).
std::string formatDouble(double v);

}  // namespace ermakov::audit
