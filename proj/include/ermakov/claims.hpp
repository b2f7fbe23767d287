#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ermakov::claims {

enum class Mode { Assert, Report };
enum class Verdict { Pass, Fail, ReportOnly };

std::string modeName(Mode m);
Mode modeFromName(const std::string& name);
std::string verdictName(Verdict v);

/// Uniform residual grid used by an audit.
struct GridInfo {
    double thetaMin = 0.0;
    double thetaMax = 0.0;
    int n = 0;
};

/// Outcome of one audited claim.
struct ClaimVerdict {
    std::string id;
    std::string description;
    Mode registeredMode = Mode::Assert;
    Mode effectiveMode = Mode::Assert;  // assert claims may be downgraded at run time
    Verdict verdict = Verdict::ReportOnly;
    double tolerance = 0.0;
    std::optional<GridInfo> grid;
    std::optional<double> residualMax;
    std::optional<double> residualL2;
    std::optional<double> orderEstimate;  // flow tests only
    bool exactToRoundoff = false;         // flow tests whose residual sits at the noise floor
    std::string note;
    nlohmann::ordered_json extra;  // claim-specific payload (tables, constants)

    nlohmann::ordered_json toJson() const;
};

struct RegistryEntry {
    std::string id;
    std::string description;
    double tolerance = 0.0;
    Mode mode = Mode::Assert;
};

/// The registry shipped with the tool, in report order.
const std::vector<RegistryEntry>& defaultRegistry();

/// Load a registry file: an ordered JSON array of
/// {"id", "description", "tolerance", "mode": "assert"|"report"}.
std::vector<RegistryEntry> loadRegistry(const std::string& path);

nlohmann::ordered_json registryToJson(const std::vector<RegistryEntry>& entries);

/// Keep only the named claims (order preserved); unknown names throw.
std::vector<RegistryEntry> selectClaims(const std::vector<RegistryEntry>& registry,
                                        const std::vector<std::string>& ids);

}  // namespace ermakov::claims
