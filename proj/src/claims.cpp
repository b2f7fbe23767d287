#include "ermakov/claims.hpp"

#include <fstream>

#include "ermakov/errors.hpp"

namespace ermakov::claims {

std::string modeName(Mode m) { return m == Mode::Assert ? "assert" : "report"; }

Mode modeFromName(const std::string& name) {
    if (name == "assert") return Mode::Assert;
    if (name == "report") return Mode::Report;
    throw ConstraintError("unknown claim mode '" + name + "'");
}

std::string verdictName(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::ReportOnly: return "REPORT_ONLY";
    }
    return "?";
}

nlohmann::ordered_json ClaimVerdict::toJson() const {
    nlohmann::ordered_json j;
    j["claim"] = id;
    j["description"] = description;
    j["mode"] = modeName(registeredMode);
    if (effectiveMode != registeredMode) {
        j["effective_mode"] = modeName(effectiveMode);
    }
    j["verdict"] = verdictName(verdict);
    j["tolerance"] = tolerance;
    if (grid) {
        j["grid"] = {{"theta_min", grid->thetaMin}, {"theta_max", grid->thetaMax},
                     {"n", grid->n}};
    }
    if (residualMax) j["residual_max"] = *residualMax;
    if (residualL2) j["residual_l2"] = *residualL2;
    if (orderEstimate) j["order_estimate"] = *orderEstimate;
    if (exactToRoundoff) j["exact_to_roundoff"] = true;
    if (!note.empty()) j["note"] = note;
    if (!extra.is_null()) j["detail"] = extra;
    return j;
}

const std::vector<RegistryEntry>& defaultRegistry() {
    static const std::vector<RegistryEntry> kRegistry = [] {
        std::vector<RegistryEntry> r;
        r.push_back({"eq2.3",
                     "angular momentum law: r^4 theta'^2 = L0 + mu(theta) along the trajectory",
                     1e-7, Mode::Assert});
        r.push_back({"reduced_full",
                     "full chain-rule reduced equation u'' + (L'/L)u' + omega^2 u = 0 along the "
                     "trajectory",
                     1e-6, Mode::Assert});
        r.push_back({"reduced_paper",
                     "shortened reduced equation u'' + omega^2 u = 0; residual compared against "
                     "the dropped term |(L'/L)u'|",
                     1e-6, Mode::Report});
        r.push_back({"pinney_residual",
                     "constructed sigma satisfies sigma'' + omega^2 sigma = sigma^-3",
                     1e-7, Mode::Assert});
        r.push_back({"wronskian_abel",
                     "Wronskian of the fundamental oscillator pair is constant",
                     1e-9, Mode::Assert});
        r.push_back({"ELI_reduced",
                     "invariant (u^2/sigma^2 + (sigma u' - sigma' u)^2)/2 conserved along the "
                     "reduced oscillator",
                     1e-8, Mode::Assert});
        r.push_back({"ELI_original_printed",
                     "original-variable invariant, displayed form versus pull-back of the "
                     "reduced form",
                     1e-6, Mode::Report});
        for (int i = 1; i <= 9; ++i) {
            r.push_back({"gamma_" + std::to_string(i),
                         "first-order flow test of generator gamma_" + std::to_string(i),
                         1e-4, i == 1 ? Mode::Report : Mode::Assert});
        }
        r.push_back({"closure_sl2",
                     "structure constants of {gamma_2, gamma_3, gamma_6} close under the "
                     "commutator",
                     1e-6, Mode::Assert});
        for (int i = 1; i <= 10; ++i) {
            r.push_back({"substitution_v" + std::to_string(i),
                         "coefficients of v_" + std::to_string(i) +
                             " compared against both substitution conventions",
                         1e-12, Mode::Report});
        }
        return r;
    }();
    return kRegistry;
}

std::vector<RegistryEntry> loadRegistry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConstraintError("cannot open claim registry '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConstraintError(std::string("claim registry is not valid JSON: ") + e.what());
    }
    if (!j.is_array()) throw ConstraintError("claim registry must be a JSON array");
    std::vector<RegistryEntry> out;
    for (const auto& item : j) {
        RegistryEntry e;
        e.id = item.at("id").get<std::string>();
        e.description = item.value("description", std::string{});
        e.tolerance = item.at("tolerance").get<double>();
        e.mode = modeFromName(item.at("mode").get<std::string>());
        out.push_back(std::move(e));
    }
    return out;
}

nlohmann::ordered_json registryToJson(const std::vector<RegistryEntry>& entries) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        arr.push_back({{"id", e.id},
                       {"description", e.description},
                       {"tolerance", e.tolerance},
                       {"mode", modeName(e.mode)}});
    }
    return arr;
}

std::vector<RegistryEntry> selectClaims(const std::vector<RegistryEntry>& registry,
                                        const std::vector<std::string>& ids) {
    for (const auto& id : ids) {
        bool known = false;
        for (const auto& e : registry) {
            if (e.id == id) {
                known = true;
                break;
            }
        }
        if (!known) throw ConstraintError("unknown claim id '" + id + "'");
    }
    std::vector<RegistryEntry> out;
    for (const auto& e : registry) {
        for (const auto& id : ids) {
            if (e.id == id) {
                out.push_back(e);
                break;
            }
        }
    }
    return out;
}

}  // namespace ermakov::claims
