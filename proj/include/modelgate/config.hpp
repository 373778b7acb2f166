#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "modelgate/categories.hpp"
#include "modelgate/drift.hpp"
#include "modelgate/metrics.hpp"

namespace modelgate {

// Which published rule set drives condition generation. SEPSIS_STYLE runs
// the full four-category gate; SEGMENTATION_STYLE uses the reduced
// reject/approve rules with the field-decline alarm, folding what would be
// review outcomes into REJECT.
enum class RuleProfile { SEPSIS_STYLE, SEGMENTATION_STYLE };

struct BufferBound {
    double min = 0.0;
    std::optional<double> max; // optional upper edge of the acceptance range
};

// Full governance parameterization, loaded from a JSON profile. Per-metric
// maps are keyed by metric name as understood by metrics::metric_value.
struct GovernanceConfig {
    std::string name;
    RuleProfile rule_profile = RuleProfile::SEPSIS_STYLE;

    double alpha = 0.05;            // CI level for bootstrap tests
    int bootstrap_replicates = 500; // default B
    double delta_ci = 0.02;         // non-inferiority margin
    double operating_threshold = 0.5;
    std::optional<double> target_sensitivity; // when set, threshold is re-picked

    std::map<std::string, double> p_fail;        // hard floors (REJECT)
    std::map<std::string, double> p_pms;          // surveillance floors; empty = p_fail
    std::map<std::string, BufferBound> buffer_zone; // review ranges (CLINICAL_REVIEW)
    std::map<std::string, double> ref_tolerance;  // fixed-reference regression margins
    std::map<std::string, double> tau;            // field regression margins (A2)
    std::map<std::string, double> fixed_reference; // pre-seeded reference values, optional
    std::vector<std::string> alarm_metrics{"sensitivity"};

    double drift_alpha = 0.05;
    drift::DriftBands drift_bands;
    std::optional<std::vector<std::size_t>> monitored_features; // absent = all columns

    std::optional<double> tai_threshold; // absent = trust check disabled

    metrics::MlcpsWeights mlcps_weights;
    std::set<Category> active_categories{Category::REJECT, Category::CLINICAL_REVIEW,
                                         Category::CONDITIONAL_APPROVAL, Category::APPROVE};

    // Hazard-analysis ids per threshold key; unlisted keys get tagged
    // "illustrative" at load time with a warning.
    std::map<std::string, std::string> hazard_trace;
    std::vector<std::string> warnings;

    std::string config_hash; // SHA-256 of the canonical JSON form

    const std::map<std::string, double>& effective_pms_floors() const {
        return p_pms.empty() ? p_fail : p_pms;
    }
    bool category_active(Category c) const { return active_categories.count(c) > 0; }
};

GovernanceConfig parse_config(const nlohmann::json& doc);
GovernanceConfig load_config(const std::string& path);
nlohmann::json config_to_json(const GovernanceConfig& cfg);

const char* rule_profile_name(RuleProfile p);

} // namespace modelgate
