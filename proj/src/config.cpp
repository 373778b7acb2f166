#include "modelgate/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "modelgate/hashing.hpp"

namespace modelgate {

using nlohmann::json;

namespace {

double checked_unit(const json& v, const std::string& key) {
    if (!v.is_number()) raise(ErrorKind::ConfigError, key + " must be a number");
    double d = v.get<double>();
    if (!(d >= 0.0 && d <= 1.0)) raise(ErrorKind::ConfigError, key + " outside [0,1]");
    return d;
}

std::map<std::string, double> metric_map(const json& doc, const std::string& key) {
    std::map<std::string, double> out;
    if (!doc.contains(key) || doc[key].is_null()) return out;
    if (!doc[key].is_object()) raise(ErrorKind::ConfigError, key + " must be an object");
    for (const auto& [metric, value] : doc[key].items()) {
        out[metric] = checked_unit(value, key + "." + metric);
    }
    return out;
}

} // namespace

const char* rule_profile_name(RuleProfile p) {
    return p == RuleProfile::SEPSIS_STYLE ? "SEPSIS_STYLE" : "SEGMENTATION_STYLE";
}

GovernanceConfig parse_config(const json& doc) {
    if (!doc.is_object()) raise(ErrorKind::ConfigError, "config root must be an object");

    // A misspelled key would silently fall back to its default and weaken
    // the gate without a trace, so anything unrecognized is an error.
    static const std::set<std::string> known_keys = {
        "name",           "rule_profile",     "alpha",
        "bootstrap_replicates", "delta_ci",   "operating_threshold",
        "target_sensitivity", "p_fail",       "p_pms",
        "ref_tolerance",  "tau",              "fixed_reference",
        "buffer_zone",    "alarm_metrics",    "drift",
        "tai_threshold",  "mlcps_weights",    "active_categories",
        "hazard_trace",
    };
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!known_keys.count(key)) {
            raise(ErrorKind::ConfigError, "unknown config key '" + key + "'");
        }
    }

    GovernanceConfig cfg;
    cfg.name = doc.value("name", "unnamed");

    {
        std::string profile = doc.value("rule_profile", "SEPSIS_STYLE");
        if (profile == "SEPSIS_STYLE") {
            cfg.rule_profile = RuleProfile::SEPSIS_STYLE;
        } else if (profile == "SEGMENTATION_STYLE") {
            cfg.rule_profile = RuleProfile::SEGMENTATION_STYLE;
        } else {
            raise(ErrorKind::ConfigError, "unknown rule_profile: " + profile);
        }
    }

    if (doc.contains("alpha")) {
        cfg.alpha = doc["alpha"].get<double>();
        if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
            raise(ErrorKind::ConfigError, "alpha outside (0,1)");
        }
    }
    if (doc.contains("bootstrap_replicates")) {
        cfg.bootstrap_replicates = doc["bootstrap_replicates"].get<int>();
        if (cfg.bootstrap_replicates < 1) {
            raise(ErrorKind::ConfigError, "bootstrap_replicates must be positive");
        }
    }
    if (doc.contains("delta_ci")) cfg.delta_ci = checked_unit(doc["delta_ci"], "delta_ci");
    if (doc.contains("operating_threshold")) {
        cfg.operating_threshold = checked_unit(doc["operating_threshold"], "operating_threshold");
    }
    if (doc.contains("target_sensitivity") && !doc["target_sensitivity"].is_null()) {
        cfg.target_sensitivity = checked_unit(doc["target_sensitivity"], "target_sensitivity");
    }

    cfg.p_fail = metric_map(doc, "p_fail");
    cfg.p_pms = metric_map(doc, "p_pms");
    cfg.ref_tolerance = metric_map(doc, "ref_tolerance");
    cfg.tau = metric_map(doc, "tau");
    cfg.fixed_reference = metric_map(doc, "fixed_reference");

    if (doc.contains("buffer_zone") && !doc["buffer_zone"].is_null()) {
        for (const auto& [metric, bound] : doc["buffer_zone"].items()) {
            BufferBound b;
            if (bound.is_number()) {
                b.min = checked_unit(bound, "buffer_zone." + metric);
            } else if (bound.is_object()) {
                b.min = checked_unit(bound.at("min"), "buffer_zone." + metric + ".min");
                if (bound.contains("max") && !bound["max"].is_null()) {
                    b.max = checked_unit(bound["max"], "buffer_zone." + metric + ".max");
                    if (*b.max < b.min) {
                        raise(ErrorKind::ConfigError, "buffer_zone." + metric + ": max < min");
                    }
                }
            } else {
                raise(ErrorKind::ConfigError, "buffer_zone." + metric + " must be number or object");
            }
            cfg.buffer_zone[metric] = b;
        }
    }

    if (doc.contains("alarm_metrics")) {
        cfg.alarm_metrics.clear();
        for (const auto& m : doc["alarm_metrics"]) {
            cfg.alarm_metrics.push_back(m.get<std::string>());
        }
        if (cfg.alarm_metrics.empty()) {
            raise(ErrorKind::ConfigError, "alarm_metrics must not be empty");
        }
    }

    if (doc.contains("drift")) {
        const auto& d = doc["drift"];
        if (!d.is_object()) raise(ErrorKind::ConfigError, "drift must be an object");
        for (const auto& [key, value] : d.items()) {
            (void)value;
            if (key != "alpha" && key != "minor" && key != "major" &&
                key != "monitored_features") {
                raise(ErrorKind::ConfigError, "unknown drift key '" + key + "'");
            }
        }
        if (d.contains("alpha")) {
            cfg.drift_alpha = d["alpha"].get<double>();
            if (!(cfg.drift_alpha > 0.0 && cfg.drift_alpha < 1.0)) {
                raise(ErrorKind::ConfigError, "drift.alpha outside (0,1)");
            }
        }
        if (d.contains("minor")) {
            const auto& minor = d["minor"];
            if (!minor.is_array() || minor.size() != 2) {
                raise(ErrorKind::ConfigError, "drift.minor must be [lo, hi]");
            }
            cfg.drift_bands.minor_lo = checked_unit(minor[0], "drift.minor[0]");
            cfg.drift_bands.minor_hi = checked_unit(minor[1], "drift.minor[1]");
            if (cfg.drift_bands.minor_lo > cfg.drift_bands.minor_hi) {
                raise(ErrorKind::ConfigError, "drift.minor: lo > hi");
            }
        }
        if (d.contains("major")) {
            cfg.drift_bands.major = checked_unit(d["major"], "drift.major");
        }
        if (d.contains("monitored_features") && !d["monitored_features"].is_null()) {
            std::vector<std::size_t> cols;
            for (const auto& c : d["monitored_features"]) {
                long long v = c.get<long long>();
                if (v < 0) raise(ErrorKind::ConfigError, "drift.monitored_features: negative index");
                cols.push_back(static_cast<std::size_t>(v));
            }
            cfg.monitored_features = std::move(cols);
        }
    }

    if (doc.contains("tai_threshold") && !doc["tai_threshold"].is_null()) {
        cfg.tai_threshold = checked_unit(doc["tai_threshold"], "tai_threshold");
    }

    if (doc.contains("mlcps_weights") && !doc["mlcps_weights"].is_null()) {
        const auto& w = doc["mlcps_weights"];
        if (!w.is_array()) raise(ErrorKind::ConfigError, "mlcps_weights must be an array");
        for (const auto& axis : w) {
            if (!axis.is_array() || axis.size() != 2) {
                raise(ErrorKind::ConfigError, "mlcps_weights entries must be [name, weight]");
            }
            double weight = axis[1].get<double>();
            if (!(weight > 0.0)) raise(ErrorKind::ConfigError, "mlcps weight must be positive");
            cfg.mlcps_weights.axes.emplace_back(axis[0].get<std::string>(), weight);
        }
        if (!cfg.mlcps_weights.axes.empty() && cfg.mlcps_weights.axes.size() < 3) {
            raise(ErrorKind::ConfigError, "mlcps_weights needs at least 3 axes");
        }
    }

    if (doc.contains("active_categories")) {
        cfg.active_categories.clear();
        for (const auto& c : doc["active_categories"]) {
            cfg.active_categories.insert(category_from_name(c.get<std::string>()));
        }
    }
    if (!cfg.category_active(Category::REJECT) || !cfg.category_active(Category::APPROVE)) {
        raise(ErrorKind::ConfigError, "REJECT and APPROVE must stay active");
    }

    if (doc.contains("hazard_trace") && doc["hazard_trace"].is_object()) {
        for (const auto& [key, id] : doc["hazard_trace"].items()) {
            cfg.hazard_trace[key] = id.get<std::string>();
        }
    }

    // Every threshold key must carry a hazard-analysis id; fill the gaps
    // with an explicit "illustrative" tag and warn.
    auto ensure_hazard = [&cfg](const std::string& key) {
        if (!cfg.hazard_trace.count(key)) {
            cfg.hazard_trace[key] = "illustrative";
            cfg.warnings.push_back("threshold " + key +
                                   " has no hazard_trace entry; tagged illustrative");
        }
    };
    for (const auto& [m, v] : cfg.p_fail) { (void)v; ensure_hazard("p_fail." + m); }
    for (const auto& [m, v] : cfg.p_pms) { (void)v; ensure_hazard("p_pms." + m); }
    for (const auto& [m, v] : cfg.buffer_zone) { (void)v; ensure_hazard("buffer_zone." + m); }
    for (const auto& [m, v] : cfg.ref_tolerance) { (void)v; ensure_hazard("ref_tolerance." + m); }
    for (const auto& [m, v] : cfg.tau) { (void)v; ensure_hazard("tau." + m); }
    ensure_hazard("drift.minor");
    ensure_hazard("drift.major");
    if (cfg.tai_threshold) ensure_hazard("tai_threshold");
    ensure_hazard("delta_ci");

    cfg.config_hash = sha256_hex(doc.dump());
    return cfg;
}

GovernanceConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ConfigError, "cannot open config: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        raise(ErrorKind::ConfigError, "config parse error in " + path + ": " + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const GovernanceConfig& cfg) {
    json doc;
    doc["name"] = cfg.name;
    doc["rule_profile"] = rule_profile_name(cfg.rule_profile);
    doc["alpha"] = cfg.alpha;
    doc["bootstrap_replicates"] = cfg.bootstrap_replicates;
    doc["delta_ci"] = cfg.delta_ci;
    doc["operating_threshold"] = cfg.operating_threshold;
    if (cfg.target_sensitivity) doc["target_sensitivity"] = *cfg.target_sensitivity;
    doc["p_fail"] = cfg.p_fail;
    if (!cfg.p_pms.empty()) doc["p_pms"] = cfg.p_pms;
    if (!cfg.ref_tolerance.empty()) doc["ref_tolerance"] = cfg.ref_tolerance;
    if (!cfg.tau.empty()) doc["tau"] = cfg.tau;
    if (!cfg.fixed_reference.empty()) doc["fixed_reference"] = cfg.fixed_reference;
    json buffer = json::object();
    for (const auto& [m, b] : cfg.buffer_zone) {
        json entry;
        entry["min"] = b.min;
        if (b.max) entry["max"] = *b.max;
        buffer[m] = entry;
    }
    doc["buffer_zone"] = buffer;
    doc["alarm_metrics"] = cfg.alarm_metrics;
    json dr;
    dr["alpha"] = cfg.drift_alpha;
    dr["minor"] = json::array({cfg.drift_bands.minor_lo, cfg.drift_bands.minor_hi});
    dr["major"] = cfg.drift_bands.major;
    if (cfg.monitored_features) dr["monitored_features"] = *cfg.monitored_features;
    doc["drift"] = dr;
    if (cfg.tai_threshold) doc["tai_threshold"] = *cfg.tai_threshold;
    json weights = json::array();
    for (const auto& [name, w] : cfg.mlcps_weights.axes) {
        weights.push_back(json::array({name, w}));
    }
    doc["mlcps_weights"] = weights;
    json active = json::array();
    for (Category c : {Category::REJECT, Category::CLINICAL_REVIEW,
                       Category::CONDITIONAL_APPROVAL, Category::APPROVE}) {
        if (cfg.category_active(c)) active.push_back(category_name(c));
    }
    doc["active_categories"] = active;
    doc["hazard_trace"] = cfg.hazard_trace;
    return doc;
}

} // namespace modelgate
