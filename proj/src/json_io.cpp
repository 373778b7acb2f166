#include "modelgate/json_io.hpp"

#include <array>

#include "modelgate/errors.hpp"

namespace modelgate {

namespace {

constexpr std::array<const char*, 15> kFixedMetricNames = {
    "sensitivity", "specificity", "ppv",    "npv",   "fnr",
    "fpr",         "accuracy",    "balanced_accuracy", "f1", "mcc",
    "kappa",       "brier",       "roc_auc", "pr_auc", "mlcps"};

double require_number(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_number())
        raise(ErrorKind::SchemaError, std::string("expected numeric field '") + key + "'");
    return doc[key].get<double>();
}

std::string require_string(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_string())
        raise(ErrorKind::SchemaError, std::string("expected string field '") + key + "'");
    return doc[key].get<std::string>();
}

} // namespace

nlohmann::json snapshot_to_json(const metrics::MetricSnapshot& snap) {
    nlohmann::json values = nlohmann::json::object();
    for (const char* name : kFixedMetricNames) {
        auto v = metrics::metric_value(snap, name);
        if (v) values[name] = *v;
    }
    for (const auto& [name, v] : snap.extras) values[name] = v;
    nlohmann::json doc;
    doc["metrics"] = std::move(values);
    doc["operating_threshold"] = snap.operating_threshold;
    doc["n_records"] = snap.n_records;
    if (!snap.dataset_fingerprint.empty()) doc["dataset_fingerprint"] = snap.dataset_fingerprint;
    return doc;
}

metrics::MetricSnapshot snapshot_from_json(const nlohmann::json& doc) {
    metrics::MetricSnapshot snap;
    if (doc.contains("metrics")) {
        if (!doc["metrics"].is_object())
            raise(ErrorKind::SchemaError, "snapshot 'metrics' must be an object");
        for (const auto& [name, v] : doc["metrics"].items()) {
            if (!v.is_number())
                raise(ErrorKind::SchemaError, "snapshot metric '" + name + "' must be numeric");
            metrics::set_metric(snap, name, v.get<double>());
        }
    }
    if (doc.contains("operating_threshold"))
        snap.operating_threshold = require_number(doc, "operating_threshold");
    if (doc.contains("n_records")) snap.n_records = doc["n_records"].get<std::size_t>();
    if (doc.contains("dataset_fingerprint"))
        snap.dataset_fingerprint = require_string(doc, "dataset_fingerprint");
    return snap;
}

nlohmann::json drift_report_to_json(const drift::DriftReport& report) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : report.columns) {
        nlohmann::json col;
        col["column"] = c.column;
        col["name"] = c.name;
        col["statistic"] = c.ks.statistic;
        col["p_value"] = c.ks.p_value;
        col["n_reference"] = c.ks.n_a;
        col["n_incoming"] = c.ks.n_b;
        col["exact"] = c.ks.exact;
        col["significant"] = c.significant;
        cols.push_back(std::move(col));
    }
    nlohmann::json doc;
    doc["columns"] = std::move(cols);
    doc["monitored"] = report.monitored;
    doc["significant"] = report.significant;
    doc["score"] = report.score;
    doc["band"] = drift::band_name(report.band);
    doc["alpha"] = report.alpha;
    return doc;
}

nlohmann::json bias_report_to_json(const drift::BiasReport& report) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : report.groups) {
        nlohmann::json row;
        row["subgroup"] = g.subgroup;
        row["n"] = g.n;
        if (g.sensitivity) row["sensitivity"] = *g.sensitivity;
        if (g.specificity) row["specificity"] = *g.specificity;
        groups.push_back(std::move(row));
    }
    nlohmann::json doc;
    doc["groups"] = std::move(groups);
    doc["excluded"] = report.excluded;
    doc["bias_score"] = report.bias_score;
    if (!report.widest_pair_low.empty()) {
        doc["widest_pair"] = {report.widest_pair_low, report.widest_pair_high};
    }
    return doc;
}

nlohmann::json condition_to_json(const ConditionEvaluation& c) {
    nlohmann::json doc;
    doc["id"] = c.id;
    doc["priority"] = priority_name(c.priority);
    doc["fired"] = c.fired;
    doc["evaluable"] = c.evaluable;
    if (c.observed) doc["observed"] = *c.observed;
    if (!c.constraint.empty()) doc["constraint"] = c.constraint;
    if (!c.detail.empty()) doc["detail"] = c.detail;
    return doc;
}

ConditionEvaluation condition_from_json(const nlohmann::json& doc) {
    ConditionEvaluation c;
    c.id = require_string(doc, "id");
    const std::string pri = require_string(doc, "priority");
    bool found = false;
    for (Priority p : {Priority::P1, Priority::P2, Priority::P3, Priority::P4, Priority::A1,
                       Priority::A2, Priority::A3}) {
        if (pri == priority_name(p)) {
            c.priority = p;
            found = true;
            break;
        }
    }
    if (!found) raise(ErrorKind::SchemaError, "unknown priority '" + pri + "'");
    c.fired = doc.value("fired", false);
    c.evaluable = doc.value("evaluable", true);
    if (doc.contains("observed")) c.observed = require_number(doc, "observed");
    c.constraint = doc.value("constraint", std::string());
    c.detail = doc.value("detail", std::string());
    return c;
}

nlohmann::json decision_to_json(const DecisionRecord& rec) {
    nlohmann::json doc;
    doc["iteration"] = rec.iteration;
    doc["category"] = category_name(rec.category);
    doc["alarm"] = rec.alarm;
    doc["alarm_triggers"] = rec.alarm_triggers;
    doc["routing_trace"] = rec.routing_trace;
    doc["trigger_reasons"] = rec.trigger_reasons;
    doc["required_actions"] = rec.required_actions;
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : rec.conditions) conds.push_back(condition_to_json(c));
    doc["conditions"] = std::move(conds);
    if (rec.confidence) doc["confidence"] = *rec.confidence;
    doc["config_hash"] = rec.config_hash;
    doc["artifacts"] = rec.artifacts;
    return doc;
}

DecisionRecord decision_from_json(const nlohmann::json& doc) {
    DecisionRecord rec;
    rec.iteration = doc.value("iteration", std::int64_t{0});
    rec.category = category_from_name(require_string(doc, "category"));
    rec.alarm = doc.value("alarm", false);
    if (doc.contains("alarm_triggers"))
        rec.alarm_triggers = doc["alarm_triggers"].get<std::vector<std::string>>();
    rec.routing_trace = doc.value("routing_trace", std::string());
    if (doc.contains("trigger_reasons"))
        rec.trigger_reasons = doc["trigger_reasons"].get<std::vector<std::string>>();
    if (doc.contains("required_actions"))
        rec.required_actions = doc["required_actions"].get<std::vector<std::string>>();
    if (doc.contains("conditions")) {
        for (const auto& c : doc["conditions"]) rec.conditions.push_back(condition_from_json(c));
    }
    if (doc.contains("confidence")) rec.confidence = require_number(doc, "confidence");
    rec.config_hash = doc.value("config_hash", std::string());
    if (doc.contains("artifacts"))
        rec.artifacts = doc["artifacts"].get<std::map<std::string, std::string>>();
    return rec;
}

nlohmann::json references_to_json(const ReferenceState& refs) {
    nlohmann::json doc = nlohmann::json::object();
    if (refs.fixed) doc["fixed"] = snapshot_to_json(*refs.fixed);
    if (refs.released_internal) doc["released_internal"] = snapshot_to_json(*refs.released_internal);
    if (refs.released_field) doc["released_field"] = snapshot_to_json(*refs.released_field);
    if (refs.last_approved_iteration) doc["last_approved_iteration"] = *refs.last_approved_iteration;
    return doc;
}

ReferenceState references_from_json(const nlohmann::json& doc) {
    ReferenceState refs;
    if (doc.contains("fixed")) refs.fixed = snapshot_from_json(doc["fixed"]);
    if (doc.contains("released_internal"))
        refs.released_internal = snapshot_from_json(doc["released_internal"]);
    if (doc.contains("released_field")) refs.released_field = snapshot_from_json(doc["released_field"]);
    if (doc.contains("last_approved_iteration"))
        refs.last_approved_iteration = doc["last_approved_iteration"].get<std::int64_t>();
    return refs;
}

nlohmann::json manifest_to_json(const ledger::BatchManifest& manifest) {
    nlohmann::json doc;
    doc["batch_id"] = manifest.batch_id;
    doc["source"] = manifest.source;
    doc["window_start"] = manifest.window_start;
    doc["window_end"] = manifest.window_end;
    doc["labelling_method"] = manifest.labelling_method;
    doc["reviewers"] = manifest.reviewers;
    doc["registered_at"] = manifest.registered_at;
    doc["n_records"] = manifest.n_records;
    doc["quarantined"] = manifest.quarantined;
    return doc;
}

ledger::BatchManifest manifest_from_json(const nlohmann::json& doc) {
    ledger::BatchManifest m;
    m.batch_id = require_string(doc, "batch_id");
    m.source = doc.value("source", std::string());
    m.window_start = doc.value("window_start", std::string());
    m.window_end = doc.value("window_end", std::string());
    m.labelling_method = doc.value("labelling_method", std::string());
    if (doc.contains("reviewers")) m.reviewers = doc["reviewers"].get<std::vector<std::string>>();
    m.registered_at = doc.value("registered_at", std::string());
    m.n_records = doc.value("n_records", std::size_t{0});
    if (doc.contains("quarantined"))
        m.quarantined = doc["quarantined"].get<std::set<std::string>>();
    return m;
}

} // namespace modelgate
