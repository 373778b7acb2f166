#pragma once

#include <json.hpp>

#include "modelgate/decision.hpp"
#include "modelgate/drift.hpp"
#include "modelgate/ledger.hpp"
#include "modelgate/metrics.hpp"

namespace modelgate {

// JSON codecs for the structures that cross the audit-log boundary.
// Writers omit absent optionals entirely (no nulls); readers treat a
// missing key as absent. Round trips are lossless for doubles because the
// serializer emits shortest round-trip decimal forms.

nlohmann::json snapshot_to_json(const metrics::MetricSnapshot& snap);
metrics::MetricSnapshot snapshot_from_json(const nlohmann::json& doc);

nlohmann::json drift_report_to_json(const drift::DriftReport& report);

nlohmann::json bias_report_to_json(const drift::BiasReport& report);

nlohmann::json condition_to_json(const ConditionEvaluation& c);
ConditionEvaluation condition_from_json(const nlohmann::json& doc);

nlohmann::json decision_to_json(const DecisionRecord& rec);
DecisionRecord decision_from_json(const nlohmann::json& doc);

nlohmann::json references_to_json(const ReferenceState& refs);
ReferenceState references_from_json(const nlohmann::json& doc);

nlohmann::json manifest_to_json(const ledger::BatchManifest& manifest);
ledger::BatchManifest manifest_from_json(const nlohmann::json& doc);

} // namespace modelgate
