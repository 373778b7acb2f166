#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modelgate/audit_sink.hpp"
#include "modelgate/categories.hpp"
#include "modelgate/config.hpp"
#include "modelgate/drift.hpp"
#include "modelgate/metrics.hpp"
#include "modelgate/records.hpp"

namespace modelgate {

// One evaluated check. `fired` is only meaningful together with `evaluable`:
// a check whose inputs are missing is reported with evaluable=false unless
// the missing input is itself a failure condition (failed-safe checks set
// fired=true and say so in `detail`).
struct ConditionEvaluation {
    std::string id;                  // stable identifier, e.g. "P1.floor.sensitivity"
    Priority priority = Priority::P4;
    bool fired = false;
    bool evaluable = true;
    std::optional<double> observed;
    std::string constraint;          // human-readable bound, e.g. ">= 0.65"
    std::string detail;              // non-empty when fired or not evaluable
};

// Performance references the gate compares against. `fixed` is pinned at the
// first APPROVE (or pre-seeded from config) and never moves afterwards;
// the released_* snapshots advance on every APPROVE and only on APPROVE.
struct ReferenceState {
    std::optional<metrics::MetricSnapshot> fixed;
    std::optional<metrics::MetricSnapshot> released_internal;  // released model on its internal test set
    std::optional<metrics::MetricSnapshot> released_field;     // released model on field data
    std::optional<std::int64_t> last_approved_iteration;
};

// Everything one gate evaluation may look at. Optionals model genuinely
// absent inputs (no field batch yet, monitoring disabled, ...); the
// evaluator decides per check whether absence is benign or failed-safe.
struct DecisionInputs {
    metrics::MetricSnapshot candidate_internal;                   // candidate on the held-out set
    std::optional<metrics::MetricSnapshot> candidate_field;       // candidate on the incoming batch
    std::optional<metrics::MetricSnapshot> released_field;        // released model on the incoming batch
    std::optional<metrics::MetricSnapshot> prev_candidate_field;  // previous iteration's candidate_field
    std::optional<drift::DriftReport> drift;
    std::optional<double> trust_score;
};

// Gate verdict plus the routing trail that produced it. `routing` holds one
// entry per tier checked, in order; the final entry is the selected tier
// (passed = false). `trace` renders that as e.g. "P1✓ P2✓ →P3".
struct GateResult {
    Category category = Category::APPROVE;
    std::vector<std::pair<Priority, bool>> routing;  // (tier, passed); last = selected
    std::string trace;
    std::vector<ConditionEvaluation> fired;          // deployment conditions that fired
};

// Surveillance verdict, independent of the gate.
struct AlarmResult {
    bool alarm = false;
    std::vector<ConditionEvaluation> fired;          // alarm conditions that fired
};

struct DecisionRecord {
    std::int64_t iteration = 0;
    Category category = Category::APPROVE;
    bool alarm = false;
    std::vector<std::string> alarm_triggers; // fired alarm slots, e.g. {"A1","A3"}
    std::string routing_trace;
    std::vector<std::string> trigger_reasons;
    std::vector<std::string> required_actions;
    std::vector<ConditionEvaluation> conditions;     // every condition, fired or not
    std::optional<double> confidence;                // bootstrap decision stability
    std::string config_hash;
    std::map<std::string, std::string> artifacts;    // fingerprints, log positions, ...
};

// Evaluates every check the configured rule profile defines, in priority
// order. Throws ContaminationError if the internal and field snapshots
// carry identical dataset fingerprints.
std::vector<ConditionEvaluation> evaluate_conditions(const DecisionInputs& in,
                                                     const ReferenceState& refs,
                                                     const GovernanceConfig& cfg);

// First-fail walk over the priority tiers. Conditions whose tier maps to an
// inactive category escalate to the nearest stricter active tier.
GateResult deployment_decision(const std::vector<ConditionEvaluation>& conditions,
                               const GovernanceConfig& cfg);

// Surveillance channel: any fired alarm condition raises the alarm. Never
// consults the gate result.
AlarmResult pms_alarm(const std::vector<ConditionEvaluation>& conditions);

// Runs gate + alarm, assembles the decision record, and appends it to the
// sink before returning. `artifacts` travels into the persisted payload.
DecisionRecord compose_decision(std::int64_t iteration,
                                const std::vector<ConditionEvaluation>& conditions,
                                const GovernanceConfig& cfg,
                                const std::map<std::string, std::string>& artifacts,
                                std::optional<double> confidence,
                                AuditSink& sink);

// Advances references according to the category. Only APPROVE changes
// anything; the fixed reference is written once and then left alone.
void update_references(ReferenceState& refs,
                       Category category,
                       std::int64_t iteration,
                       const metrics::MetricSnapshot& candidate_internal,
                       const std::optional<metrics::MetricSnapshot>& candidate_field);

// Builds the starting reference state, honouring a pre-seeded fixed
// reference from config.
ReferenceState initial_references(const GovernanceConfig& cfg);

// Raw material for the bootstrap stability estimate: record sets are
// resampled at patient level and the whole gate re-run per replicate.
struct ConfidenceInputs {
    std::vector<PredictionRecord> candidate_internal;
    std::vector<PredictionRecord> candidate_field;       // may be empty
    std::vector<PredictionRecord> released_field;        // may be empty
    std::vector<std::vector<double>> reference_features; // per-column; empty -> no drift check
    std::optional<double> trust_score;
};

struct ConfidenceResult {
    Category point_category = Category::APPROVE;
    bool point_alarm = false;
    double confidence = 0.0;   // fraction of replicates agreeing with point_category
    int replicates = 0;
};

// Fraction of patient-level bootstrap replicates that reproduce the point
// decision. Deterministic for a given seed.
ConfidenceResult decision_confidence(const ConfidenceInputs& in,
                                     const ReferenceState& refs,
                                     const GovernanceConfig& cfg,
                                     int replicates,
                                     std::uint64_t seed);

struct NoninferiorityResult {
    double point_delta = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool non_inferior = false;   // ci_low >= -margin
    bool equivalent = false;     // additionally ci_high <= margin
    int replicates = 0;
};

// Percentile-bootstrap noninferiority check of metric(records) against a
// scalar reference value. Degenerate replicates (metric undefined on the
// resample) are redrawn a bounded number of times, then scored as a full
// regression so missing evidence can never certify noninferiority.
NoninferiorityResult noninferiority_test(const std::vector<PredictionRecord>& records,
                                         const std::string& metric,
                                         double reference_value,
                                         double margin,
                                         double alpha,
                                         double threshold,
                                         int replicates,
                                         std::uint64_t seed);

inline const char* noninferiority_verdict(const NoninferiorityResult& r) {
    if (r.equivalent) return "EQUIVALENT";
    if (r.non_inferior) return "NON_INFERIOR";
    return "FAIL";
}

} // namespace modelgate
