#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modelgate/audit.hpp"
#include "modelgate/config.hpp"
#include "modelgate/decision.hpp"
#include "modelgate/records.hpp"

namespace modelgate::sim {

// Batch-level disturbance applied to one iteration's incoming data.
// STATIONARY, REGRESSION_PROBE and RECOVERY leave the batch untouched
// (the latter two exist to document intent in plans: they carry a
// model_shift that degrades or restores the candidate's score quality).
enum class ScenarioKind {
    STATIONARY,
    CROSS_SITE_MIX,
    REGRESSION_PROBE,
    EXTREME_SHIFT,
    RECOVERY,
    CATASTROPHIC
};

ScenarioKind scenario_kind_from_name(const std::string& name);
const char* scenario_kind_name(ScenarioKind kind);

struct ScenarioSpec {
    int iteration = 0;
    ScenarioKind kind = ScenarioKind::STATIONARY;
    int n_records = 0;
    double mix_fraction = 0.0;            // CROSS_SITE_MIX: share of records from site B
    double scale_factor = 1.0;            // EXTREME_SHIFT: multiplicative feature distortion
    double offset_sigmas = 0.0;           // EXTREME_SHIFT: additive offset in feature-std units
    double pos_flip_rate = 0.0;           // CATASTROPHIC: positive-label corruption rate
    double neg_flip_rate = 0.0;           // CATASTROPHIC: negative-label corruption rate
    double noise_sigma_multiplier = 0.0;  // CATASTROPHIC: feature noise in feature-std units
    double model_shift = 0.0;             // candidate positive-class score offset, any kind
    std::optional<std::uint64_t> seed;    // override for the derived per-iteration seed
};

// Per-feature disturbance of the alternate collection site: the first
// `shifted_features` columns are offset and rescaled relative to the
// reference distribution.
struct SiteShift {
    std::size_t shifted_features = 0;
    double mean_offset_sigmas = 0.0;
    double scale = 1.0;
};

struct CohortSpec {
    std::size_t n_features = 34;
    double prevalence = 0.088;
    std::size_t pool_size = 8134;
    double golden_fraction = 0.25;
    double initial_training_fraction = 0.5; // of the non-golden pool; rest feeds batches
    double pos_mean = 0.62;                 // score model: positive-class mean
    double neg_mean = 0.28;                 // score model: negative-class mean
    double score_sd = 0.18;
    SiteShift site_b;
};

struct LifecyclePlan {
    std::string name;
    CohortSpec cohort;
    std::vector<ScenarioSpec> scenarios; // iterations contiguous from 1
};

LifecyclePlan plan_from_json(const nlohmann::json& doc);
LifecyclePlan load_plan(const std::string& path);

// Synthetic site-A (or site-B) patients. Everything is a keyed hash of the
// patient id, so a record's features and label never depend on generation
// order or on which run minted the id. Scores are left at zero; a score
// model fills them in per candidate.
std::vector<PredictionRecord> generate_cohort(const CohortSpec& cohort, std::size_t n,
                                              std::uint64_t seed, const std::string& id_prefix,
                                              bool site_b = false);

// Per-class Gaussian score model. `shift` moves the positive-class mean,
// which is how plans dial a candidate's sensitivity up or down.
struct ScoreModel {
    double pos_mean = 0.62;
    double neg_mean = 0.28;
    double sd = 0.18;
    double shift = 0.0;
};

// Returns a scored copy. The per-record noise draw is keyed only by
// patient id and the run seed - not by the model - so two models scored on
// the same record differ exactly by their parameter difference.
std::vector<PredictionRecord> score_records(const std::vector<PredictionRecord>& records,
                                            const ScoreModel& model, std::uint64_t run_seed);

// Deterministic pure transform of a batch per the scenario. Label flips
// and feature noise are keyed per patient id, so applying the same
// scenario to two copies of a batch disturbs both identically.
std::vector<PredictionRecord> apply_perturbation(const std::vector<PredictionRecord>& records,
                                                 const ScenarioSpec& scenario,
                                                 const CohortSpec& cohort, std::uint64_t seed);

struct LifecycleResult {
    std::vector<DecisionRecord> decisions;
    std::vector<std::pair<std::int64_t, ReferenceState>> reference_trail;
};

// Full iteration loop: split the pool, evaluate the iteration-0 candidate,
// then per scenario ingest -> drift check -> snapshots -> decision ->
// reference update -> unconditional accumulation, all through the audit
// sink. `confidence_replicates` 0 skips the bootstrap. Deterministic for a
// given (plan, config, seed), including log bytes under the epoch clock.
LifecycleResult run_lifecycle(const LifecyclePlan& plan, const GovernanceConfig& cfg,
                              audit::AuditLog& log, std::uint64_t seed,
                              int confidence_replicates = 0);

// One published-table row: the candidate's internal-set metrics, optional
// drift score, optional field-set metrics (prefixed "field." in the CSV).
struct ReplayRow {
    std::int64_t iteration = 0;
    std::map<std::string, double> internal_metrics;
    std::optional<double> drift_score;
    std::map<std::string, double> field_metrics;
};

// Layout documented in docs/formats.md: header names the metrics, with
// "iteration" required, "drift_score" optional, "field.<name>" columns
// feeding the field snapshot. Empty cells mean absent.
std::vector<ReplayRow> read_replay_csv(const std::string& path);

// Feeds tabulated metric rows through the gate, no resampling involved.
// Rows must supply every metric the profile's conditions consume
// (SchemaError otherwise). `recompute_mlcps` rebuilds the composite from
// the configured weight axes, deriving balanced accuracy from tabulated
// sensitivity/specificity when absent.
std::vector<DecisionRecord> replay_table(const std::vector<ReplayRow>& rows,
                                         const GovernanceConfig& cfg, audit::AuditLog& log,
                                         bool recompute_mlcps = false);

} // namespace modelgate::sim
