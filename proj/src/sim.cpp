#include "modelgate/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "modelgate/drift.hpp"
#include "modelgate/errors.hpp"
#include "modelgate/hashing.hpp"
#include "modelgate/json_io.hpp"
#include "modelgate/ledger.hpp"
#include "modelgate/metrics.hpp"

namespace modelgate::sim {

namespace {

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

std::string padded_id(const std::string& prefix, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu", index);
    return prefix + buf;
}

std::string feature_salt(const char* tag, std::size_t column) {
    return std::string(tag) + std::to_string(column);
}

// Population std per feature column of the input batch; zero for constant
// or empty columns.
std::vector<double> column_stds(const std::vector<PredictionRecord>& records) {
    if (records.empty()) return {};
    const std::size_t k = records[0].features.size();
    std::vector<double> mean(k, 0.0), sq(k, 0.0);
    for (const auto& r : records) {
        if (r.features.size() != k)
            raise(ErrorKind::SchemaError, "apply_perturbation: ragged feature rows");
        for (std::size_t j = 0; j < k; ++j) {
            mean[j] += r.features[j];
            sq[j] += r.features[j] * r.features[j];
        }
    }
    const double n = static_cast<double>(records.size());
    std::vector<double> out(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        const double m = mean[j] / n;
        const double var = sq[j] / n - m * m;
        out[j] = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return out;
}

} // namespace

ScenarioKind scenario_kind_from_name(const std::string& name) {
    if (name == "STATIONARY") return ScenarioKind::STATIONARY;
    if (name == "CROSS_SITE_MIX") return ScenarioKind::CROSS_SITE_MIX;
    if (name == "REGRESSION_PROBE") return ScenarioKind::REGRESSION_PROBE;
    if (name == "EXTREME_SHIFT") return ScenarioKind::EXTREME_SHIFT;
    if (name == "RECOVERY") return ScenarioKind::RECOVERY;
    if (name == "CATASTROPHIC") return ScenarioKind::CATASTROPHIC;
    raise(ErrorKind::ConfigError, "unknown scenario kind: " + name);
}

const char* scenario_kind_name(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::STATIONARY: return "STATIONARY";
        case ScenarioKind::CROSS_SITE_MIX: return "CROSS_SITE_MIX";
        case ScenarioKind::REGRESSION_PROBE: return "REGRESSION_PROBE";
        case ScenarioKind::EXTREME_SHIFT: return "EXTREME_SHIFT";
        case ScenarioKind::RECOVERY: return "RECOVERY";
        case ScenarioKind::CATASTROPHIC: return "CATASTROPHIC";
    }
    return "STATIONARY";
}

LifecyclePlan plan_from_json(const nlohmann::json& doc) {
    LifecyclePlan plan;
    plan.name = doc.value("name", std::string("unnamed-plan"));

    if (doc.contains("cohort")) {
        const auto& c = doc["cohort"];
        plan.cohort.n_features = c.value("n_features", plan.cohort.n_features);
        plan.cohort.prevalence = c.value("prevalence", plan.cohort.prevalence);
        plan.cohort.pool_size = c.value("pool_size", plan.cohort.pool_size);
        plan.cohort.golden_fraction = c.value("golden_fraction", plan.cohort.golden_fraction);
        plan.cohort.initial_training_fraction =
            c.value("initial_training_fraction", plan.cohort.initial_training_fraction);
        plan.cohort.pos_mean = c.value("pos_mean", plan.cohort.pos_mean);
        plan.cohort.neg_mean = c.value("neg_mean", plan.cohort.neg_mean);
        plan.cohort.score_sd = c.value("score_sd", plan.cohort.score_sd);
        if (c.contains("site_b")) {
            const auto& s = c["site_b"];
            plan.cohort.site_b.shifted_features =
                s.value("shifted_features", plan.cohort.site_b.shifted_features);
            plan.cohort.site_b.mean_offset_sigmas =
                s.value("mean_offset_sigmas", plan.cohort.site_b.mean_offset_sigmas);
            plan.cohort.site_b.scale = s.value("scale", plan.cohort.site_b.scale);
        }
    }
    if (!(plan.cohort.prevalence >= 0.0 && plan.cohort.prevalence <= 1.0))
        raise(ErrorKind::ConfigError, "plan cohort.prevalence outside [0,1]");
    if (plan.cohort.site_b.shifted_features > plan.cohort.n_features)
        raise(ErrorKind::ConfigError, "plan cohort.site_b.shifted_features exceeds n_features");
    if (!(plan.cohort.score_sd > 0.0))
        raise(ErrorKind::ConfigError, "plan cohort.score_sd must be positive");

    if (!doc.contains("iterations") || !doc["iterations"].is_array())
        raise(ErrorKind::ConfigError, "plan needs an 'iterations' array");
    int expected = 1;
    for (const auto& item : doc["iterations"]) {
        ScenarioSpec s;
        s.iteration = item.value("iteration", expected);
        s.kind = scenario_kind_from_name(item.value("kind", std::string("STATIONARY")));
        s.n_records = item.value("n_records", 0);
        s.mix_fraction = item.value("mix_fraction", 0.0);
        s.scale_factor = item.value("scale_factor", 1.0);
        s.offset_sigmas = item.value("offset_sigmas", 0.0);
        s.pos_flip_rate = item.value("pos_flip_rate", 0.0);
        s.neg_flip_rate = item.value("neg_flip_rate", 0.0);
        s.noise_sigma_multiplier = item.value("noise_sigma_multiplier", 0.0);
        s.model_shift = item.value("model_shift", 0.0);
        if (item.contains("seed")) s.seed = item["seed"].get<std::uint64_t>();
        if (s.iteration != expected)
            raise(ErrorKind::ConfigError,
                  "plan iterations must be contiguous from 1; found " + std::to_string(s.iteration) +
                      " where " + std::to_string(expected) + " was expected");
        if (s.n_records <= 0)
            raise(ErrorKind::ConfigError,
                  "plan iteration " + std::to_string(s.iteration) + ": n_records must be > 0");
        for (double rate : {s.mix_fraction, s.pos_flip_rate, s.neg_flip_rate}) {
            if (!(rate >= 0.0 && rate <= 1.0))
                raise(ErrorKind::ConfigError, "plan iteration " + std::to_string(s.iteration) +
                                                  ": rates must lie in [0,1]");
        }
        plan.scenarios.push_back(std::move(s));
        ++expected;
    }
    return plan;
}

LifecyclePlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ConfigError, "cannot open plan file: " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) raise(ErrorKind::ConfigError, "plan file is not valid JSON: " + path);
    return plan_from_json(doc);
}

std::vector<PredictionRecord> generate_cohort(const CohortSpec& cohort, std::size_t n,
                                              std::uint64_t seed, const std::string& id_prefix,
                                              bool site_b) {
    std::vector<PredictionRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PredictionRecord r;
        r.patient_id = padded_id(id_prefix, i);
        r.label = keyed_unit(r.patient_id, "label", seed) < cohort.prevalence ? 1 : 0;
        r.subgroup = site_b ? "siteB" : "siteA";
        r.features.resize(cohort.n_features);
        for (std::size_t j = 0; j < cohort.n_features; ++j) {
            double x = keyed_normal(r.patient_id, feature_salt("f", j), seed);
            if (site_b && j < cohort.site_b.shifted_features)
                x = x * cohort.site_b.scale + cohort.site_b.mean_offset_sigmas;
            r.features[j] = x;
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<PredictionRecord> score_records(const std::vector<PredictionRecord>& records,
                                            const ScoreModel& model, std::uint64_t run_seed) {
    std::vector<PredictionRecord> out = records;
    for (auto& r : out) {
        const double base = r.label == 1 ? model.pos_mean + model.shift : model.neg_mean;
        const double z = keyed_normal(r.patient_id, "score-z", run_seed);
        r.score = clamp01(base + model.sd * z);
    }
    return out;
}

std::vector<PredictionRecord> apply_perturbation(const std::vector<PredictionRecord>& records,
                                                 const ScenarioSpec& scenario,
                                                 const CohortSpec& cohort, std::uint64_t seed) {
    std::vector<PredictionRecord> out = records;
    switch (scenario.kind) {
        case ScenarioKind::STATIONARY:
        case ScenarioKind::REGRESSION_PROBE:
        case ScenarioKind::RECOVERY:
            break;
        case ScenarioKind::CROSS_SITE_MIX: {
            for (auto& r : out) {
                if (keyed_unit(r.patient_id, "mix", seed) >= scenario.mix_fraction) continue;
                r.subgroup = "siteB";
                for (std::size_t j = 0; j < r.features.size(); ++j) {
                    double x = keyed_normal(r.patient_id, feature_salt("mixB-f", j), seed);
                    if (j < cohort.site_b.shifted_features)
                        x = x * cohort.site_b.scale + cohort.site_b.mean_offset_sigmas;
                    r.features[j] = x;
                }
            }
            break;
        }
        case ScenarioKind::EXTREME_SHIFT: {
            const auto stds = column_stds(out);
            for (auto& r : out)
                for (std::size_t j = 0; j < r.features.size(); ++j)
                    r.features[j] =
                        r.features[j] * scenario.scale_factor + scenario.offset_sigmas * stds[j];
            break;
        }
        case ScenarioKind::CATASTROPHIC: {
            const auto stds = column_stds(out);
            for (auto& r : out) {
                if (r.label == 1) {
                    if (keyed_unit(r.patient_id, "flip-pos", seed) < scenario.pos_flip_rate)
                        r.label = 0;
                } else {
                    if (keyed_unit(r.patient_id, "flip-neg", seed) < scenario.neg_flip_rate)
                        r.label = 1;
                }
                if (scenario.noise_sigma_multiplier > 0.0) {
                    for (std::size_t j = 0; j < r.features.size(); ++j)
                        r.features[j] += scenario.noise_sigma_multiplier * stds[j] *
                                         keyed_normal(r.patient_id, feature_salt("noise-f", j), seed);
                }
            }
            break;
        }
    }
    return out;
}

namespace {

std::vector<std::vector<double>> columns_of(const std::vector<PredictionRecord>& records) {
    return drift::feature_columns(records);
}

std::vector<std::string> feature_names(std::size_t k) {
    std::vector<std::string> names(k);
    for (std::size_t j = 0; j < k; ++j) names[j] = feature_salt("f", j);
    return names;
}

} // namespace

LifecycleResult run_lifecycle(const LifecyclePlan& plan, const GovernanceConfig& cfg,
                              audit::AuditLog& log, std::uint64_t seed,
                              int confidence_replicates) {
    LifecycleResult result;
    const metrics::MlcpsWeights* weights =
        cfg.mlcps_weights.axes.empty() ? nullptr : &cfg.mlcps_weights;

    // Data estate: every known record in its current "as measured" form,
    // scores left to the models.
    std::unordered_map<std::string, PredictionRecord> store;
    auto pool = generate_cohort(plan.cohort, plan.cohort.pool_size, seed, "PT");
    std::vector<std::string> pool_ids;
    pool_ids.reserve(pool.size());
    for (auto& r : pool) {
        pool_ids.push_back(r.patient_id);
        store.emplace(r.patient_id, std::move(r));
    }

    auto split = ledger::assign_splits(pool_ids, plan.cohort.golden_fraction,
                                       plan.cohort.initial_training_fraction, seed);
    ledger::SplitLedger data = split.ledger;
    std::vector<std::string> reserve = split.reserve;
    std::size_t reserve_next = 0;

    std::vector<PredictionRecord> golden_raw;
    golden_raw.reserve(data.golden.size());
    for (const auto& id : data.golden) golden_raw.push_back(store.at(id));

    ledger::BatchRegistry registry;
    {
        std::vector<PredictionRecord> pool_raw;
        pool_raw.reserve(pool_ids.size());
        for (const auto& id : pool_ids) pool_raw.push_back(store.at(id));
        auto manifest = ledger::register_batch(pool_raw, "synthetic-pool", "iteration-0",
                                               "iteration-0", "synthetic", {}, "iteration-0");
        registry.add(manifest);
        log.append("BATCH_REGISTERED", manifest_to_json(manifest));
    }

    ReferenceState refs = initial_references(cfg);
    const ScoreModel base_model{plan.cohort.pos_mean, plan.cohort.neg_mean, plan.cohort.score_sd,
                                0.0};
    std::optional<ScoreModel> released_model;
    std::optional<metrics::MetricSnapshot> prev_field;

    auto training_columns = [&]() {
        std::vector<PredictionRecord> rows;
        rows.reserve(data.training.size());
        for (const auto& id : data.training) rows.push_back(store.at(id));
        return columns_of(rows);
    };

    auto decide_iteration = [&](std::int64_t iteration, const DecisionInputs& inputs,
                                const std::vector<PredictionRecord>& golden_scored,
                                const std::vector<PredictionRecord>& cand_field,
                                const std::vector<PredictionRecord>& rel_field,
                                const std::vector<std::vector<double>>& reference_columns,
                                std::map<std::string, std::string> artifacts) {
        const auto evals = evaluate_conditions(inputs, refs, cfg);
        std::optional<double> confidence;
        if (confidence_replicates > 0) {
            ConfidenceInputs ci;
            ci.candidate_internal = golden_scored;
            ci.candidate_field = cand_field;
            ci.released_field = rel_field;
            ci.reference_features = reference_columns;
            ci.trust_score = inputs.trust_score;
            confidence = decision_confidence(ci, refs, cfg, confidence_replicates,
                                             splitmix64(seed ^ static_cast<std::uint64_t>(iteration)))
                             .confidence;
        }
        DecisionRecord rec =
            compose_decision(iteration, evals, cfg, artifacts, confidence, log);
        update_references(refs, rec.category, iteration, inputs.candidate_internal,
                          inputs.candidate_field);
        if (rec.category == Category::APPROVE) {
            log.append("REFERENCE_UPDATE",
                       nlohmann::json{{"iteration", iteration}, {"references", references_to_json(refs)}});
            result.reference_trail.emplace_back(iteration, refs);
        }
        result.decisions.push_back(rec);
        return rec;
    };

    // Iteration 0: the initial candidate faces the golden set only.
    {
        const auto golden_scored = score_records(golden_raw, base_model, seed);
        DecisionInputs inputs;
        inputs.candidate_internal = metrics::snapshot(golden_scored, cfg.operating_threshold, weights);
        log.append("SNAPSHOT", nlohmann::json{{"iteration", 0},
                                              {"role", "candidate_internal"},
                                              {"snapshot", snapshot_to_json(inputs.candidate_internal)}});
        std::map<std::string, std::string> artifacts{
            {"plan", plan.name},
            {"golden_fingerprint", inputs.candidate_internal.dataset_fingerprint},
            {"training_fingerprint", data.training_fingerprint()}};
        const auto rec = decide_iteration(0, inputs, golden_scored, {}, {}, {}, artifacts);
        if (rec.category == Category::APPROVE || rec.category == Category::CONDITIONAL_APPROVAL)
            released_model = base_model;
    }

    for (const auto& scenario : plan.scenarios) {
        const std::int64_t iteration = scenario.iteration;
        const std::uint64_t eff_seed =
            scenario.seed ? *scenario.seed
                          : splitmix64(seed ^ (0x5CEA0000ULL + static_cast<std::uint64_t>(iteration)));

        // Assemble the incoming batch: reserved pool patients first, newly
        // minted ones when the reserve runs dry.
        std::vector<PredictionRecord> batch_true;
        batch_true.reserve(static_cast<std::size_t>(scenario.n_records));
        for (int i = 0; i < scenario.n_records; ++i) {
            if (reserve_next < reserve.size()) {
                batch_true.push_back(store.at(reserve[reserve_next++]));
            } else {
                const std::string prefix = "NB" + std::to_string(iteration) + "-";
                auto minted = generate_cohort(plan.cohort, 1, seed,
                                              prefix + std::to_string(i) + "-");
                batch_true.push_back(std::move(minted.front()));
            }
        }

        ScoreModel candidate = base_model;
        candidate.shift = scenario.model_shift;

        auto cand_field = score_records(batch_true, candidate, seed);
        cand_field = apply_perturbation(cand_field, scenario, plan.cohort, eff_seed);
        std::vector<PredictionRecord> rel_field;
        if (released_model) {
            rel_field = score_records(batch_true, *released_model, seed);
            rel_field = apply_perturbation(rel_field, scenario, plan.cohort, eff_seed);
        }
        // The batch as the world recorded it: perturbed, no model attached.
        auto raw_batch = apply_perturbation(batch_true, scenario, plan.cohort, eff_seed);
        for (auto& r : raw_batch) r.score = 0.0;

        std::vector<std::string> batch_ids;
        batch_ids.reserve(raw_batch.size());
        for (const auto& r : raw_batch) batch_ids.push_back(r.patient_id);
        ledger::stage_drifting(data, batch_ids);

        const std::string window = "iteration-" + std::to_string(iteration);
        auto manifest = ledger::register_batch(
            raw_batch, std::string("scenario:") + scenario_kind_name(scenario.kind), window, window,
            "synthetic", {}, window);
        registry.add(manifest);
        log.append("BATCH_REGISTERED", manifest_to_json(manifest));

        const auto reference_columns = training_columns();
        const auto golden_scored = score_records(golden_raw, candidate, seed);

        DecisionInputs inputs;
        inputs.candidate_internal = metrics::snapshot(golden_scored, cfg.operating_threshold, weights);
        inputs.candidate_field = metrics::snapshot(cand_field, cfg.operating_threshold, weights);
        if (released_model)
            inputs.released_field = metrics::snapshot(rel_field, cfg.operating_threshold, weights);
        inputs.prev_candidate_field = prev_field;
        inputs.drift = drift::drift_report(
            reference_columns, columns_of(cand_field), feature_names(plan.cohort.n_features),
            cfg.drift_alpha, cfg.drift_bands,
            cfg.monitored_features ? *cfg.monitored_features : std::vector<std::size_t>{});

        log.append("SNAPSHOT", nlohmann::json{{"iteration", iteration},
                                              {"role", "candidate_internal"},
                                              {"snapshot", snapshot_to_json(inputs.candidate_internal)}});
        log.append("SNAPSHOT", nlohmann::json{{"iteration", iteration},
                                              {"role", "candidate_field"},
                                              {"snapshot", snapshot_to_json(*inputs.candidate_field)}});
        if (inputs.released_field)
            log.append("SNAPSHOT", nlohmann::json{{"iteration", iteration},
                                                  {"role", "released_field"},
                                                  {"snapshot", snapshot_to_json(*inputs.released_field)}});
        log.append("DRIFT_REPORT", nlohmann::json{{"iteration", iteration},
                                                  {"report", drift_report_to_json(*inputs.drift)}});

        std::map<std::string, std::string> artifacts{
            {"plan", plan.name},
            {"scenario", scenario_kind_name(scenario.kind)},
            {"batch_id", manifest.batch_id},
            {"golden_fingerprint", inputs.candidate_internal.dataset_fingerprint},
            {"incoming_fingerprint", inputs.candidate_field->dataset_fingerprint},
            {"training_fingerprint", data.training_fingerprint()},
            {"drift_score", format_double(inputs.drift->score)},
            {"drift_band", drift::band_name(inputs.drift->band)}};

        const auto rec = decide_iteration(iteration, inputs, golden_scored, cand_field, rel_field,
                                          reference_columns, artifacts);
        if (rec.category == Category::APPROVE || rec.category == Category::CONDITIONAL_APPROVAL)
            released_model = candidate;

        prev_field = inputs.candidate_field;

        // Accumulation is unconditional: the batch joins training whatever
        // the verdict was, and the staging area empties.
        for (auto& r : raw_batch) store[r.patient_id] = r;
        ledger::accumulate(data);
    }

    return result;
}

std::vector<ReplayRow> read_replay_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::SchemaError, "cannot open replay table: " + path);
    std::string line;
    if (!std::getline(in, line)) raise(ErrorKind::SchemaError, "replay table is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(s);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!s.empty() && s.back() == ',') cells.push_back("");
        return cells;
    };

    const auto header = split(line);
    std::size_t iteration_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "iteration") iteration_col = i;
    if (iteration_col == header.size())
        raise(ErrorKind::SchemaError, "replay table needs an 'iteration' column: " + path);

    std::vector<ReplayRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            raise(ErrorKind::SchemaError, "replay table line " + std::to_string(line_no) + ": has " +
                                              std::to_string(cells.size()) + " cells, header has " +
                                              std::to_string(header.size()));
        ReplayRow row;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::string& cell = cells[i];
            if (cell.empty()) {
                if (i == iteration_col)
                    raise(ErrorKind::SchemaError,
                          "replay table line " + std::to_string(line_no) + ": empty iteration");
                continue;
            }
            std::size_t consumed = 0;
            double value = 0.0;
            try {
                value = std::stod(cell, &consumed);
            } catch (const std::exception&) {
                raise(ErrorKind::SchemaError, "replay table line " + std::to_string(line_no) +
                                                  ": bad number '" + cell + "'");
            }
            if (consumed != cell.size())
                raise(ErrorKind::SchemaError, "replay table line " + std::to_string(line_no) +
                                                  ": bad number '" + cell + "'");
            if (i == iteration_col) {
                row.iteration = static_cast<std::int64_t>(value);
            } else if (header[i] == "drift_score") {
                row.drift_score = value;
            } else if (header[i].rfind("field.", 0) == 0) {
                row.field_metrics[header[i].substr(6)] = value;
            } else {
                row.internal_metrics[header[i]] = value;
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<DecisionRecord> replay_table(const std::vector<ReplayRow>& rows,
                                         const GovernanceConfig& cfg, audit::AuditLog& log,
                                         bool recompute_mlcps) {
    std::vector<DecisionRecord> out;
    ReferenceState refs = initial_references(cfg);
    std::optional<metrics::MetricSnapshot> prev_field;

    // Every metric the profile's deployment conditions read must be present
    // in each row; silence would otherwise weaken a check.
    std::vector<std::string> required;
    for (const auto& [m, v] : cfg.p_fail) {
        (void)v;
        required.push_back(m);
    }
    if (cfg.rule_profile == RuleProfile::SEPSIS_STYLE) {
        for (const auto& [m, v] : cfg.buffer_zone) {
            (void)v;
            required.push_back(m);
        }
        for (const auto& [m, v] : cfg.ref_tolerance) {
            (void)v;
            required.push_back(m);
        }
    }

    for (const auto& row : rows) {
        const std::string where = "replay row (iteration " + std::to_string(row.iteration) + ")";
        for (const auto& name : required)
            if (!row.internal_metrics.count(name))
                raise(ErrorKind::SchemaError, where + ": missing required metric '" + name + "'");
        if (cfg.rule_profile == RuleProfile::SEPSIS_STYLE && !row.drift_score)
            raise(ErrorKind::SchemaError, where + ": missing drift_score");

        metrics::MetricSnapshot internal;
        internal.operating_threshold = cfg.operating_threshold;
        for (const auto& [name, value] : row.internal_metrics)
            metrics::set_metric(internal, name, value);

        if (recompute_mlcps && !cfg.mlcps_weights.axes.empty()) {
            if (!internal.balanced_accuracy && internal.sensitivity && internal.specificity)
                internal.balanced_accuracy = (*internal.sensitivity + *internal.specificity) / 2.0;
            std::vector<double> values;
            std::vector<double> w;
            for (const auto& [axis, weight] : cfg.mlcps_weights.axes) {
                auto v = metrics::metric_value(internal, axis);
                if (!v)
                    raise(ErrorKind::DomainError,
                          where + ": composite axis '" + axis + "' not derivable from the row");
                values.push_back(*v);
                w.push_back(weight);
            }
            internal.mlcps = metrics::mlcps(values, w);
        }

        DecisionInputs inputs;
        inputs.candidate_internal = internal;
        if (!row.field_metrics.empty()) {
            metrics::MetricSnapshot field;
            field.operating_threshold = cfg.operating_threshold;
            for (const auto& [name, value] : row.field_metrics)
                metrics::set_metric(field, name, value);
            inputs.candidate_field = field;
        }
        inputs.prev_candidate_field = prev_field;
        if (row.drift_score) {
            drift::DriftReport report;
            report.score = *row.drift_score;
            report.band = drift::classify_drift(report.score, cfg.drift_bands);
            report.alpha = cfg.drift_alpha;
            inputs.drift = report;
        }

        log.append("SNAPSHOT", nlohmann::json{{"iteration", row.iteration},
                                              {"role", "candidate_internal"},
                                              {"snapshot", snapshot_to_json(inputs.candidate_internal)}});
        if (inputs.candidate_field)
            log.append("SNAPSHOT", nlohmann::json{{"iteration", row.iteration},
                                                  {"role", "candidate_field"},
                                                  {"snapshot", snapshot_to_json(*inputs.candidate_field)}});
        if (inputs.drift)
            log.append("DRIFT_REPORT", nlohmann::json{{"iteration", row.iteration},
                                                      {"report", drift_report_to_json(*inputs.drift)}});

        const auto evals = evaluate_conditions(inputs, refs, cfg);
        std::map<std::string, std::string> artifacts{{"source", "replay"}};
        if (inputs.drift) {
            artifacts["drift_score"] = format_double(inputs.drift->score);
            artifacts["drift_band"] = drift::band_name(inputs.drift->band);
        }
        DecisionRecord rec =
            compose_decision(row.iteration, evals, cfg, artifacts, std::nullopt, log);
        update_references(refs, rec.category, row.iteration, inputs.candidate_internal,
                          inputs.candidate_field);
        if (rec.category == Category::APPROVE)
            log.append("REFERENCE_UPDATE", nlohmann::json{{"iteration", row.iteration},
                                                          {"references", references_to_json(refs)}});
        if (inputs.candidate_field) prev_field = inputs.candidate_field;
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace modelgate::sim
