#include "modelgate/decision.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "modelgate/errors.hpp"
#include "modelgate/json_io.hpp"

namespace modelgate {

namespace {

std::string fmt(double v) { return format_double(v); }

// Absence of a metric a safety or review check depends on can never pass
// silently: it surfaces as its own fired review-tier condition.
ConditionEvaluation missing_metric(const std::string& metric, const char* needed_by) {
    ConditionEvaluation e;
    e.id = "P2.missing." + metric;
    e.priority = Priority::P2;
    e.fired = true;
    e.detail = metric + " required by " + needed_by +
               " but absent from the internal snapshot; failed safe to review";
    return e;
}

void sepsis_conditions(const DecisionInputs& in, const ReferenceState& refs,
                       const GovernanceConfig& cfg, drift::DriftBand band,
                       std::vector<ConditionEvaluation>& out) {
    const metrics::MetricSnapshot& g = in.candidate_internal;

    for (const auto& [metric, bound] : cfg.buffer_zone) {
        auto v = metrics::metric_value(g, metric);
        if (!v) {
            out.push_back(missing_metric(metric, "a review range"));
            continue;
        }
        ConditionEvaluation e;
        e.id = "P2.buffer." + metric;
        e.priority = Priority::P2;
        e.observed = v;
        e.constraint = bound.max ? "in [" + fmt(bound.min) + ", " + fmt(*bound.max) + "]"
                                 : ">= " + fmt(bound.min);
        e.fired = *v < bound.min || (bound.max && *v > *bound.max);
        if (e.fired)
            e.detail = metric + " " + fmt(*v) + " outside the acceptance range (" + e.constraint + ")";
        out.push_back(std::move(e));
    }

    for (const auto& [metric, tol] : cfg.ref_tolerance) {
        ConditionEvaluation e;
        e.id = "P2.reference_regression." + metric;
        e.priority = Priority::P2;
        e.constraint = "gap <= " + fmt(tol);
        if (!refs.fixed) {
            e.evaluable = false;
            e.detail = "no fixed reference recorded yet";
            out.push_back(std::move(e));
            continue;
        }
        auto v = metrics::metric_value(g, metric);
        if (!v) {
            out.push_back(missing_metric(metric, "the fixed-reference comparison"));
            continue;
        }
        auto rv = metrics::metric_value(*refs.fixed, metric);
        if (!rv) {
            e.evaluable = false;
            e.detail = "fixed reference lacks " + metric;
            out.push_back(std::move(e));
            continue;
        }
        const double gap = *rv - *v;
        e.observed = gap;
        const bool regressed = gap > tol;
        // A regression that coincides with a major covariate shift is not a
        // model-quality verdict: the comparison population no longer matches
        // the reference population, so the finding is routed to the
        // surveillance channel (which flags the shift itself) instead of
        // blocking on stale ground truth.
        if (regressed && band == drift::DriftBand::MAJOR) {
            e.fired = false;
            e.detail = metric + " gap " + fmt(gap) +
                       " from the fixed reference coincides with a major covariate shift; "
                       "deferred to the surveillance channel";
        } else {
            e.fired = regressed;
            if (e.fired)
                e.detail = metric + " " + fmt(*v) + " regressed " + fmt(gap) +
                           " below the fixed reference " + fmt(*rv) + " (tolerance " + fmt(tol) + ")";
        }
        out.push_back(std::move(e));
    }

    {
        ConditionEvaluation e;
        e.id = "P3.minor_drift";
        e.priority = Priority::P3;
        e.constraint = "outside [" + fmt(cfg.drift_bands.minor_lo) + ", " +
                       fmt(cfg.drift_bands.minor_hi) + "]";
        if (!in.drift) {
            e.evaluable = false;
            e.detail = "no drift report this iteration";
        } else {
            e.observed = in.drift->score;
            e.fired = band == drift::DriftBand::MINOR;
            if (e.fired)
                e.detail = "drift score " + fmt(in.drift->score) + " inside the minor band [" +
                           fmt(cfg.drift_bands.minor_lo) + ", " + fmt(cfg.drift_bands.minor_hi) + "]";
        }
        out.push_back(std::move(e));
    }

    if (cfg.tai_threshold) {
        ConditionEvaluation e;
        e.id = "P3.trust";
        e.priority = Priority::P3;
        e.constraint = ">= " + fmt(*cfg.tai_threshold);
        if (!in.trust_score) {
            e.fired = true;
            e.detail = "trust score required but not supplied; failed safe to conditional approval";
        } else {
            e.observed = in.trust_score;
            e.fired = *in.trust_score < *cfg.tai_threshold;
            if (e.fired)
                e.detail = "trust score " + fmt(*in.trust_score) + " below " + fmt(*cfg.tai_threshold);
        }
        out.push_back(std::move(e));
    }

    // Surveillance channel. All three slots concern the released model, so
    // none of them can fire before a first APPROVE has released one.
    const bool released = refs.last_approved_iteration.has_value();

    const auto& floors = cfg.effective_pms_floors();
    for (const auto& metric : cfg.alarm_metrics) {
        auto floor_it = floors.find(metric);
        if (floor_it != floors.end()) {
            ConditionEvaluation e;
            e.id = "A1.field_floor." + metric;
            e.priority = Priority::A1;
            e.constraint = ">= " + fmt(floor_it->second);
            if (!released) {
                e.evaluable = false;
                e.detail = "no released model";
            } else if (!in.released_field) {
                e.evaluable = false;
                e.detail = "no field measurement of the released model";
            } else {
                auto fv = metrics::metric_value(*in.released_field, metric);
                if (!fv) {
                    e.evaluable = false;
                    e.detail = "field snapshot lacks " + metric;
                } else {
                    e.observed = fv;
                    e.fired = *fv < floor_it->second;
                    if (e.fired)
                        e.detail = "released-model " + metric + " " + fmt(*fv) +
                                   " below the surveillance floor " + fmt(floor_it->second);
                }
            }
            out.push_back(std::move(e));
        }

        auto tau_it = cfg.tau.find(metric);
        if (tau_it != cfg.tau.end()) {
            ConditionEvaluation e;
            e.id = "A2.field_regression." + metric;
            e.priority = Priority::A2;
            e.constraint = "within " + fmt(tau_it->second) + " of the released internal value";
            auto rv = refs.released_internal ? metrics::metric_value(*refs.released_internal, metric)
                                             : std::nullopt;
            auto fv =
                in.released_field ? metrics::metric_value(*in.released_field, metric) : std::nullopt;
            if (!released) {
                e.evaluable = false;
                e.detail = "no released model";
            } else if (!rv) {
                e.evaluable = false;
                e.detail = "released internal reference lacks " + metric;
            } else if (!fv) {
                e.evaluable = false;
                e.detail = "no field measurement of the released model";
            } else {
                e.constraint = "> " + fmt(*rv - tau_it->second);
                e.observed = fv;
                e.fired = *fv <= *rv - tau_it->second;
                if (e.fired)
                    e.detail = "released-model field " + metric + " " + fmt(*fv) + " at least " +
                               fmt(tau_it->second) + " below its internal reference " + fmt(*rv);
            }
            out.push_back(std::move(e));
        }
    }

    {
        ConditionEvaluation e;
        e.id = "A3.major_drift";
        e.priority = Priority::A3;
        e.constraint = "<= " + fmt(cfg.drift_bands.major);
        if (!released) {
            e.evaluable = false;
            e.detail = "no released model";
        } else if (!in.drift) {
            e.evaluable = false;
            e.detail = "no drift report this iteration";
        } else {
            e.observed = in.drift->score;
            e.fired = band == drift::DriftBand::MAJOR;
            if (e.fired)
                e.detail = "drift score " + fmt(in.drift->score) + " above " + fmt(cfg.drift_bands.major);
        }
        out.push_back(std::move(e));
    }
}

void segmentation_conditions(const DecisionInputs& in, const ReferenceState& refs,
                             const GovernanceConfig& cfg,
                             std::vector<ConditionEvaluation>& out) {
    const metrics::MetricSnapshot& g = in.candidate_internal;

    // Rolling-reference regression: once a model has been released, any
    // internal-set score below it blocks outright.
    for (const auto& [metric, floor] : cfg.p_fail) {
        (void)floor;
        ConditionEvaluation e;
        e.id = "P1.released_regression." + metric;
        e.priority = Priority::P1;
        if (!refs.released_internal) {
            e.evaluable = false;
            e.detail = "no released model yet";
            out.push_back(std::move(e));
            continue;
        }
        auto rv = metrics::metric_value(*refs.released_internal, metric);
        if (!rv) {
            e.evaluable = false;
            e.detail = "released reference lacks " + metric;
            out.push_back(std::move(e));
            continue;
        }
        auto v = metrics::metric_value(g, metric);
        if (!v) {
            out.push_back(missing_metric(metric, "the released-model comparison"));
            continue;
        }
        e.constraint = ">= " + fmt(*rv);
        e.observed = v;
        e.fired = *v < *rv;
        if (e.fired)
            e.detail = metric + " " + fmt(*v) + " below the released reference " + fmt(*rv);
        out.push_back(std::move(e));
    }

    // Early warning on the incoming field batch: the candidate's score on
    // it dropped since the previous iteration. Purely a data-quality
    // signal, so it needs no released model, only two consecutive field
    // measurements.
    for (const auto& metric : cfg.alarm_metrics) {
        ConditionEvaluation e;
        e.id = "A3.field_decline." + metric;
        e.priority = Priority::A3;
        auto prev = in.prev_candidate_field ? metrics::metric_value(*in.prev_candidate_field, metric)
                                            : std::nullopt;
        auto cur =
            in.candidate_field ? metrics::metric_value(*in.candidate_field, metric) : std::nullopt;
        if (!prev) {
            e.evaluable = false;
            e.detail = "no previous field measurement";
        } else if (!cur) {
            e.evaluable = false;
            e.detail = "no field measurement this iteration";
        } else {
            e.constraint = ">= " + fmt(*prev);
            e.observed = cur;
            e.fired = *cur < *prev;
            if (e.fired)
                e.detail = metric + " on incoming data declined " + fmt(*prev) + " -> " + fmt(*cur);
        }
        out.push_back(std::move(e));
    }
}

} // namespace

std::vector<ConditionEvaluation> evaluate_conditions(const DecisionInputs& in,
                                                     const ReferenceState& refs,
                                                     const GovernanceConfig& cfg) {
    const std::string& gfp = in.candidate_internal.dataset_fingerprint;
    if (in.candidate_field && !gfp.empty() && gfp == in.candidate_field->dataset_fingerprint)
        raise(ErrorKind::ContaminationError,
              "internal and field snapshots share dataset fingerprint " + gfp);

    const drift::DriftBand band = in.drift ? in.drift->band : drift::DriftBand::NONE;
    std::vector<ConditionEvaluation> out;

    for (const auto& [metric, floor] : cfg.p_fail) {
        auto v = metrics::metric_value(in.candidate_internal, metric);
        if (!v) {
            out.push_back(missing_metric(metric, "a safety floor"));
            continue;
        }
        ConditionEvaluation e;
        e.id = "P1.floor." + metric;
        e.priority = Priority::P1;
        e.observed = v;
        e.constraint = ">= " + fmt(floor);
        e.fired = *v < floor;
        if (e.fired) e.detail = metric + " " + fmt(*v) + " below the safety floor " + fmt(floor);
        out.push_back(std::move(e));
    }

    if (cfg.rule_profile == RuleProfile::SEPSIS_STYLE)
        sepsis_conditions(in, refs, cfg, band, out);
    else
        segmentation_conditions(in, refs, cfg, out);

    return out;
}

GateResult deployment_decision(const std::vector<ConditionEvaluation>& conditions,
                               const GovernanceConfig& cfg) {
    std::vector<ConditionEvaluation> fired_p1, fired_p2, fired_p3;
    for (const auto& c : conditions) {
        if (!c.fired) continue;
        switch (c.priority) {
            case Priority::P1: fired_p1.push_back(c); break;
            case Priority::P2: fired_p2.push_back(c); break;
            case Priority::P3: fired_p3.push_back(c); break;
            default: break; // alarm-channel conditions never route the gate
        }
    }

    // Deactivated middle categories fold their failures into the next
    // stricter active tier, never a more permissive one.
    if (!cfg.category_active(Category::CONDITIONAL_APPROVAL)) {
        std::move(fired_p3.begin(), fired_p3.end(), std::back_inserter(fired_p2));
        fired_p3.clear();
    }
    if (!cfg.category_active(Category::CLINICAL_REVIEW)) {
        std::move(fired_p2.begin(), fired_p2.end(), std::back_inserter(fired_p1));
        fired_p2.clear();
    }

    GateResult result;

    struct Tier {
        Priority priority;
        Category category;
        const std::vector<ConditionEvaluation>* fired;
    };
    const Tier tiers[] = {{Priority::P1, Category::REJECT, &fired_p1},
                          {Priority::P2, Category::CLINICAL_REVIEW, &fired_p2},
                          {Priority::P3, Category::CONDITIONAL_APPROVAL, &fired_p3}};

    bool selected = false;
    for (const auto& tier : tiers) {
        if (!cfg.category_active(tier.category)) continue;
        if (!tier.fired->empty()) {
            result.category = tier.category;
            result.routing.emplace_back(tier.priority, false);
            selected = true;
            break;
        }
        result.routing.emplace_back(tier.priority, true);
    }
    if (!selected) {
        result.category = Category::APPROVE;
        result.routing.emplace_back(Priority::P4, false);
    }

    for (auto& bucket : {&fired_p1, &fired_p2, &fired_p3})
        for (auto& c : *bucket) result.fired.push_back(c);

    std::string trace;
    for (std::size_t i = 0; i < result.routing.size(); ++i) {
        if (i > 0) trace += ' ';
        if (i + 1 == result.routing.size()) trace += "→"; // selected tier
        trace += priority_name(result.routing[i].first);
        if (i + 1 < result.routing.size()) trace += "✓"; // passed tier
    }
    result.trace = std::move(trace);
    return result;
}

AlarmResult pms_alarm(const std::vector<ConditionEvaluation>& conditions) {
    AlarmResult result;
    for (const auto& c : conditions) {
        const bool alarm_slot = c.priority == Priority::A1 || c.priority == Priority::A2 ||
                                c.priority == Priority::A3;
        if (alarm_slot && c.fired) result.fired.push_back(c);
    }
    result.alarm = !result.fired.empty();
    return result;
}

DecisionRecord compose_decision(std::int64_t iteration,
                                const std::vector<ConditionEvaluation>& conditions,
                                const GovernanceConfig& cfg,
                                const std::map<std::string, std::string>& artifacts,
                                std::optional<double> confidence,
                                AuditSink& sink) {
    const GateResult gate = deployment_decision(conditions, cfg);
    const AlarmResult alarm = pms_alarm(conditions);

    DecisionRecord rec;
    rec.iteration = iteration;
    rec.category = gate.category;
    rec.alarm = alarm.alarm;
    rec.routing_trace = gate.trace;
    rec.conditions = conditions;
    rec.confidence = confidence;
    rec.config_hash = cfg.config_hash;
    rec.artifacts = artifacts;

    for (const auto& c : alarm.fired) {
        const std::string slot = priority_name(c.priority);
        if (std::find(rec.alarm_triggers.begin(), rec.alarm_triggers.end(), slot) ==
            rec.alarm_triggers.end())
            rec.alarm_triggers.push_back(slot);
    }
    std::sort(rec.alarm_triggers.begin(), rec.alarm_triggers.end());

    for (const auto& c : gate.fired)
        rec.trigger_reasons.push_back(c.detail.empty() ? c.id : c.detail);
    for (const auto& c : alarm.fired)
        rec.trigger_reasons.push_back(c.detail.empty() ? c.id : c.detail);
    if (rec.trigger_reasons.empty()) rec.trigger_reasons.push_back("All satisfied");

    switch (rec.category) {
        case Category::APPROVE:
            rec.required_actions = {"release candidate model",
                                    "update released performance references"};
            break;
        case Category::CONDITIONAL_APPROVAL:
            rec.required_actions = {"release candidate model", "enable enhanced monitoring"};
            break;
        case Category::CLINICAL_REVIEW:
            rec.required_actions = {"hold release", "request human validation"};
            break;
        case Category::REJECT:
            rec.required_actions = {"block release", "retain prior released model"};
            break;
    }
    if (rec.alarm) {
        rec.required_actions.push_back("open post-market surveillance investigation");
        if (rec.category == Category::REJECT)
            rec.required_actions.push_back("escalate vigilance report");
    }

    // The append is the issue point: if it throws, no decision exists.
    sink.append("DECISION", decision_to_json(rec));
    return rec;
}

void update_references(ReferenceState& refs,
                       Category category,
                       std::int64_t iteration,
                       const metrics::MetricSnapshot& candidate_internal,
                       const std::optional<metrics::MetricSnapshot>& candidate_field) {
    if (category != Category::APPROVE) return;
    if (!refs.fixed) refs.fixed = candidate_internal;
    refs.released_internal = candidate_internal;
    refs.released_field = candidate_field;
    refs.last_approved_iteration = iteration;
}

ReferenceState initial_references(const GovernanceConfig& cfg) {
    ReferenceState refs;
    if (!cfg.fixed_reference.empty()) {
        metrics::MetricSnapshot snap;
        for (const auto& [metric, value] : cfg.fixed_reference)
            metrics::set_metric(snap, metric, value);
        refs.fixed = snap;
    }
    return refs;
}

namespace {

struct PatientGroups {
    std::vector<std::string> ids; // distinct, in first-seen order after sort
    std::unordered_map<std::string, std::vector<PredictionRecord>> by_id;
};

PatientGroups group_by_patient(const std::vector<PredictionRecord>& records) {
    PatientGroups g;
    for (const auto& r : records) {
        auto [it, inserted] = g.by_id.try_emplace(r.patient_id);
        if (inserted) g.ids.push_back(r.patient_id);
        it->second.push_back(r);
    }
    std::sort(g.ids.begin(), g.ids.end());
    return g;
}

Category run_gate_once(const std::vector<PredictionRecord>& internal_records,
                       const std::vector<PredictionRecord>& field_records,
                       const std::vector<PredictionRecord>& released_records,
                       const std::vector<std::vector<double>>& reference_features,
                       std::optional<double> trust_score, const ReferenceState& refs,
                       const GovernanceConfig& cfg, bool* alarm_out) {
    const metrics::MlcpsWeights* weights =
        cfg.mlcps_weights.axes.empty() ? nullptr : &cfg.mlcps_weights;

    DecisionInputs in;
    in.candidate_internal = metrics::snapshot(internal_records, cfg.operating_threshold, weights);
    if (!field_records.empty()) {
        in.candidate_field = metrics::snapshot(field_records, cfg.operating_threshold, weights);
        if (!reference_features.empty()) {
            auto incoming = drift::feature_columns(field_records);
            std::vector<std::string> names(incoming.size());
            for (std::size_t i = 0; i < names.size(); ++i) names[i] = "f" + std::to_string(i);
            in.drift = drift::drift_report(
                reference_features, incoming, names, cfg.drift_alpha, cfg.drift_bands,
                cfg.monitored_features ? *cfg.monitored_features : std::vector<std::size_t>{});
        }
        if (!released_records.empty())
            in.released_field = metrics::snapshot(released_records, cfg.operating_threshold, weights);
    }
    in.trust_score = trust_score;

    const auto evals = evaluate_conditions(in, refs, cfg);
    if (alarm_out) *alarm_out = pms_alarm(evals).alarm;
    return deployment_decision(evals, cfg).category;
}

} // namespace

ConfidenceResult decision_confidence(const ConfidenceInputs& in,
                                     const ReferenceState& refs,
                                     const GovernanceConfig& cfg,
                                     int replicates,
                                     std::uint64_t seed) {
    if (replicates < 1) raise(ErrorKind::DomainError, "decision_confidence: replicates must be >= 1");
    if (in.candidate_internal.empty())
        raise(ErrorKind::EmptyDataset, "decision_confidence: no internal records");

    ConfidenceResult result;
    result.replicates = replicates;
    result.point_category =
        run_gate_once(in.candidate_internal, in.candidate_field, in.released_field,
                      in.reference_features, in.trust_score, refs, cfg, &result.point_alarm);

    const PatientGroups internal_groups = group_by_patient(in.candidate_internal);
    const PatientGroups field_groups = group_by_patient(in.candidate_field);
    const PatientGroups released_groups = group_by_patient(in.released_field);

    // Modulo draw instead of uniform_int_distribution: mt19937_64 output is
    // pinned by the standard but the distribution adapters are not, and the
    // bias at these population sizes is far below test resolution.
    std::mt19937_64 rng(seed);
    auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    int matches = 0;
    std::vector<PredictionRecord> internal_b, field_b, released_b;
    for (int b = 0; b < replicates; ++b) {
        internal_b.clear();
        field_b.clear();
        released_b.clear();

        for (std::size_t i = 0; i < internal_groups.ids.size(); ++i) {
            const auto& id = internal_groups.ids[pick(internal_groups.ids.size())];
            const auto& rows = internal_groups.by_id.at(id);
            internal_b.insert(internal_b.end(), rows.begin(), rows.end());
        }
        // Field and released measurements describe the same incoming cases,
        // so one patient draw drives both sides (paired resampling).
        for (std::size_t i = 0; i < field_groups.ids.size(); ++i) {
            const auto& id = field_groups.ids[pick(field_groups.ids.size())];
            const auto& rows = field_groups.by_id.at(id);
            field_b.insert(field_b.end(), rows.begin(), rows.end());
            auto it = released_groups.by_id.find(id);
            if (it != released_groups.by_id.end())
                released_b.insert(released_b.end(), it->second.begin(), it->second.end());
        }

        try {
            const Category c = run_gate_once(internal_b, field_b, released_b, in.reference_features,
                                             in.trust_score, refs, cfg, nullptr);
            if (c == result.point_category) ++matches;
        } catch (const Error&) {
            // Degenerate resample (e.g. single-class): the decision is not
            // reproducible on it, which counts against stability.
        }
    }

    result.confidence = static_cast<double>(matches) / static_cast<double>(replicates);
    return result;
}

namespace {

std::optional<double> metric_on(const std::vector<PredictionRecord>& records,
                                const std::string& metric, double threshold) {
    if (records.empty()) return std::nullopt;
    try {
        if (metric == "roc_auc") return metrics::roc_auc(records);
        if (metric == "pr_auc") return metrics::pr_auc(records);
        if (metric == "brier") {
            double sum = 0.0;
            for (const auto& r : records) {
                const double d = r.score - static_cast<double>(r.label);
                sum += d * d;
            }
            return sum / static_cast<double>(records.size());
        }
        const auto snap = metrics::binary_metrics(metrics::confusion_counts(records, threshold));
        return metrics::metric_value(snap, metric);
    } catch (const Error&) {
        return std::nullopt;
    }
}

} // namespace

NoninferiorityResult noninferiority_test(const std::vector<PredictionRecord>& records,
                                         const std::string& metric,
                                         double reference_value,
                                         double margin,
                                         double alpha,
                                         double threshold,
                                         int replicates,
                                         std::uint64_t seed) {
    if (!(margin > 0.0)) raise(ErrorKind::DomainError, "noninferiority_test: margin must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0))
        raise(ErrorKind::DomainError, "noninferiority_test: alpha must lie in (0, 1)");
    if (replicates < 1) raise(ErrorKind::DomainError, "noninferiority_test: replicates must be >= 1");
    if (records.empty()) raise(ErrorKind::EmptyDataset, "noninferiority_test: no records");

    const auto point = metric_on(records, metric, threshold);
    if (!point)
        raise(ErrorKind::DomainError, "noninferiority_test: " + metric + " undefined on the sample");

    const PatientGroups groups = group_by_patient(records);
    std::mt19937_64 rng(seed);
    auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    constexpr int kMaxRedraws = 100;
    std::vector<double> deltas;
    deltas.reserve(static_cast<std::size_t>(replicates));
    std::vector<PredictionRecord> sample;
    for (int b = 0; b < replicates; ++b) {
        std::optional<double> value;
        for (int attempt = 0; attempt <= kMaxRedraws && !value; ++attempt) {
            sample.clear();
            for (std::size_t i = 0; i < groups.ids.size(); ++i) {
                const auto& rows = groups.by_id.at(groups.ids[pick(groups.ids.size())]);
                sample.insert(sample.end(), rows.begin(), rows.end());
            }
            value = metric_on(sample, metric, threshold);
        }
        // A replicate that stays degenerate scores the worst possible gap,
        // so missing evidence can never certify noninferiority.
        deltas.push_back(value ? *value - reference_value : -1.0);
    }
    std::sort(deltas.begin(), deltas.end());

    const std::size_t last = deltas.size() - 1;
    const std::size_t idx_lo =
        std::min<std::size_t>(last, static_cast<std::size_t>(std::floor(alpha / 2.0 * last)));
    const std::size_t idx_hi = last - idx_lo;

    NoninferiorityResult result;
    result.point_delta = *point - reference_value;
    result.ci_low = deltas[idx_lo];
    result.ci_high = deltas[idx_hi];
    result.non_inferior = result.ci_low >= -margin;
    result.equivalent = result.non_inferior && result.ci_high <= margin;
    result.replicates = replicates;
    return result;
}

} // namespace modelgate
