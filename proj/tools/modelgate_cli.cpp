// modelgate: governance gate for clinical ML deployment candidates.
//
// Subcommands cover the whole lifecycle surface: batch registration,
// metric/drift evaluation, gate decisions on supplied snapshots, seeded
// lifecycle simulation, published-table replay, audit-chain verification,
// and plot-ready export. Every command that writes audit entries stamps
// them with the active config hash; anything randomized takes --seed.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "modelgate/audit.hpp"
#include "modelgate/config.hpp"
#include "modelgate/decision.hpp"
#include "modelgate/drift.hpp"
#include "modelgate/errors.hpp"
#include "modelgate/json_io.hpp"
#include "modelgate/ledger.hpp"
#include "modelgate/metrics.hpp"
#include "modelgate/records.hpp"
#include "modelgate/sim.hpp"

namespace {

using namespace modelgate;

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::SchemaError, "cannot open file: " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) raise(ErrorKind::SchemaError, "not valid JSON: " + path);
    return doc;
}

void write_output(const std::string& path, const nlohmann::json& doc) {
    if (path == "-" || path.empty()) {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) raise(ErrorKind::IntegrityError, "cannot write file: " + path);
    out << doc.dump(2) << "\n";
}

void print_warnings(const GovernanceConfig& cfg) {
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
}

audit::Clock pick_clock(bool wall_clock) {
    return wall_clock ? audit::system_clock_utc() : audit::epoch_clock();
}

void print_decision_line(const DecisionRecord& rec) {
    std::cout << "iteration " << rec.iteration << ": " << category_name(rec.category)
              << (rec.alarm ? " +ALARM" : "") << "  [" << rec.routing_trace << "]";
    if (rec.confidence) std::cout << "  confidence=" << format_double(*rec.confidence);
    std::cout << "\n";
}

int run_ingest(const std::string& batch_path, const std::string& config_path,
               const std::string& log_path, const std::string& source,
               const std::string& window_start, const std::string& window_end,
               const std::string& labelling, const std::vector<std::string>& reviewers,
               const std::string& registered_at, const std::vector<std::string>& quarantine,
               bool wall_clock) {
    const auto cfg = load_config(config_path);
    print_warnings(cfg);
    const auto batch = read_batch_csv(batch_path);
    const std::set<std::string> quarantined(quarantine.begin(), quarantine.end());
    const auto manifest = ledger::register_batch(batch.records, source, window_start, window_end,
                                                 labelling, reviewers, registered_at, quarantined);

    ledger::BatchRegistry registry;
    std::ifstream probe(log_path);
    const bool log_exists = probe.good() && probe.peek() != std::ifstream::traits_type::eof();
    probe.close();
    if (log_exists) {
        for (const auto& entry : audit::verify_log(log_path))
            if (entry.entry_kind == "BATCH_REGISTERED")
                registry.add(manifest_from_json(entry.payload));
    }

    if (!registry.add(manifest)) {
        std::cout << "already registered: " << manifest.batch_id << " (" << manifest.n_records
                  << " records)\n";
        return 0;
    }
    audit::AuditLog log(log_path, cfg.config_hash, pick_clock(wall_clock));
    log.append("BATCH_REGISTERED", manifest_to_json(manifest));
    std::cout << "registered: " << manifest.batch_id << " (" << manifest.n_records
              << " records)\n";
    return 0;
}

int run_evaluate(const std::string& batch_path, const std::string& config_path,
                 const std::string& reference_path, const std::string& out_path, bool with_bias) {
    const auto cfg = load_config(config_path);
    print_warnings(cfg);
    const auto batch = read_batch_csv(batch_path);

    double threshold = cfg.operating_threshold;
    if (cfg.target_sensitivity)
        threshold = metrics::pick_operating_threshold(batch.records, *cfg.target_sensitivity);

    const metrics::MlcpsWeights* weights =
        cfg.mlcps_weights.axes.empty() ? nullptr : &cfg.mlcps_weights;
    const auto snap = metrics::snapshot(batch.records, threshold, weights);

    nlohmann::json out{{"snapshot", snapshot_to_json(snap)}};
    if (!reference_path.empty()) {
        const auto reference = read_batch_csv(reference_path);
        auto names = batch.feature_names;
        if (names.empty() && !batch.records.empty()) {
            names.resize(batch.records[0].features.size());
            for (std::size_t j = 0; j < names.size(); ++j) names[j] = "f" + std::to_string(j);
        }
        const auto report = drift::drift_report(
            drift::feature_columns(reference.records), drift::feature_columns(batch.records),
            names, cfg.drift_alpha, cfg.drift_bands,
            cfg.monitored_features ? *cfg.monitored_features : std::vector<std::size_t>{});
        out["drift"] = drift_report_to_json(report);
    }
    if (with_bias) out["bias"] = bias_report_to_json(drift::bias_score(batch.records, threshold));
    write_output(out_path, out);
    return 0;
}

int run_decide(const std::string& config_path, const std::string& log_path,
               const std::string& internal_path, const std::string& field_path,
               const std::string& released_field_path, const std::string& prev_field_path,
               const std::string& drift_path, std::optional<double> trust,
               const std::string& refs_path, std::int64_t iteration, bool wall_clock) {
    const auto cfg = load_config(config_path);
    print_warnings(cfg);

    DecisionInputs inputs;
    inputs.candidate_internal = snapshot_from_json(read_json_file(internal_path));
    if (!field_path.empty()) inputs.candidate_field = snapshot_from_json(read_json_file(field_path));
    if (!released_field_path.empty())
        inputs.released_field = snapshot_from_json(read_json_file(released_field_path));
    if (!prev_field_path.empty())
        inputs.prev_candidate_field = snapshot_from_json(read_json_file(prev_field_path));
    if (!drift_path.empty()) {
        const auto doc = read_json_file(drift_path);
        if (!doc.contains("score"))
            raise(ErrorKind::SchemaError, "drift file needs a 'score' field: " + drift_path);
        drift::DriftReport report;
        report.score = doc["score"].get<double>();
        report.band = drift::classify_drift(report.score, cfg.drift_bands);
        report.alpha = cfg.drift_alpha;
        inputs.drift = report;
    }
    inputs.trust_score = trust;

    ReferenceState refs = initial_references(cfg);
    {
        std::ifstream probe(refs_path);
        if (probe.good() && probe.peek() != std::ifstream::traits_type::eof())
            refs = references_from_json(read_json_file(refs_path));
    }

    audit::AuditLog log(log_path, cfg.config_hash, pick_clock(wall_clock));
    const auto evals = evaluate_conditions(inputs, refs, cfg);
    const auto rec = compose_decision(iteration, evals, cfg, {{"source", "decide"}},
                                      std::nullopt, log);
    update_references(refs, rec.category, iteration, inputs.candidate_internal,
                      inputs.candidate_field);
    if (rec.category == Category::APPROVE)
        log.append("REFERENCE_UPDATE",
                   nlohmann::json{{"iteration", iteration}, {"references", references_to_json(refs)}});
    {
        std::ofstream out(refs_path);
        if (!out) raise(ErrorKind::IntegrityError, "cannot write references file: " + refs_path);
        out << references_to_json(refs).dump(2) << "\n";
    }
    print_decision_line(rec);
    write_output("-", decision_to_json(rec));
    return 0;
}

int run_simulate(const std::string& plan_path, const std::string& config_path,
                 const std::string& log_path, std::uint64_t seed, int confidence,
                 const std::string& export_path, bool wall_clock) {
    const auto cfg = load_config(config_path);
    print_warnings(cfg);
    const auto plan = sim::load_plan(plan_path);

    audit::AuditLog log(log_path, cfg.config_hash, pick_clock(wall_clock));
    const auto result = sim::run_lifecycle(plan, cfg, log, seed, confidence);
    for (const auto& rec : result.decisions) print_decision_line(rec);
    std::cout << result.decisions.size() << " decisions, " << log.entries()
              << " audit entries, head " << log.head_hash() << "\n";
    if (!export_path.empty()) {
        audit::write_export_csv(export_path, audit::export_metrics(audit::verify_log(log_path)));
        std::cout << "exported: " << export_path << "\n";
    }
    return 0;
}

int run_replay(const std::string& table_path, const std::string& config_path,
               const std::string& log_path, bool recompute_mlcps, const std::string& export_path,
               bool wall_clock) {
    const auto cfg = load_config(config_path);
    print_warnings(cfg);
    const auto rows = sim::read_replay_csv(table_path);

    audit::AuditLog log(log_path, cfg.config_hash, pick_clock(wall_clock));
    const auto decisions = sim::replay_table(rows, cfg, log, recompute_mlcps);
    for (const auto& rec : decisions) print_decision_line(rec);
    if (!export_path.empty()) {
        audit::write_export_csv(export_path, audit::export_metrics(audit::verify_log(log_path)));
        std::cout << "exported: " << export_path << "\n";
    }
    return 0;
}

int run_verify(const std::string& log_path) {
    const auto entries = audit::verify_log(log_path);
    std::string head = audit::kGenesisHash;
    if (!entries.empty()) head = entries.back().entry_hash;
    std::cout << "OK: " << entries.size() << " entries, head " << head << "\n";
    return 0;
}

int run_export(const std::string& log_path, const std::string& out_path) {
    const auto entries = audit::verify_log(log_path);
    audit::write_export_csv(out_path, audit::export_metrics(entries));
    std::cout << "exported " << audit::export_metrics(entries).rows.size() << " rows to "
              << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"modelgate: deployment gate and monitoring pipeline for clinical ML models"};
    app.require_subcommand(1);

    // ingest
    std::string in_batch, in_config, in_log, in_source = "unspecified";
    std::string in_wstart = "unspecified", in_wend = "unspecified";
    std::string in_label = "unspecified", in_regat = "unspecified";
    std::vector<std::string> in_reviewers, in_quarantine;
    bool in_wall = false;
    auto* ingest = app.add_subcommand("ingest", "Register an incoming batch in the audit log");
    ingest->add_option("--batch", in_batch, "Batch CSV")->required();
    ingest->add_option("--config", in_config, "Governance config JSON")->required();
    ingest->add_option("--log", in_log, "Audit log path")->required();
    ingest->add_option("--source", in_source, "Collection site / provenance");
    ingest->add_option("--window-start", in_wstart, "Collection window start");
    ingest->add_option("--window-end", in_wend, "Collection window end");
    ingest->add_option("--labelling", in_label, "Labelling method");
    ingest->add_option("--reviewer", in_reviewers, "Label reviewer (repeatable)");
    ingest->add_option("--registered-at", in_regat, "Registration timestamp");
    ingest->add_option("--quarantine", in_quarantine, "Patient id to quarantine (repeatable)");
    ingest->add_flag("--wall-clock", in_wall, "Stamp entries with the system clock");

    // evaluate
    std::string ev_batch, ev_config, ev_reference, ev_out = "-";
    bool ev_bias = false;
    auto* evaluate = app.add_subcommand("evaluate", "Compute a metric snapshot and drift report");
    evaluate->add_option("--batch", ev_batch, "Batch CSV to evaluate")->required();
    evaluate->add_option("--config", ev_config, "Governance config JSON")->required();
    evaluate->add_option("--reference", ev_reference, "Reference batch CSV for drift");
    evaluate->add_option("--out", ev_out, "Output JSON path ('-' for stdout)");
    evaluate->add_flag("--bias", ev_bias, "Include the subgroup bias screen");

    // decide
    std::string de_config, de_log, de_internal, de_field, de_released, de_prev, de_drift;
    std::string de_refs;
    std::int64_t de_iteration = 0;
    double de_trust = -1.0;
    bool de_has_trust = false, de_wall = false;
    auto* decide = app.add_subcommand("decide", "Run the deployment gate on supplied snapshots");
    decide->add_option("--config", de_config, "Governance config JSON")->required();
    decide->add_option("--log", de_log, "Audit log path")->required();
    decide->add_option("--candidate-internal", de_internal, "Candidate internal snapshot JSON")
        ->required();
    decide->add_option("--candidate-field", de_field, "Candidate field snapshot JSON");
    decide->add_option("--released-field", de_released, "Released-model field snapshot JSON");
    decide->add_option("--prev-candidate-field", de_prev, "Previous field snapshot JSON");
    decide->add_option("--drift", de_drift, "Drift report JSON (needs 'score')");
    auto* trust_opt = decide->add_option("--trust", de_trust, "Explainability trust score");
    decide->add_option("--references", de_refs, "Reference state JSON, read and updated")
        ->required();
    decide->add_option("--iteration", de_iteration, "Iteration number")->required();
    decide->add_flag("--wall-clock", de_wall, "Stamp entries with the system clock");

    // simulate
    std::string si_plan, si_config, si_log, si_export;
    std::uint64_t si_seed = 0;
    int si_confidence = 0;
    bool si_wall = false;
    auto* simulate = app.add_subcommand("simulate", "Run a lifecycle plan end to end");
    simulate->add_option("--plan", si_plan, "Lifecycle plan JSON")->required();
    simulate->add_option("--config", si_config, "Governance config JSON")->required();
    simulate->add_option("--log", si_log, "Audit log path")->required();
    simulate->add_option("--seed", si_seed, "Master RNG seed")->required();
    simulate->add_option("--confidence", si_confidence,
                         "Bootstrap replicates for decision confidence (0 = off)")
        ->check(CLI::NonNegativeNumber);
    simulate->add_option("--export", si_export, "Also export plot data to this CSV");
    simulate->add_flag("--wall-clock", si_wall, "Stamp entries with the system clock");

    // replay
    std::string re_table, re_config, re_log, re_export;
    bool re_mlcps = false, re_wall = false;
    auto* replay = app.add_subcommand("replay", "Feed a published metric table through the gate");
    replay->add_option("--table", re_table, "Replay CSV (see docs/formats.md)")->required();
    replay->add_option("--config", re_config, "Governance config JSON")->required();
    replay->add_option("--log", re_log, "Audit log path")->required();
    replay->add_flag("--recompute-mlcps", re_mlcps, "Rebuild the composite from configured axes");
    replay->add_option("--export", re_export, "Also export plot data to this CSV");
    replay->add_flag("--wall-clock", re_wall, "Stamp entries with the system clock");

    // verify-log
    std::string vl_log;
    auto* verify = app.add_subcommand("verify-log", "Verify the audit log hash chain");
    verify->add_option("--log", vl_log, "Audit log path")->required();

    // export
    std::string ex_log, ex_out;
    auto* exporter = app.add_subcommand("export", "Export plot-ready decision rows");
    exporter->add_option("--log", ex_log, "Audit log path")->required();
    exporter->add_option("--out", ex_out, "Output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed())
            return run_ingest(in_batch, in_config, in_log, in_source, in_wstart, in_wend, in_label,
                              in_reviewers, in_regat, in_quarantine, in_wall);
        if (evaluate->parsed())
            return run_evaluate(ev_batch, ev_config, ev_reference, ev_out, ev_bias);
        if (decide->parsed()) {
            de_has_trust = trust_opt->count() > 0;
            return run_decide(de_config, de_log, de_internal, de_field, de_released, de_prev,
                              de_drift, de_has_trust ? std::optional<double>(de_trust) : std::nullopt,
                              de_refs, de_iteration, de_wall);
        }
        if (simulate->parsed())
            return run_simulate(si_plan, si_config, si_log, si_seed, si_confidence, si_export,
                                si_wall);
        if (replay->parsed())
            return run_replay(re_table, re_config, re_log, re_mlcps, re_export, re_wall);
        if (verify->parsed()) return run_verify(vl_log);
        if (exporter->parsed()) return run_export(ex_log, ex_out);
    } catch (const modelgate::Error& e) {
        std::cerr << modelgate::Error::kind_name(e.kind()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
