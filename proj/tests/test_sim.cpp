#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "modelgate/errors.hpp"
#include "modelgate/json_io.hpp"
#include "modelgate/sim.hpp"

using namespace modelgate;
namespace fs = std::filesystem;

namespace {

const std::string kSourceDir = MODELGATE_SOURCE_DIR;

struct TempDir {
    fs::path dir;
    TempDir() {
        static int counter = 0;
        dir = fs::temp_directory_path() /
              ("modelgate-sim-" + std::to_string(++counter) + "-" +
               std::to_string(static_cast<unsigned>(std::random_device{}())));
        fs::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

sim::CohortSpec small_cohort() {
    sim::CohortSpec cohort;
    cohort.n_features = 6;
    cohort.prevalence = 0.4;
    cohort.pool_size = 400;
    cohort.pos_mean = 0.62;
    cohort.neg_mean = 0.28;
    cohort.score_sd = 0.18;
    cohort.site_b.shifted_features = 3;
    cohort.site_b.mean_offset_sigmas = 1.5;
    cohort.site_b.scale = 0.8;
    return cohort;
}

nlohmann::json small_plan_doc() {
    return nlohmann::json{
        {"name", "unit-lifecycle"},
        {"cohort",
         {{"n_features", 6},
          {"prevalence", 0.4},
          {"pool_size", 400},
          {"golden_fraction", 0.25},
          {"initial_training_fraction", 0.5},
          {"pos_mean", 0.62},
          {"neg_mean", 0.28},
          {"score_sd", 0.18},
          {"site_b",
           {{"shifted_features", 3}, {"mean_offset_sigmas", 1.5}, {"scale", 0.8}}}}},
        {"iterations",
         {{{"iteration", 1}, {"kind", "STATIONARY"}, {"n_records", 120}},
          {{"iteration", 2},
           {"kind", "CATASTROPHIC"},
           {"n_records", 120},
           {"pos_flip_rate", 0.8},
           {"neg_flip_rate", 0.3},
           {"noise_sigma_multiplier", 3.0},
           {"model_shift", -0.30}}}}};
}

GovernanceConfig lifecycle_cfg() {
    return load_config(kSourceDir + "/configs/sepsis_lifecycle.json");
}

} // namespace

TEST_CASE("cohort generation is keyed by patient id alone") {
    auto cohort = small_cohort();
    auto a = sim::generate_cohort(cohort, 50, 9, "PT");
    auto b = sim::generate_cohort(cohort, 50, 9, "PT");
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].patient_id == b[i].patient_id);
        CHECK(a[i].label == b[i].label);
        CHECK(a[i].features == b[i].features);
        CHECK(a[i].score == 0.0); // scores come from a model, not the cohort
        CHECK(a[i].features.size() == cohort.n_features);
    }
    auto c = sim::generate_cohort(cohort, 50, 10, "PT");
    bool any_label_changed = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].label != c[i].label) any_label_changed = true;
    CHECK(any_label_changed);
}

TEST_CASE("prevalence zero produces an all-negative cohort") {
    auto cohort = small_cohort();
    cohort.prevalence = 0.0;
    for (const auto& r : sim::generate_cohort(cohort, 80, 3, "PT")) CHECK(r.label == 0);
}

TEST_CASE("site-B cohorts shift the configured leading features") {
    auto cohort = small_cohort();
    auto site_a = sim::generate_cohort(cohort, 400, 5, "PT", false);
    auto site_b = sim::generate_cohort(cohort, 400, 5, "PT", true);
    for (std::size_t j = 0; j < cohort.n_features; ++j) {
        double mean_a = 0.0, mean_b = 0.0;
        for (std::size_t i = 0; i < site_a.size(); ++i) {
            mean_a += site_a[i].features[j];
            mean_b += site_b[i].features[j];
        }
        mean_a /= static_cast<double>(site_a.size());
        mean_b /= static_cast<double>(site_b.size());
        if (j < cohort.site_b.shifted_features) {
            CHECK(std::fabs(mean_b - mean_a) > 0.5); // offset 1.5 sigma
        } else {
            CHECK(std::fabs(mean_b - mean_a) < 0.5);
        }
    }
    for (const auto& r : site_b) CHECK(r.subgroup == "siteB");
    for (const auto& r : site_a) CHECK(r.subgroup == "siteA");
}

TEST_CASE("two models scored on one record differ exactly by their parameters") {
    auto cohort = small_cohort();
    auto records = sim::generate_cohort(cohort, 300, 21, "PT");
    sim::ScoreModel base{0.62, 0.28, 0.18, 0.0};
    sim::ScoreModel shifted{0.62, 0.28, 0.18, -0.1};
    auto scored_a = sim::score_records(records, base, 77);
    auto scored_b = sim::score_records(records, shifted, 77);
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].label == 0) {
            CHECK(scored_a[i].score == doctest::Approx(scored_b[i].score));
        } else if (scored_a[i].score > 0.05 && scored_a[i].score < 0.95 &&
                   scored_b[i].score > 0.0 && scored_b[i].score < 1.0) {
            // Away from the clamp boundaries the noise draw cancels exactly.
            CHECK(scored_a[i].score - scored_b[i].score == doctest::Approx(0.1));
        }
        CHECK(scored_a[i].score >= 0.0);
        CHECK(scored_a[i].score <= 1.0);
    }
}

TEST_CASE("perturbations are pure, deterministic record transforms") {
    auto cohort = small_cohort();
    auto records = sim::generate_cohort(cohort, 200, 31, "NB");
    sim::ScoreModel base{0.62, 0.28, 0.18, 0.0};
    auto scored = sim::score_records(records, base, 41);

    SUBCASE("stationary kinds change nothing") {
        for (auto kind :
             {sim::ScenarioKind::STATIONARY, sim::ScenarioKind::REGRESSION_PROBE,
              sim::ScenarioKind::RECOVERY}) {
            sim::ScenarioSpec spec;
            spec.kind = kind;
            auto out = sim::apply_perturbation(scored, spec, cohort, 5);
            REQUIRE(out.size() == scored.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
                CHECK(out[i].label == scored[i].label);
                CHECK(out[i].score == doctest::Approx(scored[i].score));
                CHECK(out[i].features == scored[i].features);
            }
        }
    }
    SUBCASE("catastrophic corruption flips labels at the requested rates") {
        sim::ScenarioSpec spec;
        spec.kind = sim::ScenarioKind::CATASTROPHIC;
        spec.pos_flip_rate = 0.8;
        spec.neg_flip_rate = 0.3;
        spec.noise_sigma_multiplier = 2.0;
        auto out = sim::apply_perturbation(scored, spec, cohort, 5);
        int pos = 0, pos_flipped = 0, neg = 0, neg_flipped = 0;
        bool features_changed = false;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (scored[i].label == 1) {
                ++pos;
                if (out[i].label == 0) ++pos_flipped;
            } else {
                ++neg;
                if (out[i].label == 1) ++neg_flipped;
            }
            if (out[i].features != scored[i].features) features_changed = true;
            CHECK(out[i].score == doctest::Approx(scored[i].score)); // scores were drawn first
        }
        CHECK(features_changed);
        CHECK(std::fabs(static_cast<double>(pos_flipped) / pos - 0.8) < 0.2);
        CHECK(std::fabs(static_cast<double>(neg_flipped) / neg - 0.3) < 0.2);

        // Keyed by patient id: the same disturbance lands on any copy.
        auto rescored = sim::score_records(records, sim::ScoreModel{0.62, 0.28, 0.18, -0.2}, 41);
        auto out2 = sim::apply_perturbation(rescored, spec, cohort, 5);
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out2[i].label == out[i].label);
            CHECK(out2[i].features == out[i].features);
        }
    }
    SUBCASE("extreme shift rescales and offsets every feature") {
        sim::ScenarioSpec spec;
        spec.kind = sim::ScenarioKind::EXTREME_SHIFT;
        spec.scale_factor = 5.0;
        spec.offset_sigmas = 5.0;
        auto out = sim::apply_perturbation(scored, spec, cohort, 5);
        double mean_before = 0.0, mean_after = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            mean_before += scored[i].features[0];
            mean_after += out[i].features[0];
        }
        CHECK(std::fabs(mean_after - mean_before) > 1.0);
    }
    SUBCASE("cross-site mix swaps a fraction of records to the other site") {
        sim::ScenarioSpec spec;
        spec.kind = sim::ScenarioKind::CROSS_SITE_MIX;
        spec.mix_fraction = 0.3;
        auto out = sim::apply_perturbation(scored, spec, cohort, 5);
        int mixed = 0;
        for (std::size_t i = 0; i < out.size(); ++i)
            if (out[i].subgroup == "siteB") ++mixed;
        CHECK(std::fabs(static_cast<double>(mixed) / out.size() - 0.3) < 0.15);
        auto again = sim::apply_perturbation(scored, spec, cohort, 5);
        for (std::size_t i = 0; i < out.size(); ++i)
            CHECK(again[i].subgroup == out[i].subgroup);
    }
}

TEST_CASE("plan parsing validates structure and rates") {
    CHECK(sim::plan_from_json(small_plan_doc()).scenarios.size() == 2);

    auto kind_of = [](nlohmann::json doc) {
        try {
            sim::plan_from_json(doc);
        } catch (const Error& e) {
            return e.kind();
        }
        FAIL("expected ConfigError");
        return ErrorKind::ConfigError;
    };

    auto doc = small_plan_doc();
    doc["iterations"][1]["iteration"] = 5; // gap
    CHECK(kind_of(doc) == ErrorKind::ConfigError);

    doc = small_plan_doc();
    doc["iterations"][0]["n_records"] = 0;
    CHECK(kind_of(doc) == ErrorKind::ConfigError);

    doc = small_plan_doc();
    doc["iterations"][1]["pos_flip_rate"] = 1.4;
    CHECK(kind_of(doc) == ErrorKind::ConfigError);

    doc = small_plan_doc();
    doc["iterations"][0]["kind"] = "MYSTERY";
    CHECK(kind_of(doc) == ErrorKind::ConfigError);

    doc = small_plan_doc();
    doc["cohort"]["site_b"]["shifted_features"] = 99;
    CHECK(kind_of(doc) == ErrorKind::ConfigError);

    doc = small_plan_doc();
    doc["cohort"]["score_sd"] = 0.0;
    CHECK(kind_of(doc) == ErrorKind::ConfigError);

    doc = small_plan_doc();
    doc.erase("iterations");
    CHECK(kind_of(doc) == ErrorKind::ConfigError);
}

TEST_CASE("the shipped default plan is well-formed and bounded") {
    auto plan = sim::load_plan(kSourceDir + "/plans/default_sepsis.json");
    CHECK(plan.name == "default-sepsis-lifecycle");
    REQUIRE(plan.scenarios.size() == 9);
    std::size_t total = plan.cohort.pool_size;
    for (std::size_t i = 0; i < plan.scenarios.size(); ++i) {
        CHECK(plan.scenarios[i].iteration == static_cast<int>(i) + 1);
        total += static_cast<std::size_t>(plan.scenarios[i].n_records);
    }
    CHECK(total <= 50000);
}

TEST_CASE("replay csv reader handles the published trace layouts") {
    SUBCASE("four-category trace") {
        auto rows = sim::read_replay_csv(kSourceDir + "/data/sepsis_trace.csv");
        REQUIRE(rows.size() == 11);
        CHECK(rows[0].iteration == 0);
        CHECK(rows[0].internal_metrics.at("sensitivity") == doctest::Approx(0.723));
        CHECK(rows[0].internal_metrics.at("mlcps") == doctest::Approx(0.721));
        REQUIRE(rows[0].drift_score.has_value());
        CHECK(rows[6].drift_score.value() == doctest::Approx(0.412));
        CHECK(rows[0].field_metrics.empty());
    }
    SUBCASE("field-column trace with an absent trailing cell") {
        auto rows = sim::read_replay_csv(kSourceDir + "/data/segmentation_trace.csv");
        REQUIRE(rows.size() == 12);
        CHECK(rows[0].internal_metrics.at("dice") == doctest::Approx(0.646));
        CHECK(rows[0].field_metrics.at("dice") == doctest::Approx(0.694));
        CHECK_FALSE(rows[0].drift_score.has_value());
        // Row 12 has no field measurement: the cell is empty, not zero.
        CHECK(rows[11].iteration == 12);
        CHECK(rows[11].field_metrics.empty());
    }
    SUBCASE("malformed tables are rejected with the offending line") {
        TempDir tmp;
        auto path = tmp.file("bad.csv");
        {
            std::ofstream out(path);
            out << "sensitivity,specificity\n0.7,0.9\n";
        }
        CHECK_THROWS_AS(sim::read_replay_csv(path), Error);

        {
            std::ofstream out(path);
            out << "iteration,sensitivity\n0,not-a-number\n";
        }
        try {
            sim::read_replay_csv(path);
            FAIL("expected SchemaError");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::SchemaError);
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
}

TEST_CASE("replay refuses rows missing a gated metric") {
    TempDir tmp;
    auto cfg = load_config(kSourceDir + "/configs/sepsis.json");
    auto path = tmp.file("partial.csv");
    {
        std::ofstream out(path);
        // No specificity column, but the profile's buffer gates on it.
        out << "iteration,sensitivity,drift_score\n0,0.723,0.0\n";
    }
    auto rows = sim::read_replay_csv(path);
    audit::AuditLog log(tmp.file("audit.jsonl"), cfg.config_hash);
    CHECK_THROWS_AS(sim::replay_table(rows, cfg, log), Error);
}

TEST_CASE("replaying the published sepsis trace reproduces its decisions") {
    TempDir tmp;
    auto cfg = load_config(kSourceDir + "/configs/sepsis.json");
    auto rows = sim::read_replay_csv(kSourceDir + "/data/sepsis_trace.csv");
    audit::AuditLog log(tmp.file("audit.jsonl"), cfg.config_hash);
    auto decisions = sim::replay_table(rows, cfg, log, true);
    REQUIRE(decisions.size() == 11);

    const std::vector<Category> expected = {
        Category::APPROVE, Category::APPROVE, Category::APPROVE,
        Category::APPROVE, Category::APPROVE, Category::APPROVE,
        Category::CONDITIONAL_APPROVAL, Category::CLINICAL_REVIEW,
        Category::APPROVE, Category::APPROVE, Category::REJECT};
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        CHECK(decisions[i].category == expected[i]);
        CHECK(decisions[i].alarm == (i == 8 || i == 10));
    }
    // Recomputed composites must stay inside the published tolerance.
    auto entries = audit::verify_log(log.path());
    for (const auto& e : entries) {
        if (e.entry_kind != "SNAPSHOT") continue;
        if (e.payload.value("role", std::string()) != "candidate_internal") continue;
        auto it = e.payload["iteration"].get<std::size_t>();
        double got = e.payload["snapshot"]["metrics"]["mlcps"].get<double>();
        CHECK(std::fabs(got - rows[it].internal_metrics.at("mlcps")) <= 0.01);
    }
}

TEST_CASE("lifecycle runs are reproducible to the byte and reject corrupted estates") {
    TempDir tmp;
    auto plan = sim::plan_from_json(small_plan_doc());
    auto cfg = lifecycle_cfg();

    auto run_once = [&](const std::string& name) {
        audit::AuditLog log(tmp.file(name), cfg.config_hash);
        return sim::run_lifecycle(plan, cfg, log, 9001, 25);
    };
    auto result_a = run_once("a.jsonl");
    auto result_b = run_once("b.jsonl");

    REQUIRE(result_a.decisions.size() == 3); // baseline plus two scenarios
    CHECK(slurp(tmp.file("a.jsonl")) == slurp(tmp.file("b.jsonl")));
    for (std::size_t i = 0; i < result_a.decisions.size(); ++i) {
        CHECK(result_a.decisions[i].category == result_b.decisions[i].category);
        REQUIRE(result_a.decisions[i].confidence.has_value());
        CHECK(result_a.decisions[i].confidence.value() ==
              doctest::Approx(result_b.decisions[i].confidence.value()));
    }

    // The crippled candidate of iteration 2 cannot clear the floor.
    CHECK(result_a.decisions[2].category == Category::REJECT);

    // Golden evaluation data never moves between iterations of one model.
    const auto& d0 = result_a.decisions[0];
    const auto& d1 = result_a.decisions[1];
    CHECK(d0.artifacts.at("golden_fingerprint") == d1.artifacts.at("golden_fingerprint"));
    CHECK(d1.artifacts.at("incoming_fingerprint") != d1.artifacts.at("golden_fingerprint"));
    CHECK(d1.artifacts.at("scenario") == "STATIONARY");
    CHECK(result_a.decisions[2].artifacts.at("scenario") == "CATASTROPHIC");

    // Training accumulates between iterations whatever the verdicts were.
    CHECK(d1.artifacts.at("training_fingerprint") !=
          result_a.decisions[2].artifacts.at("training_fingerprint"));
}

TEST_CASE("the audit log's reference updates replay into the reference trail") {
    TempDir tmp;
    auto plan = sim::plan_from_json(small_plan_doc());
    auto cfg = lifecycle_cfg();
    audit::AuditLog log(tmp.file("audit.jsonl"), cfg.config_hash);
    auto result = sim::run_lifecycle(plan, cfg, log, 9001, 0);

    std::vector<std::pair<std::int64_t, ReferenceState>> from_log;
    for (const auto& e : audit::verify_log(log.path())) {
        if (e.entry_kind != "REFERENCE_UPDATE") continue;
        from_log.emplace_back(e.payload["iteration"].get<std::int64_t>(),
                              references_from_json(e.payload["references"]));
    }
    REQUIRE(from_log.size() == result.reference_trail.size());
    REQUIRE_FALSE(from_log.empty()); // the healthy baseline approves
    for (std::size_t i = 0; i < from_log.size(); ++i) {
        CHECK(from_log[i].first == result.reference_trail[i].first);
        const auto& logged = from_log[i].second;
        const auto& live = result.reference_trail[i].second;
        REQUIRE(logged.released_internal.has_value());
        CHECK(logged.released_internal->sensitivity.value() ==
              doctest::Approx(live.released_internal->sensitivity.value()));
        CHECK(logged.last_approved_iteration.value() ==
              live.last_approved_iteration.value());
        CHECK(logged.fixed->sensitivity.value() ==
              doctest::Approx(live.fixed->sensitivity.value()));
    }
}

TEST_CASE("seed changes move the whole lifecycle") {
    TempDir tmp;
    auto plan = sim::plan_from_json(small_plan_doc());
    auto cfg = lifecycle_cfg();
    audit::AuditLog log_a(tmp.file("a.jsonl"), cfg.config_hash);
    audit::AuditLog log_b(tmp.file("b.jsonl"), cfg.config_hash);
    sim::run_lifecycle(plan, cfg, log_a, 1, 0);
    sim::run_lifecycle(plan, cfg, log_b, 2, 0);
    CHECK(slurp(tmp.file("a.jsonl")) != slurp(tmp.file("b.jsonl")));
}
