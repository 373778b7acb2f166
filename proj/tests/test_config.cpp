#include <doctest.h>

#include <json.hpp>

#include "modelgate/config.hpp"
#include "modelgate/errors.hpp"

using namespace modelgate;

namespace {

const std::string kSourceDir = MODELGATE_SOURCE_DIR;

nlohmann::json minimal_doc() {
    return nlohmann::json{{"name", "unit"},
                          {"p_fail", {{"sensitivity", 0.65}}}};
}

ErrorKind parse_kind(const nlohmann::json& doc) {
    try {
        parse_config(doc);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected a parse error");
    return ErrorKind::ConfigError;
}

} // namespace

TEST_CASE("shipped sepsis profile carries the published thresholds") {
    auto cfg = load_config(kSourceDir + "/configs/sepsis.json");
    CHECK(cfg.name == "sepsis-early-warning");
    CHECK(cfg.rule_profile == RuleProfile::SEPSIS_STYLE);
    CHECK(cfg.alpha == doctest::Approx(0.05));
    CHECK(cfg.p_fail.at("sensitivity") == doctest::Approx(0.65));
    CHECK(cfg.buffer_zone.at("sensitivity").min == doctest::Approx(0.66));
    CHECK_FALSE(cfg.buffer_zone.at("sensitivity").max.has_value());
    CHECK(cfg.buffer_zone.at("specificity").min == doctest::Approx(0.60));
    CHECK(cfg.ref_tolerance.at("sensitivity") == doctest::Approx(0.015));
    CHECK(cfg.tau.at("sensitivity") == doctest::Approx(0.025));
    CHECK(cfg.fixed_reference.at("sensitivity") == doctest::Approx(0.723));
    CHECK(cfg.effective_pms_floors().at("sensitivity") == doctest::Approx(0.65));
    CHECK(cfg.drift_bands.minor_lo == doctest::Approx(0.30));
    CHECK(cfg.drift_bands.minor_hi == doctest::Approx(0.70));
    CHECK(cfg.drift_bands.major == doctest::Approx(0.90));
    REQUIRE(cfg.mlcps_weights.axes.size() == 4);
    CHECK(cfg.mlcps_weights.axes[0].first == "sensitivity");
    CHECK(cfg.mlcps_weights.axes[0].second == doctest::Approx(1.5));
    CHECK(cfg.mlcps_weights.axes[3].first == "specificity");
    CHECK(cfg.active_categories.size() == 4);
    CHECK(cfg.config_hash.size() == 64);
}

TEST_CASE("shipped segmentation profile runs the reduced gate") {
    auto cfg = load_config(kSourceDir + "/configs/segmentation.json");
    CHECK(cfg.rule_profile == RuleProfile::SEGMENTATION_STYLE);
    CHECK(cfg.p_fail.at("dice") == doctest::Approx(0.676));
    CHECK(cfg.tau.at("dice") == doctest::Approx(0.05));
    CHECK(cfg.fixed_reference.at("dice") == doctest::Approx(0.726));
    CHECK(cfg.alarm_metrics == std::vector<std::string>{"dice"});
    CHECK(cfg.active_categories ==
          std::set<Category>{Category::REJECT, Category::APPROVE});
    CHECK(cfg.category_active(Category::REJECT));
    CHECK_FALSE(cfg.category_active(Category::CLINICAL_REVIEW));
    CHECK_FALSE(cfg.category_active(Category::CONDITIONAL_APPROVAL));
}

TEST_CASE("minimal config fills documented defaults") {
    auto cfg = parse_config(minimal_doc());
    CHECK(cfg.alpha == doctest::Approx(0.05));
    CHECK(cfg.bootstrap_replicates == 500);
    CHECK(cfg.delta_ci == doctest::Approx(0.02));
    CHECK(cfg.operating_threshold == doctest::Approx(0.5));
    CHECK_FALSE(cfg.target_sensitivity.has_value());
    CHECK(cfg.p_pms.empty());
    // Empty surveillance floors fall back to the hard floors.
    CHECK(cfg.effective_pms_floors().at("sensitivity") == doctest::Approx(0.65));
    CHECK(cfg.alarm_metrics == std::vector<std::string>{"sensitivity"});
    CHECK(cfg.active_categories.size() == 4);
    CHECK_FALSE(cfg.tai_threshold.has_value());
    CHECK_FALSE(cfg.monitored_features.has_value());
}

TEST_CASE("unlisted gate thresholds are tagged illustrative with a warning") {
    auto cfg = parse_config(minimal_doc());
    REQUIRE(cfg.hazard_trace.count("p_fail.sensitivity") == 1);
    CHECK(cfg.hazard_trace.at("p_fail.sensitivity") == "illustrative");
    bool warned = false;
    for (const auto& w : cfg.warnings)
        if (w.find("p_fail.sensitivity") != std::string::npos) warned = true;
    CHECK(warned);

    auto doc = minimal_doc();
    doc["hazard_trace"] = {{"p_fail.sensitivity", "HA-112"}};
    auto traced = parse_config(doc);
    CHECK(traced.hazard_trace.at("p_fail.sensitivity") == "HA-112");
    for (const auto& w : traced.warnings)
        CHECK(w.find("p_fail.sensitivity") == std::string::npos);
}

TEST_CASE("config validation rejects malformed profiles") {
    SUBCASE("root must be an object") {
        CHECK(parse_kind(nlohmann::json::array()) == ErrorKind::ConfigError);
    }
    SUBCASE("alpha bounds") {
        auto doc = minimal_doc();
        doc["alpha"] = 0.0;
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
        doc["alpha"] = 1.0;
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("replicates positive") {
        auto doc = minimal_doc();
        doc["bootstrap_replicates"] = 0;
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("unknown rule profile") {
        auto doc = minimal_doc();
        doc["rule_profile"] = "TRIAGE_STYLE";
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("unknown top-level keys are rejected, not ignored") {
        // A typo like "taau" would otherwise leave the real threshold at
        // its default and nobody would notice the gate got weaker.
        auto doc = minimal_doc();
        doc["taau"] = {{"sensitivity", 0.025}};
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("unknown drift keys are rejected") {
        auto doc = minimal_doc();
        doc["drift"] = {{"majer", 0.9}};
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("buffer range must be ordered") {
        auto doc = minimal_doc();
        doc["buffer_zone"] = {{"sensitivity", {{"min", 0.7}, {"max", 0.6}}}};
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("drift minor interval must be ordered") {
        auto doc = minimal_doc();
        doc["drift"] = {{"minor", {0.7, 0.3}}};
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("monitored feature indices must be non-negative") {
        auto doc = minimal_doc();
        doc["drift"] = {{"monitored_features", {0, -1}}};
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("composite needs at least three axes") {
        auto doc = minimal_doc();
        doc["mlcps_weights"] = nlohmann::json::array(
            {nlohmann::json::array({"sensitivity", 1.0}),
             nlohmann::json::array({"specificity", 1.0})});
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("composite weights must be positive") {
        auto doc = minimal_doc();
        doc["mlcps_weights"] = nlohmann::json::array(
            {nlohmann::json::array({"sensitivity", 1.0}),
             nlohmann::json::array({"specificity", 0.0}),
             nlohmann::json::array({"roc_auc", 1.0})});
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("the outer categories cannot be deactivated") {
        auto doc = minimal_doc();
        doc["active_categories"] = {"CLINICAL_REVIEW", "CONDITIONAL_APPROVAL", "APPROVE"};
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
        doc["active_categories"] = {"REJECT", "CLINICAL_REVIEW"};
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("unknown category names are rejected") {
        auto doc = minimal_doc();
        doc["active_categories"] = {"REJECT", "APPROVE", "MAYBE"};
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
    SUBCASE("metric values outside the unit interval are rejected") {
        auto doc = minimal_doc();
        doc["p_fail"] = {{"sensitivity", 1.2}};
        CHECK(parse_kind(doc) == ErrorKind::ConfigError);
    }
}

TEST_CASE("config hash pins the exact document") {
    auto cfg_a = parse_config(minimal_doc());
    auto cfg_b = parse_config(minimal_doc());
    CHECK(cfg_a.config_hash == cfg_b.config_hash);

    auto doc = minimal_doc();
    doc["p_fail"]["sensitivity"] = 0.66;
    auto cfg_c = parse_config(doc);
    CHECK(cfg_c.config_hash != cfg_a.config_hash);
}

TEST_CASE("config serialization preserves the governing parameters") {
    auto cfg = load_config(kSourceDir + "/configs/sepsis.json");
    auto doc = config_to_json(cfg);
    auto round = parse_config(doc);
    CHECK(round.name == cfg.name);
    CHECK(round.rule_profile == cfg.rule_profile);
    CHECK(round.p_fail == cfg.p_fail);
    CHECK(round.tau == cfg.tau);
    CHECK(round.ref_tolerance == cfg.ref_tolerance);
    CHECK(round.fixed_reference == cfg.fixed_reference);
    CHECK(round.buffer_zone.at("sensitivity").min ==
          doctest::Approx(cfg.buffer_zone.at("sensitivity").min));
    CHECK(round.drift_bands.minor_lo == doctest::Approx(cfg.drift_bands.minor_lo));
    CHECK(round.drift_bands.major == doctest::Approx(cfg.drift_bands.major));
    CHECK(round.mlcps_weights.axes == cfg.mlcps_weights.axes);
    CHECK(round.active_categories == cfg.active_categories);
    CHECK(round.alarm_metrics == cfg.alarm_metrics);
}

TEST_CASE("loading a missing or broken file is a config error") {
    CHECK_THROWS_AS(load_config(kSourceDir + "/configs/nonexistent.json"), Error);
    try {
        load_config(kSourceDir + "/configs/nonexistent.json");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }
}
