#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "modelgate/config.hpp"
#include "modelgate/decision.hpp"
#include "modelgate/errors.hpp"

using namespace modelgate;

namespace {

GovernanceConfig floor_and_buffer_cfg() {
    nlohmann::json doc = {
        {"name", "unit-bootstrap"},
        {"p_fail", {{"sensitivity", 0.65}}},
        {"buffer_zone", {{"sensitivity", 0.66}}},
    };
    return parse_config(doc);
}

PredictionRecord make_record(const std::string& id, int label, double score) {
    PredictionRecord r;
    r.patient_id = id;
    r.label = label;
    r.score = score;
    return r;
}

} // namespace

TEST_CASE("confidence is exactly one when every resample reproduces the point decision") {
    auto cfg = floor_and_buffer_cfg();
    ConfidenceInputs in;
    // Every patient carries one clear positive and one clear negative row,
    // so every patient-level resample keeps both classes and perfect
    // separation: no replicate can disagree.
    for (int i = 0; i < 5; ++i) {
        in.candidate_internal.push_back(make_record("P" + std::to_string(i), 1, 0.95));
        in.candidate_internal.push_back(make_record("P" + std::to_string(i), 0, 0.05));
    }
    ReferenceState refs;
    auto res = decision_confidence(in, refs, cfg, 400, 7);
    CHECK(res.point_category == Category::APPROVE);
    CHECK(res.confidence == doctest::Approx(1.0));
    CHECK(res.replicates == 400);

    // Same construction pinned below the floor: a stable REJECT.
    ConfidenceInputs bad;
    for (int i = 0; i < 5; ++i) {
        bad.candidate_internal.push_back(make_record("P" + std::to_string(i), 1, 0.10));
        bad.candidate_internal.push_back(make_record("P" + std::to_string(i), 0, 0.05));
    }
    auto rejected = decision_confidence(bad, refs, cfg, 400, 7);
    CHECK(rejected.point_category == Category::REJECT);
    CHECK(rejected.confidence == doctest::Approx(1.0));
}

TEST_CASE("confidence tracks the exhaustive resample enumeration on a tiny cohort") {
    // Three patients: two positives (one detected, one missed) and one
    // negative. All 27 ordered patient draws are enumerable by hand, so the
    // replicate agreement rate has a known limit.
    auto cfg = floor_and_buffer_cfg();
    ConfidenceInputs in;
    in.candidate_internal.push_back(make_record("A", 1, 0.9));
    in.candidate_internal.push_back(make_record("B", 1, 0.3));
    in.candidate_internal.push_back(make_record("C", 0, 0.1));
    ReferenceState refs;

    // Independent enumeration. Draws missing a class are degenerate
    // replicates and count as disagreement by contract.
    int matches = 0, total = 0;
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y)
            for (int z = 0; z < 3; ++z) {
                int a = (x == 0) + (y == 0) + (z == 0);
                int b = (x == 1) + (y == 1) + (z == 1);
                int c = (x == 2) + (y == 2) + (z == 2);
                ++total;
                if (c == 0 || a + b == 0) continue; // degenerate: mismatch
                double sens = static_cast<double>(a) / (a + b);
                Category cat = sens < 0.65   ? Category::REJECT
                               : sens < 0.66 ? Category::CLINICAL_REVIEW
                                             : Category::APPROVE;
                if (cat == Category::REJECT) ++matches;
            }
    REQUIRE(total == 27);
    const double expected = static_cast<double>(matches) / 27.0;

    const int replicates = 3000;
    auto res = decision_confidence(in, refs, cfg, replicates, 42);
    CHECK(res.point_category == Category::REJECT);
    // Binomial(3000, p) stays within 5 sigma of p for any realistic run.
    double sigma = std::sqrt(expected * (1.0 - expected) / replicates);
    CHECK(std::fabs(res.confidence - expected) <= 5.0 * sigma);

    // Deterministic for a seed, and seed-sensitive in the replicate draw.
    auto res2 = decision_confidence(in, refs, cfg, replicates, 42);
    CHECK(res2.confidence == doctest::Approx(res.confidence));
    auto res3 = decision_confidence(in, refs, cfg, replicates, 43);
    CHECK(std::fabs(res3.confidence - expected) <= 5.0 * sigma);
}

TEST_CASE("degenerate replicates count against agreement rather than being redrawn") {
    // One clear positive patient, one clear negative: of the four equally
    // likely two-patient draws, the two single-class ones must count as
    // mismatches, pinning the agreement near one half. A redraw policy
    // would push it to one.
    auto cfg = floor_and_buffer_cfg();
    ConfidenceInputs in;
    in.candidate_internal.push_back(make_record("P", 1, 0.9));
    in.candidate_internal.push_back(make_record("N", 0, 0.1));
    ReferenceState refs;
    const int replicates = 2000;
    auto res = decision_confidence(in, refs, cfg, replicates, 11);
    CHECK(res.point_category == Category::APPROVE);
    double sigma = std::sqrt(0.25 / replicates);
    CHECK(std::fabs(res.confidence - 0.5) <= 5.0 * sigma);
}

TEST_CASE("confidence input validation") {
    auto cfg = floor_and_buffer_cfg();
    ReferenceState refs;
    ConfidenceInputs in;
    in.candidate_internal.push_back(make_record("P", 1, 0.9));
    in.candidate_internal.push_back(make_record("N", 0, 0.1));
    try {
        decision_confidence(in, refs, cfg, 0, 1);
        FAIL("expected DomainError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DomainError);
    }
    ConfidenceInputs empty;
    try {
        decision_confidence(empty, refs, cfg, 10, 1);
        FAIL("expected EmptyDataset");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyDataset);
    }
}

TEST_CASE("noninferiority verdicts on separable samples") {
    std::vector<PredictionRecord> records;
    for (int i = 0; i < 30; ++i) {
        records.push_back(make_record("P" + std::to_string(i), 1, 0.9));
        records.push_back(make_record("N" + std::to_string(i), 0, 0.1));
    }

    SUBCASE("clearly superior sample is noninferior but not equivalent") {
        auto res = noninferiority_test(records, "sensitivity", 0.5, 0.02, 0.05, 0.5, 300, 5);
        CHECK(res.point_delta == doctest::Approx(0.5));
        CHECK(res.ci_low == doctest::Approx(0.5));
        CHECK(res.ci_high == doctest::Approx(0.5));
        CHECK(res.non_inferior);
        CHECK_FALSE(res.equivalent);
        CHECK(std::string(noninferiority_verdict(res)) == "NON_INFERIOR");
    }
    SUBCASE("zero delta everywhere is equivalent") {
        auto res = noninferiority_test(records, "sensitivity", 1.0, 0.02, 0.05, 0.5, 300, 5);
        CHECK(res.non_inferior);
        CHECK(res.equivalent);
        CHECK(std::string(noninferiority_verdict(res)) == "EQUIVALENT");
    }
    SUBCASE("a full regression fails") {
        std::vector<PredictionRecord> broken;
        for (int i = 0; i < 30; ++i) {
            broken.push_back(make_record("P" + std::to_string(i), 1, 0.1));
            broken.push_back(make_record("N" + std::to_string(i), 0, 0.05));
        }
        auto res = noninferiority_test(broken, "sensitivity", 1.0, 0.02, 0.05, 0.5, 300, 5);
        CHECK(res.point_delta == doctest::Approx(-1.0));
        CHECK_FALSE(res.non_inferior);
        CHECK_FALSE(res.equivalent);
        CHECK(std::string(noninferiority_verdict(res)) == "FAIL");
    }
}

TEST_CASE("noninferiority interval behaviour on a mixed sample") {
    std::vector<PredictionRecord> records;
    for (int i = 0; i < 20; ++i) {
        records.push_back(make_record("P" + std::to_string(i), 1, i < 10 ? 0.9 : 0.3));
        records.push_back(make_record("N" + std::to_string(i), 0, 0.1));
    }
    auto res = noninferiority_test(records, "sensitivity", 0.5, 0.05, 0.05, 0.5, 500, 21);
    CHECK(res.point_delta == doctest::Approx(0.0));
    CHECK(res.ci_low <= res.ci_high);
    CHECK(res.ci_low <= 0.0 + 1e-12);
    CHECK(res.ci_high >= 0.0 - 1e-12);
    CHECK(res.replicates == 500);

    auto res2 = noninferiority_test(records, "sensitivity", 0.5, 0.05, 0.05, 0.5, 500, 21);
    CHECK(res2.ci_low == doctest::Approx(res.ci_low));
    CHECK(res2.ci_high == doctest::Approx(res.ci_high));

    // A looser confidence level trims the percentile interval inward.
    auto narrow = noninferiority_test(records, "sensitivity", 0.5, 0.05, 0.40, 0.5, 500, 21);
    CHECK(narrow.ci_low >= res.ci_low - 1e-12);
    CHECK(narrow.ci_high <= res.ci_high + 1e-12);
}

TEST_CASE("noninferiority input validation") {
    std::vector<PredictionRecord> records{make_record("P", 1, 0.9), make_record("N", 0, 0.1)};
    auto kind_of = [&](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.kind();
        }
        FAIL("expected an error");
        return ErrorKind::DomainError;
    };
    CHECK(kind_of([&] { noninferiority_test(records, "sensitivity", 0.5, 0.0, 0.05, 0.5, 10, 1); }) ==
          ErrorKind::DomainError);
    CHECK(kind_of([&] { noninferiority_test(records, "sensitivity", 0.5, 0.02, 1.0, 0.5, 10, 1); }) ==
          ErrorKind::DomainError);
    CHECK(kind_of([&] { noninferiority_test(records, "sensitivity", 0.5, 0.02, 0.05, 0.5, 0, 1); }) ==
          ErrorKind::DomainError);
    CHECK(kind_of([&] { noninferiority_test({}, "sensitivity", 0.5, 0.02, 0.05, 0.5, 10, 1); }) ==
          ErrorKind::EmptyDataset);
    // A metric the sample cannot produce is rejected up front.
    CHECK(kind_of([&] { noninferiority_test(records, "dice", 0.5, 0.02, 0.05, 0.5, 10, 1); }) ==
          ErrorKind::DomainError);
}
