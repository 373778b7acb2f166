#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "modelgate/records.hpp"

namespace modelgate::drift {

// Two-sample Kolmogorov-Smirnov machinery.
//
// The statistic is the supremum gap between the two right-continuous
// empirical CDFs, evaluated over the pooled sample points. Internally it is
// carried as the integer max |i*n_b - j*n_a|, so tie handling and
// comparisons are exact.
//
// The p-value is exact for small samples (n_a + n_b <= 32): a lattice-path
// count over the pooled value multiset of the fraction of A/B relabelings
// whose statistic reaches the observed one. Beyond that it switches to the
// asymptotic Kolmogorov series with the finite-sample correction
//   lambda = (sqrt(n_e) + 0.12 + 0.11/sqrt(n_e)) * D,  n_e = n_a*n_b/(n_a+n_b),
//   Q(lambda) = 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2),
// truncated once a term falls below 1e-10 and clamped to [0, 1].
struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    bool exact = false; // true when the permutation branch produced p_value
};

KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b);

// The asymptotic evaluator, exposed on its own so the series definition is
// testable independent of the small-sample branch.
double ks_asymptotic_p(double statistic, std::size_t n_a, std::size_t n_b);

enum class DriftBand { NONE, MINOR, MAJOR };

struct DriftBands {
    double minor_lo = 0.30;
    double minor_hi = 0.70; // closed interval [minor_lo, minor_hi]
    double major = 0.90;    // strict: score > major
};

// MAJOR wins if the bands ever overlap; MINOR is the closed interval.
DriftBand classify_drift(double score, const DriftBands& bands);

const char* band_name(DriftBand band);

struct ColumnDrift {
    std::size_t column = 0;
    std::string name;
    KsResult ks;
    bool significant = false; // p < alpha / K (Bonferroni)
};

struct DriftReport {
    std::vector<ColumnDrift> columns;
    std::size_t monitored = 0;   // K
    std::size_t significant = 0; // count of Bonferroni-significant columns
    double score = 0.0;          // significant / K
    DriftBand band = DriftBand::NONE;
    double alpha = 0.05;
};

// Column-wise KS of incoming against reference. Matrices are column-major
// (one vector per feature); both sides must expose the same columns.
// `monitored` selects a subset of column indices; empty means all.
DriftReport drift_report(const std::vector<std::vector<double>>& reference,
                         const std::vector<std::vector<double>>& incoming,
                         const std::vector<std::string>& names, double alpha,
                         const DriftBands& bands, const std::vector<std::size_t>& monitored = {});

// Convenience: feature matrices extracted from record sets.
std::vector<std::vector<double>> feature_columns(const std::vector<PredictionRecord>& records);

struct GroupMetrics {
    std::string subgroup;
    std::size_t n = 0;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
};

struct BiasReport {
    std::vector<GroupMetrics> groups;
    std::vector<std::string> excluded; // groups without a defined sensitivity
    double bias_score = 0.0;           // max pairwise sensitivity gap
    std::string widest_pair_low;
    std::string widest_pair_high;
};

// Subgroup sensitivity-parity screen at a fixed threshold. Needs at least
// two distinct subgroup tags; groups missing a class drop out of the gap
// computation and are listed in `excluded`.
BiasReport bias_score(const std::vector<PredictionRecord>& records, double threshold);

} // namespace modelgate::drift
