#include "modelgate/drift.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>

#include "modelgate/errors.hpp"
#include "modelgate/metrics.hpp"

namespace modelgate::drift {

namespace {

constexpr std::size_t kExactLimit = 32; // pooled size bound for the permutation branch

// Integer numerator of the KS statistic: max |i*n_b - j*n_a| over the
// pooled sweep; D = numerator / (n_a * n_b). Inputs must be sorted.
std::int64_t ks_numerator_sorted(const std::vector<double>& a, const std::vector<double>& b) {
    const std::int64_t na = static_cast<std::int64_t>(a.size());
    const std::int64_t nb = static_cast<std::int64_t>(b.size());
    std::size_t i = 0, j = 0;
    std::int64_t best = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        best = std::max(best, std::abs(static_cast<std::int64_t>(i) * nb -
                                       static_cast<std::int64_t>(j) * na));
    }
    return best;
}

// Exact permutation tail probability P(D >= observed) under relabeling of
// the pooled multiset. Dynamic program over distinct pooled values; state
// is (items assigned to A so far, deviation already reached observed).
// Path counts fit a double exactly for pooled sizes up to kExactLimit.
double ks_exact_p(const std::vector<double>& a_sorted, const std::vector<double>& b_sorted,
                  std::int64_t observed_numerator) {
    const std::int64_t na = static_cast<std::int64_t>(a_sorted.size());
    const std::int64_t nb = static_cast<std::int64_t>(b_sorted.size());

    // Pooled multiset as (value -> count), ordered.
    std::map<double, std::int64_t> groups;
    for (double v : a_sorted) ++groups[v];
    for (double v : b_sorted) ++groups[v];

    // ways[taken_a][reached] = number of prefix assignments.
    std::vector<std::array<double, 2>> ways(static_cast<std::size_t>(na) + 1, {0.0, 0.0});
    std::vector<std::array<double, 2>> next(static_cast<std::size_t>(na) + 1, {0.0, 0.0});
    ways[0][observed_numerator <= 0 ? 1 : 0] = 1.0;

    // Binomial table for per-group assignment multiplicity.
    std::vector<std::vector<double>> binom(kExactLimit + 1, std::vector<double>(kExactLimit + 1, 0.0));
    for (std::size_t n = 0; n <= kExactLimit; ++n) {
        binom[n][0] = 1.0;
        for (std::size_t k = 1; k <= n; ++k) {
            binom[n][k] = binom[n - 1][k - 1] + (k <= n - 1 ? binom[n - 1][k] : 0.0);
        }
    }

    std::int64_t consumed = 0;
    for (const auto& [value, count] : groups) {
        (void)value;
        for (auto& row : next) row = {0.0, 0.0};
        consumed += count;
        for (std::int64_t ta = 0; ta <= na; ++ta) {
            for (int reached = 0; reached < 2; ++reached) {
                double w = ways[static_cast<std::size_t>(ta)][reached];
                if (w == 0.0) continue;
                std::int64_t take_max = std::min(count, na - ta);
                for (std::int64_t take = 0; take <= take_max; ++take) {
                    std::int64_t i = ta + take;            // A items consumed
                    std::int64_t j = consumed - i;          // B items consumed
                    if (j < 0 || j > nb) continue;
                    std::int64_t dev = std::abs(i * nb - j * na);
                    int r = (reached || dev >= observed_numerator) ? 1 : 0;
                    next[static_cast<std::size_t>(i)][r] +=
                        w * binom[static_cast<std::size_t>(count)][static_cast<std::size_t>(take)];
                }
            }
        }
        ways.swap(next);
    }

    double reached = ways[static_cast<std::size_t>(na)][1];
    double total = ways[static_cast<std::size_t>(na)][0] + reached;
    return total > 0.0 ? reached / total : 1.0;
}

} // namespace

double ks_asymptotic_p(double statistic, std::size_t n_a, std::size_t n_b) {
    if (n_a == 0 || n_b == 0) raise(ErrorKind::EmptyDataset, "ks_asymptotic_p: empty sample");
    if (statistic <= 0.0) return 1.0;
    double ne = static_cast<double>(n_a) * static_cast<double>(n_b) /
                static_cast<double>(n_a + n_b);
    double sq = std::sqrt(ne);
    double lambda = (sq + 0.12 + 0.11 / sq) * statistic;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j < 1000; ++j) {
        double term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
        if (term < 1e-10) break;
        sum += sign * term;
        sign = -sign;
    }
    return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) raise(ErrorKind::EmptyDataset, "ks_two_sample: empty sample");
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    KsResult result;
    result.n_a = sa.size();
    result.n_b = sb.size();
    std::int64_t numerator = ks_numerator_sorted(sa, sb);
    result.statistic = static_cast<double>(numerator) /
                       (static_cast<double>(sa.size()) * static_cast<double>(sb.size()));
    if (sa.size() + sb.size() <= kExactLimit) {
        result.exact = true;
        result.p_value = ks_exact_p(sa, sb, numerator);
    } else {
        result.exact = false;
        result.p_value = ks_asymptotic_p(result.statistic, sa.size(), sb.size());
    }
    return result;
}

DriftBand classify_drift(double score, const DriftBands& bands) {
    if (!(score >= 0.0 && score <= 1.0)) {
        raise(ErrorKind::DomainError, "drift score outside [0,1]");
    }
    if (score > bands.major) return DriftBand::MAJOR;
    if (score >= bands.minor_lo && score <= bands.minor_hi) return DriftBand::MINOR;
    return DriftBand::NONE;
}

const char* band_name(DriftBand band) {
    switch (band) {
        case DriftBand::NONE: return "NONE";
        case DriftBand::MINOR: return "MINOR";
        case DriftBand::MAJOR: return "MAJOR";
    }
    return "NONE";
}

DriftReport drift_report(const std::vector<std::vector<double>>& reference,
                         const std::vector<std::vector<double>>& incoming,
                         const std::vector<std::string>& names, double alpha,
                         const DriftBands& bands, const std::vector<std::size_t>& monitored) {
    if (reference.size() != incoming.size()) {
        raise(ErrorKind::SchemaError, "drift_report: reference/incoming column count mismatch");
    }
    if (reference.empty()) raise(ErrorKind::SchemaError, "drift_report: no feature columns");
    if (!(alpha > 0.0 && alpha < 1.0)) raise(ErrorKind::DomainError, "drift_report: bad alpha");

    std::vector<std::size_t> cols = monitored;
    if (cols.empty()) {
        cols.resize(reference.size());
        for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
    }
    for (std::size_t c : cols) {
        if (c >= reference.size()) {
            raise(ErrorKind::ConfigError, "drift_report: monitored column out of range");
        }
    }

    DriftReport report;
    report.alpha = alpha;
    report.monitored = cols.size();
    const double per_column_alpha = alpha / static_cast<double>(cols.size());
    for (std::size_t c : cols) {
        ColumnDrift col;
        col.column = c;
        col.name = c < names.size() ? names[c] : "f" + std::to_string(c);
        col.ks = ks_two_sample(reference[c], incoming[c]);
        col.significant = col.ks.p_value < per_column_alpha;
        if (col.significant) ++report.significant;
        report.columns.push_back(std::move(col));
    }
    report.score = static_cast<double>(report.significant) /
                   static_cast<double>(report.monitored);
    report.band = classify_drift(report.score, bands);
    return report;
}

std::vector<std::vector<double>> feature_columns(const std::vector<PredictionRecord>& records) {
    if (records.empty()) raise(ErrorKind::EmptyDataset, "feature_columns: no records");
    const std::size_t k = records.front().features.size();
    for (const auto& rec : records) {
        if (rec.features.size() != k) {
            raise(ErrorKind::SchemaError, "feature_columns: ragged feature rows");
        }
    }
    std::vector<std::vector<double>> cols(k);
    for (auto& col : cols) col.reserve(records.size());
    for (const auto& rec : records) {
        for (std::size_t i = 0; i < k; ++i) cols[i].push_back(rec.features[i]);
    }
    return cols;
}

BiasReport bias_score(const std::vector<PredictionRecord>& records, double threshold) {
    if (records.empty()) raise(ErrorKind::EmptyDataset, "bias_score: no records");
    std::map<std::string, std::vector<PredictionRecord>> by_group;
    for (const auto& rec : records) by_group[rec.subgroup].push_back(rec);
    if (by_group.size() < 2) {
        raise(ErrorKind::DomainError, "bias_score: need at least two distinct subgroups");
    }

    BiasReport report;
    for (const auto& [tag, recs] : by_group) {
        GroupMetrics g;
        g.subgroup = tag;
        g.n = recs.size();
        auto m = metrics::binary_metrics(metrics::confusion_counts(recs, threshold));
        g.sensitivity = m.sensitivity;
        g.specificity = m.specificity;
        if (!g.sensitivity) report.excluded.push_back(tag);
        report.groups.push_back(std::move(g));
    }

    for (const auto& gi : report.groups) {
        if (!gi.sensitivity) continue;
        for (const auto& gj : report.groups) {
            if (!gj.sensitivity) continue;
            double gap = *gi.sensitivity - *gj.sensitivity;
            if (gap > report.bias_score) {
                report.bias_score = gap;
                report.widest_pair_high = gi.subgroup;
                report.widest_pair_low = gj.subgroup;
            }
        }
    }
    return report;
}

} // namespace modelgate::drift
