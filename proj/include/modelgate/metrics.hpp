#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modelgate/records.hpp"

namespace modelgate::metrics {

// Thresholding rule: a case counts as predicted-positive iff score >= threshold.
// Ties at the threshold are positive by design, everywhere.
struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
};

// Weighted polygon composite over named metric axes. Axis order is
// significant and preserved as configured; raw weights are normalized
// internally into sector angles.
struct MlcpsWeights {
    std::vector<std::pair<std::string, double>> axes;
};

// Immutable evaluation summary of one model on one dataset. Ratio metrics
// with a zero denominator are explicitly absent rather than NaN, and every
// downstream consumer must treat absence as its own state. `extras` carries
// domain metrics outside the fixed field set (for example a segmentation
// overlap score) plus replay passthrough columns.
struct MetricSnapshot {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> ppv;
    std::optional<double> npv;
    std::optional<double> fnr;
    std::optional<double> fpr;
    std::optional<double> accuracy;
    std::optional<double> balanced_accuracy;
    std::optional<double> f1;
    std::optional<double> mcc;
    std::optional<double> kappa;
    std::optional<double> brier;
    std::optional<double> roc_auc;
    std::optional<double> pr_auc;
    std::optional<double> mlcps;
    double operating_threshold = 0.5;
    std::size_t n_records = 0;
    std::string dataset_fingerprint;
    std::map<std::string, double> extras;
};

// Looks a metric up by name across the fixed fields and extras.
std::optional<double> metric_value(const MetricSnapshot& snap, const std::string& name);
void set_metric(MetricSnapshot& snap, const std::string& name, double value);

ConfusionCounts confusion_counts(const std::vector<PredictionRecord>& records, double threshold);

// Fills the ratio metrics derivable from counts alone. 0/0 ratios are absent.
MetricSnapshot binary_metrics(const ConfusionCounts& counts);

// Probability that a random positive ranks above a random negative, ties
// counted 1/2 (pairwise rank statistic). Requires both classes.
double roc_auc(const std::vector<PredictionRecord>& records);

// Area under the precision-recall step curve, swept over the distinct score
// values in descending order: sum of (recall_i - recall_{i-1}) * precision_i.
// No interpolation between steps. Requires at least one positive.
double pr_auc(const std::vector<PredictionRecord>& records);

// Weighted polygon composite in [0, 1]:
//   theta_i = 2*pi*w_i / sum(w),
//   score   = sum_i r_i * r_{i+1} * sin(theta_i) / sum_i sin(theta_i)
// with r_{n+1} = r_1: the polygon area spanned by the metric radii,
// normalized by the area of the unit polygon, so all-ones input scores
// exactly 1 and all-equal values v score v*v. Values and weights must
// pair up, n >= 3, values in [0, 1], weights > 0.
double mlcps(const std::vector<double>& values, const std::vector<double>& weights);

// Largest threshold whose sensitivity meets the target; if none does,
// falls back to the sensitivity-maximizing threshold, ties broken by
// higher specificity. Candidates are the distinct observed scores.
double pick_operating_threshold(const std::vector<PredictionRecord>& records,
                                double target_sensitivity);

// Full evaluation at a threshold. Records are canonicalized first, so the
// result (including the fingerprint) is independent of input order. The
// composite is computed from `weights` when given and every referenced
// axis is available; otherwise it stays absent.
MetricSnapshot snapshot(const std::vector<PredictionRecord>& records, double threshold,
                        const MlcpsWeights* weights = nullptr);

} // namespace modelgate::metrics
