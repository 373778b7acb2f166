#include "modelgate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "modelgate/errors.hpp"

namespace modelgate::metrics {

namespace {

void require_nonempty(const std::vector<PredictionRecord>& records, const char* op) {
    if (records.empty()) raise(ErrorKind::EmptyDataset, std::string(op) + ": no records");
}

void require_threshold(double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        raise(ErrorKind::DomainError, "threshold outside [0,1]");
    }
}

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

std::optional<double> metric_value(const MetricSnapshot& snap, const std::string& name) {
    if (name == "sensitivity") return snap.sensitivity;
    if (name == "specificity") return snap.specificity;
    if (name == "ppv") return snap.ppv;
    if (name == "npv") return snap.npv;
    if (name == "fnr") return snap.fnr;
    if (name == "fpr") return snap.fpr;
    if (name == "accuracy") return snap.accuracy;
    if (name == "balanced_accuracy") return snap.balanced_accuracy;
    if (name == "f1") return snap.f1;
    if (name == "mcc") return snap.mcc;
    if (name == "kappa") return snap.kappa;
    if (name == "brier") return snap.brier;
    if (name == "roc_auc") return snap.roc_auc;
    if (name == "pr_auc") return snap.pr_auc;
    if (name == "mlcps") return snap.mlcps;
    auto it = snap.extras.find(name);
    if (it != snap.extras.end()) return it->second;
    return std::nullopt;
}

void set_metric(MetricSnapshot& snap, const std::string& name, double value) {
    if (name == "sensitivity") snap.sensitivity = value;
    else if (name == "specificity") snap.specificity = value;
    else if (name == "ppv") snap.ppv = value;
    else if (name == "npv") snap.npv = value;
    else if (name == "fnr") snap.fnr = value;
    else if (name == "fpr") snap.fpr = value;
    else if (name == "accuracy") snap.accuracy = value;
    else if (name == "balanced_accuracy") snap.balanced_accuracy = value;
    else if (name == "f1") snap.f1 = value;
    else if (name == "mcc") snap.mcc = value;
    else if (name == "kappa") snap.kappa = value;
    else if (name == "brier") snap.brier = value;
    else if (name == "roc_auc") snap.roc_auc = value;
    else if (name == "pr_auc") snap.pr_auc = value;
    else if (name == "mlcps") snap.mlcps = value;
    else snap.extras[name] = value;
}

ConfusionCounts confusion_counts(const std::vector<PredictionRecord>& records, double threshold) {
    require_nonempty(records, "confusion_counts");
    require_threshold(threshold);
    ConfusionCounts c;
    for (const auto& rec : records) {
        bool predicted = rec.score >= threshold;
        if (rec.label == 1) {
            predicted ? ++c.tp : ++c.fn;
        } else {
            predicted ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

MetricSnapshot binary_metrics(const ConfusionCounts& c) {
    if (c.total() == 0) raise(ErrorKind::EmptyDataset, "binary_metrics: zero counts");
    MetricSnapshot m;
    m.n_records = static_cast<std::size_t>(c.total());
    m.sensitivity = ratio(c.tp, c.tp + c.fn);
    m.specificity = ratio(c.tn, c.tn + c.fp);
    m.ppv = ratio(c.tp, c.tp + c.fp);
    m.npv = ratio(c.tn, c.tn + c.fn);
    m.fnr = ratio(c.fn, c.tp + c.fn);
    m.fpr = ratio(c.fp, c.tn + c.fp);
    m.accuracy = ratio(c.tp + c.tn, c.total());
    if (m.sensitivity && m.specificity) {
        m.balanced_accuracy = (*m.sensitivity + *m.specificity) / 2.0;
    }
    if (2 * c.tp + c.fp + c.fn > 0) {
        m.f1 = static_cast<double>(2 * c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
    }
    {
        // MCC is undefined when any marginal is empty.
        double a = static_cast<double>(c.tp + c.fp);
        double b = static_cast<double>(c.tp + c.fn);
        double d = static_cast<double>(c.tn + c.fp);
        double e = static_cast<double>(c.tn + c.fn);
        if (a > 0 && b > 0 && d > 0 && e > 0) {
            double num = static_cast<double>(c.tp) * static_cast<double>(c.tn) -
                         static_cast<double>(c.fp) * static_cast<double>(c.fn);
            m.mcc = num / std::sqrt(a * b * d * e);
        }
    }
    {
        double n = static_cast<double>(c.total());
        double po = static_cast<double>(c.tp + c.tn) / n;
        double pe = (static_cast<double>(c.tp + c.fp) * static_cast<double>(c.tp + c.fn) +
                     static_cast<double>(c.fn + c.tn) * static_cast<double>(c.fp + c.tn)) /
                    (n * n);
        if (pe < 1.0) m.kappa = (po - pe) / (1.0 - pe);
    }
    return m;
}

double roc_auc(const std::vector<PredictionRecord>& records) {
    require_nonempty(records, "roc_auc");
    std::int64_t n_pos = 0, n_neg = 0;
    for (const auto& rec : records) (rec.label == 1 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) {
        raise(ErrorKind::SingleClass, "roc_auc: need both classes");
    }

    // Midrank formulation of the pairwise statistic: the numerator
    // 2*wins + ties is integral, so the result matches the O(n^2)
    // pairwise count exactly, not just to rounding.
    std::vector<std::pair<double, int>> by_score;
    by_score.reserve(records.size());
    for (const auto& rec : records) by_score.emplace_back(rec.score, rec.label);
    std::sort(by_score.begin(), by_score.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::int64_t twice_numerator = 0; // 2 * (#wins) + (#ties), accumulated per tie group
    std::int64_t neg_below = 0;
    std::size_t i = 0;
    while (i < by_score.size()) {
        std::size_t j = i;
        std::int64_t pos_here = 0, neg_here = 0;
        while (j < by_score.size() && by_score[j].first == by_score[i].first) {
            (by_score[j].second == 1 ? pos_here : neg_here)++;
            ++j;
        }
        twice_numerator += pos_here * (2 * neg_below + neg_here);
        neg_below += neg_here;
        i = j;
    }
    return static_cast<double>(twice_numerator) / (2.0 * static_cast<double>(n_pos) *
                                                   static_cast<double>(n_neg));
}

double pr_auc(const std::vector<PredictionRecord>& records) {
    require_nonempty(records, "pr_auc");
    std::int64_t n_pos = 0;
    for (const auto& rec : records) n_pos += rec.label == 1 ? 1 : 0;
    if (n_pos == 0) raise(ErrorKind::SingleClass, "pr_auc: no positive records");

    std::vector<std::pair<double, int>> by_score;
    by_score.reserve(records.size());
    for (const auto& rec : records) by_score.emplace_back(rec.score, rec.label);
    std::sort(by_score.begin(), by_score.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    double area = 0.0;
    double prev_recall = 0.0;
    std::int64_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < by_score.size()) {
        std::size_t j = i;
        while (j < by_score.size() && by_score[j].first == by_score[i].first) {
            (by_score[j].second == 1 ? tp : fp)++;
            ++j;
        }
        double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return area;
}

double mlcps(const std::vector<double>& values, const std::vector<double>& weights) {
    if (values.size() != weights.size()) {
        raise(ErrorKind::DomainError, "mlcps: values/weights size mismatch");
    }
    if (values.size() < 3) raise(ErrorKind::DomainError, "mlcps: need at least 3 axes");
    double weight_sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) raise(ErrorKind::DomainError, "mlcps: weights must be positive");
        weight_sum += w;
    }
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) raise(ErrorKind::DomainError, "mlcps: value outside [0,1]");
    }
    double num = 0.0, den = 0.0;
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n; ++i) {
        double theta = 2.0 * std::numbers::pi * weights[i] / weight_sum;
        double s = std::sin(theta);
        num += values[i] * values[(i + 1) % n] * s;
        den += s;
    }
    if (den <= 0.0) raise(ErrorKind::DomainError, "mlcps: degenerate axis layout");
    return num / den;
}

double pick_operating_threshold(const std::vector<PredictionRecord>& records,
                                double target_sensitivity) {
    require_nonempty(records, "pick_operating_threshold");
    if (!(target_sensitivity > 0.0 && target_sensitivity <= 1.0)) {
        raise(ErrorKind::DomainError, "target sensitivity outside (0,1]");
    }
    std::int64_t n_pos = 0;
    for (const auto& rec : records) n_pos += rec.label == 1 ? 1 : 0;
    if (n_pos == 0) raise(ErrorKind::SingleClass, "pick_operating_threshold: no positives");

    std::vector<double> candidates;
    candidates.reserve(records.size());
    for (const auto& rec : records) candidates.push_back(rec.score);
    std::sort(candidates.begin(), candidates.end(), std::greater<>());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // Sensitivity is nonincreasing in the threshold, so the first candidate
    // (descending) that meets the target is the largest one that does.
    double best_threshold = candidates.front();
    double best_sens = -1.0, best_spec = -1.0;
    for (double t : candidates) {
        auto c = confusion_counts(records, t);
        double sens = static_cast<double>(c.tp) / static_cast<double>(n_pos);
        if (sens >= target_sensitivity) return t;
        double spec = c.tn + c.fp > 0
                          ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp)
                          : 1.0;
        if (sens > best_sens || (sens == best_sens && spec > best_spec)) {
            best_sens = sens;
            best_spec = spec;
            best_threshold = t;
        }
    }
    return best_threshold;
}

MetricSnapshot snapshot(const std::vector<PredictionRecord>& records, double threshold,
                        const MlcpsWeights* weights) {
    require_nonempty(records, "snapshot");
    require_threshold(threshold);
    std::vector<PredictionRecord> sorted = records;
    canonical_sort(sorted);

    MetricSnapshot snap = binary_metrics(confusion_counts(sorted, threshold));
    snap.operating_threshold = threshold;
    snap.n_records = sorted.size();
    snap.dataset_fingerprint = fingerprint(sorted);
    snap.roc_auc = roc_auc(sorted);
    snap.pr_auc = pr_auc(sorted);

    double brier = 0.0;
    for (const auto& rec : sorted) {
        double d = rec.score - static_cast<double>(rec.label);
        brier += d * d;
    }
    snap.brier = brier / static_cast<double>(sorted.size());

    if (weights != nullptr && !weights->axes.empty()) {
        std::vector<double> values, ws;
        bool all_present = true;
        for (const auto& [name, w] : weights->axes) {
            auto v = metric_value(snap, name);
            if (!v) {
                all_present = false;
                break;
            }
            values.push_back(*v);
            ws.push_back(w);
        }
        if (all_present) snap.mlcps = mlcps(values, ws);
    }
    return snap;
}

} // namespace modelgate::metrics
