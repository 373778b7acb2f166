#pragma once

#include <optional>
#include <string>
#include <vector>

namespace modelgate {

// One scored case. `label` is ground truth (1 = positive class), `score`
// the model output in [0, 1]. `subgroup` is an optional fairness tag;
// `features` carries the monitored input columns for drift checks.
struct PredictionRecord {
    std::string patient_id;
    int label = 0;
    double score = 0.0;
    std::string subgroup;
    std::vector<double> features;
};

struct Batch {
    std::vector<PredictionRecord> records;
    std::vector<std::string> feature_names;
    bool has_subgroup = false;
};

// Strict CSV reader for the batch format documented in docs/formats.md:
//   patient_id,label,score[,subgroup][,<feature columns...>]
// Any arity mismatch, bad label, or out-of-range score raises SchemaError.
Batch read_batch_csv(const std::string& path);
void write_batch_csv(const std::string& path, const Batch& batch);

// Shortest decimal string that round-trips the exact double value.
std::string format_double(double v);

// Canonical record order: (patient_id, label, score). Makes every derived
// statistic and fingerprint independent of input order.
void canonical_sort(std::vector<PredictionRecord>& records);

// Content fingerprint over canonically ordered (patient_id, label, score)
// triples. Features and subgroup are provenance, not identity: two datasets
// with the same scored cases fingerprint equal.
std::string fingerprint(const std::vector<PredictionRecord>& records);

// Order-independent fingerprint of a patient-id set.
std::string fingerprint_ids(const std::vector<std::string>& ids);

} // namespace modelgate
