#include "modelgate/ledger.hpp"

#include <algorithm>
#include <cmath>

#include "modelgate/errors.hpp"
#include "modelgate/hashing.hpp"

namespace modelgate::ledger {

bool BatchManifest::same_provenance(const BatchManifest& other) const {
    return batch_id == other.batch_id && source == other.source &&
           window_start == other.window_start && window_end == other.window_end &&
           labelling_method == other.labelling_method && reviewers == other.reviewers &&
           n_records == other.n_records && quarantined == other.quarantined;
}

BatchManifest register_batch(const std::vector<PredictionRecord>& records,
                             const std::string& source, const std::string& window_start,
                             const std::string& window_end, const std::string& labelling_method,
                             const std::vector<std::string>& reviewers,
                             const std::string& registered_at,
                             const std::set<std::string>& quarantined) {
    if (records.empty()) raise(ErrorKind::EmptyDataset, "register_batch: no records");
    BatchManifest m;
    m.batch_id = fingerprint(records);
    m.source = source;
    m.window_start = window_start;
    m.window_end = window_end;
    m.labelling_method = labelling_method;
    m.reviewers = reviewers;
    m.registered_at = registered_at;
    m.n_records = records.size();
    m.quarantined = quarantined;
    return m;
}

bool BatchRegistry::add(const BatchManifest& manifest) {
    auto it = entries_.find(manifest.batch_id);
    if (it == entries_.end()) {
        entries_.emplace(manifest.batch_id, manifest);
        return true;
    }
    if (!it->second.same_provenance(manifest)) {
        raise(ErrorKind::ConflictError,
              "batch " + manifest.batch_id.substr(0, 12) +
                  " already registered with different provenance");
    }
    return false;
}

namespace {

std::string set_fingerprint(const std::set<std::string>& ids) {
    return fingerprint_ids(std::vector<std::string>(ids.begin(), ids.end()));
}

} // namespace

std::string SplitLedger::golden_fingerprint() const { return set_fingerprint(golden); }
std::string SplitLedger::training_fingerprint() const { return set_fingerprint(training); }
std::string SplitLedger::drifting_fingerprint() const { return set_fingerprint(drifting); }

InitialSplit assign_splits(const std::vector<std::string>& patient_ids, double golden_fraction,
                           double initial_training_fraction, std::uint64_t seed) {
    if (patient_ids.empty()) raise(ErrorKind::EmptyDataset, "assign_splits: no patients");
    if (!(golden_fraction > 0.0 && golden_fraction < 1.0)) {
        raise(ErrorKind::DomainError, "assign_splits: golden_fraction outside (0,1)");
    }
    if (!(initial_training_fraction >= 0.0 && initial_training_fraction <= 1.0)) {
        raise(ErrorKind::DomainError, "assign_splits: initial_training_fraction outside [0,1]");
    }

    std::vector<std::string> unique = patient_ids;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

    // Rank by keyed hash: deterministic, order-independent, and the golden
    // size is exactly round(fraction * n) rather than binomially scattered.
    std::vector<std::pair<std::uint64_t, std::string>> ranked;
    ranked.reserve(unique.size());
    for (const auto& id : unique) {
        ranked.emplace_back(splitmix64(fnv1a64(id) ^ seed), id);
    }
    std::sort(ranked.begin(), ranked.end());

    const std::size_t n = ranked.size();
    std::size_t n_golden = static_cast<std::size_t>(
        std::llround(golden_fraction * static_cast<double>(n)));
    n_golden = std::min(std::max<std::size_t>(n_golden, 1), n - 1);

    InitialSplit split;
    for (std::size_t i = 0; i < n_golden; ++i) split.ledger.golden.insert(ranked[i].second);

    const std::size_t remaining = n - n_golden;
    std::size_t n_training = static_cast<std::size_t>(
        std::llround(initial_training_fraction * static_cast<double>(remaining)));
    for (std::size_t i = n_golden; i < n; ++i) {
        if (i - n_golden < n_training) {
            split.ledger.training.insert(ranked[i].second);
        } else {
            split.reserve.push_back(ranked[i].second);
        }
    }
    split.ledger.iteration = 0;
    return split;
}

void stage_drifting(SplitLedger& ledger, const std::vector<std::string>& patient_ids,
                    const std::set<std::string>& quarantined) {
    if (patient_ids.empty()) raise(ErrorKind::EmptyDataset, "stage_drifting: empty batch");
    std::set<std::string> staged;
    for (const auto& id : patient_ids) {
        if (quarantined.count(id)) continue;
        if (ledger.golden.count(id)) {
            raise(ErrorKind::ContaminationError,
                  "patient " + id + " is in the golden set and cannot enter drifting");
        }
        staged.insert(id);
    }
    if (staged.empty()) {
        raise(ErrorKind::EmptyDataset, "stage_drifting: batch fully quarantined");
    }
    ledger.drifting = std::move(staged);
}

void accumulate(SplitLedger& ledger) {
    if (ledger.drifting.empty()) {
        raise(ErrorKind::EmptyDataset, "accumulate: no staged drifting batch");
    }
    for (const auto& id : ledger.drifting) {
        if (ledger.golden.count(id)) {
            raise(ErrorKind::ContaminationError,
                  "patient " + id + " is in the golden set and cannot enter training");
        }
        ledger.training.insert(id);
    }
    ledger.drifting.clear();
    ledger.iteration += 1;
}

} // namespace modelgate::ledger
