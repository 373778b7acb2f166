#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "modelgate/records.hpp"

namespace modelgate::ledger {

// Provenance card for an ingested batch. `batch_id` is the content
// fingerprint of the records, so identical content always registers under
// the same id and conflicting provenance for one id is detectable.
struct BatchManifest {
    std::string batch_id;
    std::string source;
    std::string window_start;
    std::string window_end;
    std::string labelling_method;
    std::vector<std::string> reviewers;
    std::string registered_at;
    std::size_t n_records = 0;
    std::set<std::string> quarantined; // patient ids held out of every split

    bool same_provenance(const BatchManifest& other) const;
};

BatchManifest register_batch(const std::vector<PredictionRecord>& records,
                             const std::string& source, const std::string& window_start,
                             const std::string& window_end, const std::string& labelling_method,
                             const std::vector<std::string>& reviewers,
                             const std::string& registered_at,
                             const std::set<std::string>& quarantined = {});

// Registry enforcing id/provenance consistency across re-registrations.
class BatchRegistry {
  public:
    // Returns true when the batch is new, false for an identical re-register.
    // A known id with different provenance raises ConflictError.
    bool add(const BatchManifest& manifest);
    const std::map<std::string, BatchManifest>& manifests() const { return entries_; }

  private:
    std::map<std::string, BatchManifest> entries_;
};

// Patient-id partition of the data estate. The golden set is fixed for the
// lifetime of the ledger; training absorbs each staged batch at
// accumulation time; drifting holds the current incoming batch only.
struct SplitLedger {
    std::set<std::string> golden;
    std::set<std::string> training;
    std::set<std::string> drifting;
    int iteration = 0;

    std::string golden_fingerprint() const;
    std::string training_fingerprint() const;
    std::string drifting_fingerprint() const;
};

struct InitialSplit {
    SplitLedger ledger;               // golden + initial training, iteration 0
    std::vector<std::string> reserve; // remaining pool, for later batches
};

// Deterministic patient-level split. Patients are ranked by a keyed hash of
// their id and the first round(golden_fraction * n) become golden, so the
// golden size matches the requested fraction exactly and the assignment is
// independent of input order. The remaining pool splits into initial
// training and reserve by the same ranking.
InitialSplit assign_splits(const std::vector<std::string>& patient_ids, double golden_fraction,
                           double initial_training_fraction, std::uint64_t seed);

// Stages a batch as the current drifting set. Quarantined ids are skipped;
// any overlap with the golden set is a hard ContaminationError.
void stage_drifting(SplitLedger& ledger, const std::vector<std::string>& patient_ids,
                    const std::set<std::string>& quarantined = {});

// Unconditional accumulation: training absorbs the staged drifting batch,
// the drifting slot empties, the iteration counter advances. Runs whatever
// the deployment decision was.
void accumulate(SplitLedger& ledger);

} // namespace modelgate::ledger
