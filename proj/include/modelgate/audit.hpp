#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modelgate/audit_sink.hpp"

namespace modelgate::audit {

inline constexpr int kSchemaVersion = 1;

// Hash of "nothing": the prev pointer of the first entry.
inline const std::string kGenesisHash(64, '0');

// One log line. `entry_hash` is the SHA-256 of the entry's canonical JSON
// with the entry_hash field removed; `prev_entry_hash` is the previous
// entry's hash (genesis hash for the first line). Together they make the
// log a tamper-evident chain.
struct AuditEntry {
    int schema_version = kSchemaVersion;
    std::uint64_t sequence = 0;
    std::string timestamp;
    std::string entry_kind; // BATCH_REGISTERED, SNAPSHOT, DRIFT_REPORT, DECISION, REFERENCE_UPDATE
    nlohmann::json payload;
    std::string config_hash;
    std::string prev_entry_hash;
    std::string entry_hash;
};

nlohmann::json entry_to_json(const AuditEntry& entry);
AuditEntry entry_from_json(const nlohmann::json& doc);

// Hash over everything except entry_hash itself.
std::string compute_entry_hash(const AuditEntry& entry);

// Timestamp source. Injectable so that simulated and replayed runs emit
// byte-identical logs; the epoch clock is the deterministic default for
// anything seeded.
using Clock = std::function<std::string()>;
Clock system_clock_utc();
Clock epoch_clock();

// Append-only hash-chained JSONL log. Opening an existing file verifies
// the whole chain and resumes from its head; any verification failure is
// an IntegrityError naming the first bad line.
class AuditLog : public AuditSink {
  public:
    AuditLog(std::string path, std::string config_hash, Clock clock = epoch_clock());

    // Appends one entry and flushes it before returning. Write failures
    // raise IntegrityError, and the entry does not count as recorded.
    void append(const std::string& kind, const nlohmann::json& payload) override;

    const std::string& path() const { return path_; }
    const std::string& head_hash() const { return head_hash_; }
    std::uint64_t entries() const { return next_sequence_; }

  private:
    std::string path_;
    std::string config_hash_;
    Clock clock_;
    std::string head_hash_ = kGenesisHash;
    std::uint64_t next_sequence_ = 0;
};

// Full-chain verification. Returns the parsed entries; raises
// IntegrityError with a 1-based line number on the first malformed,
// re-hashed-differently, mis-chained, or sequence-gapped entry.
std::vector<AuditEntry> verify_log(const std::string& path);

// Parses without verification (for tooling that reports on damaged logs).
std::vector<AuditEntry> read_log(const std::string& path);

// Plot-ready table: one row per DECISION entry, joined with that
// iteration's candidate internal-set SNAPSHOT and DRIFT_REPORT entries.
// Fixed column block first, then any extra metric names sorted, as
// documented in docs/formats.md.
struct ExportTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

ExportTable export_metrics(const std::vector<AuditEntry>& entries);
void write_export_csv(const std::string& path, const ExportTable& table);
ExportTable read_export_csv(const std::string& path);

} // namespace modelgate::audit
