#include "modelgate/audit.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "modelgate/errors.hpp"
#include "modelgate/hashing.hpp"
#include "modelgate/records.hpp"

namespace modelgate::audit {

namespace {

const std::array<const char*, 15> kMetricColumns = {
    "sensitivity", "specificity", "ppv",    "npv",   "fnr",
    "fpr",         "accuracy",    "balanced_accuracy", "f1", "mcc",
    "kappa",       "brier",       "roc_auc", "pr_auc", "mlcps"};

nlohmann::json entry_body(const AuditEntry& entry) {
    nlohmann::json doc;
    doc["schema_version"] = entry.schema_version;
    doc["sequence"] = entry.sequence;
    doc["timestamp"] = entry.timestamp;
    doc["entry_kind"] = entry.entry_kind;
    doc["payload"] = entry.payload;
    doc["config_hash"] = entry.config_hash;
    doc["prev_entry_hash"] = entry.prev_entry_hash;
    return doc;
}

} // namespace

nlohmann::json entry_to_json(const AuditEntry& entry) {
    nlohmann::json doc = entry_body(entry);
    doc["entry_hash"] = entry.entry_hash;
    return doc;
}

AuditEntry entry_from_json(const nlohmann::json& doc) {
    // Closed schema. A lenient reader would let a mutated key fall back to
    // a default value, and a default that happens to match the original
    // (sequence 0, say) would re-canonicalize to the same hash and slip
    // through verification.
    static const std::set<std::string> kKnown = {
        "schema_version", "sequence",    "timestamp",       "entry_kind",
        "payload",        "config_hash", "prev_entry_hash", "entry_hash"};
    if (!doc.is_object()) raise(ErrorKind::SchemaError, "audit entry must be an object");
    for (const auto& item : doc.items())
        if (!kKnown.count(item.key()))
            raise(ErrorKind::SchemaError, "audit entry has unknown field '" + item.key() + "'");
    for (const auto& key : kKnown)
        if (!doc.contains(key))
            raise(ErrorKind::SchemaError, "audit entry lacks field '" + key + "'");

    if (!doc["schema_version"].is_number_integer())
        raise(ErrorKind::SchemaError, "audit entry schema_version must be an integer");
    if (!doc["sequence"].is_number_unsigned() && !doc["sequence"].is_number_integer())
        raise(ErrorKind::SchemaError, "audit entry sequence must be an integer");
    for (const char* key : {"timestamp", "entry_kind", "config_hash", "prev_entry_hash",
                            "entry_hash"})
        if (!doc[key].is_string())
            raise(ErrorKind::SchemaError, std::string("audit entry ") + key + " must be a string");

    AuditEntry entry;
    entry.schema_version = doc["schema_version"].get<int>();
    entry.sequence = doc["sequence"].get<std::uint64_t>();
    entry.timestamp = doc["timestamp"].get<std::string>();
    entry.entry_kind = doc["entry_kind"].get<std::string>();
    entry.payload = doc["payload"];
    entry.config_hash = doc["config_hash"].get<std::string>();
    entry.prev_entry_hash = doc["prev_entry_hash"].get<std::string>();
    entry.entry_hash = doc["entry_hash"].get<std::string>();
    return entry;
}

std::string compute_entry_hash(const AuditEntry& entry) {
    return sha256_hex(entry_body(entry).dump());
}

Clock system_clock_utc() {
    return [] {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return std::string(buf);
    };
}

Clock epoch_clock() {
    return [] { return std::string("1970-01-01T00:00:00Z"); };
}

AuditLog::AuditLog(std::string path, std::string config_hash, Clock clock)
    : path_(std::move(path)), config_hash_(std::move(config_hash)), clock_(std::move(clock)) {
    if (!clock_) clock_ = epoch_clock();
    std::ifstream probe(path_);
    if (probe.good() && probe.peek() != std::ifstream::traits_type::eof()) {
        probe.close();
        const auto entries = verify_log(path_); // resume only from an intact chain
        head_hash_ = entries.back().entry_hash;
        next_sequence_ = entries.back().sequence + 1;
    }
}

void AuditLog::append(const std::string& kind, const nlohmann::json& payload) {
    AuditEntry entry;
    entry.sequence = next_sequence_;
    entry.timestamp = clock_();
    entry.entry_kind = kind;
    entry.payload = payload;
    entry.config_hash = config_hash_;
    entry.prev_entry_hash = head_hash_;
    entry.entry_hash = compute_entry_hash(entry);

    std::ofstream out(path_, std::ios::app);
    if (!out) raise(ErrorKind::IntegrityError, "cannot open audit log for append: " + path_);
    out << entry_to_json(entry).dump() << '\n';
    out.flush();
    if (!out.good()) raise(ErrorKind::IntegrityError, "audit append failed: " + path_);

    head_hash_ = entry.entry_hash;
    ++next_sequence_;
}

std::vector<AuditEntry> read_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::SchemaError, "cannot open audit log: " + path);
    std::vector<AuditEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded())
            raise(ErrorKind::SchemaError,
                  "audit log line " + std::to_string(line_no) + ": malformed JSON");
        entries.push_back(entry_from_json(doc));
    }
    return entries;
}

std::vector<AuditEntry> verify_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::IntegrityError, "cannot open audit log: " + path);
    std::vector<AuditEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    std::string expected_prev = kGenesisHash;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = "audit log line " + std::to_string(line_no);
        if (line.empty()) raise(ErrorKind::IntegrityError, where + ": empty line inside log");
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded()) raise(ErrorKind::IntegrityError, where + ": malformed JSON");
        AuditEntry entry;
        try {
            entry = entry_from_json(doc);
        } catch (const Error& e) {
            raise(ErrorKind::IntegrityError, where + ": " + e.what());
        }
        if (entry.schema_version != kSchemaVersion)
            raise(ErrorKind::IntegrityError,
                  where + ": unsupported schema_version " + std::to_string(entry.schema_version));
        if (entry.sequence != line_no - 1)
            raise(ErrorKind::IntegrityError, where + ": sequence " +
                                                 std::to_string(entry.sequence) + ", expected " +
                                                 std::to_string(line_no - 1));
        if (entry.prev_entry_hash != expected_prev)
            raise(ErrorKind::IntegrityError, where + ": chain break (prev_entry_hash mismatch)");
        if (compute_entry_hash(entry) != entry.entry_hash)
            raise(ErrorKind::IntegrityError, where + ": entry hash mismatch (content altered)");
        expected_prev = entry.entry_hash;
        entries.push_back(std::move(entry));
    }
    return entries;
}

ExportTable export_metrics(const std::vector<AuditEntry>& entries) {
    // Join per iteration: candidate internal snapshot + drift report.
    std::map<std::int64_t, nlohmann::json> snapshots;
    std::map<std::int64_t, nlohmann::json> drifts;
    std::vector<const AuditEntry*> decisions;
    for (const auto& entry : entries) {
        if (entry.entry_kind == "SNAPSHOT") {
            if (entry.payload.value("role", std::string()) == "candidate_internal" &&
                entry.payload.contains("iteration"))
                snapshots[entry.payload["iteration"].get<std::int64_t>()] = entry.payload["snapshot"];
        } else if (entry.entry_kind == "DRIFT_REPORT") {
            if (entry.payload.contains("iteration"))
                drifts[entry.payload["iteration"].get<std::int64_t>()] = entry.payload["report"];
        } else if (entry.entry_kind == "DECISION") {
            decisions.push_back(&entry);
        }
    }

    std::set<std::string> fixed(kMetricColumns.begin(), kMetricColumns.end());
    std::set<std::string> extra_names;
    for (const auto& [iteration, snap] : snapshots) {
        (void)iteration;
        if (!snap.contains("metrics")) continue;
        for (const auto& item : snap["metrics"].items())
            if (!fixed.count(item.key())) extra_names.insert(item.key());
    }

    ExportTable table;
    table.header = {"iteration"};
    for (const char* name : kMetricColumns) table.header.push_back(name);
    table.header.insert(table.header.end(),
                        {"operating_threshold", "n_records", "drift_score", "drift_band",
                         "decision", "alarm", "alarm_triggers", "confidence"});
    for (const auto& name : extra_names) table.header.push_back(name);

    for (const AuditEntry* entry : decisions) {
        const nlohmann::json& d = entry->payload;
        const std::int64_t iteration = d.value("iteration", std::int64_t{0});
        std::vector<std::string> row;
        row.push_back(std::to_string(iteration));

        const auto snap_it = snapshots.find(iteration);
        const nlohmann::json* metrics_obj = nullptr;
        if (snap_it != snapshots.end() && snap_it->second.contains("metrics"))
            metrics_obj = &snap_it->second["metrics"];
        auto metric_cell = [&](const std::string& name) -> std::string {
            if (!metrics_obj || !metrics_obj->contains(name)) return {};
            return format_double((*metrics_obj)[name].get<double>());
        };
        for (const char* name : kMetricColumns) row.push_back(metric_cell(name));
        if (snap_it != snapshots.end()) {
            row.push_back(format_double(snap_it->second.value("operating_threshold", 0.5)));
            row.push_back(std::to_string(snap_it->second.value("n_records", std::size_t{0})));
        } else {
            row.push_back({});
            row.push_back({});
        }

        const auto drift_it = drifts.find(iteration);
        if (drift_it != drifts.end()) {
            row.push_back(format_double(drift_it->second.value("score", 0.0)));
            row.push_back(drift_it->second.value("band", std::string()));
        } else {
            row.push_back({});
            row.push_back({});
        }

        row.push_back(d.value("category", std::string()));
        row.push_back(d.value("alarm", false) ? "true" : "false");
        std::string triggers;
        if (d.contains("alarm_triggers"))
            for (const auto& t : d["alarm_triggers"]) {
                if (!triggers.empty()) triggers += ';';
                triggers += t.get<std::string>();
            }
        row.push_back(triggers);
        row.push_back(d.contains("confidence") ? format_double(d["confidence"].get<double>())
                                               : std::string());

        for (const auto& name : extra_names) row.push_back(metric_cell(name));
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_export_csv(const std::string& path, const ExportTable& table) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::SchemaError, "cannot open export file: " + path);
    auto write_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows) write_row(row);
    out.flush();
    if (!out.good()) raise(ErrorKind::SchemaError, "export write failed: " + path);
}

ExportTable read_export_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::SchemaError, "cannot open export file: " + path);
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        return cells;
    };
    ExportTable table;
    std::string line;
    if (!std::getline(in, line)) raise(ErrorKind::SchemaError, "export file has no header: " + path);
    table.header = split(line);
    while (std::getline(in, line)) {
        auto cells = split(line);
        cells.resize(table.header.size()); // trailing empties are not round-tripped by getline
        table.rows.push_back(std::move(cells));
    }
    return table;
}

} // namespace modelgate::audit
