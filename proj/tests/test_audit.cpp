#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "modelgate/audit.hpp"
#include "modelgate/errors.hpp"
#include "modelgate/json_io.hpp"
#include "modelgate/metrics.hpp"

using namespace modelgate;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        static int counter = 0;
        dir = fs::temp_directory_path() /
              ("modelgate-audit-" + std::to_string(++counter) + "-" +
               std::to_string(static_cast<unsigned>(std::random_device{}())));
        fs::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

std::vector<std::string> lines_of(const std::string& content) {
    std::vector<std::string> lines;
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

// Small log with every entry kind the exporter joins on.
void write_sample_log(const std::string& path, int iterations = 2) {
    audit::AuditLog log(path, "cfg-hash-1");
    log.append("BATCH_REGISTERED", {{"batch_id", "abc"}, {"n_records", 10}});
    for (int it = 1; it <= iterations; ++it) {
        metrics::MetricSnapshot snap;
        metrics::set_metric(snap, "sensitivity", 0.70 + 0.01 * it);
        metrics::set_metric(snap, "specificity", 0.90);
        metrics::set_metric(snap, "dice", 0.50 + 0.01 * it);
        snap.operating_threshold = 0.5;
        snap.n_records = 100;
        log.append("SNAPSHOT", {{"iteration", it},
                                {"role", "candidate_internal"},
                                {"snapshot", snapshot_to_json(snap)}});
        log.append("DRIFT_REPORT",
                   {{"iteration", it},
                    {"report", {{"score", 0.1 * it}, {"band", "NONE"}}}});
        log.append("DECISION", {{"iteration", it},
                                {"category", it == 1 ? "APPROVE" : "REJECT"},
                                {"alarm", it != 1},
                                {"alarm_triggers", nlohmann::json::array()},
                                {"confidence", 0.9}});
    }
}

} // namespace

TEST_CASE("appended entries chain from the genesis hash") {
    TempDir tmp;
    auto path = tmp.file("audit.jsonl");
    audit::AuditLog log(path, "cfg-hash");
    CHECK(log.head_hash() == audit::kGenesisHash);
    log.append("BATCH_REGISTERED", {{"batch_id", "b1"}});
    log.append("SNAPSHOT", {{"iteration", 1}});
    CHECK(log.entries() == 2);
    CHECK(log.head_hash() != audit::kGenesisHash);

    auto entries = audit::verify_log(path);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].schema_version == audit::kSchemaVersion);
    CHECK(entries[0].sequence == 0);
    CHECK(entries[0].prev_entry_hash == audit::kGenesisHash);
    CHECK(entries[0].config_hash == "cfg-hash");
    CHECK(entries[0].timestamp == "1970-01-01T00:00:00Z"); // epoch clock default
    CHECK(entries[1].sequence == 1);
    CHECK(entries[1].prev_entry_hash == entries[0].entry_hash);
    CHECK(entries[1].entry_hash == log.head_hash());
    for (const auto& e : entries) CHECK(audit::compute_entry_hash(e) == e.entry_hash);
}

TEST_CASE("reopening a log verifies it and resumes the chain") {
    TempDir tmp;
    auto path = tmp.file("audit.jsonl");
    std::string head;
    {
        audit::AuditLog log(path, "cfg-hash");
        log.append("SNAPSHOT", {{"iteration", 1}});
        log.append("SNAPSHOT", {{"iteration", 2}});
        head = log.head_hash();
    }
    audit::AuditLog resumed(path, "cfg-hash");
    CHECK(resumed.entries() == 2);
    CHECK(resumed.head_hash() == head);
    resumed.append("SNAPSHOT", {{"iteration", 3}});
    auto entries = audit::verify_log(path);
    REQUIRE(entries.size() == 3);
    CHECK(entries[2].sequence == 2);
    CHECK(entries[2].prev_entry_hash == head);
}

TEST_CASE("a wall-clock log records distinct timestamps but still verifies") {
    TempDir tmp;
    auto path = tmp.file("audit.jsonl");
    audit::AuditLog log(path, "cfg-hash", audit::system_clock_utc());
    log.append("SNAPSHOT", {{"iteration", 1}});
    auto entries = audit::verify_log(path);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].timestamp != "1970-01-01T00:00:00Z");
    CHECK(entries[0].timestamp.size() == 20); // ISO-8601 Z form
}

TEST_CASE("every single-bit flip anywhere in the file is detected") {
    TempDir tmp;
    auto path = tmp.file("audit.jsonl");
    write_sample_log(path);
    const std::string original = slurp(path);
    REQUIRE(audit::verify_log(path).size() == 7);

    auto flipped_path = tmp.file("flipped.jsonl");
    int checked = 0;
    for (std::size_t pos = 0; pos < original.size(); pos += 3) {
        std::string copy = original;
        copy[pos] = static_cast<char>(copy[pos] ^ (1u << (pos % 8)));
        spit(flipped_path, copy);
        CHECK_THROWS_AS(audit::verify_log(flipped_path), Error);
        ++checked;
    }
    CHECK(checked > 300);
}

TEST_CASE("reordered, dropped, and malformed lines are named by line number") {
    TempDir tmp;
    auto path = tmp.file("audit.jsonl");
    write_sample_log(path);
    auto lines = lines_of(slurp(path));
    REQUIRE(lines.size() == 7);

    auto joined = [](std::vector<std::string> ls) {
        std::string out;
        for (const auto& l : ls) out += l + "\n";
        return out;
    };

    SUBCASE("swapping two entries breaks the chain at the first moved line") {
        auto reordered = lines;
        std::swap(reordered[2], reordered[3]);
        spit(path, joined(reordered));
        try {
            audit::verify_log(path);
            FAIL("expected IntegrityError");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::IntegrityError);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("dropping an interior entry is a gap") {
        auto dropped = lines;
        dropped.erase(dropped.begin() + 2);
        spit(path, joined(dropped));
        CHECK_THROWS_AS(audit::verify_log(path), Error);
    }
    SUBCASE("garbage on a line is malformed") {
        auto broken = lines;
        broken[4] = "not json";
        spit(path, joined(broken));
        try {
            audit::verify_log(path);
            FAIL("expected IntegrityError");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::IntegrityError);
            CHECK(std::string(e.what()).find("line 5") != std::string::npos);
        }
    }
    SUBCASE("a truncated prefix still verifies as a shorter chain") {
        // Suffix loss is not detectable from the file alone; the externally
        // reported head hash is what pins the full length.
        auto prefix = std::vector<std::string>(lines.begin(), lines.begin() + 3);
        spit(path, joined(prefix));
        CHECK(audit::verify_log(path).size() == 3);
    }
    SUBCASE("opening a corrupted log for append is refused") {
        auto broken = lines;
        broken[1][10] = broken[1][10] == 'x' ? 'y' : 'x';
        spit(path, joined(broken));
        CHECK_THROWS_AS(audit::AuditLog(path, "cfg-hash"), Error);
    }
}

TEST_CASE("entry codec round-trips and rejects missing fields") {
    audit::AuditEntry entry;
    entry.sequence = 4;
    entry.timestamp = "1970-01-01T00:00:00Z";
    entry.entry_kind = "SNAPSHOT";
    entry.payload = {{"iteration", 2}};
    entry.config_hash = "cfg";
    entry.prev_entry_hash = audit::kGenesisHash;
    entry.entry_hash = audit::compute_entry_hash(entry);

    auto doc = audit::entry_to_json(entry);
    auto back = audit::entry_from_json(doc);
    CHECK(back.sequence == entry.sequence);
    CHECK(back.entry_kind == entry.entry_kind);
    CHECK(back.payload == entry.payload);
    CHECK(back.entry_hash == entry.entry_hash);

    doc.erase("schema_version");
    CHECK_THROWS_AS(audit::entry_from_json(doc), Error);
}

TEST_CASE("export joins each decision with its iteration's snapshot and drift") {
    TempDir tmp;
    auto path = tmp.file("audit.jsonl");
    write_sample_log(path, 2);
    auto table = audit::export_metrics(audit::verify_log(path));

    REQUIRE(table.rows.size() == 2);
    REQUIRE(table.header.size() == table.rows[0].size());
    CHECK(table.header[0] == "iteration");
    // Fixed block order, then extras sorted: "dice" lands after "confidence".
    CHECK(table.header.back() == "dice");

    auto cell = [&](std::size_t row, const std::string& name) {
        for (std::size_t i = 0; i < table.header.size(); ++i)
            if (table.header[i] == name) return table.rows[row][i];
        FAIL("missing column " << name);
        return std::string();
    };
    CHECK(cell(0, "iteration") == "1");
    CHECK(cell(0, "sensitivity") == "0.71");
    CHECK(cell(0, "decision") == "APPROVE");
    CHECK(cell(0, "alarm") == "false");
    CHECK(cell(0, "drift_score") == "0.1");
    CHECK(cell(0, "dice") == "0.51");
    CHECK(cell(1, "iteration") == "2");
    CHECK(cell(1, "decision") == "REJECT");
    CHECK(cell(1, "alarm") == "true");
    CHECK(cell(0, "confidence") == "0.9");
    CHECK(cell(0, "n_records") == "100");
}

TEST_CASE("export of an empty entry set is header-only") {
    auto table = audit::export_metrics({});
    CHECK(table.rows.empty());
    CHECK_FALSE(table.header.empty());
}

TEST_CASE("a log file appears on the first append, not on open") {
    TempDir tmp;
    auto path = tmp.file("audit.jsonl");
    audit::AuditLog log(path, "cfg");
    CHECK(log.entries() == 0);
    CHECK_FALSE(fs::exists(path));
    CHECK_THROWS_AS(audit::verify_log(path), Error);
    log.append("SNAPSHOT", {{"iteration", 1}});
    CHECK(fs::exists(path));
    CHECK(audit::verify_log(path).size() == 1);
}

TEST_CASE("export csv write-read-write is byte stable") {
    TempDir tmp;
    auto log_path = tmp.file("audit.jsonl");
    write_sample_log(log_path, 3);
    auto table = audit::export_metrics(audit::verify_log(log_path));

    auto csv_a = tmp.file("a.csv");
    auto csv_b = tmp.file("b.csv");
    audit::write_export_csv(csv_a, table);
    auto reread = audit::read_export_csv(csv_a);
    CHECK(reread.header == table.header);
    CHECK(reread.rows == table.rows);
    audit::write_export_csv(csv_b, reread);
    CHECK(slurp(csv_a) == slurp(csv_b));
}
