#include "modelgate/records.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "modelgate/errors.hpp"
#include "modelgate/hashing.hpp"

namespace modelgate {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& what, size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        raise(ErrorKind::SchemaError,
              "line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
    }
    return v;
}

} // namespace

Batch read_batch_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::SchemaError, "cannot open batch file: " + path);

    std::string line;
    if (!std::getline(in, line)) raise(ErrorKind::SchemaError, "empty batch file: " + path);
    auto header = split_line(line);
    if (header.size() < 3 || header[0] != "patient_id" || header[1] != "label" ||
        header[2] != "score") {
        raise(ErrorKind::SchemaError,
              "batch header must start with patient_id,label,score: " + path);
    }

    Batch batch;
    size_t feature_start = 3;
    if (header.size() > 3 && header[3] == "subgroup") {
        batch.has_subgroup = true;
        feature_start = 4;
    }
    for (size_t i = feature_start; i < header.size(); ++i) {
        batch.feature_names.push_back(header[i]);
    }

    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size()) {
            raise(ErrorKind::SchemaError,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
        }
        PredictionRecord rec;
        rec.patient_id = cells[0];
        if (rec.patient_id.empty()) {
            raise(ErrorKind::SchemaError, "line " + std::to_string(line_no) + ": empty patient_id");
        }
        if (cells[1] != "0" && cells[1] != "1") {
            raise(ErrorKind::SchemaError,
                  "line " + std::to_string(line_no) + ": label must be 0 or 1, got '" +
                      cells[1] + "'");
        }
        rec.label = cells[1] == "1" ? 1 : 0;
        rec.score = parse_double(cells[2], "score", line_no);
        if (rec.score < 0.0 || rec.score > 1.0) {
            raise(ErrorKind::SchemaError,
                  "line " + std::to_string(line_no) + ": score outside [0,1]");
        }
        if (batch.has_subgroup) rec.subgroup = cells[3];
        rec.features.reserve(batch.feature_names.size());
        for (size_t i = feature_start; i < cells.size(); ++i) {
            rec.features.push_back(parse_double(cells[i], "feature", line_no));
        }
        batch.records.push_back(std::move(rec));
    }
    return batch;
}

void write_batch_csv(const std::string& path, const Batch& batch) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::SchemaError, "cannot write batch file: " + path);
    out << "patient_id,label,score";
    if (batch.has_subgroup) out << ",subgroup";
    for (const auto& name : batch.feature_names) out << ',' << name;
    out << '\n';
    for (const auto& rec : batch.records) {
        out << rec.patient_id << ',' << rec.label << ',' << format_double(rec.score);
        if (batch.has_subgroup) out << ',' << rec.subgroup;
        for (double f : rec.features) out << ',' << format_double(f);
        out << '\n';
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) raise(ErrorKind::DomainError, "double formatting failed");
    return std::string(buf, ptr);
}

void canonical_sort(std::vector<PredictionRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const PredictionRecord& a, const PredictionRecord& b) {
                  if (a.patient_id != b.patient_id) return a.patient_id < b.patient_id;
                  if (a.label != b.label) return a.label < b.label;
                  return a.score < b.score;
              });
}

std::string fingerprint(const std::vector<PredictionRecord>& records) {
    std::vector<PredictionRecord> sorted = records;
    canonical_sort(sorted);
    std::ostringstream buf;
    for (const auto& rec : sorted) {
        buf << rec.patient_id << '\x1f' << rec.label << '\x1f' << format_double(rec.score)
            << '\x1e';
    }
    return sha256_hex(buf.str());
}

std::string fingerprint_ids(const std::vector<std::string>& ids) {
    std::vector<std::string> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    std::ostringstream buf;
    for (const auto& id : sorted) buf << id << '\x1e';
    return sha256_hex(buf.str());
}

} // namespace modelgate
