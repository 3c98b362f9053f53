#include "fusebench/manifest.hpp"

#include "fusebench/errors.hpp"
#include "fusebench/jsonl.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace fusebench {
namespace {

constexpr std::string_view kHeader = "segment_id,video_id,start_s,duration_s,label";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

double parse_seconds(const std::string& field, std::size_t line_no, const char* name) {
    try {
        std::size_t pos = 0;
        double v = std::stod(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw MalformedRow("line " + std::to_string(line_no) + ": bad " + name + " '" + field +
                           "'");
    }
}

// Seconds formatted without trailing zeros, so a reload serializes back to
// the same text.
std::string format_seconds(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

} // namespace

const SegmentRecord* Manifest::find(std::string_view segment_id) const {
    for (const auto& r : records) {
        if (r.segment_id == segment_id) return &r;
    }
    return nullptr;
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.good()) throw MissingFile(path.string());

    Manifest m;
    m.source_path = path.string();

    std::string line;
    if (!std::getline(in, line)) throw MalformedRow("empty file, expected header");
    if (trim(line) != kHeader) {
        throw MalformedRow("line 1: header must be '" + std::string(kHeader) + "'");
    }

    std::unordered_set<std::string> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 5) {
            throw MalformedRow("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                               std::to_string(fields.size()));
        }
        SegmentRecord rec;
        rec.segment_id = trim(fields[0]);
        rec.video_id = trim(fields[1]);
        rec.start_s = parse_seconds(trim(fields[2]), line_no, "start_s");
        rec.duration_s = parse_seconds(trim(fields[3]), line_no, "duration_s");
        const std::string label_text = trim(fields[4]);

        if (rec.segment_id.empty()) {
            throw MalformedRow("line " + std::to_string(line_no) + ": empty segment_id");
        }
        if (rec.start_s < 0) {
            throw MalformedRow("line " + std::to_string(line_no) + ": negative start_s");
        }
        if (rec.duration_s <= 0) {
            throw MalformedRow("line " + std::to_string(line_no) + ": non-positive duration_s");
        }
        auto label = parse_activity(label_text);
        if (!label) throw UnknownActivity(label_text);
        rec.label = *label;

        if (!seen.insert(rec.segment_id).second) throw DuplicateSegmentId(rec.segment_id);
        m.records.push_back(std::move(rec));
    }
    return m;
}

Manifest filter_by_activity(const Manifest& m, const std::set<ActivityLabel>& labels) {
    if (labels.empty()) throw EmptyLabelSet("filter_by_activity requires at least one label");
    Manifest out;
    out.source_path = m.source_path;
    for (const auto& r : m.records) {
        if (labels.count(r.label)) out.records.push_back(r);
    }
    return out;
}

std::string serialize_manifest(const Manifest& m) {
    std::string out(kHeader);
    out.push_back('\n');
    for (const auto& r : m.records) {
        out += r.segment_id;
        out.push_back(',');
        out += r.video_id;
        out.push_back(',');
        out += format_seconds(r.start_s);
        out.push_back(',');
        out += format_seconds(r.duration_s);
        out.push_back(',');
        out += canonical_string(r.label);
        out.push_back('\n');
    }
    return out;
}

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
    atomic_write(path, serialize_manifest(m));
}

} // namespace fusebench
