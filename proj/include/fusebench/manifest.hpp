#pragma once

#include "fusebench/activity.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace fusebench {

// One curated 20-second labeled clip.
struct SegmentRecord {
    std::string segment_id;
    std::string video_id;
    double start_s = 0.0;
    double duration_s = 20.0;
    ActivityLabel label = ActivityLabel::vacuum_cleaning;
};

struct Manifest {
    std::vector<SegmentRecord> records;
    std::string source_path;

    const SegmentRecord* find(std::string_view segment_id) const;
};

// Loads and validates the comma-delimited segment table. Header must be
// exactly `segment_id,video_id,start_s,duration_s,label`. Row order is kept.
// Throws MissingFile, MalformedRow, UnknownActivity, DuplicateSegmentId.
Manifest load_manifest(const std::filesystem::path& path);

// Records whose label is in `labels`, order preserved. Throws EmptyLabelSet.
Manifest filter_by_activity(const Manifest& m, const std::set<ActivityLabel>& labels);

// Canonical serialization (labels as canonical display strings).
std::string serialize_manifest(const Manifest& m);

void save_manifest(const Manifest& m, const std::filesystem::path& path);

} // namespace fusebench
