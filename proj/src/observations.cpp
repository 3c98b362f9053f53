#include "fusebench/observations.hpp"

#include "fusebench/errors.hpp"
#include "fusebench/jsonl.hpp"

#include <algorithm>

namespace fusebench {
namespace {

constexpr std::array<std::string_view, kImuActivityCount> kImuStrings = {
    "walking", "running", "standing", "bend over", "stand up", "sit down"};

} // namespace

json bundle_to_json(const std::string& segment_id, const TimeStepBundle& b) {
    json j;
    j["segment_id"] = segment_id;
    j["index"] = b.index;
    if (b.caption) j["caption"] = *b.caption;
    if (b.labels) {
        json arr = json::array();
        for (const auto& e : b.labels->entries) {
            arr.push_back({{"label", e.label}, {"prob", e.prob}});
        }
        j["labels"] = std::move(arr);
    }
    if (b.imu) j["imu"] = std::string(imu_string(*b.imu));
    if (b.context) {
        j["context"] = {{"setting", std::string(setting_string(b.context->setting))},
                        {"zone", std::string(zone_string(b.context->heart_rate_zone))}};
    }
    return j;
}

TimeStepBundle bundle_from_json(const json& j, const std::string& where) {
    TimeStepBundle b;
    if (!j.contains("index") || !j["index"].is_number_unsigned()) {
        throw MalformedEntry(where + ": missing or non-positive 'index'");
    }
    b.index = j["index"].get<std::size_t>();
    if (b.index < 1) throw MalformedEntry(where + ": index must be >= 1");

    if (j.contains("caption")) {
        if (!j["caption"].is_string()) throw MalformedEntry(where + ": 'caption' not a string");
        b.caption = j["caption"].get<std::string>();
    }
    if (j.contains("labels")) {
        if (!j["labels"].is_array()) throw MalformedEntry(where + ": 'labels' not a list");
        AudioLabelDist dist;
        for (const auto& e : j["labels"]) {
            if (!e.contains("label") || !e.contains("prob") || !e["prob"].is_number()) {
                throw MalformedEntry(where + ": label entry needs {label, prob}");
            }
            AudioLabelEntry entry{e["label"].get<std::string>(), e["prob"].get<double>()};
            if (entry.prob < 0.0 || entry.prob > 1.0) {
                throw MalformedEntry(where + ": prob " + std::to_string(entry.prob) +
                                     " outside [0,1]");
            }
            dist.entries.push_back(std::move(entry));
        }
        if (dist.entries.size() > 5) throw MalformedEntry(where + ": more than 5 audio labels");
        for (std::size_t i = 1; i < dist.entries.size(); ++i) {
            if (dist.entries[i].prob > dist.entries[i - 1].prob + 1e-12) {
                throw MalformedEntry(where + ": audio label probabilities not non-increasing");
            }
        }
        b.labels = std::move(dist);
    }
    if (j.contains("imu")) {
        auto imu = parse_imu(j["imu"].get<std::string>());
        if (!imu) {
            throw MalformedEntry(where + ": unknown imu label '" +
                                 j["imu"].get<std::string>() + "'");
        }
        b.imu = *imu;
    }
    if (j.contains("context")) {
        const auto& c = j["context"];
        if (!c.contains("setting") || !c.contains("zone")) {
            throw MalformedEntry(where + ": context needs {setting, zone}");
        }
        auto setting = parse_setting(c["setting"].get<std::string>());
        auto zone = parse_zone(c["zone"].get<std::string>());
        if (!setting || !zone) throw MalformedEntry(where + ": unknown context value");
        b.context = ExtraContext{*setting, *zone};
    }
    return b;
}

std::string_view imu_string(IMUActivity a) { return kImuStrings[static_cast<std::size_t>(a)]; }

std::optional<IMUActivity> parse_imu(std::string_view text) {
    const std::string norm = normalize_label_text(text);
    for (std::size_t i = 0; i < kImuStrings.size(); ++i) {
        if (norm == normalize_label_text(kImuStrings[i])) return static_cast<IMUActivity>(i);
    }
    return std::nullopt;
}

std::string_view setting_string(Setting s) {
    return s == Setting::indoor ? "indoor" : "outdoor";
}

std::string_view zone_string(HeartRateZone z) {
    switch (z) {
    case HeartRateZone::resting: return "resting";
    case HeartRateZone::light: return "light";
    case HeartRateZone::moderate: return "moderate";
    case HeartRateZone::vigorous: return "vigorous";
    }
    return "resting";
}

std::optional<Setting> parse_setting(std::string_view text) {
    const std::string norm = normalize_label_text(text);
    if (norm == "indoor") return Setting::indoor;
    if (norm == "outdoor") return Setting::outdoor;
    return std::nullopt;
}

std::optional<HeartRateZone> parse_zone(std::string_view text) {
    const std::string norm = normalize_label_text(text);
    if (norm == "resting") return HeartRateZone::resting;
    if (norm == "light") return HeartRateZone::light;
    if (norm == "moderate") return HeartRateZone::moderate;
    if (norm == "vigorous") return HeartRateZone::vigorous;
    return std::nullopt;
}

std::string mask_tag(const ModalityMask& mask) {
    std::string tag;
    if (mask.audio_caption) tag += 'c';
    if (mask.audio_labels) tag += 'l';
    if (mask.imu) tag += 'i';
    if (mask.extra_context) tag += 'x';
    return tag;
}

std::optional<ModalityMask> parse_mask_tag(std::string_view tag) {
    ModalityMask mask{false, false, false, false};
    for (char c : tag) {
        switch (c) {
        case 'c': mask.audio_caption = true; break;
        case 'l': mask.audio_labels = true; break;
        case 'i': mask.imu = true; break;
        case 'x': mask.extra_context = true; break;
        default: return std::nullopt;
        }
    }
    if (!mask.any()) return std::nullopt;
    return mask;
}

std::vector<ModalityMask> default_ablations() {
    return {
        {true, true, true, true},    // clix: all four
        {true, true, true, false},   // cli: caption + labels + imu
        {true, false, false, false}, // c: caption only
        {false, true, false, false}, // l: labels only
        {false, false, true, false}, // i: imu only
    };
}

ObservationMap load_observations(const std::filesystem::path& path, const Manifest& manifest,
                                 const PlanMap& plans) {
    ObservationMap out;
    std::size_t line_no = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line_no;
        const std::string where = path.string() + " record " + std::to_string(line_no);
        if (!j.contains("segment_id")) throw MalformedEntry(where + ": missing segment_id");
        const auto segment_id = j["segment_id"].get<std::string>();
        if (manifest.find(segment_id) == nullptr) throw UnknownSegment(segment_id);
        auto bundle = bundle_from_json(j, where);
        auto& seg = out[segment_id];
        seg.segment_id = segment_id;
        seg.bundles.push_back(std::move(bundle));
    }

    for (auto& [segment_id, seg] : out) {
        std::stable_sort(seg.bundles.begin(), seg.bundles.end(),
                         [](const auto& a, const auto& b) { return a.index < b.index; });
        auto plan_it = plans.find(segment_id);
        if (plan_it == plans.end()) throw UnknownSegment("no window plan for " + segment_id);
        const std::size_t expected = plan_it->second.count();
        if (seg.bundles.size() != expected) {
            throw BundleCountMismatch(segment_id + ": expected " + std::to_string(expected) +
                                      " bundles, got " + std::to_string(seg.bundles.size()));
        }
        for (std::size_t i = 0; i < seg.bundles.size(); ++i) {
            if (seg.bundles[i].index != i + 1) {
                throw BundleCountMismatch(segment_id + ": bundle indices not contiguous from 1");
            }
        }
    }
    return out;
}

void save_observations(const ObservationMap& obs, const std::filesystem::path& path) {
    std::vector<json> records;
    for (const auto& [segment_id, seg] : obs) {
        for (const auto& b : seg.bundles) records.push_back(bundle_to_json(segment_id, b));
    }
    write_jsonl(path, records);
}

SegmentObservations apply_mask(const SegmentObservations& obs, const ModalityMask& mask) {
    if (!mask.any()) throw EmptyMask("mask must keep at least one modality");
    SegmentObservations out = obs;
    for (auto& b : out.bundles) {
        if (!mask.audio_caption) b.caption.reset();
        if (!mask.audio_labels) b.labels.reset();
        if (!mask.imu) b.imu.reset();
        if (!mask.extra_context) b.context.reset();
    }
    return out;
}

} // namespace fusebench
