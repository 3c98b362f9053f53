#pragma once

#include "fusebench/manifest.hpp"
#include "fusebench/timeline.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fusebench {

// One ranked sound-class guess; the label vocabulary is free-form.
struct AudioLabelEntry {
    std::string label;
    double prob = 0.0;
};

// Top-5 (at most) sound labels, probabilities non-increasing.
struct AudioLabelDist {
    std::vector<AudioLabelEntry> entries;
};

// The IMU classifier's closed 6-label output space.
enum class IMUActivity { walking, running, standing, bend_over, stand_up, sit_down };

inline constexpr std::size_t kImuActivityCount = 6;

std::string_view imu_string(IMUActivity a);
std::optional<IMUActivity> parse_imu(std::string_view text);

enum class Setting { indoor, outdoor };
enum class HeartRateZone { resting, light, moderate, vigorous };

std::string_view setting_string(Setting s);
std::string_view zone_string(HeartRateZone z);
std::optional<Setting> parse_setting(std::string_view text);
std::optional<HeartRateZone> parse_zone(std::string_view text);

// Synthetic auxiliary-sensor summary for one timestep (or one segment,
// repeated per timestep).
struct ExtraContext {
    Setting setting = Setting::indoor;
    HeartRateZone heart_rate_zone = HeartRateZone::resting;

    bool operator==(const ExtraContext&) const = default;
};

// Everything the prompt can say about one aligned timestep. An absent field
// renders as "Not available" — the prompt's single semantics for a modality
// model that was not available.
struct TimeStepBundle {
    std::size_t index = 1; // 1-based
    std::optional<std::string> caption;
    std::optional<AudioLabelDist> labels;
    std::optional<IMUActivity> imu;
    std::optional<ExtraContext> context;
};

struct SegmentObservations {
    std::string segment_id;
    std::vector<TimeStepBundle> bundles;
};

// Ablation control: which modality channels reach the prompt.
struct ModalityMask {
    bool audio_caption = true;
    bool audio_labels = true;
    bool imu = true;
    bool extra_context = true;

    bool any() const { return audio_caption || audio_labels || imu || extra_context; }
    bool operator==(const ModalityMask&) const = default;
};

// Compact tag used in ablation ids and config files: one letter per set
// flag, "c" caption, "l" labels, "i" imu, "x" extra context (e.g. "cli").
std::string mask_tag(const ModalityMask& mask);
std::optional<ModalityMask> parse_mask_tag(std::string_view tag);

// The five ablation rows of the paper's result tables.
std::vector<ModalityMask> default_ablations();

using ObservationMap = std::map<std::string, SegmentObservations>;
using PlanMap = std::map<std::string, WindowPlan>;

// Loads the line-delimited observations file and validates it against the
// manifest and per-segment window plans: every segment known, bundle count
// equal to the plan's window count, indices contiguous from 1, probabilities
// in [0,1] and non-increasing.
// Throws UnknownSegment, BundleCountMismatch, MalformedEntry, MissingFile.
ObservationMap load_observations(const std::filesystem::path& path, const Manifest& manifest,
                                 const PlanMap& plans);

void save_observations(const ObservationMap& obs, const std::filesystem::path& path);

// Clears every field whose mask flag is unset; set flags pass through.
// Throws EmptyMask when no flag is set.
SegmentObservations apply_mask(const SegmentObservations& obs, const ModalityMask& mask);

// One observation record <-> one JSONL line. `where` labels parse errors.
nlohmann::json bundle_to_json(const std::string& segment_id, const TimeStepBundle& b);
TimeStepBundle bundle_from_json(const nlohmann::json& j, const std::string& where);

} // namespace fusebench
