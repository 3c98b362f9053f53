#pragma once

#include "fusebench/observations.hpp"
#include "fusebench/rng.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fusebench {

// Activity-conditioned default for the synthetic context draw.
struct ContextRow {
    Setting setting = Setting::indoor;
    HeartRateZone zone = HeartRateZone::resting;
};

using ContextTable = std::map<ActivityLabel, ContextRow>;

ContextTable default_context_table();

// How the emulated modality models behave for one activity.
struct ActivityProfile {
    std::array<double, kImuActivityCount> imu_dist{}; // sums to 1
    std::vector<std::string> sound_vocab;
    std::vector<double> sound_weights; // parallel to sound_vocab
    std::vector<std::string> caption_templates;
};

enum class ContextGranularity { per_segment, per_timestep };

// Desk-scale stand-in for the upstream audio/IMU models: per-activity label
// mixtures plus caption templates, with an optional uniform confuser mixed
// into the IMU draw.
struct EmulatorConfig {
    std::map<ActivityLabel, ActivityProfile> profiles;
    ContextTable context_table;
    double context_jitter = 0.0; // probability of replacing a field with a uniform draw
    ContextGranularity context_granularity = ContextGranularity::per_segment;
    double noise_level = 0.0; // IMU mixture weight toward uniform
    std::uint64_t seed = 0;
};

// Shipped defaults covering all 12 activities. Throws on an invalid file.
EmulatorConfig default_emulator_config();
EmulatorConfig load_emulator_config(const std::filesystem::path& path);
void save_emulator_config(const EmulatorConfig& cfg, const std::filesystem::path& path);

// Validates that every probability vector sums to 1 (±1e-9) and every
// activity has a profile. Throws MissingActivityRow / MalformedEntry.
void validate_emulator_config(const EmulatorConfig& cfg);

// Draws setting and heart-rate zone from the activity-conditioned table;
// with probability `jitter` a field is replaced by a uniform draw.
ExtraContext synthesize_context(ActivityLabel label, Rng& rng, const ContextTable& table,
                                double jitter = 0.0);

// Deterministic synthetic observations for one segment: the RNG stream
// depends only on (cfg.seed, segment_id), so generation order is free.
// Every modality field is filled; ablations mask at prompt time.
SegmentObservations emulate_observations(const SegmentRecord& record, const WindowPlan& plan,
                                         const EmulatorConfig& cfg);

// Emulates every manifest segment with default window planning.
ObservationMap emulate_all(const Manifest& manifest, const EmulatorConfig& cfg);

} // namespace fusebench
