#include "fusebench/emulator.hpp"
#include "fusebench/errors.hpp"
#include "fusebench/jsonl.hpp"
#include "fusebench/observations.hpp"

#include "../support/test_support.hpp"

#include <doctest.h>

#include <random>

using namespace fusebench;
using namespace fusebench::test;

namespace {

Manifest balanced_manifest(TempDir& dir, std::size_t per_class) {
    write_text(dir.file("m.csv"), balanced_manifest_text(per_class));
    return load_manifest(dir.file("m.csv"));
}

PlanMap plans_for(const Manifest& m) {
    PlanMap plans;
    for (const auto& r : m.records) plans[r.segment_id] = plan_windows(r.duration_s);
    return plans;
}

ModalityMask random_mask(std::mt19937_64& engine) {
    ModalityMask mask{false, false, false, false};
    while (!mask.any()) {
        mask.audio_caption = engine() % 2 == 0;
        mask.audio_labels = engine() % 2 == 0;
        mask.imu = engine() % 2 == 0;
        mask.extra_context = engine() % 2 == 0;
    }
    return mask;
}

json obs_to_json(const SegmentObservations& obs) {
    json arr = json::array();
    for (const auto& b : obs.bundles) arr.push_back(bundle_to_json(obs.segment_id, b));
    return arr;
}

} // namespace

TEST_SUITE("observations") {

TEST_CASE("emulated 120-segment fixture saves and reloads intact") {
    TempDir dir;
    const Manifest manifest = balanced_manifest(dir, 10);
    const PlanMap plans = plans_for(manifest);
    const ObservationMap obs = emulate_all(manifest, default_emulator_config());

    save_observations(obs, dir.file("obs.jsonl"));
    const ObservationMap loaded = load_observations(dir.file("obs.jsonl"), manifest, plans);

    REQUIRE(loaded.size() == 120);
    for (const auto& [segment_id, seg] : loaded) {
        CHECK(seg.bundles.size() == 9);
        CHECK(obs_to_json(seg) == obs_to_json(obs.at(segment_id)));
    }
}

TEST_CASE("probability out of range is a malformed entry") {
    TempDir dir;
    const Manifest manifest = balanced_manifest(dir, 1);
    const PlanMap plans = plans_for(manifest);
    const std::string seg = manifest.records[0].segment_id;

    std::string lines;
    for (int i = 1; i <= 9; ++i) {
        lines += json({{"segment_id", seg},
                       {"index", i},
                       {"labels", json::array({{{"label", "Speech"}, {"prob", i == 3 ? 1.3 : 0.4}}})}})
                     .dump() +
                 "\n";
    }
    write_text(dir.file("bad.jsonl"), lines);
    CHECK_THROWS_AS(load_observations(dir.file("bad.jsonl"), manifest, plans), MalformedEntry);
}

TEST_CASE("bundle count mismatch and unknown segment") {
    TempDir dir;
    const Manifest manifest = balanced_manifest(dir, 1);
    const PlanMap plans = plans_for(manifest);
    const std::string seg = manifest.records[0].segment_id;

    std::string eight;
    for (int i = 1; i <= 8; ++i) {
        eight += json({{"segment_id", seg}, {"index", i}}).dump() + "\n";
    }
    write_text(dir.file("eight.jsonl"), eight);
    CHECK_THROWS_AS(load_observations(dir.file("eight.jsonl"), manifest, plans),
                    BundleCountMismatch);

    write_text(dir.file("ghost.jsonl"),
               json({{"segment_id", "ghost"}, {"index", 1}}).dump() + "\n");
    CHECK_THROWS_AS(load_observations(dir.file("ghost.jsonl"), manifest, plans), UnknownSegment);

    std::string gap;
    for (int i = 1; i <= 9; ++i) {
        gap += json({{"segment_id", seg}, {"index", i == 5 ? 11 : i}}).dump() + "\n";
    }
    write_text(dir.file("gap.jsonl"), gap);
    CHECK_THROWS_AS(load_observations(dir.file("gap.jsonl"), manifest, plans),
                    BundleCountMismatch);
}

TEST_CASE("audio label ordering is enforced on load") {
    TempDir dir;
    const Manifest manifest = balanced_manifest(dir, 1);
    const PlanMap plans = plans_for(manifest);
    const std::string seg = manifest.records[0].segment_id;

    std::string lines;
    for (int i = 1; i <= 9; ++i) {
        json labels = json::array({{{"label", "A"}, {"prob", 0.10}},
                                   {{"label", "B"}, {"prob", 0.50}}});
        lines += json({{"segment_id", seg}, {"index", i}, {"labels", labels}}).dump() + "\n";
    }
    write_text(dir.file("unsorted.jsonl"), lines);
    CHECK_THROWS_AS(load_observations(dir.file("unsorted.jsonl"), manifest, plans),
                    MalformedEntry);
}

TEST_CASE("apply_mask clears exactly the unset channels") {
    TempDir dir;
    const Manifest manifest = balanced_manifest(dir, 1);
    const auto& rec = manifest.records[0];
    const SegmentObservations full =
        emulate_observations(rec, plan_windows(rec.duration_s), default_emulator_config());

    const SegmentObservations caption_only =
        apply_mask(full, ModalityMask{true, false, false, false});
    for (const auto& b : caption_only.bundles) {
        CHECK(b.caption.has_value());
        CHECK_FALSE(b.labels.has_value());
        CHECK_FALSE(b.imu.has_value());
        CHECK_FALSE(b.context.has_value());
    }

    const SegmentObservations identity = apply_mask(full, ModalityMask{});
    CHECK(obs_to_json(identity) == obs_to_json(full));

    CHECK_THROWS_AS(apply_mask(full, ModalityMask{false, false, false, false}), EmptyMask);
}

TEST_CASE("masking already-missing channels leaves only indices") {
    SegmentObservations obs;
    obs.segment_id = "s";
    for (std::size_t i = 1; i <= 3; ++i) {
        TimeStepBundle b;
        b.index = i;
        obs.bundles.push_back(b);
    }
    const SegmentObservations masked = apply_mask(obs, ModalityMask{false, false, true, false});
    for (const auto& b : masked.bundles) {
        CHECK_FALSE(b.caption.has_value());
        CHECK_FALSE(b.labels.has_value());
        CHECK_FALSE(b.imu.has_value());
        CHECK_FALSE(b.context.has_value());
    }
}

TEST_CASE("apply_mask is idempotent and composes by conjunction") {
    TempDir dir;
    const Manifest manifest = balanced_manifest(dir, 2);
    EmulatorConfig cfg = default_emulator_config();
    cfg.seed = 77;

    std::mt19937_64 engine(5);
    for (int trial = 0; trial < 40; ++trial) {
        const auto& rec = manifest.records[engine() % manifest.records.size()];
        const SegmentObservations obs =
            emulate_observations(rec, plan_windows(rec.duration_s), cfg);
        const ModalityMask m1 = random_mask(engine);
        const ModalityMask m2 = random_mask(engine);

        const SegmentObservations once = apply_mask(obs, m1);
        CHECK(obs_to_json(apply_mask(once, m1)) == obs_to_json(once));

        const ModalityMask both{m1.audio_caption && m2.audio_caption,
                                m1.audio_labels && m2.audio_labels, m1.imu && m2.imu,
                                m1.extra_context && m2.extra_context};
        if (both.any()) {
            CHECK(obs_to_json(apply_mask(once, m2)) == obs_to_json(apply_mask(obs, both)));
        }
    }
}

TEST_CASE("label distribution ordering survives load and mask") {
    TempDir dir;
    const Manifest manifest = balanced_manifest(dir, 2);
    const PlanMap plans = plans_for(manifest);
    const ObservationMap obs = emulate_all(manifest, default_emulator_config());
    save_observations(obs, dir.file("obs.jsonl"));
    const ObservationMap loaded = load_observations(dir.file("obs.jsonl"), manifest, plans);

    for (const auto& [id, seg] : loaded) {
        const SegmentObservations masked = apply_mask(seg, ModalityMask{false, true, false, false});
        for (const auto& b : masked.bundles) {
            REQUIRE(b.labels.has_value());
            CHECK(b.labels->entries.size() <= 5);
            for (std::size_t i = 1; i < b.labels->entries.size(); ++i) {
                CHECK(b.labels->entries[i].prob <= b.labels->entries[i - 1].prob + 1e-12);
            }
        }
    }
}

TEST_CASE("mask tags round trip") {
    for (const auto& mask : default_ablations()) {
        const auto parsed = parse_mask_tag(mask_tag(mask));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == mask);
    }
    CHECK_FALSE(parse_mask_tag("").has_value());
    CHECK_FALSE(parse_mask_tag("cz").has_value());
}

} // TEST_SUITE
