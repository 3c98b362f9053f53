#include "fusebench/emulator.hpp"

#include "fusebench/errors.hpp"
#include "fusebench/jsonl.hpp"
#include "fusebench/timeline.hpp"

#include <algorithm>
#include <cmath>

namespace fusebench {
namespace {

struct DefaultProfile {
    ActivityLabel label;
    Setting setting;
    HeartRateZone zone;
    // walking, running, standing, bend over, stand up, sit down
    std::array<double, kImuActivityCount> imu;
    std::vector<std::pair<std::string, double>> sounds;
    std::vector<std::string> captions;
};

std::vector<DefaultProfile> default_profiles() {
    using A = ActivityLabel;
    using S = Setting;
    using Z = HeartRateZone;
    return {
        {A::vacuum_cleaning, S::indoor, Z::light,
         {0.50, 0.00, 0.30, 0.10, 0.10, 0.00},
         {{"Vacuum cleaner", 8}, {"White noise", 5}, {"Mechanical fan", 4}, {"Hum", 4},
          {"Inside, small room", 3}, {"Rub", 2}, {"Speech", 1}},
         {"A vacuum cleaner is running in a room.",
          "A machine hums steadily while someone moves around.",
          "Someone is cleaning a carpet with a vacuum cleaner."}},
        {A::cooking, S::indoor, Z::light,
         {0.25, 0.00, 0.50, 0.15, 0.10, 0.00},
         {{"Frying (food)", 7}, {"Sizzle", 6}, {"Stir", 4}, {"Dishes, pots, and pans", 4},
          {"Chopping (food)", 3}, {"Water tap, faucet", 2}, {"Speech", 2}},
         {"Food is frying and sizzling in a pan.",
          "A person is cooking food in a pan and then flipping it over.",
          "Someone is chopping food on a cutting board."}},
        {A::doing_laundry, S::indoor, Z::light,
         {0.20, 0.00, 0.30, 0.30, 0.20, 0.00},
         {{"Washing machine", 7}, {"Zipper (clothing)", 4}, {"Rustle", 4}, {"Mechanisms", 3},
          {"Inside, small room", 3}, {"Hum", 2}, {"Slam", 1}},
         {"A washing machine is running and clothes are tumbling.",
          "Someone is folding and shaking out fabric.",
          "A person loads clothes into a machine and closes the door."}},
        {A::eating, S::indoor, Z::resting,
         {0.10, 0.00, 0.20, 0.00, 0.20, 0.50},
         {{"Chewing, mastication", 8}, {"Biting", 5}, {"Crunch", 4},
          {"Cutlery, silverware", 3}, {"Dishes, pots, and pans", 2}, {"Speech", 2}},
         {"A person is chewing food and swallowing.",
          "Cutlery clinks against a plate while someone eats.",
          "Someone is eating a crunchy snack."}},
        {A::playing_basketball, S::outdoor, Z::vigorous,
         {0.30, 0.50, 0.00, 0.10, 0.10, 0.00},
         {{"Basketball bounce", 8}, {"Slam", 4}, {"Whack, thwack", 3}, {"Shout", 3},
          {"Speech", 2}, {"Walk, footsteps", 2}},
         {"A ball is bouncing on a hard court.",
          "A ball is being bounced around in a large room.",
          "Sneakers squeak while a ball bounces nearby."}},
        {A::playing_soccer, S::outdoor, Z::vigorous,
         {0.30, 0.60, 0.00, 0.10, 0.00, 0.00},
         {{"Kick", 6}, {"Thump", 5}, {"Shout", 4}, {"Crowd", 3}, {"Speech", 2},
          {"Walk, footsteps", 2}},
         {"A ball is kicked across a grassy field.",
          "People are shouting while a ball is kicked around.",
          "Someone is running and kicking a ball outdoors."}},
        {A::playing_with_pets, S::indoor, Z::moderate,
         {0.30, 0.00, 0.20, 0.30, 0.20, 0.00},
         {{"Animal", 7}, {"Dog", 5}, {"Bark", 4}, {"Snort", 3}, {"Pant", 3}, {"Speech", 2}},
         {"A dog is barking and panting excitedly.",
          "A person is talking to an animal and rubbing its fur.",
          "An animal scampers across the floor while someone laughs."}},
        {A::reading_a_book, S::indoor, Z::resting,
         {0.00, 0.00, 0.30, 0.00, 0.20, 0.50},
         {{"Rustle", 6}, {"Inside, small room", 5}, {"Speech", 3}, {"Breathing", 3},
          {"Tick-tock", 2}, {"Silence", 2}},
         {"Pages are turning quietly in a silent room.",
          "A person sits quietly while paper rustles.",
          "It is quiet except for the occasional page turn."}},
        {A::using_computer, S::indoor, Z::resting,
         {0.00, 0.00, 0.20, 0.00, 0.20, 0.60},
         {{"Typing", 7}, {"Computer keyboard", 6}, {"Click", 4}, {"Inside, small room", 3},
          {"Hum", 2}, {"Speech", 2}},
         {"Someone is typing on a keyboard and clicking a mouse.",
          "Keys clack steadily in a quiet room.",
          "A computer fan hums while someone types."}},
        {A::washing_dishes, S::indoor, Z::light,
         {0.20, 0.00, 0.50, 0.10, 0.20, 0.00},
         {{"Water tap, faucet", 6}, {"Dishes, pots, and pans", 6}, {"Water", 5}, {"Liquid", 4},
          {"Drip", 3}, {"Sink (filling or washing)", 3}, {"Bathtub (filling or washing)", 2}},
         {"A person is washing dishes in a sink.",
          "Water is splashing while dishes clack together.",
          "Water runs from a faucet over clinking plates."}},
        {A::watching_tv, S::indoor, Z::resting,
         {0.10, 0.00, 0.20, 0.00, 0.10, 0.60},
         {{"Television", 7}, {"Speech", 6}, {"Music", 4}, {"Theme music", 3},
          {"Inside, small room", 3}, {"Laughter", 2}},
         {"A television plays dialogue and background music.",
          "Music and speech come from a TV across the room.",
          "A show is playing while someone sits on a couch."}},
        {A::workout_weightlifting, S::indoor, Z::vigorous,
         {0.20, 0.10, 0.10, 0.30, 0.30, 0.00},
         {{"Gasp", 7}, {"Snort", 5}, {"Sigh", 4}, {"Breathing", 4}, {"Grunt", 3},
          {"Thunk", 2}, {"Clank", 2}},
         {"A person is breathing heavily and breathing heavily.",
          "Weights clank while someone breathes hard.",
          "A person grunts with effort and exhales loudly."}},
    };
}

json config_to_json(const EmulatorConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["noise_level"] = cfg.noise_level;
    j["context_jitter"] = cfg.context_jitter;
    j["context_granularity"] =
        cfg.context_granularity == ContextGranularity::per_segment ? "per_segment"
                                                                   : "per_timestep";
    json profiles = json::object();
    for (const auto& [label, p] : cfg.profiles) {
        json row;
        json imu = json::object();
        for (std::size_t i = 0; i < kImuActivityCount; ++i) {
            imu[std::string(imu_string(static_cast<IMUActivity>(i)))] = p.imu_dist[i];
        }
        row["imu_dist"] = std::move(imu);
        json sounds = json::array();
        for (std::size_t i = 0; i < p.sound_vocab.size(); ++i) {
            sounds.push_back({{"label", p.sound_vocab[i]}, {"weight", p.sound_weights[i]}});
        }
        row["sounds"] = std::move(sounds);
        row["captions"] = p.caption_templates;
        const auto& ctx = cfg.context_table.at(label);
        row["context"] = {{"setting", std::string(setting_string(ctx.setting))},
                          {"zone", std::string(zone_string(ctx.zone))}};
        profiles[std::string(canonical_string(label))] = std::move(row);
    }
    j["profiles"] = std::move(profiles);
    return j;
}

EmulatorConfig config_from_json(const json& j) {
    EmulatorConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.noise_level = j.value("noise_level", 0.0);
    cfg.context_jitter = j.value("context_jitter", 0.0);
    cfg.context_granularity = j.value("context_granularity", "per_segment") ==
                                      std::string("per_timestep")
                                  ? ContextGranularity::per_timestep
                                  : ContextGranularity::per_segment;
    if (!j.contains("profiles") || !j["profiles"].is_object()) {
        throw MalformedEntry("emulator config: missing 'profiles'");
    }
    for (const auto& [key, row] : j["profiles"].items()) {
        auto label = parse_activity(key);
        if (!label) throw UnknownActivity(key);
        ActivityProfile p;
        for (const auto& [imu_key, v] : row.at("imu_dist").items()) {
            auto imu = parse_imu(imu_key);
            if (!imu) throw MalformedEntry("emulator config: unknown imu label " + imu_key);
            p.imu_dist[static_cast<std::size_t>(*imu)] = v.get<double>();
        }
        for (const auto& s : row.at("sounds")) {
            p.sound_vocab.push_back(s.at("label").get<std::string>());
            p.sound_weights.push_back(s.at("weight").get<double>());
        }
        p.caption_templates = row.at("captions").get<std::vector<std::string>>();
        cfg.profiles[*label] = std::move(p);
        const auto& ctx = row.at("context");
        auto setting = parse_setting(ctx.at("setting").get<std::string>());
        auto zone = parse_zone(ctx.at("zone").get<std::string>());
        if (!setting || !zone) throw MalformedEntry("emulator config: bad context for " + key);
        cfg.context_table[*label] = ContextRow{*setting, *zone};
    }
    validate_emulator_config(cfg);
    return cfg;
}

void fill_template(std::string& text, std::string_view top_sound) {
    const std::string placeholder = "{sound}";
    auto pos = text.find(placeholder);
    if (pos == std::string::npos) return;
    std::string lowered(top_sound);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    text.replace(pos, placeholder.size(), lowered);
}

} // namespace

ContextTable default_context_table() {
    ContextTable table;
    for (const auto& p : default_profiles()) table[p.label] = ContextRow{p.setting, p.zone};
    return table;
}

EmulatorConfig default_emulator_config() {
    EmulatorConfig cfg;
    cfg.seed = 0;
    cfg.noise_level = 0.15;
    cfg.context_jitter = 0.05;
    for (auto& p : default_profiles()) {
        ActivityProfile profile;
        profile.imu_dist = p.imu;
        for (auto& [label, weight] : p.sounds) {
            profile.sound_vocab.push_back(label);
            profile.sound_weights.push_back(weight);
        }
        profile.caption_templates = p.captions;
        cfg.profiles[p.label] = std::move(profile);
        cfg.context_table[p.label] = ContextRow{p.setting, p.zone};
    }
    validate_emulator_config(cfg);
    return cfg;
}

EmulatorConfig load_emulator_config(const std::filesystem::path& path) {
    json j = json::parse(read_file(path));
    return config_from_json(j);
}

void save_emulator_config(const EmulatorConfig& cfg, const std::filesystem::path& path) {
    atomic_write(path, config_to_json(cfg).dump(2) + "\n");
}

void validate_emulator_config(const EmulatorConfig& cfg) {
    for (ActivityLabel label : all_activities()) {
        auto it = cfg.profiles.find(label);
        if (it == cfg.profiles.end()) {
            throw MissingActivityRow(std::string(canonical_string(label)));
        }
        const auto& p = it->second;
        double sum = 0.0;
        for (double v : p.imu_dist) {
            if (v < 0) throw MalformedEntry("negative IMU probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw MalformedEntry("IMU distribution for " +
                                 std::string(canonical_string(label)) + " sums to " +
                                 std::to_string(sum));
        }
        if (p.sound_vocab.size() < 5) {
            throw MalformedEntry("need at least 5 sound labels for " +
                                 std::string(canonical_string(label)));
        }
        if (p.sound_vocab.size() != p.sound_weights.size()) {
            throw MalformedEntry("sound vocab/weights length mismatch");
        }
        if (p.caption_templates.empty()) {
            throw MalformedEntry("no caption templates for " +
                                 std::string(canonical_string(label)));
        }
        if (!cfg.context_table.count(label)) {
            throw MissingActivityRow("context row for " +
                                     std::string(canonical_string(label)));
        }
    }
    if (cfg.noise_level < 0 || cfg.noise_level > 1) {
        throw MalformedEntry("noise_level outside [0,1]");
    }
    if (cfg.context_jitter < 0 || cfg.context_jitter > 1) {
        throw MalformedEntry("context_jitter outside [0,1]");
    }
}

ExtraContext synthesize_context(ActivityLabel label, Rng& rng, const ContextTable& table,
                                double jitter) {
    auto it = table.find(label);
    if (it == table.end()) throw MissingActivityRow(std::string(canonical_string(label)));
    ExtraContext ctx{it->second.setting, it->second.zone};
    if (rng.next_double() < jitter) {
        ctx.setting = rng.next_index(2) == 0 ? Setting::indoor : Setting::outdoor;
    }
    if (rng.next_double() < jitter) {
        ctx.heart_rate_zone = static_cast<HeartRateZone>(rng.next_index(4));
    }
    return ctx;
}

SegmentObservations emulate_observations(const SegmentRecord& record, const WindowPlan& plan,
                                         const EmulatorConfig& cfg) {
    auto it = cfg.profiles.find(record.label);
    if (it == cfg.profiles.end()) {
        throw MissingActivityRow(std::string(canonical_string(record.label)));
    }
    const ActivityProfile& profile = it->second;

    Rng rng(substream_seed(cfg.seed, fnv1a64(record.segment_id)));
    SegmentObservations obs;
    obs.segment_id = record.segment_id;

    std::optional<ExtraContext> segment_context;
    if (cfg.context_granularity == ContextGranularity::per_segment) {
        segment_context =
            synthesize_context(record.label, rng, cfg.context_table, cfg.context_jitter);
    }

    for (std::size_t step = 1; step <= plan.count(); ++step) {
        TimeStepBundle b;
        b.index = step;

        // IMU: (1 - noise) * activity-conditional + noise * uniform.
        if (rng.next_double() < cfg.noise_level) {
            b.imu = static_cast<IMUActivity>(rng.next_index(kImuActivityCount));
        } else {
            b.imu = static_cast<IMUActivity>(rng.next_weighted(profile.imu_dist));
        }

        // Top-5 sounds drawn by weight without replacement; the chosen
        // weights are renormalized onto a sampled total mass <= 1 and
        // rounded to the prompt's 2-decimal rendering.
        auto picks = rng.sample_weighted_without_replacement(profile.sound_weights, 5);
        double picked_weight = 0.0;
        for (auto i : picks) picked_weight += profile.sound_weights[i];
        const double mass = 0.55 + 0.35 * rng.next_double();
        AudioLabelDist dist;
        for (auto i : picks) {
            double p = profile.sound_weights[i] / picked_weight * mass;
            p = std::round(p * 100.0) / 100.0;
            dist.entries.push_back({profile.sound_vocab[i], p});
        }
        std::stable_sort(dist.entries.begin(), dist.entries.end(),
                         [](const auto& a, const auto& b) { return a.prob > b.prob; });
        b.labels = std::move(dist);

        std::string caption =
            profile.caption_templates[rng.next_index(profile.caption_templates.size())];
        fill_template(caption, b.labels->entries.front().label);
        b.caption = std::move(caption);

        if (cfg.context_granularity == ContextGranularity::per_segment) {
            b.context = segment_context;
        } else {
            b.context =
                synthesize_context(record.label, rng, cfg.context_table, cfg.context_jitter);
        }
        obs.bundles.push_back(std::move(b));
    }
    return obs;
}

ObservationMap emulate_all(const Manifest& manifest, const EmulatorConfig& cfg) {
    ObservationMap out;
    for (const auto& rec : manifest.records) {
        WindowPlan plan = plan_windows(rec.duration_s);
        out[rec.segment_id] = emulate_observations(rec, plan, cfg);
    }
    return out;
}

} // namespace fusebench
