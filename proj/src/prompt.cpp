#include "fusebench/prompt.hpp"

#include "fusebench/digest.hpp"
#include "fusebench/errors.hpp"
#include "fusebench/jsonl.hpp"

#include <cmath>
#include <cstdio>

namespace fusebench {
namespace {

// Instruction text exactly as the models saw it, quirks included.
constexpr std::string_view kHeader =
    "RESPOND IN ENGLISH ONLY.  KEEP YOUR ANSWER CONCISE.\n"
    "Below are temporally ordered 'audio captions' and 'top-5 audio labels' generated based on "
    "the sounds captured from the environment.  Information under every single 'Time step' is "
    "based on 2-second audio recordings that follow each other.Audio information is accompanied "
    "by 'physical activity' predictions based on data recorded from a 'head-mounted' inertia "
    "measurement unit (IMU).  At each 'Time step', we use a machine learning model to predict "
    "one of the following six labels: 'walking', 'running', 'standing', 'bend over', 'stand "
    "up', 'sit down'.  When a predictions is 'Not available', it simply means that the model "
    "used for making that prediction (e.g., IMU data for activity prediction) was not available "
    "for that instance.  For instance, if audio captions are 'Not available' for an instance, "
    "it means an audio captioning model was not available. It does NOT mean there was no "
    "sound.  Or, if IMU model prediction is 'Not available' for an instance, it means an IMU "
    "physical activity prediction model was not available. It does NOT mean there was no or "
    "little physical activity.";

// Harness extension: declared only when the extra-context channel is active.
constexpr std::string_view kContextDeclaration =
    "  Additionally, each 'Time step' may include an 'Extra context' line describing the "
    "setting (indoor or outdoor) and the heart rate zone (resting, light, moderate, or "
    "vigorous) derived from other sensors.";

constexpr std::string_view kTagsLine =
    "Temporally ordered audio captions, audio labels, and IMU physical activity tags:";

constexpr std::string_view kNote =
    "IMPORTANT NOTE: The machine learning models that makes the audio and physical activity "
    "predictions are not perfect. They can make mistakes.  For instance, the audio model can "
    "mistake the sound of wiping the windows for the sound of a DJ spinning the vinyl.  Or, "
    "the physical activity prediction model can mistake that someone is running when they are "
    "walking fast.  Therefore, do not hyperfocus on specific audio and physical activity "
    "tags.  Focus on reasoning about the underlying sounds and physical motions that would "
    "lead to model predictions.  Use information from across different timesteps and "
    "modalities to form a more robust big picture.  In light of the information provided "
    "above, choose the most likely 'high-level activity' the camera wearer might be doing "
    "from.  Think step by step and briefly explain your reasoning behind consistently "
    "combining the information across time steps.  Finally, after reasoning, respond with the "
    "name of the activity at the end.";

constexpr std::string_view kListHeader =
    "List of activities to choose from (please choose ONLY ONE and reply with the exact same "
    "name as in the list.):";

constexpr std::string_view kOneShotIntro =
    "I will give one illustrative example with physical activity and audio predictions, and "
    "some reasoning based on it to infer the high-level activity.";
constexpr std::string_view kOneShotBeginPreds =
    "--- Beginning of temporal audio and physical activity predictions for the illustrative "
    "example---";
constexpr std::string_view kOneShotEndPreds =
    "--- End of temporal audio and physical activity predictions for the illustrative "
    "example---";
constexpr std::string_view kOneShotBeginReasoning =
    "--- Beginning of reasoning example for the illustrative example--";
constexpr std::string_view kOneShotEndReasoning =
    "--- End of reasoning example for the illustrative example";
constexpr std::string_view kOneShotClosing =
    "Now, please come up with an answer for the original test example I included at the "
    "beginning.";

constexpr std::string_view kNotAvailable = "Not available";

std::string format_prob(double p) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", p);
    return buf;
}

std::string labels_line(const AudioLabelDist& dist) {
    std::string line;
    for (const auto& e : dist.entries) {
        line += e.label;
        line += ": ";
        line += format_prob(e.prob);
        line += ", ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

void validate_config(const PromptConfig& config) {
    if (config.mode == PromptMode::closed_set && config.activity_list.empty()) {
        throw ConfigInvariantViolation("closed_set mode requires an activity list");
    }
    if (config.mode == PromptMode::open_ended && !config.activity_list.empty()) {
        throw ConfigInvariantViolation("open_ended mode must not carry an activity list");
    }
    if (config.shots == Shots::one && !config.one_shot_example) {
        throw ConfigInvariantViolation("one-shot mode requires the illustrative example");
    }
    if (config.shots == Shots::zero && config.one_shot_example) {
        throw ConfigInvariantViolation("zero-shot mode must not carry an example");
    }
    if (!config.mask.any()) {
        throw ConfigInvariantViolation("mask must keep at least one modality");
    }
}

} // namespace

std::string_view mode_string(PromptMode m) {
    return m == PromptMode::closed_set ? "closed_set" : "open_ended";
}

std::string_view shots_string(Shots s) { return s == Shots::zero ? "zero" : "one"; }

std::optional<PromptMode> parse_mode(std::string_view text) {
    if (text == "closed_set" || text == "closed") return PromptMode::closed_set;
    if (text == "open_ended" || text == "open") return PromptMode::open_ended;
    return std::nullopt;
}

std::optional<Shots> parse_shots(std::string_view text) {
    if (text == "zero" || text == "0") return Shots::zero;
    if (text == "one" || text == "1") return Shots::one;
    return std::nullopt;
}

OneShotExample load_one_shot_example(const std::filesystem::path& path) {
    json j = json::parse(read_file(path));
    OneShotExample ex;
    ex.segment_id = j.value("segment_id", std::string("illustrative"));
    ex.reasoning = j.at("reasoning").get<std::string>();
    for (const auto& b : j.at("bundles")) {
        ex.bundles.push_back(bundle_from_json(b, path.string()));
    }
    return ex;
}

PromptConfig make_prompt_config(PromptMode mode, Shots shots, const ModalityMask& mask,
                                std::optional<OneShotExample> example) {
    PromptConfig config;
    config.mode = mode;
    config.shots = shots;
    config.mask = mask;
    if (mode == PromptMode::closed_set) config.activity_list = closed_set_prompt_order();
    if (shots == Shots::one) config.one_shot_example = std::move(example);
    return config;
}

std::string render_timestep(const TimeStepBundle& bundle, bool include_context) {
    std::string block = "--- Time step " + std::to_string(bundle.index) + " ---\n";
    block += "Top-5 audio labels with probabilities:\n";
    block += bundle.labels ? labels_line(*bundle.labels) : std::string(kNotAvailable);
    block += "\nAudio caption:\n";
    block += bundle.caption ? *bundle.caption : std::string(kNotAvailable);
    block += "\nIMU model prediction:\n";
    block += bundle.imu ? std::string(imu_string(*bundle.imu)) : std::string(kNotAvailable);
    if (include_context) {
        block += "\nExtra context: ";
        if (bundle.context) {
            block += "setting=";
            block += setting_string(bundle.context->setting);
            block += ", heart rate zone=";
            block += zone_string(bundle.context->heart_rate_zone);
        } else {
            block += kNotAvailable;
        }
    }
    return block;
}

RenderedPrompt render_prompt(const PromptConfig& config, const SegmentObservations& obs) {
    validate_config(config);
    if (obs.bundles.empty()) throw EmptyObservations(obs.segment_id);

    const bool with_context = config.mask.extra_context;

    std::vector<std::string> sections;
    {
        std::string header(kHeader);
        if (with_context) header += kContextDeclaration;
        sections.push_back(std::move(header));
    }
    {
        const SegmentObservations masked = apply_mask(obs, config.mask);
        std::vector<std::string> blocks;
        blocks.reserve(masked.bundles.size());
        for (const auto& b : masked.bundles) blocks.push_back(render_timestep(b, with_context));
        sections.push_back(std::string(kTagsLine) + "\n" + join(blocks, "\n"));
    }
    sections.push_back(std::string(kNote));

    if (config.mode == PromptMode::closed_set) {
        std::string list(kListHeader);
        for (ActivityLabel label : config.activity_list) {
            list += "\n";
            list += canonical_string(label);
        }
        sections.push_back(std::move(list));
    }

    if (config.shots == Shots::one) {
        const OneShotExample& ex = *config.one_shot_example;
        SegmentObservations ex_obs{ex.segment_id, ex.bundles};
        const SegmentObservations masked = apply_mask(ex_obs, config.mask);
        std::vector<std::string> blocks;
        blocks.reserve(masked.bundles.size());
        for (const auto& b : masked.bundles) blocks.push_back(render_timestep(b, with_context));

        std::string shot(kOneShotIntro);
        shot += "\n";
        shot += kOneShotBeginPreds;
        shot += "\n";
        shot += join(blocks, "\n");
        shot += "\n";
        shot += kOneShotEndPreds;
        shot += "\n";
        shot += kOneShotBeginReasoning;
        shot += "\n";
        shot += ex.reasoning;
        shot += "\n";
        shot += kOneShotEndReasoning;
        shot += "\n";
        shot += kOneShotClosing;
        sections.push_back(std::move(shot));
    }

    RenderedPrompt out;
    out.text = join(sections, "\n\n") + "\n";
    out.segment_id = obs.segment_id;
    out.config_digest = sha256_hex(out.text);
    return out;
}

} // namespace fusebench
