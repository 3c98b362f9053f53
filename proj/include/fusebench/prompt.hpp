#pragma once

#include "fusebench/observations.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fusebench {

enum class PromptMode { closed_set, open_ended };
enum class Shots { zero, one };

std::string_view mode_string(PromptMode m);
std::string_view shots_string(Shots s);
std::optional<PromptMode> parse_mode(std::string_view text);
std::optional<Shots> parse_shots(std::string_view text);

// The fixed illustrative example (washing dishes, reasoning included). Its
// timestep blocks are re-rendered under the active mask so the exemplar
// always matches the test instance's schema.
struct OneShotExample {
    std::string segment_id;
    std::vector<TimeStepBundle> bundles;
    std::string reasoning; // ends with the "user activity: ..." line
};

OneShotExample load_one_shot_example(const std::filesystem::path& path);

struct PromptConfig {
    PromptMode mode = PromptMode::closed_set;
    Shots shots = Shots::zero;
    ModalityMask mask;
    std::vector<ActivityLabel> activity_list; // closed_set only; prompt order
    std::optional<OneShotExample> one_shot_example; // shots == one only
};

// A closed-set config over the full 12-label list in the paper's order.
PromptConfig make_prompt_config(PromptMode mode, Shots shots, const ModalityMask& mask,
                                std::optional<OneShotExample> example = std::nullopt);

struct RenderedPrompt {
    std::string text;
    std::string segment_id;
    std::string config_digest; // SHA-256 of the text; the cache key component
};

// One "--- Time step N ---" block. Absent fields render the literal
// "Not available". The "Extra context:" line is emitted only when
// `include_context` is set (i.e. the mask declares the context modality).
std::string render_timestep(const TimeStepBundle& bundle, bool include_context = false);

// Full prompt: instruction header, masked timestep blocks in order, the
// IMPORTANT NOTE paragraph, the activity list (closed set), and the one-shot
// example with its closing line (one-shot). Deterministic; the digest is
// collision-free for distinct texts.
// Throws EmptyObservations, ConfigInvariantViolation.
RenderedPrompt render_prompt(const PromptConfig& config, const SegmentObservations& obs);

} // namespace fusebench
