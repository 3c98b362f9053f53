#pragma once

#include "fusebench/activity.hpp"
#include "fusebench/llm.hpp"

#include <string>
#include <variant>
#include <vector>

namespace fusebench {

enum class ExtractionRule { marker_line, fallback_last_line };

// The model's final answer, pulled out of its free-form reasoning.
struct RawAnswer {
    std::string text; // non-empty, single line, trimmed
    ExtractionRule extraction_rule = ExtractionRule::marker_line;
};

enum class ParseFailureReason { no_label_match, mapper_unresolved, empty_response, transport };

std::string_view parse_failure_string(ParseFailureReason r);

struct ParseFailure {
    ParseFailureReason reason = ParseFailureReason::no_label_match;
    std::string detail;
};

struct OpenText {
    std::string text;
};

// Closed-set parses carry a label; open-ended parses carry the raw answer
// until mapped; failures are scored values, not errors.
struct ParsedPrediction {
    std::variant<ActivityLabel, OpenText, ParseFailure> outcome;

    bool is_label() const { return std::holds_alternative<ActivityLabel>(outcome); }
    bool is_failure() const { return std::holds_alternative<ParseFailure>(outcome); }
    ActivityLabel label() const { return std::get<ActivityLabel>(outcome); }
};

// Finds the text after the last case-insensitive "user activity:" marker; if
// no marker exists, returns the last non-empty line. Total on any non-empty
// UTF-8 input. Throws EmptyResponse for empty/whitespace-only text.
RawAnswer extract_answer(const std::string& response_text);

// Canonical-normalized exact match first, then unique token-run containment
// in either direction; ambiguity or no match is a parse_failure value.
ParsedPrediction resolve_closed(const RawAnswer& raw, const std::vector<ActivityLabel>& labels);

// Template text with {answer} and {labels} placeholders.
std::string load_mapping_template(const std::filesystem::path& path);

std::string render_mapping_prompt(const std::string& mapping_template,
                                  const std::string& open_text,
                                  const std::vector<ActivityLabel>& labels);

struct MapperConfig {
    std::string backend_id;
    std::string model_id;
    std::string mapping_template;
    double temperature = 0.0;
    int max_output_tokens = 256;
    std::string tag;        // transcript provenance for the mapper call
    std::string segment_id; // ditto
};

// Maps an unconstrained answer onto the closed set with one extra inference
// (a second, cache-bypassing one if the first reply does not resolve). An
// answer that already matches a label exactly short-circuits with zero
// completions. Transport errors propagate.
ParsedPrediction map_open_label(const std::string& open_text,
                                const std::vector<ActivityLabel>& labels, LlmClient& client,
                                const MapperConfig& mapper);

} // namespace fusebench
