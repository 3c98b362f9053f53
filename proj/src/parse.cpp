#include "fusebench/parse.hpp"

#include "fusebench/digest.hpp"
#include "fusebench/errors.hpp"
#include "fusebench/jsonl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace fusebench {
namespace {

constexpr std::string_view kMarker = "user activity:";

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    return std::string(s.substr(b, e - b + 1));
}

std::string first_nonempty_line(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        auto nl = s.find('\n', pos);
        if (nl == std::string_view::npos) nl = s.size();
        std::string line = trim(s.substr(pos, nl - pos));
        if (!line.empty()) return line;
        pos = nl + 1;
    }
    return "";
}

std::string last_nonempty_line(std::string_view s) {
    std::string last;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto nl = s.find('\n', pos);
        if (nl == std::string_view::npos) nl = s.size();
        std::string line = trim(s.substr(pos, nl - pos));
        if (!line.empty()) last = std::move(line);
        if (nl == s.size()) break;
        pos = nl + 1;
    }
    return last;
}

std::vector<std::string> tokens_of(std::string_view text) {
    std::istringstream ss(normalize_label_text(text));
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

bool contains_run(const std::vector<std::string>& haystack,
                  const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < needle.size(); ++k) {
            if (haystack[i + k] != needle[k]) {
                match = false;
                break;
            }
        }
        if (match) return true;
    }
    return false;
}

} // namespace

std::string_view parse_failure_string(ParseFailureReason r) {
    switch (r) {
    case ParseFailureReason::no_label_match: return "no_label_match";
    case ParseFailureReason::mapper_unresolved: return "mapper_unresolved";
    case ParseFailureReason::empty_response: return "empty_response";
    case ParseFailureReason::transport: return "transport";
    }
    return "no_label_match";
}

RawAnswer extract_answer(const std::string& response_text) {
    if (trim(response_text).empty()) throw EmptyResponse("response is empty or whitespace");

    const std::string lowered = to_lower(response_text);
    const std::string marker = to_lower(kMarker);
    const auto pos = lowered.rfind(marker);
    if (pos != std::string::npos) {
        const std::string after = response_text.substr(pos + marker.size());
        std::string answer = first_nonempty_line(after);
        if (!answer.empty()) return {std::move(answer), ExtractionRule::marker_line};
        // Marker with nothing after it: fall through to the last line.
    }
    return {last_nonempty_line(response_text), ExtractionRule::fallback_last_line};
}

ParsedPrediction resolve_closed(const RawAnswer& raw,
                                const std::vector<ActivityLabel>& labels) {
    if (auto exact = parse_activity(raw.text)) {
        if (std::find(labels.begin(), labels.end(), *exact) != labels.end()) {
            return {*exact};
        }
    }

    const auto raw_tokens = tokens_of(raw.text);
    std::set<ActivityLabel> matches;
    for (ActivityLabel label : labels) {
        std::vector<std::vector<std::string>> names;
        names.push_back(tokens_of(canonical_string(label)));
        if (dataset_name(label) != canonical_string(label)) {
            names.push_back(tokens_of(dataset_name(label)));
        }
        for (const auto& name_tokens : names) {
            if (contains_run(raw_tokens, name_tokens) || contains_run(name_tokens, raw_tokens)) {
                matches.insert(label);
                break;
            }
        }
    }
    if (matches.size() == 1) return {*matches.begin()};
    if (matches.empty()) {
        return {ParseFailure{ParseFailureReason::no_label_match, raw.text}};
    }
    // Ambiguous containment must fail, never pick arbitrarily.
    return {ParseFailure{ParseFailureReason::no_label_match, "ambiguous: " + raw.text}};
}

std::string load_mapping_template(const std::filesystem::path& path) {
    return read_file(path);
}

std::string render_mapping_prompt(const std::string& mapping_template,
                                  const std::string& open_text,
                                  const std::vector<ActivityLabel>& labels) {
    std::string label_lines;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) label_lines += '\n';
        label_lines += canonical_string(labels[i]);
    }
    std::string out = mapping_template;
    auto replace_all = [&out](std::string_view key, const std::string& value) {
        for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos)) {
            out.replace(pos, key.size(), value);
            pos += value.size();
        }
    };
    replace_all("{answer}", open_text);
    replace_all("{labels}", label_lines);
    return out;
}

ParsedPrediction map_open_label(const std::string& open_text,
                                const std::vector<ActivityLabel>& labels, LlmClient& client,
                                const MapperConfig& mapper) {
    if (trim(open_text).empty()) {
        return {ParseFailure{ParseFailureReason::empty_response, "empty open-ended answer"}};
    }
    // Exact matches cannot map to anything else; skip the second inference.
    if (auto exact = parse_activity(open_text)) {
        if (std::find(labels.begin(), labels.end(), *exact) != labels.end()) {
            return {*exact};
        }
    }

    ChatRequest req;
    req.backend_id = mapper.backend_id;
    req.model_id = mapper.model_id;
    req.temperature = mapper.temperature;
    req.max_output_tokens = mapper.max_output_tokens;
    req.tag = mapper.tag;
    req.prompt.text = render_mapping_prompt(mapper.mapping_template, open_text, labels);
    req.prompt.segment_id = mapper.segment_id;
    req.prompt.config_digest = sha256_hex(req.prompt.text);

    for (int attempt = 0; attempt < 2; ++attempt) {
        // The retry bypasses the cache: replaying an identical cached reply
        // could never resolve differently.
        ChatResponse resp = client.complete(req, /*use_cache=*/attempt == 0);
        RawAnswer raw;
        try {
            raw = extract_answer(resp.text);
        } catch (const EmptyResponse&) {
            continue;
        }
        ParsedPrediction mapped = resolve_closed(raw, labels);
        if (mapped.is_label()) return mapped;
    }
    return {ParseFailure{ParseFailureReason::mapper_unresolved, open_text}};
}

} // namespace fusebench
