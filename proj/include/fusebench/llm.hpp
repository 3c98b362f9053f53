#pragma once

#include "fusebench/manifest.hpp"
#include "fusebench/prompt.hpp"

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fusebench {

struct ChatRequest {
    std::string backend_id;
    std::string model_id;
    RenderedPrompt prompt;
    double temperature = 0.0;
    int max_output_tokens = 4096;
    // Provenance tag (the runner's ablation id); logged to transcripts and
    // used as the replay fallback key.
    std::string tag;
};

enum class FinishReason { stop, length, error };

std::string_view finish_reason_string(FinishReason r);
FinishReason parse_finish_reason(std::string_view text);

struct ChatResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
    std::int64_t latency_ms = 0;
    int attempt_count = 1;
};

enum class BackendKind { http_openai_compatible, replay, scripted_mock };

struct BackendConfig {
    BackendKind kind = BackendKind::scripted_mock;
    std::string endpoint_url;              // http only
    std::string api_key_env;               // http only: env var holding the key
    int timeout_ms = 30000;
    int max_retries = 3;
    int backoff_base_ms = 250;
    double rate_limit_rps = 0.0;           // 0 = unlimited
    int max_in_flight = 4;
    std::vector<std::string> transcript_paths; // replay only
    std::string mock_mode = "scripted";    // scripted_mock: oracle|uniform_random|scripted
    std::uint64_t mock_seed = 0;           // uniform_random
    std::string script_path;               // scripted

    bool operator==(const BackendConfig&) const = default;
};

BackendConfig backend_config_from_json(const nlohmann::json& j);
nlohmann::json backend_config_to_json(const BackendConfig& cfg);

// Injectable time source so backoff and rate limiting are testable.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

class SystemClock : public Clock {
public:
    std::int64_t now_ms() override;
    void sleep_ms(std::int64_t ms) override;
};

// Advancing-on-sleep clock for tests.
class ManualClock : public Clock {
public:
    std::int64_t now_ms() override { return now_; }
    void sleep_ms(std::int64_t ms) override { now_ += ms; }
    void advance(std::int64_t ms) { now_ += ms; }

private:
    std::int64_t now_ = 0;
};

// Keeps request starts in any 1s sliding window at or below ceil(rps).
class RateLimiter {
public:
    RateLimiter(Clock& clock, double rps);
    void acquire();

private:
    Clock& clock_;
    std::size_t cap_;
    std::deque<std::int64_t> starts_;
    std::mutex mutex_;
};

// One transport attempt; retries/caching/logging live in the client.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse attempt(const ChatRequest& req) = 0;
};

// Append-only line-delimited request/response log.
class TranscriptStore {
public:
    explicit TranscriptStore(std::filesystem::path path) : path_(std::move(path)) {}
    void append(const nlohmann::json& record);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
};

struct LlmClientOptions {
    std::string run_id = "adhoc";
    std::filesystem::path cache_dir;      // empty = caching off
    std::filesystem::path transcript_path; // empty = transcripts off
    Clock* clock = nullptr;               // default: process-wide SystemClock
};

// Uniform chat-completion client over pluggable backends: retries with
// exponential backoff, on-disk response cache keyed by
// (backend_id, model_id, temperature, prompt digest), full transcript
// capture, per-backend rate limit and in-flight bound.
class LlmClient {
public:
    explicit LlmClient(LlmClientOptions options = {});
    ~LlmClient();

    // Builds the backend described by cfg. Registering an equal config again
    // returns the same id without side effects. The oracle mock needs the
    // manifest for its ground-truth sidecar. Throws InvalidConfig.
    std::string register_backend(const BackendConfig& cfg, const Manifest* manifest = nullptr);

    // Registers a caller-supplied backend (tests, custom mocks).
    std::string register_custom_backend(std::string id, std::unique_ptr<ChatBackend> backend,
                                        const BackendConfig& cfg = {});

    bool has_backend(const std::string& id) const;

    // Sends (or serves from cache) one completion.
    // Throws BackendUnavailable, AuthFailure, RetriesExhausted.
    ChatResponse complete(const ChatRequest& req, bool use_cache = true);

    const std::filesystem::path& transcript_path() const { return options_.transcript_path; }

private:
    struct Entry;
    Entry& entry_for(const std::string& id);

    LlmClientOptions options_;
    std::unique_ptr<TranscriptStore> transcripts_;
    std::map<std::string, std::unique_ptr<Entry>> backends_;
    mutable std::mutex mutex_;
};

// Mock responder: request -> response text.
using MockResponder = std::function<std::string(const ChatRequest&)>;

std::unique_ptr<ChatBackend> make_responder_backend(MockResponder responder);

// Answers "user activity: <ground truth>" from the manifest sidecar.
MockResponder oracle_responder(const Manifest& manifest);

// Answers "user activity: <label>" drawn uniformly per segment id.
MockResponder uniform_random_responder(std::uint64_t seed);

// Replays stored transcripts: primary key prompt digest, fallback
// (segment_id, tag, model_id). Throws ReplayMiss on unknown requests.
std::unique_ptr<ChatBackend> make_replay_backend(const std::vector<std::string>& transcript_paths);

std::unique_ptr<ChatBackend> make_http_backend(const BackendConfig& cfg);

} // namespace fusebench
