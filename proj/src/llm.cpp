#include "fusebench/llm.hpp"

#include "fusebench/digest.hpp"
#include "fusebench/errors.hpp"
#include "fusebench/jsonl.hpp"
#include "fusebench/rng.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <thread>
#include <unordered_map>

namespace fusebench {
namespace {

SystemClock& system_clock() {
    static SystemClock clock;
    return clock;
}

// Counting semaphore with a runtime bound.
class Semaphore {
public:
    explicit Semaphore(int count) : count_(count) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return count_ > 0; });
        --count_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            ++count_;
        }
        cv_.notify_one();
    }

private:
    int count_;
    std::mutex mutex_;
    std::condition_variable cv_;
};

struct SemaphoreGuard {
    explicit SemaphoreGuard(Semaphore& s) : sem(s) { sem.acquire(); }
    ~SemaphoreGuard() { sem.release(); }
    Semaphore& sem;
};

std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", t);
    return buf;
}

json response_to_json(const ChatResponse& resp) {
    return {{"text", resp.text},
            {"finish_reason", std::string(finish_reason_string(resp.finish_reason))},
            {"latency_ms", resp.latency_ms},
            {"attempt_count", resp.attempt_count}};
}

ChatResponse response_from_json(const json& j) {
    ChatResponse resp;
    resp.text = j.at("text").get<std::string>();
    resp.finish_reason = parse_finish_reason(j.value("finish_reason", "stop"));
    resp.latency_ms = j.value("latency_ms", std::int64_t{0});
    resp.attempt_count = j.value("attempt_count", 1);
    return resp;
}

std::string kind_string(BackendKind kind) {
    switch (kind) {
    case BackendKind::http_openai_compatible: return "http_openai_compatible";
    case BackendKind::replay: return "replay";
    case BackendKind::scripted_mock: return "scripted_mock";
    }
    return "scripted_mock";
}

class ResponderBackend : public ChatBackend {
public:
    explicit ResponderBackend(MockResponder responder) : responder_(std::move(responder)) {}

    ChatResponse attempt(const ChatRequest& req) override {
        ChatResponse resp;
        resp.text = responder_(req);
        resp.finish_reason = FinishReason::stop;
        return resp;
    }

private:
    MockResponder responder_;
};

class ReplayBackend : public ChatBackend {
public:
    explicit ReplayBackend(const std::vector<std::string>& paths) {
        for (const auto& p : paths) {
            for (const auto& rec : read_jsonl(p)) {
                if (rec.value("type", "completion") != "completion") continue;
                const std::string text = rec.at("response").at("text").get<std::string>();
                const std::string model = rec.value("model_id", "");
                const std::string digest = rec.value("prompt_digest", "");
                // Two models can see the same prompt; key the digest by model.
                if (!digest.empty()) by_digest_[model + "|" + digest] = text;
                const std::string fallback =
                    rec.value("segment_id", "") + "|" + rec.value("ablation_id", "") + "|" + model;
                by_fallback_[fallback] = text;
            }
        }
    }

    ChatResponse attempt(const ChatRequest& req) override {
        auto it = by_digest_.find(req.model_id + "|" + req.prompt.config_digest);
        if (it == by_digest_.end()) {
            const std::string fallback =
                req.prompt.segment_id + "|" + req.tag + "|" + req.model_id;
            it = by_fallback_.find(fallback);
            if (it == by_fallback_.end()) {
                throw ReplayMiss("no transcript for segment " + req.prompt.segment_id +
                                 " tag '" + req.tag + "' model " + req.model_id);
            }
        }
        ChatResponse resp;
        resp.text = it->second;
        resp.finish_reason = FinishReason::stop;
        return resp;
    }

private:
    std::unordered_map<std::string, std::string> by_digest_;
    std::unordered_map<std::string, std::string> by_fallback_;
};

class ScriptedFileBackend : public ChatBackend {
public:
    explicit ScriptedFileBackend(const std::string& path) {
        for (const auto& rec : read_jsonl(path)) {
            const std::string key =
                rec.value("segment_id", "") + "|" + rec.value("tag", "");
            entries_[key] = rec.at("text").get<std::string>();
            if (!rec.contains("tag")) entries_[rec.value("segment_id", "")] = entries_[key];
        }
    }

    ChatResponse attempt(const ChatRequest& req) override {
        auto it = entries_.find(req.prompt.segment_id + "|" + req.tag);
        if (it == entries_.end()) it = entries_.find(req.prompt.segment_id + "|");
        if (it == entries_.end()) it = entries_.find(req.prompt.segment_id);
        if (it == entries_.end()) {
            throw BackendUnavailable("no scripted response for " + req.prompt.segment_id);
        }
        ChatResponse resp;
        resp.text = it->second;
        resp.finish_reason = FinishReason::stop;
        return resp;
    }

private:
    std::unordered_map<std::string, std::string> entries_;
};

} // namespace

std::string_view finish_reason_string(FinishReason r) {
    switch (r) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    case FinishReason::error: return "error";
    }
    return "error";
}

FinishReason parse_finish_reason(std::string_view text) {
    if (text == "stop") return FinishReason::stop;
    if (text == "length") return FinishReason::length;
    return FinishReason::error;
}

BackendConfig backend_config_from_json(const nlohmann::json& j) {
    BackendConfig cfg;
    const std::string kind = j.value("kind", "scripted_mock");
    if (kind == "http_openai_compatible") {
        cfg.kind = BackendKind::http_openai_compatible;
    } else if (kind == "replay") {
        cfg.kind = BackendKind::replay;
    } else if (kind == "scripted_mock") {
        cfg.kind = BackendKind::scripted_mock;
    } else {
        throw InvalidConfig("unknown backend kind '" + kind + "'");
    }
    cfg.endpoint_url = j.value("endpoint_url", "");
    cfg.api_key_env = j.value("api_key_env", "");
    cfg.timeout_ms = j.value("timeout_ms", 30000);
    cfg.max_retries = j.value("max_retries", 3);
    cfg.backoff_base_ms = j.value("backoff_base_ms", 250);
    cfg.rate_limit_rps = j.value("rate_limit_rps", 0.0);
    cfg.max_in_flight = j.value("max_in_flight", 4);
    if (j.contains("transcripts")) {
        cfg.transcript_paths = j["transcripts"].get<std::vector<std::string>>();
    }
    cfg.mock_mode = j.value("mock", "scripted");
    cfg.mock_seed = j.value("mock_seed", std::uint64_t{0});
    cfg.script_path = j.value("script", "");
    return cfg;
}

nlohmann::json backend_config_to_json(const BackendConfig& cfg) {
    json j;
    j["kind"] = kind_string(cfg.kind);
    if (!cfg.endpoint_url.empty()) j["endpoint_url"] = cfg.endpoint_url;
    if (!cfg.api_key_env.empty()) j["api_key_env"] = cfg.api_key_env;
    j["timeout_ms"] = cfg.timeout_ms;
    j["max_retries"] = cfg.max_retries;
    j["backoff_base_ms"] = cfg.backoff_base_ms;
    j["rate_limit_rps"] = cfg.rate_limit_rps;
    j["max_in_flight"] = cfg.max_in_flight;
    if (!cfg.transcript_paths.empty()) j["transcripts"] = cfg.transcript_paths;
    if (cfg.kind == BackendKind::scripted_mock) {
        j["mock"] = cfg.mock_mode;
        j["mock_seed"] = cfg.mock_seed;
        if (!cfg.script_path.empty()) j["script"] = cfg.script_path;
    }
    return j;
}

std::int64_t SystemClock::now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void SystemClock::sleep_ms(std::int64_t ms) {
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

RateLimiter::RateLimiter(Clock& clock, double rps)
    : clock_(clock), cap_(rps > 0 ? static_cast<std::size_t>(std::ceil(rps)) : 0) {}

void RateLimiter::acquire() {
    if (cap_ == 0) return;
    for (;;) {
        std::int64_t wait = 0;
        {
            std::lock_guard lock(mutex_);
            const std::int64_t now = clock_.now_ms();
            while (!starts_.empty() && starts_.front() <= now - 1000) starts_.pop_front();
            if (starts_.size() < cap_) {
                starts_.push_back(now);
                return;
            }
            wait = starts_.front() + 1000 - now;
        }
        clock_.sleep_ms(wait > 0 ? wait : 1);
    }
}

void TranscriptStore::append(const nlohmann::json& record) {
    std::lock_guard lock(mutex_);
    append_jsonl(path_, record);
}

struct LlmClient::Entry {
    BackendConfig cfg;
    std::unique_ptr<ChatBackend> backend;
    std::unique_ptr<RateLimiter> limiter;
    std::unique_ptr<Semaphore> in_flight;
};

LlmClient::LlmClient(LlmClientOptions options) : options_(std::move(options)) {
    if (options_.clock == nullptr) options_.clock = &system_clock();
    if (!options_.transcript_path.empty()) {
        transcripts_ = std::make_unique<TranscriptStore>(options_.transcript_path);
    }
}

LlmClient::~LlmClient() = default;

std::string LlmClient::register_backend(const BackendConfig& cfg, const Manifest* manifest) {
    if (cfg.kind == BackendKind::http_openai_compatible) {
        if (cfg.endpoint_url.empty()) throw InvalidConfig("http backend requires endpoint_url");
        if (cfg.api_key_env.empty()) throw InvalidConfig("http backend requires api_key_env");
        if (std::getenv(cfg.api_key_env.c_str()) == nullptr) {
            throw InvalidConfig("environment variable " + cfg.api_key_env + " is not set");
        }
    }
    if (cfg.kind == BackendKind::replay && cfg.transcript_paths.empty()) {
        throw InvalidConfig("replay backend requires transcript paths");
    }

    const std::string id = kind_string(cfg.kind) + "-" +
                           sha256_hex(backend_config_to_json(cfg).dump()).substr(0, 8);
    {
        std::lock_guard lock(mutex_);
        if (backends_.count(id)) return id; // equal config: idempotent
    }

    std::unique_ptr<ChatBackend> backend;
    switch (cfg.kind) {
    case BackendKind::http_openai_compatible:
        backend = make_http_backend(cfg);
        break;
    case BackendKind::replay:
        backend = make_replay_backend(cfg.transcript_paths);
        break;
    case BackendKind::scripted_mock:
        if (cfg.mock_mode == "oracle") {
            if (manifest == nullptr) {
                throw InvalidConfig("oracle mock requires a manifest for ground truth");
            }
            backend = make_responder_backend(oracle_responder(*manifest));
        } else if (cfg.mock_mode == "uniform_random") {
            backend = make_responder_backend(uniform_random_responder(cfg.mock_seed));
        } else if (cfg.mock_mode == "scripted") {
            if (cfg.script_path.empty()) throw InvalidConfig("scripted mock requires a script");
            backend = std::make_unique<ScriptedFileBackend>(cfg.script_path);
        } else {
            throw InvalidConfig("unknown mock mode '" + cfg.mock_mode + "'");
        }
        break;
    }
    return register_custom_backend(id, std::move(backend), cfg);
}

std::string LlmClient::register_custom_backend(std::string id,
                                               std::unique_ptr<ChatBackend> backend,
                                               const BackendConfig& cfg) {
    auto entry = std::make_unique<Entry>();
    entry->cfg = cfg;
    entry->backend = std::move(backend);
    entry->limiter = std::make_unique<RateLimiter>(*options_.clock, cfg.rate_limit_rps);
    entry->in_flight = std::make_unique<Semaphore>(cfg.max_in_flight > 0 ? cfg.max_in_flight : 1);
    std::lock_guard lock(mutex_);
    backends_[id] = std::move(entry);
    return id;
}

bool LlmClient::has_backend(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return backends_.count(id) > 0;
}

LlmClient::Entry& LlmClient::entry_for(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = backends_.find(id);
    if (it == backends_.end()) throw BackendUnavailable("backend '" + id + "' not registered");
    return *it->second;
}

ChatResponse LlmClient::complete(const ChatRequest& req, bool use_cache) {
    if (req.model_id.empty()) throw InvalidConfig("request model_id must be non-empty");
    Entry& entry = entry_for(req.backend_id);

    const std::string cache_key =
        sha256_hex(req.backend_id + "\n" + req.model_id + "\n" +
                   format_temperature(req.temperature) + "\n" + req.prompt.config_digest);
    const std::filesystem::path cache_file =
        options_.cache_dir.empty()
            ? std::filesystem::path{}
            : options_.cache_dir / cache_key.substr(0, 2) / (cache_key + ".json");

    auto log_completion = [&](const ChatResponse& resp, bool cached) {
        if (!transcripts_) return;
        transcripts_->append({{"type", "completion"},
                              {"run_id", options_.run_id},
                              {"segment_id", req.prompt.segment_id},
                              {"ablation_id", req.tag},
                              {"backend_id", req.backend_id},
                              {"model_id", req.model_id},
                              {"prompt_digest", req.prompt.config_digest},
                              {"cached", cached},
                              {"request",
                               {{"temperature", req.temperature},
                                {"max_output_tokens", req.max_output_tokens},
                                {"prompt_text", req.prompt.text}}},
                              {"response", response_to_json(resp)},
                              {"ts", options_.clock->now_ms()}});
    };

    if (use_cache && !cache_file.empty() && std::filesystem::exists(cache_file)) {
        ChatResponse resp = response_from_json(json::parse(read_file(cache_file)));
        log_completion(resp, true);
        return resp;
    }

    SemaphoreGuard guard(*entry.in_flight);
    const int max_attempts = entry.cfg.max_retries + 1;
    std::string last_error;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        entry.limiter->acquire();
        const std::int64_t t0 = options_.clock->now_ms();
        try {
            ChatResponse resp = entry.backend->attempt(req);
            resp.latency_ms = options_.clock->now_ms() - t0;
            resp.attempt_count = attempt;
            if (resp.finish_reason == FinishReason::stop && resp.text.empty()) {
                throw BackendUnavailable("backend returned empty text with finish_reason=stop");
            }
            if (!cache_file.empty()) {
                atomic_write(cache_file, response_to_json(resp).dump() + "\n");
            }
            log_completion(resp, false);
            return resp;
        } catch (const AuthFailure&) {
            throw; // credentials will not improve on retry
        } catch (const ReplayMiss&) {
            throw;
        } catch (const Error& e) {
            last_error = e.what();
            if (transcripts_) {
                transcripts_->append({{"type", "attempt_error"},
                                      {"run_id", options_.run_id},
                                      {"segment_id", req.prompt.segment_id},
                                      {"ablation_id", req.tag},
                                      {"backend_id", req.backend_id},
                                      {"model_id", req.model_id},
                                      {"prompt_digest", req.prompt.config_digest},
                                      {"attempt", attempt},
                                      {"error", e.code()},
                                      {"message", e.what()},
                                      {"ts", options_.clock->now_ms()}});
            }
            if (attempt == max_attempts) break;
            const auto backoff = static_cast<std::int64_t>(entry.cfg.backoff_base_ms) *
                                 (std::int64_t{1} << (attempt - 1));
            options_.clock->sleep_ms(backoff);
        }
    }
    throw RetriesExhausted(last_error.empty() ? "no attempts made" : last_error);
}

std::unique_ptr<ChatBackend> make_responder_backend(MockResponder responder) {
    return std::make_unique<ResponderBackend>(std::move(responder));
}

MockResponder oracle_responder(const Manifest& manifest) {
    auto truths = std::make_shared<std::map<std::string, ActivityLabel>>();
    for (const auto& rec : manifest.records) (*truths)[rec.segment_id] = rec.label;
    return [truths](const ChatRequest& req) {
        auto it = truths->find(req.prompt.segment_id);
        if (it == truths->end()) {
            throw BackendUnavailable("oracle has no truth for " + req.prompt.segment_id);
        }
        return "The observations are consistent throughout.\nuser activity: " +
               std::string(canonical_string(it->second));
    };
}

MockResponder uniform_random_responder(std::uint64_t seed) {
    return [seed](const ChatRequest& req) {
        Rng rng(substream_seed(seed, fnv1a64(req.prompt.segment_id + "|" + req.tag)));
        const auto labels = all_activities();
        const ActivityLabel pick = labels[rng.next_index(labels.size())];
        return "user activity: " + std::string(canonical_string(pick));
    };
}

std::unique_ptr<ChatBackend> make_replay_backend(
    const std::vector<std::string>& transcript_paths) {
    return std::make_unique<ReplayBackend>(transcript_paths);
}

} // namespace fusebench
