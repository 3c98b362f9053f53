#include "fusebench/errors.hpp"
#include "fusebench/llm.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

namespace fusebench {
namespace {

using json = nlohmann::json;

// OpenAI-compatible chat-completions transport: the whole rendered prompt
// travels as a single user message.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {}

    ChatResponse attempt(const ChatRequest& req) override {
        const char* key = std::getenv(cfg_.api_key_env.c_str());
        if (key == nullptr) {
            throw AuthFailure("environment variable " + cfg_.api_key_env + " is not set");
        }

        httplib::Client client(cfg_.endpoint_url);
        client.set_connection_timeout(0, cfg_.timeout_ms * 1000LL);
        client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000LL);
        client.set_bearer_token_auth(key);

        const json body = {{"model", req.model_id},
                           {"messages", json::array({{{"role", "user"},
                                                      {"content", req.prompt.text}}})},
                           {"temperature", req.temperature},
                           {"max_tokens", req.max_output_tokens}};

        auto result = client.Post("/chat/completions", body.dump(), "application/json");
        if (!result) {
            if (result.error() == httplib::Error::ConnectionTimeout ||
                result.error() == httplib::Error::Read) {
                throw Timeout(httplib::to_string(result.error()));
            }
            throw BackendUnavailable(httplib::to_string(result.error()));
        }
        if (result->status == 401 || result->status == 403) {
            throw AuthFailure("HTTP " + std::to_string(result->status));
        }
        if (result->status != 200) {
            throw BackendUnavailable("HTTP " + std::to_string(result->status) + ": " +
                                     result->body.substr(0, 200));
        }

        json j = json::parse(result->body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
            throw BackendUnavailable("malformed completion response");
        }
        const auto& choice = j["choices"][0];
        ChatResponse resp;
        resp.text = choice.at("message").at("content").get<std::string>();
        const std::string reason = choice.value("finish_reason", "stop");
        resp.finish_reason = reason == "stop"    ? FinishReason::stop
                             : reason == "length" ? FinishReason::length
                                                  : FinishReason::error;
        return resp;
    }

private:
    BackendConfig cfg_;
};

} // namespace

std::unique_ptr<ChatBackend> make_http_backend(const BackendConfig& cfg) {
    return std::make_unique<HttpBackend>(cfg);
}

} // namespace fusebench
