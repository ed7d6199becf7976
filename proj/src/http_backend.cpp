#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "synthloop/error.hpp"
#include "synthloop/generation.hpp"

namespace synthloop {

namespace {

using nlohmann::json;

struct SplitUrl {
    std::string scheme_host_port;
    std::string path_prefix;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw BackendError(BackendErrorKind::transport, "backend.base_url must start with http:// or https://");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.scheme_host_port = url.substr(0, path_start);
    if (path_start != std::string::npos) out.path_prefix = url.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
    return out;
}

std::string error_message(const std::string& body) {
    try {
        const auto j = json::parse(body);
        if (j.contains("error")) {
            const auto& e = j.at("error");
            if (e.is_object() && e.contains("message") && e.at("message").is_string()) {
                return e.at("message").get<std::string>();
            }
            if (e.is_string()) return e.get<std::string>();
        }
    } catch (const json::exception&) {
    }
    return body.substr(0, 200);
}

class HttpBackend final : public GenerationBackend {
public:
    explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {}

    std::string id() const override { return "http"; }

    GenerationResponse generate(const GenerationRequest& request) const override {
        request.validate();
        std::string key = cfg_.api_key;
        if (key.empty()) {
            if (const char* env = std::getenv(kApiKeyEnv)) key = env;
        }
        if (key.empty()) {
            throw BackendError(BackendErrorKind::authentication,
                               std::string("missing API credential: set ") + kApiKeyEnv);
        }

        const auto url = split_url(cfg_.base_url);
        httplib::Client client(url.scheme_host_port);
        if (!client.is_valid()) {
            throw BackendError(BackendErrorKind::transport, "cannot create HTTP client for " + url.scheme_host_port);
        }
        const auto secs = static_cast<time_t>(cfg_.timeout_s);
        const auto usecs = static_cast<time_t>((cfg_.timeout_s - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);

        json messages = json::array();
        for (const auto& t : request.conversation) {
            messages.push_back({{"role", std::string(to_string(t.role))}, {"content", t.text}});
        }
        const json body = {{"model", request.model_name},
                           {"temperature", request.temperature},
                           {"max_tokens", request.max_output_tokens},
                           {"messages", messages}};
        const httplib::Headers headers = {{"Authorization", "Bearer " + key}};

        auto res = client.Post(url.path_prefix + "/v1/chat/completions", headers, body.dump(), "application/json");
        if (!res) {
            throw BackendError(BackendErrorKind::transport, "request failed: " + httplib::to_string(res.error()));
        }
        if (res->status == 401 || res->status == 403) {
            throw BackendError(BackendErrorKind::authentication,
                               "HTTP " + std::to_string(res->status) + ": " + error_message(res->body));
        }
        if (res->status < 200 || res->status >= 300) {
            throw BackendError(BackendErrorKind::backend_reported,
                               "HTTP " + std::to_string(res->status) + ": " + error_message(res->body));
        }

        GenerationResponse response;
        response.backend_id = id();
        response.round = request.round();
        try {
            const auto reply = json::parse(res->body);
            response.raw_text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw BackendError(BackendErrorKind::backend_reported, std::string("unexpected reply shape: ") + e.what());
        }
        return response;
    }

private:
    HttpBackendConfig cfg_;
};

}  // namespace

std::unique_ptr<GenerationBackend> make_http_backend(HttpBackendConfig cfg) {
    return std::make_unique<HttpBackend>(std::move(cfg));
}

}  // namespace synthloop
