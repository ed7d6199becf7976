#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "synthloop/dataset.hpp"
#include "synthloop/prompting.hpp"

namespace synthloop {

struct GenerationRequest {
    std::vector<ConversationTurn> conversation;
    std::string model_name = "gpt-3.5-turbo";
    double temperature = 1.0;
    int max_output_tokens = 4096;
    std::uint64_t seed = 0;  // honored by the mock backends only
    int batch_index = 0;     // mock randomness is keyed on (seed, round, batch_index)

    // Round = number of user turns in the conversation.
    int round() const;
    void validate() const;
};

struct GenerationResponse {
    std::string raw_text;
    std::string backend_id;
    int round = 1;
};

/// Synthetic-record generator. Implementations must be safe to call from
/// several threads at once. Output is returned verbatim and may be
/// malformed, repetitive or nondeterministic; callers parse it.
class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual std::string id() const = 0;
    // Throws BackendError (transport, authentication or backend_reported).
    virtual GenerationResponse generate(const GenerationRequest& request) const = 0;
};

// ---------------------------------------------------------------------------
// Backends

struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com";
    std::string api_key;  // empty: read SYNTHLOOP_API_KEY at call time
    double timeout_s = 120.0;
};

inline constexpr const char* kApiKeyEnv = "SYNTHLOOP_API_KEY";

std::unique_ptr<GenerationBackend> make_http_backend(HttpBackendConfig cfg);

// Perturbs the prompt's example rows with class-conditional Gaussian noise
// (noise_scale times the per-class feature spread). The scale halves with
// every self-evolution turn in the conversation.
std::unique_ptr<GenerationBackend> make_mock_good_backend(double noise_scale = 0.5);

// First answer mixes malformed rows, verbatim copies of prompt examples and
// label-swapped rows. Once the last turn asks to "generate better data" it
// answers like the mock-good backend.
std::unique_ptr<GenerationBackend> make_mock_bad_backend(double noise_scale = 0.5);

struct BackendConfig {
    std::string kind = "mock-good";  // http | mock-good | mock-bad
    std::string base_url = "https://api.openai.com";
    std::string model = "gpt-3.5-turbo";
    double temperature = 1.0;
    int max_tokens = 4096;
    std::uint64_t seed = 0;
    double timeout_s = 120.0;
    double mock_noise_scale = 0.5;
};

std::unique_ptr<GenerationBackend> make_backend(const BackendConfig& cfg);

// ---------------------------------------------------------------------------
// Parsing raw model output

enum class RejectReason { prose, code_fence, header, field_count, non_numeric, unknown_label, implausible_value };

std::string_view to_string(RejectReason r);

struct ParseReject {
    int line = 0;  // 1-based line in the raw text
    RejectReason reason = RejectReason::prose;
    std::string detail;
};

struct ParseDiagnostics {
    int n_parsed = 0;
    int n_rejected = 0;
    std::vector<ParseReject> rejects;
};

struct ParsedOutput {
    std::vector<TrafficRecord> records;
    ParseDiagnostics diagnostics;
};

// Values further than this many schema ranges outside [min, max] are implausible.
inline constexpr double kPlausibleRangeFactor = 5.0;

/// Scans `raw_text` for CSV rows matching the schema. Never throws on any
/// text: every non-blank line is a candidate that becomes either a record
/// (Synthetic provenance, batch_index = acceptance order) or a reject.
ParsedOutput parse_synthetic_output(std::string_view raw_text, const FeatureSchema& schema, int round);

}  // namespace synthloop
