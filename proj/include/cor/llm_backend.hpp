#pragma once

#include "cor/corpus.hpp"
#include "cor/error.hpp"
#include "cor/types.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace cor::backend {

struct GenRequest {
    std::string prompt;
    // Generation must continue from this text; the response starts with it.
    std::optional<std::string> forced_prefix;
    int max_new_tokens = 256;
    double temperature = 0.0;
    std::optional<std::uint64_t> seed;
    // Caller-side identifier (the example id); scripted and oracle mocks key on it.
    std::string tag;

    // Throws InvalidArgument on max_new_tokens < 1 or temperature < 0.
    void validate() const;
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct GenResponse {
    std::string text;
    std::optional<TokenUsage> usage;
    std::string backend_id;
    // The forced prefix was appended to the prompt instead of prefilled.
    bool prefix_in_prompt = false;
};

class BackendError : public Error {
public:
    BackendError(const std::string& message, int attempts) : Error(message), attempts_(attempts) {}
    [[nodiscard]] int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

// The backend cannot honour forced_prefix as a decoder continuation.
class CapabilityError : public BackendError {
public:
    using BackendError::BackendError;
};

// Implementations must tolerate concurrent generate() calls.
class Backend {
public:
    virtual ~Backend() = default;

    [[nodiscard]] virtual std::string id() const = 0;

    // Validates the request and enforces that the text starts with forced_prefix.
    GenResponse generate(const GenRequest& request);

    [[nodiscard]] std::size_t calls() const noexcept { return calls_.load(); }

protected:
    virtual GenResponse do_generate(const GenRequest& request) = 0;

private:
    std::atomic<std::size_t> calls_{0};
};

// generate(), falling back to appending the prefix after the prompt when the
// backend raises CapabilityError.
GenResponse generate_with_fallback(Backend& backend, const GenRequest& request);

struct BatchItem {
    std::optional<GenResponse> response;
    std::string error;
    int attempts = 0;
    [[nodiscard]] bool ok() const noexcept { return response.has_value(); }
};

// Results are in request order; at most max_in_flight calls are outstanding.
// A failing item never aborts the batch. Throws InvalidArgument for
// max_in_flight == 0.
std::vector<BatchItem> generate_batch(Backend& backend, const std::vector<GenRequest>& requests,
                                      std::size_t max_in_flight, bool prefix_fallback = true);

// ---------------------------------------------------------------------------
// Deterministic local backends

// What a perfect model knows about one example.
struct OracleKnowledge {
    std::vector<std::string> gold_context_texts;  // as rendered in prompts
    std::string answer;
};

[[nodiscard]] std::unordered_map<std::string, OracleKnowledge> oracle_knowledge(
    const std::vector<corpus::Example>& examples);

// Reads the "Context<i>: ..." lines of the prompt, finds the gold contexts and
// emits the ideal output for `mode`. With a forced prefix it continues after
// the prefix, emitting only the sections the prefix does not already contain.
class OracleBackend : public Backend {
public:
    enum class Policy { gold_ids, wrong_ids };

    OracleBackend(std::unordered_map<std::string, OracleKnowledge> knowledge, ReasoningMode mode,
                  Policy policy = Policy::gold_ids);

    [[nodiscard]] std::string id() const override;

protected:
    GenResponse do_generate(const GenRequest& request) override;

private:
    std::unordered_map<std::string, OracleKnowledge> knowledge_;
    ReasoningMode mode_;
    Policy policy_;
};

// Wrong-ID policy: the ID line names only non-gold positions (as many as there
// are gold ones, earliest first) while the answer stays correct.
class AdversarialBackend : public OracleBackend {
public:
    AdversarialBackend(std::unordered_map<std::string, OracleKnowledge> knowledge, ReasoningMode mode)
        : OracleBackend(std::move(knowledge), mode, Policy::wrong_ids) {}
};

// Responses from a line-delimited JSON script of {"match": tag, "response": text};
// "match": "*" is the fallback for unlisted tags. Optional integer fields
// "prompt_tokens" and "completion_tokens" become usage.
class ScriptedBackend : public Backend {
public:
    struct Entry {
        std::string response;
        std::optional<TokenUsage> usage;
    };

    explicit ScriptedBackend(std::unordered_map<std::string, Entry> script, std::string name = "scripted");
    [[nodiscard]] static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

    [[nodiscard]] std::string id() const override { return name_; }

protected:
    GenResponse do_generate(const GenRequest& request) override;

private:
    std::unordered_map<std::string, Entry> script_;
    std::string name_;
};

// ---------------------------------------------------------------------------
// Remote chat-completions backend

struct HttpBackendConfig {
    std::string url;  // full endpoint, e.g. http://localhost:8000/v1/chat/completions
    std::string model;
    std::string bearer_token;  // usually from COR_BACKEND_TOKEN
    int max_attempts = 4;
    std::chrono::milliseconds base_delay{500};
    std::chrono::milliseconds max_delay{8000};
    std::chrono::seconds timeout{120};
    // Send forced prefixes as a trailing assistant message to be continued.
    bool prefill = false;
};

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    [[nodiscard]] std::string id() const override;
    [[nodiscard]] const HttpBackendConfig& config() const noexcept { return config_; }

protected:
    GenResponse do_generate(const GenRequest& request) override;

private:
    HttpBackendConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

}  // namespace cor::backend
