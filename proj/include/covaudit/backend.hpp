#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "covaudit/config.hpp"
#include "covaudit/error.hpp"
#include "covaudit/labels.hpp"
#include "covaudit/prompts.hpp"

namespace covaudit {

struct GenerationRequest {
    Stage stage = Stage::Coverage;
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    double top_p = 1.0;
    int max_output = 1024;
    std::string control_id;  // routing tag for scripted backends; not sent

    static GenerationRequest from(Stage stage, const Prompt& p, std::string control_id = {});
    std::string prompt_hash() const;
};

struct GenerationResult {
    std::string text;
    long input_tokens = -1;  // -1: backend did not report
    long output_tokens = -1;
    long latency_ms = 0;
    std::string backend_id;
    bool replayed = false;
};

/// Implementations must tolerate concurrent generate() calls.
class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual std::string id() const = 0;
    virtual GenerationResult generate(const GenerationRequest& req) = 0;
};

/// Retryable transport failure.
class TransientBackendError : public Error {
public:
    explicit TransientBackendError(const std::string& detail) : Error(ErrorKind::TransientBackend, detail) {}
};

// ---------------------------------------------------------------------------

/// Scripted responses. Lookup order: by_control[control_id][stage], then
/// by_stage[stage], then a synthetic well-formed answer whose coverage label
/// comes from `labels` (or a hash of the control id). Scripted entries are
/// lists consumed in order; the last entry repeats.
struct MockScript {
    std::map<std::string, std::map<Stage, std::vector<std::string>>> by_control;
    std::map<Stage, std::vector<std::string>> by_stage;
    std::map<std::string, CoverageStatus> labels;

    static MockScript parse(std::string_view json_text);
    static MockScript load(const std::filesystem::path& path);
};

/// Label the synthetic mock assigns to a control with no scripted label.
CoverageStatus default_mock_label(std::string_view control_id);

class MockBackend final : public GenerationBackend {
public:
    explicit MockBackend(MockScript script = {});

    std::string id() const override { return "mock"; }
    GenerationResult generate(const GenerationRequest& req) override;

    std::size_t calls() const;

private:
    std::string synthesize(const GenerationRequest& req) const;

    MockScript script_;
    mutable std::mutex mu_;
    std::map<std::pair<std::string, Stage>, std::size_t> consumed_;
    std::size_t calls_ = 0;
};

struct TranscriptEntry {
    Stage stage = Stage::Coverage;
    std::string prompt_sha256;
    std::string system;
    std::string user;
    std::string response;
    long input_tokens = 0;
    long output_tokens = 0;
    long latency_ms = 0;

    std::string to_json_line() const;
    static TranscriptEntry from_json_line(std::string_view line);
};

std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path);
void write_transcript(const std::filesystem::path& path, const std::vector<TranscriptEntry>& entries);

/// Answers from a recorded transcript keyed by prompt hash. Throws ReplayMiss.
class ReplayBackend final : public GenerationBackend {
public:
    explicit ReplayBackend(const std::vector<TranscriptEntry>& entries);
    static std::unique_ptr<ReplayBackend> load(const std::filesystem::path& path);

    std::string id() const override { return "replay"; }
    GenerationResult generate(const GenerationRequest& req) override;

private:
    std::unordered_map<std::string, TranscriptEntry> by_hash_;
};

/// Chat-completion wire format over HTTP(S).
class HttpBackend final : public GenerationBackend {
public:
    HttpBackend(std::string endpoint, std::string model, std::string api_key, int timeout_s = 120);

    std::string id() const override { return "http:" + model_; }
    GenerationResult generate(const GenerationRequest& req) override;

    /// Request body for the wire format; exposed for tests.
    std::string request_body(const GenerationRequest& req) const;
    /// (text, prompt_tokens, completion_tokens) from a response body.
    static GenerationResult parse_response(std::string_view body);

private:
    std::string scheme_host_;
    std::string path_;
    std::string model_;
    std::string api_key_;
    int timeout_s_;
};

// ---------------------------------------------------------------------------

/// Admission control shared by all workers: at most `max_concurrency`
/// requests in flight, and at most `rpm` requests / `tpm` tokens in any
/// sliding 60 s window (0 disables a limit).
class RateLimiter {
public:
    using Clock = std::function<double()>;         // seconds
    using Sleeper = std::function<void(double)>;   // seconds

    RateLimiter(std::size_t max_concurrency, std::size_t rpm, std::size_t tpm, Clock clock = {},
                Sleeper sleeper = {});

    /// Blocks until a request of `tokens` estimated tokens may start.
    void acquire(std::size_t tokens);
    void release();

    /// Seconds until a request of `tokens` could be admitted by the window
    /// limits at time `now`; 0 when admissible.
    double wait_time(double now, std::size_t tokens) const;

    std::size_t in_flight() const;

private:
    void prune(double now) const;

    std::size_t max_concurrency_;
    std::size_t rpm_;
    std::size_t tpm_;
    Clock clock_;
    Sleeper sleeper_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::size_t in_flight_ = 0;
    mutable std::deque<std::pair<double, std::size_t>> window_;
};

/// Run-wide cap on total tokens; 0 means unlimited.
class TokenBudget {
public:
    explicit TokenBudget(std::size_t limit = 0) : limit_(limit) {}

    /// Throws TokenBudgetExceeded if `estimate` more tokens would pass the cap.
    void check(std::size_t estimate) const;
    void charge(std::size_t tokens);
    std::size_t used() const;
    std::size_t limit() const { return limit_; }

private:
    std::size_t limit_;
    mutable std::mutex mu_;
    std::size_t used_ = 0;
};

struct CompletionPolicy {
    int retries = 3;
    double backoff_s = 1.0;  // doubles each attempt
    std::function<void(double)> sleep;  // default: std::this_thread::sleep_for
    RateLimiter* limiter = nullptr;
    TokenBudget* budget = nullptr;
};

/// One generation with transient-failure retries, rate limiting and budget
/// accounting. Unreported token counts fall back to whitespace counts.
/// Throws BackendUnavailable once retries are exhausted.
GenerationResult complete(GenerationBackend& backend, const GenerationRequest& req,
                          const CompletionPolicy& policy = {});

struct BackendConfig {
    std::string kind = "mock";  // mock | replay | http
    std::string endpoint;
    std::string model;
    std::string api_key_env;
    std::size_t max_concurrency = 4;
    std::size_t rpm = 0;
    std::size_t tpm = 0;
    int retries = 3;
    std::string script;      // mock
    std::string transcript;  // replay

    /// Keys under [backend] (or unprefixed in a dedicated backend file).
    static BackendConfig from(const ConfigFile& cfg);
};

std::unique_ptr<GenerationBackend> make_backend(const BackendConfig& cfg);

}  // namespace covaudit
