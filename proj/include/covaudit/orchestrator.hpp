#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "covaudit/backend.hpp"
#include "covaudit/controls.hpp"
#include "covaudit/corpus.hpp"
#include "covaudit/parsers.hpp"
#include "covaudit/prompts.hpp"
#include "covaudit/retrieval.hpp"

namespace covaudit {

enum class Phase { Init, Retrieved, Covered, Gapped, Recommended, Explained, Done, Failed };

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view text);

/// Per-control working state. Created fresh for every control.
class AssessmentState {
public:
    explicit AssessmentState(std::string control_id) : control_id_(std::move(control_id)) {}

    const std::string& control_id() const { return control_id_; }
    Phase phase() const { return phase_; }

    /// Moves forward in phase order (stages may be skipped) or to Failed.
    /// Throws std::logic_error on any other transition.
    void advance(Phase next);

    /// Records which control is operating on this state.
    void touch(const std::string& control_id) { touched_by_.insert(control_id); }
    const std::set<std::string>& touched_by() const { return touched_by_; }

    std::optional<EvidenceSet> evidence;
    std::optional<CoverageJudgment> coverage;
    std::vector<Gap> gaps;
    std::vector<Recommendation> recommendations;
    std::optional<Explanation> explanation;
    std::vector<std::string> warnings;

private:
    std::string control_id_;
    Phase phase_ = Phase::Init;
    std::set<std::string> touched_by_;
};

struct Usage {
    std::size_t calls = 0;    // every backend call
    std::size_t retries = 0;  // re-asks and grounding regenerations among them
    long input_tokens = 0;
    long output_tokens = 0;
    long latency_ms = 0;

    long total_tokens() const { return input_tokens + output_tokens; }
    void add(const GenerationResult& r);
    bool operator==(const Usage&) const = default;
};

struct AssessmentRecord {
    std::string control_id;
    std::string control_text;
    PipelineMode mode = PipelineMode::Full;
    std::optional<Strategy> strategy;  // none for B1
    std::vector<EvidenceItem> evidence;
    std::optional<CoverageStatus> label;
    double confidence = 0.0;
    std::string reasoning;
    std::vector<Gap> gaps;
    std::vector<Recommendation> recommendations;
    std::optional<Explanation> explanation;
    bool grounded = true;
    double grounding_overlap = 1.0;
    Usage usage;
    Phase phase = Phase::Init;
    std::optional<Stage> failed_stage;
    bool parse_failed = false;
    std::vector<std::string> warnings;

    bool failed() const { return phase == Phase::Failed; }
    /// Status name, "PARSE_FAILED" or "FAILED".
    std::string label_text() const;
};

/// Canonical JSON (sorted keys, floats at 4 decimals).
std::string record_to_json(const AssessmentRecord& r);
AssessmentRecord record_from_json(std::string_view json_text);

struct GroundingResult {
    bool grounded = true;
    double overlap = 1.0;
};

/// overlap = |distinct output content words that occur in the evidence| /
/// |distinct output content words|; empty output gives 1.0.
GroundingResult verify_grounding(const std::vector<std::string>& texts, const EvidenceSet& evidence, double tau);

struct PipelineConfig {
    PipelineMode mode = PipelineMode::Full;
    std::size_t k = 5;
    std::optional<Strategy> strategy;  // FULL only; baselines fix their own
    std::optional<SectorContext> sector;
    double tau = 0.05;
    std::size_t concurrency = 4;
    std::uint64_t seed = 0;
    double degraded_threshold = 0.10;
    std::size_t b1_context_tokens = 12000;
    int max_output = 1024;

    /// Strategy the mode runs with; nullopt for B1.
    std::optional<Strategy> effective_strategy() const;
    /// Throws ConfigError on mode/strategy conflicts or bad numbers.
    void validate() const;
    std::string to_json() const;
};

struct RunResult {
    std::vector<AssessmentRecord> records;
    std::vector<TranscriptEntry> transcript;  // control order, then call order
    std::string manifest;                     // JSON
    std::size_t failed = 0;
};

class Pipeline {
public:
    /// `index` may be null only for B1 (which then sees no corpus text).
    Pipeline(const CorpusIndex* index, const EmbeddingProvider* embedder, GenerationBackend& backend,
             PipelineConfig cfg, CompletionPolicy policy = {});

    AssessmentRecord assess(const ControlSpec& control, std::vector<TranscriptEntry>* transcript = nullptr) const;

    /// Every control under a bounded worker pool; records in control order.
    RunResult run(const ControlSet& controls) const;

    const PipelineConfig& config() const { return cfg_; }
    std::size_t retrieval_calls() const { return retriever_ ? retriever_->calls() : 0; }
    const std::string& b1_context() const { return b1_context_; }

    /// Called with each finished state (from worker threads).
    std::function<void(const AssessmentState&)> on_state_done;

private:
    struct Ctx;
    std::optional<std::string> call(Stage stage, const Prompt& prompt, Ctx& ctx, bool retry) const;
    template <class T, class Parse>
    std::optional<T> call_parsed(Stage stage, const Prompt& prompt, Ctx& ctx, Parse parse) const;
    void run_full(const ControlSpec& c, Ctx& ctx) const;
    void run_joint(const ControlSpec& c, Ctx& ctx) const;
    void run_coverage_only(const ControlSpec& c, Ctx& ctx, std::string_view context) const;

    const CorpusIndex* index_;
    const EmbeddingProvider* embedder_;
    GenerationBackend& backend_;
    PipelineConfig cfg_;
    CompletionPolicy policy_;
    std::optional<Retriever> retriever_;
    std::string b1_context_;
    std::string b1_warning_;
};

/// Throws RunDegraded when failed / total exceeds `threshold`.
void check_degraded(const RunResult& run, double threshold);

/// File-system-safe form of a control id.
std::string record_file_name(const std::string& control_id);

/// records/<id>.json, manifest.json and transcript.jsonl under `dir`.
void write_run(const RunResult& run, const std::filesystem::path& dir);
std::vector<AssessmentRecord> load_records(const std::filesystem::path& records_dir);

}  // namespace covaudit
