#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "covaudit/backend.hpp"
#include "covaudit/controls.hpp"
#include "covaudit/orchestrator.hpp"
#include "covaudit/parsers.hpp"

namespace covaudit {

/// (n_full + 0.5 n_partial) / n_total. Throws UndefinedScore when n_total is 0,
/// ConfigError when the counts are inconsistent.
double completeness_score(std::size_t n_full, std::size_t n_partial, std::size_t n_total);

struct Totals {
    std::size_t full = 0;
    std::size_t partial = 0;
    std::size_t not_covered = 0;
    std::size_t failed = 0;

    std::size_t total() const { return full + partial + not_covered + failed; }
    bool operator==(const Totals&) const = default;
};

struct RecurringGap {
    GapType gap_type = GapType::MissingControl;
    std::size_t count = 0;
    std::vector<std::string> example_controls;  // at most 5, in control order

    bool operator==(const RecurringGap&) const = default;
};

struct AuditReport {
    std::string framework_name;
    Totals totals;
    double completeness = 0.0;
    std::map<std::string, Totals> per_family;
    std::map<GapType, std::size_t> gap_type_counts;
    std::map<Level, std::size_t> priority_counts;
    std::map<Level, std::size_t> severity_counts;
    std::vector<RecurringGap> recurring_gaps;
    /// (control_id, title, priority) for every recommendation, priority high first.
    std::vector<std::tuple<std::string, std::string, Level>> recommendations;
    std::string executive_summary;
    std::optional<QualityScores> quality;
    std::vector<std::string> warnings;

    bool operator==(const AuditReport&) const = default;
};

inline constexpr std::string_view kTemplatedSummaryHeader = "Executive Summary (templated)";

/// Counts, completeness, family breakdown and gap distributions. With a
/// backend, the quality prompt runs first and its overall score feeds the
/// summary prompt; any generation failure downgrades to the templated text.
AuditReport aggregate_report(const std::vector<AssessmentRecord>& records, const ControlSet& controls,
                             GenerationBackend* backend = nullptr, const CompletionPolicy& policy = {});

std::string templated_summary(const AuditReport& report);

enum class ReportFormat { Json, Markdown };

std::string emit_report(const AuditReport& report, ReportFormat format);
AuditReport report_from_json(std::string_view json_text);

struct Pricing {
    double input_price_per_1k = 0.0;
    double output_price_per_1k = 0.0;
};

struct EfficiencyStats {
    std::size_t n_records = 0;
    std::size_t n_counted = 0;  // non-failed
    double mean_tokens_per_control = 0.0;
    double mean_input_tokens = 0.0;
    double mean_output_tokens = 0.0;
    double mean_latency_ms = 0.0;
    double mean_calls = 0.0;
    long total_tokens = 0;
    double estimated_cost = 0.0;
    double cost_per_100_controls = 0.0;
    std::vector<std::string> warnings;

    std::string to_json() const;
};

/// Means over non-failed records; cost over all recorded usage.
EfficiencyStats efficiency_summary(const std::vector<AssessmentRecord>& records, const Pricing& pricing = {});

}  // namespace covaudit
