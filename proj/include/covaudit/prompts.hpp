#pragma once

#include <functional>
#include <map>
#include <optional>
#include <tuple>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "covaudit/controls.hpp"
#include "covaudit/labels.hpp"
#include "covaudit/parsers.hpp"
#include "covaudit/retrieval.hpp"

namespace covaudit {

struct Prompt {
    std::string system;
    std::string user;

    /// sha256 of system + "\n\n" + user; the replay key.
    std::string hash() const;
    bool operator==(const Prompt&) const = default;
};

using TemplateVars = std::map<std::string, std::string, std::less<>>;

/// Replaces every `{field}` with vars[field]. The field name is the literal
/// text between the braces (e.g. "control.control_text[:500]").
/// Throws TemplateError naming the first field without a value.
std::string render_template(std::string_view tmpl, const TemplateVars& vars);

/// Placeholder names of a template, in order of first appearance.
std::vector<std::string> template_fields(std::string_view tmpl);

std::string_view system_template(Stage stage);
std::string_view user_template(Stage stage);

Prompt render_prompt(Stage stage, const TemplateVars& vars);

/// Appended to the user prompt for the single re-ask after a parse failure.
inline constexpr std::string_view kReaskInstruction =
    "\n\nIMPORTANT: respond in the exact required format shown above.";
/// Appended for the single regeneration after a failed grounding check.
inline constexpr std::string_view kGroundingInstruction =
    "\n\nIMPORTANT: base every statement strictly on the policy evidence provided above.";

inline constexpr std::string_view kNoEvidenceText = "No relevant policy evidence was retrieved.";

struct SectorContext {
    std::string sector;
    std::string priorities;  // may be empty
};

/// "- element" per line.
std::string format_expected_elements(const ControlSpec& control);
/// Numbered excerpts with source and section, texts verbatim.
std::string format_evidence(const EvidenceSet& evidence);
/// One line per item: source, section, first 200 characters.
std::string format_evidence_summary(const EvidenceSet& evidence);

TemplateVars coverage_vars(const ControlSpec& control, std::string_view evidence_text);
TemplateVars gap_vars(const ControlSpec& control, const CoverageJudgment& coverage, const EvidenceSet& evidence);
TemplateVars recommendation_vars(const ControlSpec& control, const std::vector<Gap>& gaps,
                                 const std::optional<SectorContext>& sector);
TemplateVars explanation_vars(const ControlSpec& control, const CoverageJudgment& coverage,
                              const std::vector<Gap>& gaps, const std::vector<Recommendation>& recs,
                              const EvidenceSet& evidence);

struct ReportPromptInput {
    std::string framework;
    std::size_t total_controls = 0;
    std::size_t fully_covered = 0;
    std::size_t partially_covered = 0;
    std::size_t not_covered = 0;
    std::size_t gaps_total = 0;
    std::size_t gaps_high = 0;
    std::size_t gaps_medium = 0;
    std::size_t recs_total = 0;
    std::size_t recs_high = 0;
    double quality_overall = 0.0;
    /// (control_id, control_name) of NOT_COVERED controls.
    std::vector<std::pair<std::string, std::string>> critical_findings;
    /// (control_id, status, reasoning) samples for the quality prompt.
    std::vector<std::tuple<std::string, std::string, std::string>> sample_findings;
};

TemplateVars report_vars(const ReportPromptInput& in);
TemplateVars quality_vars(const ReportPromptInput& in);

Prompt coverage_prompt(const ControlSpec& control, const EvidenceSet& evidence);
/// Coverage prompt with caller-supplied context in place of retrieved evidence.
Prompt coverage_prompt_with_context(const ControlSpec& control, std::string_view context);
Prompt gap_prompt(const ControlSpec& control, const CoverageJudgment& coverage, const EvidenceSet& evidence);
Prompt recommendation_prompt(const ControlSpec& control, const std::vector<Gap>& gaps,
                             const std::optional<SectorContext>& sector);
Prompt explanation_prompt(const ControlSpec& control, const CoverageJudgment& coverage, const std::vector<Gap>& gaps,
                          const std::vector<Recommendation>& recs, const EvidenceSet& evidence);
Prompt report_summary_prompt(const ReportPromptInput& in);
Prompt quality_prompt(const ReportPromptInput& in);
/// Single prompt for coverage, gaps and recommendations together.
Prompt joint_prompt(const ControlSpec& control, const EvidenceSet& evidence);

}  // namespace covaudit
