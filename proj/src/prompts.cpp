#include "covaudit/prompts.hpp"

#include <algorithm>

#include "covaudit/error.hpp"
#include "covaudit/text.hpp"

namespace covaudit {

namespace {

constexpr std::string_view kCoverageSystem = R"(You are a cybersecurity compliance auditor expert. Your task is to determine whether an organizational
policy adequately covers a security control.

Analyze the control requirements and the policy evidence provided, then make a judgement:

- FULLY_COVERED: The policy explicitly addresses all key aspects of the control with sufficient detail
- PARTIALLY_COVERED: The policy mentions the control area but lacks completeness, specificity, or
enforcement details
- NOT_COVERED: The policy does not address this control adequately

Provide your analysis in the following format:

STATUS: [FULLY_COVERED|PARTIALLY_COVERED|NOT_COVERED]
CONFIDENCE: [0.0-1.0]
REASONING: [Detailed explanation of your judgement]

Be strict but fair. Evidence must be concrete and specific.)";

constexpr std::string_view kCoverageUser = R"(Evaluate policy coverage for the following security control:

CONTROL ID: {control.control_id}
CONTROL NAME: {control.control_name}
FAMILY: {control.family}

CONTROL REQUIREMENT:
{control.control_text}

CONTROL INTENT:
{control.intent}

EXPECTED POLICY ELEMENTS:
{expected}

ORGANIZATIONAL POLICY EVIDENCE:
{evidence_text}

Based on this evidence, determine the coverage status.)";

constexpr std::string_view kGapSystem = R"(You are a cybersecurity compliance gap analyst. Your task is to identify specific, actionable gaps in
policy coverage.

Use the following gap taxonomy:
1. Missing Control - The control is not addressed at all
2. Weak Specification - The control is mentioned but lacks sufficient detail
3. No Ownership Defined - No roles or responsibilities are specified
4. No Procedure - No operational procedure is defined
5. No Review Cycle - No periodic review or update process is mentioned
6. No Enforcement Mechanism - No enforcement, monitoring, or compliance checking is specified

For each gap, provide:
GAP_TYPE: [one of the above]
SEVERITY: [LOW|MEDIUM|HIGH]
EXPLANATION: [Specific explanation]
AFFECTED_ELEMENTS: [Comma-separated list of missing elements])";

constexpr std::string_view kGapUser = R"(Analyze the gaps in policy coverage for this control:

CONTROL: {control.control_id} - {control.control_name}
CONTROL REQUIREMENT: {control.control_text[:500]}...
INTENT: {control.intent}

EXPECTED ELEMENTS:
{expected_elements}

COVERAGE STATUS: {coverage.status.value}
COVERAGE REASONING: {coverage.reasoning}

POLICY EVIDENCE FOUND:
{evidence_snippets}

Identify specific gaps in the policy using the gap taxonomy. What is missing or weak?)";

constexpr std::string_view kRecommendationSystem = R"(You are a cybersecurity policy consultant. Generate concrete, actionable recommendations to improve
organizational policies.

Your recommendations must be:
- POLICY-LEVEL (not technical implementation details)
- CONCRETE and SPECIFIC (not vague advice)
- ACTIONABLE (clear what to add/modify)
- ALIGNED with the control intent

For each recommendation, provide:
TITLE: [Short title]
PRIORITY: [LOW|MEDIUM|HIGH]
DESCRIPTION: [Detailed recommendation - what to add to the policy]
RATIONALE: [Why this matters]
IMPLEMENTATION_GUIDANCE: [How to implement this in the policy]

---

Separate multiple recommendations with "---".)";

constexpr std::string_view kSectorBlock = R"(
SECTOR CONTEXT:
The organization operates in the {sector.value} sector.
{priorities}
Please tailor the TONE and EMPHASIS of your recommendations to address the specific risks and priorities
of this sector.
)";

constexpr std::string_view kRecommendationUser = R"(Generate policy-level recommendations to address the following gaps:

CONTROL: {control.control_id} - {control.control_name}
INTENT: {control.intent}
{sector_context}
EXPECTED POLICY ELEMENTS:
{expected_elements}

IDENTIFIED GAPS:
{gaps_text}

Generate specific, actionable recommendations for improving the organizational policy to address
these gaps.)";

constexpr std::string_view kExplanationSystem = R"(You are a compliance auditor explaining audit findings to stakeholders. Generate clear, professional
explanations that are accessible to both technical and non-technical audiences.

Structure your explanation as follows:

SUMMARY: [Executive summary in 2-3 sentences]
GAP_EXPLANATION: [Why gaps exist and what's missing]
IMPACT: [Why these gaps matter - business and security impact]
RECOMMENDATION_RATIONALE: [How recommendations fix the issues]
EVIDENCE: [Key evidence citations]

Be concise, professional, and actionable.)";

constexpr std::string_view kExplanationUser = R"(Explain the audit findings for this control to stakeholders:

CONTROL: {control.control_id} - {control.control_name}
INTENT: {control.intent}
SEVERITY: {control.severity}

COVERAGE STATUS: {coverage.status}
COVERAGE REASONING: {coverage.reasoning[:300]}

GAPS IDENTIFIED:
{gaps_summary}

RECOMMENDATIONS:
{rec_summary}

EVIDENCE FOUND:
{evidence_summary}

Generate a clear, professional explanation of these findings.)";

constexpr std::string_view kReportSystem = R"(You are a senior compliance auditor writing executive summaries for C-level executives. Be concise,
professional, and highlight business impact.)";

constexpr std::string_view kReportUser = R"(Generate an executive summary for a cybersecurity policy compliance audit.

FRAMEWORK: {framework.value}
TOTAL CONTROLS EVALUATED: {statistics['total_controls']}

COVERAGE:
- Fully Covered: {coverage_stats['fully_covered']} ({coverage_stats['fully_covered_pct']}%)
- Partially Covered: {coverage_stats['partially_covered']} ({coverage_stats['partially_covered_pct']}%)
- Not Covered: {coverage_stats['not_covered']} ({coverage_stats['not_covered_pct']}%)

GAPS IDENTIFIED:
- Total: {gap_stats['total']}
- High Severity: {gap_stats['high_severity']}
- Medium Severity: {gap_stats['medium_severity']}

RECOMMENDATIONS:
- Total: {rec_stats['total']}
- High Priority: {rec_stats['high_priority']}

POLICY QUALITY SCORE: {policy_quality.overall_score:.2f}/1.0

CRITICAL FINDINGS (Not Covered):
{critical_findings_text}

Write a professional executive summary (3-4 paragraphs) for senior management that:
1. Summarizes the audit scope and methodology
2. Highlights key findings and compliance level
3. Identifies critical risks and gaps
4. Provides high-level recommendations)";

constexpr std::string_view kQualitySystem = R"(You are a policy quality assessor. Provide objective, quantitative assessments.)";

constexpr std::string_view kQualityUser = R"(Assess the quality of an organizational cybersecurity policy based on audit results.

AUDIT STATISTICS:
- Total controls evaluated: {total_controls}
- Fully covered: {fully_covered} ({fully_covered/total_controls*100:.1f}%)
- Partially covered: {partially_covered} ({partially_covered/total_controls*100:.1f}%)
- Not covered: {total_controls - fully_covered - partially_covered}

SAMPLE COVERAGE FINDINGS:
{reasonings_text}

Assess the policy on these dimensions (score 0.0-1.0):

CLARITY: [0.0-1.0] - How clear and understandable is the policy?
ACTIONABILITY: [0.0-1.0] - How actionable and specific are the requirements?
GOVERNANCE_MATURITY: [0.0-1.0] - How mature is the governance framework?

INSIGHTS: [3-5 key insights about policy strengths and weaknesses])";

constexpr std::string_view kJointSystem = R"(You are a cybersecurity compliance auditor expert. In a single response, decide whether an organizational
policy adequately covers a security control, identify the policy gaps and recommend policy-level fixes.

Coverage categories:
- FULLY_COVERED: The policy explicitly addresses all key aspects of the control with sufficient detail
- PARTIALLY_COVERED: The policy mentions the control area but lacks completeness, specificity, or
enforcement details
- NOT_COVERED: The policy does not address this control adequately

Gap taxonomy:
1. Missing Control - The control is not addressed at all
2. Weak Specification - The control is mentioned but lacks sufficient detail
3. No Ownership Defined - No roles or responsibilities are specified
4. No Procedure - No operational procedure is defined
5. No Review Cycle - No periodic review or update process is mentioned
6. No Enforcement Mechanism - No enforcement, monitoring, or compliance checking is specified

Answer in three parts, in this order.

First:
STATUS: [FULLY_COVERED|PARTIALLY_COVERED|NOT_COVERED]
CONFIDENCE: [0.0-1.0]
REASONING: [Detailed explanation of your judgement]

Then, unless the status is FULLY_COVERED, for each gap:
GAP_TYPE: [one of the taxonomy entries]
SEVERITY: [LOW|MEDIUM|HIGH]
EXPLANATION: [Specific explanation]
AFFECTED_ELEMENTS: [Comma-separated list of missing elements]

Then, unless the status is FULLY_COVERED, for each recommendation:
TITLE: [Short title]
PRIORITY: [LOW|MEDIUM|HIGH]
DESCRIPTION: [Detailed recommendation - what to add to the policy]
RATIONALE: [Why this matters]
IMPLEMENTATION_GUIDANCE: [How to implement this in the policy]

---

Separate multiple recommendations with "---".)";

constexpr std::string_view kJointUser = R"(Evaluate policy coverage for the following security control:

CONTROL ID: {control.control_id}
CONTROL NAME: {control.control_name}
FAMILY: {control.family}

CONTROL REQUIREMENT:
{control.control_text}

CONTROL INTENT:
{control.intent}

EXPECTED POLICY ELEMENTS:
{expected}

ORGANIZATIONAL POLICY EVIDENCE:
{evidence_text}

Based on this evidence, determine the coverage status, the gaps and the recommendations.)";

std::string pct(std::size_t part, std::size_t total) {
    if (total == 0) return "0.0";
    return text::format_fixed(100.0 * static_cast<double>(part) / static_cast<double>(total), 1);
}

void add_control_fields(TemplateVars& v, const ControlSpec& c) {
    v["control.control_id"] = c.control_id;
    v["control.control_name"] = c.control_name;
    v["control.family"] = c.family;
    v["control.control_text"] = c.control_text;
    v["control.intent"] = c.intent;
}

std::string source_line(std::size_t n, const EvidenceItem& item) {
    std::string s = "[Excerpt " + std::to_string(n) + "] Source: " + item.doc_id;
    if (item.section_heading) s += " | Section: " + *item.section_heading;
    return s;
}

}  // namespace

std::string Prompt::hash() const { return text::sha256_hex(system + "\n\n" + user); }

std::vector<std::string> template_fields(std::string_view tmpl) {
    std::vector<std::string> fields;
    std::size_t i = 0;
    while ((i = tmpl.find('{', i)) != std::string_view::npos) {
        const auto close = tmpl.find('}', i);
        if (close == std::string_view::npos) break;
        std::string name(tmpl.substr(i + 1, close - i - 1));
        if (std::find(fields.begin(), fields.end(), name) == fields.end()) fields.push_back(std::move(name));
        i = close + 1;
    }
    return fields;
}

std::string render_template(std::string_view tmpl, const TemplateVars& vars) {
    std::string out;
    out.reserve(tmpl.size() * 2);
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const auto open = tmpl.find('{', i);
        if (open == std::string_view::npos) break;
        const auto close = tmpl.find('}', open);
        if (close == std::string_view::npos) break;
        out.append(tmpl.substr(i, open - i));
        const auto name = tmpl.substr(open + 1, close - open - 1);
        const auto it = vars.find(name);
        if (it == vars.end()) throw Error(ErrorKind::TemplateError, "missing template field '" + std::string(name) + "'");
        out += it->second;
        i = close + 1;
    }
    out.append(tmpl.substr(i));
    return out;
}

std::string_view system_template(Stage stage) {
    switch (stage) {
        case Stage::Coverage: return kCoverageSystem;
        case Stage::Gap: return kGapSystem;
        case Stage::Recommendation: return kRecommendationSystem;
        case Stage::Explanation: return kExplanationSystem;
        case Stage::ReportSummary: return kReportSystem;
        case Stage::Quality: return kQualitySystem;
        case Stage::Joint: return kJointSystem;
    }
    return {};
}

std::string_view user_template(Stage stage) {
    switch (stage) {
        case Stage::Coverage: return kCoverageUser;
        case Stage::Gap: return kGapUser;
        case Stage::Recommendation: return kRecommendationUser;
        case Stage::Explanation: return kExplanationUser;
        case Stage::ReportSummary: return kReportUser;
        case Stage::Quality: return kQualityUser;
        case Stage::Joint: return kJointUser;
    }
    return {};
}

Prompt render_prompt(Stage stage, const TemplateVars& vars) {
    return {render_template(system_template(stage), vars), render_template(user_template(stage), vars)};
}

std::string format_expected_elements(const ControlSpec& control) {
    std::vector<std::string> lines;
    for (const auto& e : control.expected_elements) lines.push_back("- " + e);
    return text::join(lines, "\n");
}

std::string format_evidence(const EvidenceSet& evidence) {
    if (evidence.items.empty()) return std::string(kNoEvidenceText);
    std::string out;
    for (std::size_t i = 0; i < evidence.items.size(); ++i) {
        if (i) out += "\n\n";
        out += source_line(i + 1, evidence.items[i]);
        out += "\n";
        out += evidence.items[i].text;
    }
    return out;
}

std::string format_evidence_summary(const EvidenceSet& evidence) {
    if (evidence.items.empty()) return std::string(kNoEvidenceText);
    std::vector<std::string> lines;
    for (const auto& item : evidence.items) {
        std::string line = "- " + item.doc_id;
        if (item.section_heading) line += " (" + *item.section_heading + ")";
        std::string excerpt = text::truncate_chars(item.text, 200);
        for (char& c : excerpt)
            if (c == '\n') c = ' ';
        line += ": " + excerpt;
        if (excerpt.size() < item.text.size()) line += "...";
        lines.push_back(std::move(line));
    }
    return text::join(lines, "\n");
}

TemplateVars coverage_vars(const ControlSpec& control, std::string_view evidence_text) {
    TemplateVars v;
    add_control_fields(v, control);
    v["expected"] = format_expected_elements(control);
    v["evidence_text"] = std::string(evidence_text);
    return v;
}

TemplateVars gap_vars(const ControlSpec& control, const CoverageJudgment& coverage, const EvidenceSet& evidence) {
    TemplateVars v;
    add_control_fields(v, control);
    v["control.control_text[:500]"] = text::truncate_chars(control.control_text, 500);
    v["expected_elements"] = format_expected_elements(control);
    v["coverage.status.value"] = std::string(to_string(coverage.status));
    v["coverage.reasoning"] = coverage.reasoning;
    v["evidence_snippets"] = format_evidence(evidence);
    return v;
}

TemplateVars recommendation_vars(const ControlSpec& control, const std::vector<Gap>& gaps,
                                 const std::optional<SectorContext>& sector) {
    TemplateVars v;
    add_control_fields(v, control);
    v["expected_elements"] = format_expected_elements(control);
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const auto& g = gaps[i];
        std::string line = std::to_string(i + 1) + ". " + std::string(display_name(g.gap_type)) + " (severity " +
                           std::string(to_string(g.severity)) + "): " + g.explanation;
        if (!g.affected_elements.empty()) line += "\n   Affected elements: " + text::join(g.affected_elements, ", ");
        lines.push_back(std::move(line));
    }
    v["gaps_text"] = lines.empty() ? std::string("None identified.") : text::join(lines, "\n");
    if (sector && !text::trim(sector->sector).empty()) {
        std::string block(kSectorBlock);
        if (sector->priorities.empty()) {
            const std::string_view line = "{priorities}\n";
            block.erase(block.find(line), line.size());
        }
        TemplateVars sv{{"sector.value", sector->sector}, {"priorities", sector->priorities}};
        v["sector_context"] = render_template(block, sv);
    } else {
        v["sector_context"] = "";
    }
    return v;
}

TemplateVars explanation_vars(const ControlSpec& control, const CoverageJudgment& coverage,
                              const std::vector<Gap>& gaps, const std::vector<Recommendation>& recs,
                              const EvidenceSet& evidence) {
    TemplateVars v;
    add_control_fields(v, control);
    v["control.severity"] = control.severity.value_or("Not specified");
    v["coverage.status"] = std::string(to_string(coverage.status));
    v["coverage.reasoning[:300]"] = text::truncate_chars(coverage.reasoning, 300);
    std::vector<std::string> g;
    for (const auto& gap : gaps)
        g.push_back("- " + std::string(display_name(gap.gap_type)) + " [" + std::string(to_string(gap.severity)) +
                    "]: " + gap.explanation);
    v["gaps_summary"] = g.empty() ? std::string("None identified.") : text::join(g, "\n");
    std::vector<std::string> r;
    for (const auto& rec : recs)
        r.push_back("- [" + std::string(to_string(rec.priority)) + "] " + rec.title + ": " + rec.description);
    v["rec_summary"] = r.empty() ? std::string("None.") : text::join(r, "\n");
    v["evidence_summary"] = format_evidence_summary(evidence);
    return v;
}

TemplateVars report_vars(const ReportPromptInput& in) {
    TemplateVars v;
    v["framework.value"] = in.framework;
    v["statistics['total_controls']"] = std::to_string(in.total_controls);
    v["coverage_stats['fully_covered']"] = std::to_string(in.fully_covered);
    v["coverage_stats['partially_covered']"] = std::to_string(in.partially_covered);
    v["coverage_stats['not_covered']"] = std::to_string(in.not_covered);
    v["coverage_stats['fully_covered_pct']"] = pct(in.fully_covered, in.total_controls);
    v["coverage_stats['partially_covered_pct']"] = pct(in.partially_covered, in.total_controls);
    v["coverage_stats['not_covered_pct']"] = pct(in.not_covered, in.total_controls);
    v["gap_stats['total']"] = std::to_string(in.gaps_total);
    v["gap_stats['high_severity']"] = std::to_string(in.gaps_high);
    v["gap_stats['medium_severity']"] = std::to_string(in.gaps_medium);
    v["rec_stats['total']"] = std::to_string(in.recs_total);
    v["rec_stats['high_priority']"] = std::to_string(in.recs_high);
    v["policy_quality.overall_score:.2f"] = text::format_fixed(in.quality_overall, 2);
    std::vector<std::string> lines;
    for (const auto& [id, name] : in.critical_findings) {
        if (lines.size() == 10) break;
        lines.push_back("- " + id + ": " + name);
    }
    if (in.critical_findings.size() > 10)
        lines.push_back("- ... and " + std::to_string(in.critical_findings.size() - 10) + " more");
    v["critical_findings_text"] = lines.empty() ? std::string("None.") : text::join(lines, "\n");
    return v;
}

TemplateVars quality_vars(const ReportPromptInput& in) {
    TemplateVars v;
    v["total_controls"] = std::to_string(in.total_controls);
    v["fully_covered"] = std::to_string(in.fully_covered);
    v["partially_covered"] = std::to_string(in.partially_covered);
    v["fully_covered/total_controls*100:.1f"] = pct(in.fully_covered, in.total_controls);
    v["partially_covered/total_controls*100:.1f"] = pct(in.partially_covered, in.total_controls);
    v["total_controls - fully_covered - partially_covered"] =
        std::to_string(in.total_controls - std::min(in.total_controls, in.fully_covered + in.partially_covered));
    std::vector<std::string> lines;
    for (const auto& [id, status, reasoning] : in.sample_findings) {
        std::string r = text::truncate_chars(reasoning, 200);
        for (char& c : r)
            if (c == '\n') c = ' ';
        lines.push_back("- " + id + " (" + status + "): " + r);
    }
    v["reasonings_text"] = lines.empty() ? std::string("None.") : text::join(lines, "\n");
    return v;
}

Prompt coverage_prompt(const ControlSpec& control, const EvidenceSet& evidence) {
    return render_prompt(Stage::Coverage, coverage_vars(control, format_evidence(evidence)));
}

Prompt coverage_prompt_with_context(const ControlSpec& control, std::string_view context) {
    return render_prompt(Stage::Coverage, coverage_vars(control, context.empty() ? kNoEvidenceText : context));
}

Prompt gap_prompt(const ControlSpec& control, const CoverageJudgment& coverage, const EvidenceSet& evidence) {
    return render_prompt(Stage::Gap, gap_vars(control, coverage, evidence));
}

Prompt recommendation_prompt(const ControlSpec& control, const std::vector<Gap>& gaps,
                             const std::optional<SectorContext>& sector) {
    return render_prompt(Stage::Recommendation, recommendation_vars(control, gaps, sector));
}

Prompt explanation_prompt(const ControlSpec& control, const CoverageJudgment& coverage, const std::vector<Gap>& gaps,
                          const std::vector<Recommendation>& recs, const EvidenceSet& evidence) {
    return render_prompt(Stage::Explanation, explanation_vars(control, coverage, gaps, recs, evidence));
}

Prompt report_summary_prompt(const ReportPromptInput& in) { return render_prompt(Stage::ReportSummary, report_vars(in)); }

Prompt quality_prompt(const ReportPromptInput& in) { return render_prompt(Stage::Quality, quality_vars(in)); }

Prompt joint_prompt(const ControlSpec& control, const EvidenceSet& evidence) {
    return render_prompt(Stage::Joint, coverage_vars(control, format_evidence(evidence)));
}

}  // namespace covaudit
