#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "covaudit/error.hpp"
#include "covaudit/labels.hpp"

// Typed results of each reasoning stage, parsers for the plain-text answer
// grammars the prompts request, and writers that emit the same grammars.

namespace covaudit {

class MalformedOutput : public Error {
public:
    MalformedOutput(Stage stage, const std::string& detail);

    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

struct CoverageJudgment {
    CoverageStatus status = CoverageStatus::NotCovered;
    double confidence = 0.0;  // clamped to [0, 1]
    std::string reasoning;

    bool operator==(const CoverageJudgment&) const = default;
};

struct Gap {
    GapType gap_type = GapType::WeakSpecification;
    Level severity = Level::Medium;
    std::string explanation;
    std::vector<std::string> affected_elements;

    bool operator==(const Gap&) const = default;
};

struct Recommendation {
    std::string title;
    Level priority = Level::Medium;
    std::string description;
    std::string rationale;
    std::string implementation_guidance;

    bool operator==(const Recommendation&) const = default;
};

struct Explanation {
    std::string summary;
    std::string gap_explanation;
    std::string impact;
    std::string recommendation_rationale;
    std::string evidence_citations;

    bool operator==(const Explanation&) const = default;
};

struct QualityScores {
    double clarity = 0.0;
    double actionability = 0.0;
    double governance_maturity = 0.0;
    std::vector<std::string> insights;

    double overall() const { return (clarity + actionability + governance_maturity) / 3.0; }
    bool operator==(const QualityScores&) const = default;
};

template <class T>
struct Parsed {
    T value;
    std::vector<std::string> warnings;
};

struct JointAssessment {
    CoverageJudgment coverage;
    std::vector<Gap> gaps;
    std::vector<Recommendation> recommendations;
};

/// STATUS / CONFIDENCE / REASONING, case-insensitive, in any order, with
/// markdown emphasis tolerated. REASONING runs to the next recognised header.
CoverageJudgment parse_coverage(std::string_view raw);

/// One gap per GAP_TYPE header. Unknown taxonomy names fall back to
/// WEAK_SPECIFICATION and a missing severity to MEDIUM, each with a warning.
Parsed<std::vector<Gap>> parse_gaps(std::string_view raw, bool require_nonempty = true);

/// Blocks separated by "---" lines (or by a repeated TITLE header). A block
/// without PRIORITY defaults to MEDIUM with a warning.
Parsed<std::vector<Recommendation>> parse_recommendations(std::string_view raw, bool require_nonempty = true);

Explanation parse_explanation(std::string_view raw);
QualityScores parse_quality(std::string_view raw);

/// Status block, then gap blocks, then recommendation blocks, in one text.
Parsed<JointAssessment> parse_joint(std::string_view raw);

std::string format_coverage(const CoverageJudgment& c);
std::string format_gaps(const std::vector<Gap>& gaps);
std::string format_recommendations(const std::vector<Recommendation>& recs);
std::string format_explanation(const Explanation& e);
std::string format_quality(const QualityScores& q);
std::string format_joint(const JointAssessment& j);

/// Shortest decimal that parses back to the same double.
std::string format_number(double x);

}  // namespace covaudit
