#include "covaudit/labels.hpp"

#include <cctype>
#include <string>

namespace covaudit {

namespace {

// Uppercase letters and digits only; everything else dropped.
std::string squash(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (unsigned char c : text) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::toupper(c)));
    }
    return out;
}

}  // namespace

std::string_view to_string(CoverageStatus s) {
    switch (s) {
        case CoverageStatus::FullyCovered: return "FULLY_COVERED";
        case CoverageStatus::PartiallyCovered: return "PARTIALLY_COVERED";
        case CoverageStatus::NotCovered: return "NOT_COVERED";
    }
    return "NOT_COVERED";
}

std::optional<CoverageStatus> parse_status(std::string_view text) {
    const std::string key = squash(text);
    if (key == "FULLYCOVERED" || key == "FULL") return CoverageStatus::FullyCovered;
    if (key == "PARTIALLYCOVERED" || key == "PARTIAL") return CoverageStatus::PartiallyCovered;
    if (key == "NOTCOVERED" || key == "NOT" || key == "NONE") return CoverageStatus::NotCovered;
    return std::nullopt;
}

std::string_view to_string(Level l) {
    switch (l) {
        case Level::Low: return "LOW";
        case Level::Medium: return "MEDIUM";
        case Level::High: return "HIGH";
    }
    return "MEDIUM";
}

std::optional<Level> parse_level(std::string_view text) {
    const std::string key = squash(text);
    if (key == "LOW") return Level::Low;
    if (key == "MEDIUM" || key == "MED" || key == "MODERATE") return Level::Medium;
    if (key == "HIGH" || key == "CRITICAL") return Level::High;
    return std::nullopt;
}

std::string_view to_string(GapType g) {
    switch (g) {
        case GapType::MissingControl: return "MISSING_CONTROL";
        case GapType::WeakSpecification: return "WEAK_SPECIFICATION";
        case GapType::NoOwnershipDefined: return "NO_OWNERSHIP_DEFINED";
        case GapType::NoProcedure: return "NO_PROCEDURE";
        case GapType::NoReviewCycle: return "NO_REVIEW_CYCLE";
        case GapType::NoEnforcementMechanism: return "NO_ENFORCEMENT_MECHANISM";
    }
    return "WEAK_SPECIFICATION";
}

std::string_view display_name(GapType g) {
    switch (g) {
        case GapType::MissingControl: return "Missing Control";
        case GapType::WeakSpecification: return "Weak Specification";
        case GapType::NoOwnershipDefined: return "No Ownership Defined";
        case GapType::NoProcedure: return "No Procedure";
        case GapType::NoReviewCycle: return "No Review Cycle";
        case GapType::NoEnforcementMechanism: return "No Enforcement Mechanism";
    }
    return "Weak Specification";
}

std::optional<GapType> parse_gap_type(std::string_view text) {
    std::string key = squash(text);
    // "5. No Review Cycle" or bare "5"
    std::size_t digits = 0;
    while (digits < key.size() && std::isdigit(static_cast<unsigned char>(key[digits]))) ++digits;
    if (digits > 0) {
        if (digits == key.size()) {
            const int ordinal = std::stoi(key.substr(0, std::min<std::size_t>(digits, 3)));
            if (ordinal >= 1 && ordinal <= 6) return kAllGapTypes[static_cast<std::size_t>(ordinal - 1)];
            return std::nullopt;
        }
        key.erase(0, digits);
    }
    for (GapType g : kAllGapTypes) {
        if (key == squash(to_string(g))) return g;
    }
    return std::nullopt;
}

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::Coverage: return "COVERAGE";
        case Stage::Gap: return "GAP";
        case Stage::Recommendation: return "RECOMMENDATION";
        case Stage::Explanation: return "EXPLANATION";
        case Stage::ReportSummary: return "REPORT_SUMMARY";
        case Stage::Quality: return "QUALITY";
        case Stage::Joint: return "JOINT";
    }
    return "COVERAGE";
}

std::optional<Stage> parse_stage(std::string_view text) {
    const std::string key = squash(text);
    for (Stage s : {Stage::Coverage, Stage::Gap, Stage::Recommendation, Stage::Explanation,
                    Stage::ReportSummary, Stage::Quality, Stage::Joint}) {
        if (key == squash(to_string(s))) return s;
    }
    return std::nullopt;
}

std::string_view to_string(PipelineMode m) {
    switch (m) {
        case PipelineMode::Full: return "FULL";
        case PipelineMode::B1: return "B1";
        case PipelineMode::B2: return "B2";
        case PipelineMode::B3: return "B3";
        case PipelineMode::B4: return "B4";
        case PipelineMode::B5: return "B5";
    }
    return "FULL";
}

std::optional<PipelineMode> parse_mode(std::string_view text) {
    const std::string key = squash(text);
    for (PipelineMode m : {PipelineMode::Full, PipelineMode::B1, PipelineMode::B2, PipelineMode::B3,
                           PipelineMode::B4, PipelineMode::B5}) {
        if (key == to_string(m)) return m;
    }
    return std::nullopt;
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Lexical: return "LEXICAL";
        case Strategy::Dense: return "DENSE";
        case Strategy::DenseReranked: return "DENSE_RERANKED";
        case Strategy::Document: return "DOCUMENT";
    }
    return "LEXICAL";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
    const std::string key = squash(text);
    for (Strategy s : {Strategy::Lexical, Strategy::Dense, Strategy::DenseReranked, Strategy::Document}) {
        if (key == squash(to_string(s))) return s;
    }
    return std::nullopt;
}

}  // namespace covaudit
