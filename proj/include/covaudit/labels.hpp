#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

// Closed vocabularies shared across modules.

namespace covaudit {

enum class CoverageStatus { FullyCovered, PartiallyCovered, NotCovered };

inline constexpr std::array<CoverageStatus, 3> kAllStatuses = {
    CoverageStatus::FullyCovered, CoverageStatus::PartiallyCovered, CoverageStatus::NotCovered};

std::string_view to_string(CoverageStatus s);
/// Accepts "FULLY_COVERED", "fully covered", "Fully-Covered", "[FULLY_COVERED]" ...
std::optional<CoverageStatus> parse_status(std::string_view text);
inline int class_index(CoverageStatus s) { return static_cast<int>(s); }

/// Severity of a gap and priority of a recommendation share one scale.
enum class Level { Low, Medium, High };

std::string_view to_string(Level l);
std::optional<Level> parse_level(std::string_view text);

enum class GapType {
    MissingControl,
    WeakSpecification,
    NoOwnershipDefined,
    NoProcedure,
    NoReviewCycle,
    NoEnforcementMechanism,
};

inline constexpr std::array<GapType, 6> kAllGapTypes = {
    GapType::MissingControl, GapType::WeakSpecification, GapType::NoOwnershipDefined,
    GapType::NoProcedure,    GapType::NoReviewCycle,     GapType::NoEnforcementMechanism};

/// Machine name, e.g. "NO_REVIEW_CYCLE".
std::string_view to_string(GapType g);
/// Taxonomy display name, e.g. "No Review Cycle".
std::string_view display_name(GapType g);
/// Case- and punctuation-insensitive match against either form; also accepts
/// the taxonomy ordinal ("5", "5. No Review Cycle").
std::optional<GapType> parse_gap_type(std::string_view text);

enum class Stage { Coverage, Gap, Recommendation, Explanation, ReportSummary, Quality, Joint };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view text);

enum class PipelineMode { Full, B1, B2, B3, B4, B5 };

std::string_view to_string(PipelineMode m);
std::optional<PipelineMode> parse_mode(std::string_view text);

enum class Strategy { Lexical, Dense, DenseReranked, Document };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);

}  // namespace covaudit
