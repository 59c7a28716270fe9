#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "covaudit/labels.hpp"
#include "covaudit/orchestrator.hpp"

namespace covaudit {

using LabeledSet = std::map<std::string, CoverageStatus>;

/// Rows are gold, columns predicted, classes in FULL, PARTIAL, NOT order.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, 3>, 3> counts{};

    std::size_t total() const;
    std::size_t trace() const;
    std::size_t& at(CoverageStatus gold, CoverageStatus pred) { return counts[class_index(gold)][class_index(pred)]; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws MissingPrediction listing ids present in only one of the sets.
ConfusionMatrix confusion_matrix(const LabeledSet& pred, const LabeledSet& gold);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  // gold count
};

enum class Averaging { Macro, Weighted };

struct MetricsReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::array<ClassMetrics, 3> per_class{};
    std::size_t n = 0;
    Averaging averaging = Averaging::Macro;
    std::vector<std::string> warnings;
};

/// Zero denominators give 0 with a warning. Throws UndefinedMetrics on an
/// empty matrix. With Averaging::Weighted the "macro_" fields hold
/// support-weighted means.
MetricsReport metrics(const ConfusionMatrix& cm, Averaging averaging = Averaging::Macro);

/// Macro-F1 without warnings; used inside the bootstrap loop.
double macro_f1(const ConfusionMatrix& cm);

/// Throws MissingPrediction on differing id sets and UndefinedKappa when
/// chance agreement is 1 but observed agreement is not.
double cohen_kappa(const LabeledSet& a, const LabeledSet& b);

struct McNemarResult {
    std::size_t b = 0;  // A correct, B wrong
    std::size_t c = 0;  // A wrong, B correct
    double p_value = 1.0;
    bool exact = true;
    double statistic = 0.0;  // chi-square; 0 for the exact test
};

/// 2 * sum_{i <= min(b,c)} C(b+c, i) / 2^(b+c), capped at 1.
double mcnemar_exact_p(std::size_t b, std::size_t c);
/// Continuity-corrected chi-square with one degree of freedom.
double mcnemar_chi2_p(std::size_t b, std::size_t c, double* statistic = nullptr);

inline constexpr std::size_t kMcNemarExactMax = 25;

McNemarResult mcnemar(const LabeledSet& pred_a, const LabeledSet& pred_b, const LabeledSet& gold);

struct BootstrapCI {
    double f1 = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t iters = 0;
    double level = 0.95;
};

/// Percentile interval of macro-F1 over `iters` resamples with replacement;
/// resample i draws from a generator seeded with seed + i.
BootstrapCI bootstrap_f1_ci(const LabeledSet& pred, const LabeledSet& gold, std::size_t iters = 2000,
                            double level = 0.95, std::uint64_t seed = 0);

/// Same, on parallel label vectors.
BootstrapCI bootstrap_f1_ci(const std::vector<int>& pred, const std::vector<int>& gold, std::size_t iters,
                            double level, std::uint64_t seed);

/// `control_id,label` rows; a header row is optional.
LabeledSet parse_labels_csv(std::string_view csv);
LabeledSet load_labels_csv(const std::filesystem::path& path);

/// Assessed labels from records. Records without a coverage label count as
/// `unassessed_as`.
LabeledSet labels_from_records(const std::vector<AssessmentRecord>& records,
                               CoverageStatus unassessed_as = CoverageStatus::NotCovered);

/// A records directory, a run directory containing records/, or a CSV file.
LabeledSet load_predictions(const std::filesystem::path& path);

std::string metrics_to_json(const ConfusionMatrix& cm, const MetricsReport& m);

}  // namespace covaudit
