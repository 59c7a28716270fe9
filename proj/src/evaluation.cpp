#include "covaudit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "covaudit/text.hpp"
#include "json.hpp"

namespace covaudit {

using nlohmann::json;

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (const auto& row : counts)
        for (auto v : row) t += v;
    return t;
}

std::size_t ConfusionMatrix::trace() const { return counts[0][0] + counts[1][1] + counts[2][2]; }

namespace {

void require_same_ids(const LabeledSet& a, const LabeledSet& b) {
    std::vector<std::string> only;
    for (const auto& [id, _] : a)
        if (!b.count(id)) only.push_back(id);
    for (const auto& [id, _] : b)
        if (!a.count(id)) only.push_back(id);
    if (!only.empty()) {
        std::sort(only.begin(), only.end());
        throw MissingPrediction(std::move(only));
    }
}

struct Prf {
    double p, r, f;
};

Prf class_prf(const ConfusionMatrix& cm, int k, std::vector<std::string>* warnings) {
    std::size_t tp = cm.counts[k][k], col = 0, row = 0;
    for (int i = 0; i < 3; ++i) {
        col += cm.counts[i][k];
        row += cm.counts[k][i];
    }
    const auto name = std::string(to_string(kAllStatuses[k]));
    double p = 0.0, r = 0.0;
    if (col) p = static_cast<double>(tp) / static_cast<double>(col);
    else if (warnings) warnings->push_back("precision undefined for " + name + " (no predictions); set to 0");
    if (row) r = static_cast<double>(tp) / static_cast<double>(row);
    else if (warnings) warnings->push_back("recall undefined for " + name + " (absent from gold); set to 0");
    const double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    return {p, r, f};
}

double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

ConfusionMatrix confusion_matrix(const LabeledSet& pred, const LabeledSet& gold) {
    require_same_ids(pred, gold);
    ConfusionMatrix cm;
    for (const auto& [id, g] : gold) ++cm.at(g, pred.at(id));
    return cm;
}

double macro_f1(const ConfusionMatrix& cm) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += class_prf(cm, k, nullptr).f;
    return s / 3.0;
}

MetricsReport metrics(const ConfusionMatrix& cm, Averaging averaging) {
    const auto n = cm.total();
    if (n == 0) throw Error(ErrorKind::UndefinedMetrics, "empty confusion matrix");
    MetricsReport m;
    m.n = n;
    m.averaging = averaging;
    m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(n);
    for (int k = 0; k < 3; ++k) {
        const auto prf = class_prf(cm, k, &m.warnings);
        auto& c = m.per_class[k];
        c.precision = prf.p;
        c.recall = prf.r;
        c.f1 = prf.f;
        c.support = cm.counts[k][0] + cm.counts[k][1] + cm.counts[k][2];
    }
    for (int k = 0; k < 3; ++k) {
        const double w = averaging == Averaging::Macro
                             ? 1.0 / 3.0
                             : static_cast<double>(m.per_class[k].support) / static_cast<double>(n);
        m.macro_precision += w * m.per_class[k].precision;
        m.macro_recall += w * m.per_class[k].recall;
        m.macro_f1 += w * m.per_class[k].f1;
    }
    return m;
}

double cohen_kappa(const LabeledSet& a, const LabeledSet& b) {
    require_same_ids(a, b);
    if (a.empty()) throw Error(ErrorKind::UndefinedKappa, "no items");
    std::array<double, 3> ma{}, mb{};
    double agree = 0.0;
    for (const auto& [id, la] : a) {
        const auto lb = b.at(id);
        ma[class_index(la)] += 1.0;
        mb[class_index(lb)] += 1.0;
        if (la == lb) agree += 1.0;
    }
    const double n = static_cast<double>(a.size());
    const double po = agree / n;
    double pe = 0.0;
    for (int k = 0; k < 3; ++k) pe += (ma[k] / n) * (mb[k] / n);
    if (pe == 1.0) {
        if (po == 1.0) return 1.0;
        throw Error(ErrorKind::UndefinedKappa, "chance agreement is 1");
    }
    return (po - pe) / (1.0 - pe);
}

double mcnemar_exact_p(std::size_t b, std::size_t c) {
    const std::size_t n = b + c;
    if (n == 0) return 1.0;
    const std::size_t m = std::min(b, c);
    double tail = 0.0;
    if (n <= 60) {
        unsigned __int128 coef = 1, sum = 0;
        for (std::size_t i = 0; i <= m; ++i) {
            sum += coef;
            coef = coef * (n - i) / (i + 1);
        }
        tail = std::ldexp(static_cast<double>(sum), -static_cast<int>(n));
    } else {
        for (std::size_t i = 0; i <= m; ++i) {
            const double lc = std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(i) + 1) -
                              std::lgamma(static_cast<double>(n - i) + 1);
            tail += std::exp(lc - static_cast<double>(n) * std::log(2.0));
        }
    }
    return std::min(1.0, 2.0 * tail);
}

double mcnemar_chi2_p(std::size_t b, std::size_t c, double* statistic) {
    const double n = static_cast<double>(b + c);
    if (n == 0) {
        if (statistic) *statistic = 0.0;
        return 1.0;
    }
    const double d = std::max(0.0, std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0);
    const double chi2 = d * d / n;
    if (statistic) *statistic = chi2;
    return std::erfc(std::sqrt(chi2 / 2.0));
}

McNemarResult mcnemar(const LabeledSet& pred_a, const LabeledSet& pred_b, const LabeledSet& gold) {
    require_same_ids(pred_a, gold);
    require_same_ids(pred_b, gold);
    McNemarResult r;
    for (const auto& [id, g] : gold) {
        const bool ca = pred_a.at(id) == g;
        const bool cb = pred_b.at(id) == g;
        if (ca && !cb) ++r.b;
        if (!ca && cb) ++r.c;
    }
    if (r.b + r.c <= kMcNemarExactMax) {
        r.exact = true;
        r.p_value = mcnemar_exact_p(r.b, r.c);
    } else {
        r.exact = false;
        r.p_value = mcnemar_chi2_p(r.b, r.c, &r.statistic);
    }
    return r;
}

BootstrapCI bootstrap_f1_ci(const std::vector<int>& pred, const std::vector<int>& gold, std::size_t iters,
                            double level, std::uint64_t seed) {
    const std::size_t n = gold.size();
    if (n < 2 || pred.size() != n) throw Error(ErrorKind::UndefinedMetrics, "bootstrap needs >= 2 paired items");
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::ConfigError, "confidence level must be in (0, 1)");
    ConfusionMatrix full;
    for (std::size_t i = 0; i < n; ++i) ++full.counts[gold[i]][pred[i]];
    BootstrapCI ci;
    ci.f1 = macro_f1(full);
    ci.iters = iters;
    ci.level = level;
    if (iters == 0) {
        ci.lo = ci.hi = ci.f1;
        return ci;
    }
    std::vector<double> stats(iters);
    for (std::size_t it = 0; it < iters; ++it) {
        std::mt19937_64 rng(seed + it);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        ConfusionMatrix cm;
        for (std::size_t j = 0; j < n; ++j) {
            const auto i = pick(rng);
            ++cm.counts[gold[i]][pred[i]];
        }
        stats[it] = macro_f1(cm);
    }
    std::sort(stats.begin(), stats.end());
    const double alpha = 1.0 - level;
    ci.lo = percentile(stats, alpha / 2.0);
    ci.hi = percentile(stats, 1.0 - alpha / 2.0);
    return ci;
}

BootstrapCI bootstrap_f1_ci(const LabeledSet& pred, const LabeledSet& gold, std::size_t iters, double level,
                            std::uint64_t seed) {
    require_same_ids(pred, gold);
    std::vector<int> p, g;
    for (const auto& [id, label] : gold) {
        g.push_back(class_index(label));
        p.push_back(class_index(pred.at(id)));
    }
    return bootstrap_f1_ci(p, g, iters, level, seed);
}

LabeledSet parse_labels_csv(std::string_view csv) {
    LabeledSet out;
    std::size_t row = 0;
    for (const auto& raw_line : text::split(csv, '\n')) {
        const auto line = text::trim(raw_line);
        if (line.empty()) continue;
        ++row;
        auto fields = text::split(line, ',');
        for (auto& f : fields) {
            f = text::trim(f);
            if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
        }
        if (fields.size() < 2) throw SchemaError(row - 1, "expected control_id,label");
        const auto label = parse_status(fields[1]);
        if (!label) {
            if (row == 1) continue;  // header
            throw SchemaError(row - 1, "unknown label '" + fields[1] + "'");
        }
        if (!out.emplace(fields[0], *label).second) throw SchemaError(row - 1, "duplicate id " + fields[0]);
    }
    return out;
}

LabeledSet load_labels_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_labels_csv(ss.str());
}

LabeledSet labels_from_records(const std::vector<AssessmentRecord>& records, CoverageStatus unassessed_as) {
    LabeledSet out;
    for (const auto& r : records) out[r.control_id] = r.label.value_or(unassessed_as);
    return out;
}

LabeledSet load_predictions(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) {
        if (fs::is_directory(path / "records")) return labels_from_records(load_records(path / "records"));
        return labels_from_records(load_records(path));
    }
    return load_labels_csv(path);
}

std::string metrics_to_json(const ConfusionMatrix& cm, const MetricsReport& m) {
    json j;
    j["n"] = m.n;
    j["accuracy"] = text::round4(m.accuracy);
    j["macro_precision"] = text::round4(m.macro_precision);
    j["macro_recall"] = text::round4(m.macro_recall);
    j["macro_f1"] = text::round4(m.macro_f1);
    j["averaging"] = m.averaging == Averaging::Macro ? "macro" : "weighted";
    json pc = json::object();
    for (int k = 0; k < 3; ++k)
        pc[std::string(to_string(kAllStatuses[k]))] = {{"precision", text::round4(m.per_class[k].precision)},
                                                       {"recall", text::round4(m.per_class[k].recall)},
                                                       {"f1", text::round4(m.per_class[k].f1)},
                                                       {"support", m.per_class[k].support}};
    j["per_class"] = pc;
    json rows = json::array();
    for (const auto& row : cm.counts) rows.push_back(row);
    j["confusion_matrix"] = {{"classes", {"FULLY_COVERED", "PARTIALLY_COVERED", "NOT_COVERED"}},
                             {"rows_gold_cols_pred", rows}};
    j["warnings"] = m.warnings;
    return j.dump(2) + "\n";
}

}  // namespace covaudit
