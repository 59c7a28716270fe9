#include "covaudit/parsers.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <span>

#include "covaudit/text.hpp"

namespace covaudit {

MalformedOutput::MalformedOutput(Stage stage, const std::string& detail)
    : Error(ErrorKind::MalformedOutput, std::string(to_string(stage)) + ": " + detail), stage_(stage) {}

namespace {

using text::trim;

constexpr std::string_view kCoverageKeys[] = {"STATUS", "CONFIDENCE", "REASONING"};
constexpr std::string_view kGapKeys[] = {"GAP_TYPE", "SEVERITY", "EXPLANATION", "AFFECTED_ELEMENTS"};
constexpr std::string_view kRecKeys[] = {"TITLE", "PRIORITY", "DESCRIPTION", "RATIONALE", "IMPLEMENTATION_GUIDANCE"};
constexpr std::string_view kExplanationKeys[] = {"SUMMARY", "GAP_EXPLANATION", "IMPACT", "RECOMMENDATION_RATIONALE",
                                                 "EVIDENCE"};
constexpr std::string_view kQualityKeys[] = {"CLARITY", "ACTIONABILITY", "GOVERNANCE_MATURITY", "INSIGHTS"};

constexpr std::string_view kSeparator = "---";

struct Section {
    std::string key;  // kSeparator for a separator line
    std::string value;
};

bool is_separator(std::string_view line) {
    const auto t = trim(line);
    return t.size() >= 3 && std::all_of(t.begin(), t.end(), [](char c) { return c == '-'; });
}

std::string_view lstrip(std::string_view s, std::string_view chars) {
    while (!s.empty() && chars.find(s.front()) != std::string_view::npos) s.remove_prefix(1);
    return s;
}

std::string_view rstrip(std::string_view s, std::string_view chars) {
    while (!s.empty() && chars.find(s.back()) != std::string_view::npos) s.remove_suffix(1);
    return s;
}

/// Drops markdown decoration, list bullets and ordinals before a header.
std::string_view strip_line_prefix(std::string_view s) {
    s = lstrip(s, " \t#*>_`");
    std::size_t d = 0;
    while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d]))) ++d;
    if (d > 0 && d < s.size() && (s[d] == '.' || s[d] == ')')) s = lstrip(s.substr(d + 1), " \t*_");
    if (s.size() >= 2 && (s[0] == '-' || s[0] == '+') && s[1] == ' ') s = lstrip(s.substr(2), " \t*_");
    return s;
}

std::optional<std::string> header_key(std::string_view candidate, std::span<const std::string_view> keys) {
    candidate = rstrip(candidate, " \t*_`");
    if (candidate.empty() || candidate.size() > 40) return std::nullopt;
    std::string norm;
    for (char ch : candidate) {
        const auto c = static_cast<unsigned char>(ch);
        if (c == ' ' || c == '-' || c == '_') {
            if (norm.empty() || norm.back() != '_') norm.push_back('_');
        } else if (std::isalpha(c)) {
            norm.push_back(static_cast<char>(std::toupper(c)));
        } else {
            return std::nullopt;
        }
    }
    for (const auto& k : keys)
        if (norm == k) return norm;
    return std::nullopt;
}

std::vector<Section> split_sections(std::string_view raw, std::span<const std::string_view> keys,
                                    bool separators) {
    std::vector<Section> out;
    bool open = false;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        auto nl = raw.find('\n', pos);
        if (nl == std::string_view::npos) nl = raw.size();
        std::string_view line = raw.substr(pos, nl - pos);
        pos = nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (separators && is_separator(line)) {
            out.push_back({std::string(kSeparator), {}});
            open = false;
            continue;
        }
        const auto body = strip_line_prefix(line);
        const auto colon = body.find(':');
        if (colon != std::string_view::npos) {
            if (auto key = header_key(body.substr(0, colon), keys)) {
                auto value = lstrip(body.substr(colon + 1), " \t*_`");
                out.push_back({std::move(*key), std::string(value)});
                open = true;
                continue;
            }
        }
        if (open) {
            out.back().value += '\n';
            out.back().value += line;
        }
        if (nl == raw.size()) break;
    }
    for (auto& s : out) s.value = trim(s.value);
    return out;
}

std::string first_word(std::string_view s) {
    s = lstrip(s, " \t[(*_`\"'");
    std::size_t e = 0;
    while (e < s.size()) {
        const auto c = static_cast<unsigned char>(s[e]);
        if (!(std::isalnum(c) || c == '_' || c == '-')) break;
        ++e;
    }
    return std::string(s.substr(0, e));
}

std::optional<Level> level_of(std::string_view v) {
    if (auto l = parse_level(v)) return l;
    return parse_level(first_word(v));
}

std::optional<CoverageStatus> status_of(std::string_view v) {
    if (auto s = parse_status(v)) return s;
    return parse_status(first_word(v));
}

std::optional<GapType> gap_type_of(std::string_view v) {
    if (auto g = parse_gap_type(v)) return g;
    for (std::string_view sep : {" - ", " : ", " (", "\n"}) {
        const auto p = v.find(sep);
        if (p != std::string_view::npos)
            if (auto g = parse_gap_type(v.substr(0, p))) return g;
    }
    return std::nullopt;
}

/// First number in `v`, with "N%" and "N/D" forms normalised to a fraction,
/// clamped to [0, 1].
std::optional<double> unit_number(std::string_view v) {
    std::size_t i = 0;
    while (i < v.size()) {
        const auto c = static_cast<unsigned char>(v[i]);
        if (std::isdigit(c)) break;
        if (c == '.' && i + 1 < v.size() && std::isdigit(static_cast<unsigned char>(v[i + 1]))) break;
        ++i;
    }
    if (i >= v.size()) return std::nullopt;
    const std::string tail(v.substr(i, 64));
    char* end = nullptr;
    double x = std::strtod(tail.c_str(), &end);
    if (end == tail.c_str()) return std::nullopt;
    std::string_view rest(end);
    rest = lstrip(rest, " \t");
    if (!rest.empty() && rest.front() == '%') {
        x /= 100.0;
    } else if (!rest.empty() && rest.front() == '/') {
        const std::string den(lstrip(rest.substr(1), " \t").substr(0, 32));
        char* dend = nullptr;
        const double d = std::strtod(den.c_str(), &dend);
        if (dend != den.c_str() && d > 0.0 && std::isfinite(d)) x /= d;
    }
    if (std::isnan(x)) return 0.0;
    return std::clamp(x, 0.0, 1.0);
}

std::vector<std::string> split_elements(std::string_view v) {
    auto s = trim(v);
    std::string_view sv = s;
    if (!sv.empty() && sv.front() == '[') sv.remove_prefix(1);
    if (!sv.empty() && sv.back() == ']') sv.remove_suffix(1);
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        auto t = trim(cur);
        std::string_view tv = t;
        if (tv.size() >= 2 && (tv[0] == '-' || tv[0] == '*') && tv[1] == ' ') tv = lstrip(tv.substr(2), " \t");
        if (!tv.empty()) out.emplace_back(tv);
        cur.clear();
    };
    for (char c : sv) {
        if (c == ',' || c == '\n') flush();
        else cur.push_back(c);
    }
    flush();
    return out;
}

std::string strip_bullet(std::string_view line) {
    auto t = trim(line);
    std::string_view s = t;
    std::size_t d = 0;
    while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d]))) ++d;
    if (d > 0 && d < s.size() && (s[d] == '.' || s[d] == ')')) {
        s.remove_prefix(d + 1);
    } else if (s.starts_with("\xE2\x80\xA2")) {
        s.remove_prefix(3);
    } else if (!s.empty() && (s[0] == '-' || s[0] == '*' || s[0] == '+')) {
        s.remove_prefix(1);
    }
    return trim(s);
}

/// Assembles gaps and recommendations from a mixed section stream.
struct BlockAssembler {
    std::vector<Gap> gaps;
    std::vector<Recommendation> recs;
    std::vector<bool> rec_has_priority;
    std::vector<std::string> warnings;
    enum { None, InGap, InRec } mode = None;
    bool gap_valid = false;

    void feed(const Section& s) {
        if (s.key == kSeparator) {
            mode = None;
        } else if (s.key == "GAP_TYPE") {
            const std::size_t n = gaps.size() + 1;
            mode = InGap;
            gap_valid = !s.value.empty();
            if (!gap_valid) {
                warnings.push_back("gap " + std::to_string(n) + ": empty GAP_TYPE ignored");
                return;
            }
            Gap g;
            if (auto t = gap_type_of(s.value)) {
                g.gap_type = *t;
            } else {
                g.gap_type = GapType::WeakSpecification;
                warnings.push_back("gap " + std::to_string(n) + ": unrecognized gap type '" +
                                   text::truncate_chars(s.value, 80) + "' mapped to WEAK_SPECIFICATION");
            }
            g.severity = Level::Medium;
            gaps.push_back(std::move(g));
            severity_seen = false;
        } else if (mode == InGap && gap_valid && s.key == "SEVERITY") {
            if (auto l = level_of(s.value)) {
                gaps.back().severity = *l;
                severity_seen = true;
            }
        } else if (mode == InGap && gap_valid && s.key == "EXPLANATION") {
            gaps.back().explanation = s.value;
        } else if (mode == InGap && gap_valid && s.key == "AFFECTED_ELEMENTS") {
            gaps.back().affected_elements = split_elements(s.value);
        } else if (s.key == "TITLE") {
            close_gap();
            mode = InRec;
            Recommendation r;
            r.title = s.value;
            recs.push_back(std::move(r));
            rec_has_priority.push_back(false);
        } else if (mode == InRec && s.key == "PRIORITY") {
            if (auto l = level_of(s.value)) {
                recs.back().priority = *l;
                rec_has_priority.back() = true;
            }
        } else if (mode == InRec && s.key == "DESCRIPTION") {
            recs.back().description = s.value;
        } else if (mode == InRec && s.key == "RATIONALE") {
            recs.back().rationale = s.value;
        } else if (mode == InRec && s.key == "IMPLEMENTATION_GUIDANCE") {
            recs.back().implementation_guidance = s.value;
        }
    }

    void close_gap() {
        if (mode == InGap && gap_valid && !severity_seen)
            warnings.push_back("gap " + std::to_string(gaps.size()) + ": missing or invalid SEVERITY, using MEDIUM");
        severity_seen = true;
    }

    void finish() {
        close_gap();
        std::vector<Recommendation> kept;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (trim(recs[i].title).empty()) {
                warnings.push_back("recommendation " + std::to_string(i + 1) + ": empty TITLE, block dropped");
                continue;
            }
            if (!rec_has_priority[i])
                warnings.push_back("recommendation " + std::to_string(i + 1) +
                                   ": missing or invalid PRIORITY, using MEDIUM");
            kept.push_back(std::move(recs[i]));
        }
        recs = std::move(kept);
    }

    bool severity_seen = true;
};

template <std::size_t N>
std::vector<std::string_view> keys_of(const std::string_view (&a)[N]) {
    return {a, a + N};
}

std::optional<std::string> first_value(const std::vector<Section>& secs, std::string_view key) {
    for (const auto& s : secs)
        if (s.key == key) return s.value;
    return std::nullopt;
}

CoverageJudgment coverage_from(const std::vector<Section>& secs, Stage stage) {
    CoverageJudgment c;
    bool found = false;
    for (const auto& s : secs) {
        if (s.key != "STATUS") continue;
        if (auto st = status_of(s.value)) {
            c.status = *st;
            found = true;
            break;
        }
    }
    if (!found) throw MalformedOutput(stage, "no recognizable STATUS");
    if (auto v = first_value(secs, "CONFIDENCE")) c.confidence = unit_number(*v).value_or(0.0);
    if (auto v = first_value(secs, "REASONING")) c.reasoning = *v;
    return c;
}

}  // namespace

CoverageJudgment parse_coverage(std::string_view raw) {
    return coverage_from(split_sections(raw, kCoverageKeys, false), Stage::Coverage);
}

Parsed<std::vector<Gap>> parse_gaps(std::string_view raw, bool require_nonempty) {
    BlockAssembler a;
    for (const auto& s : split_sections(raw, kGapKeys, false)) a.feed(s);
    a.finish();
    if (require_nonempty && a.gaps.empty()) throw MalformedOutput(Stage::Gap, "no parseable GAP_TYPE block");
    return {std::move(a.gaps), std::move(a.warnings)};
}

Parsed<std::vector<Recommendation>> parse_recommendations(std::string_view raw, bool require_nonempty) {
    BlockAssembler a;
    for (const auto& s : split_sections(raw, kRecKeys, true)) a.feed(s);
    a.finish();
    if (require_nonempty && a.recs.empty())
        throw MalformedOutput(Stage::Recommendation, "no parseable recommendation block");
    return {std::move(a.recs), std::move(a.warnings)};
}

Explanation parse_explanation(std::string_view raw) {
    const auto secs = split_sections(raw, kExplanationKeys, false);
    Explanation e;
    e.summary = first_value(secs, "SUMMARY").value_or("");
    if (e.summary.empty()) throw MalformedOutput(Stage::Explanation, "missing SUMMARY");
    e.gap_explanation = first_value(secs, "GAP_EXPLANATION").value_or("");
    e.impact = first_value(secs, "IMPACT").value_or("");
    e.recommendation_rationale = first_value(secs, "RECOMMENDATION_RATIONALE").value_or("");
    e.evidence_citations = first_value(secs, "EVIDENCE").value_or("");
    return e;
}

QualityScores parse_quality(std::string_view raw) {
    const auto secs = split_sections(raw, kQualityKeys, false);
    auto score = [&](std::string_view key) -> std::optional<double> {
        for (const auto& s : secs)
            if (s.key == key)
                if (auto x = unit_number(s.value)) return x;
        return std::nullopt;
    };
    const auto c = score("CLARITY");
    const auto a = score("ACTIONABILITY");
    const auto g = score("GOVERNANCE_MATURITY");
    if (!c || !a || !g) {
        std::string missing;
        if (!c) missing += " CLARITY";
        if (!a) missing += " ACTIONABILITY";
        if (!g) missing += " GOVERNANCE_MATURITY";
        throw MalformedOutput(Stage::Quality, "missing score(s):" + missing);
    }
    QualityScores q{*c, *a, *g, {}};
    if (auto ins = first_value(secs, "INSIGHTS")) {
        for (const auto& line : text::split(*ins, '\n')) {
            auto item = strip_bullet(line);
            if (!item.empty()) q.insights.push_back(std::move(item));
        }
    }
    return q;
}

Parsed<JointAssessment> parse_joint(std::string_view raw) {
    std::vector<std::string_view> keys = keys_of(kCoverageKeys);
    for (auto k : kGapKeys) keys.push_back(k);
    for (auto k : kRecKeys) keys.push_back(k);
    const auto secs = split_sections(raw, keys, true);

    Parsed<JointAssessment> out;
    // Coverage fields come from the part before the first gap or recommendation.
    std::vector<Section> head;
    BlockAssembler a;
    bool in_blocks = false;
    for (const auto& s : secs) {
        if (s.key == "GAP_TYPE" || s.key == "TITLE") in_blocks = true;
        if (!in_blocks || s.key == "STATUS") head.push_back(s);
        if (in_blocks) a.feed(s);
    }
    a.finish();
    out.value.coverage = coverage_from(head, Stage::Joint);
    out.warnings = std::move(a.warnings);
    if (out.value.coverage.status == CoverageStatus::FullyCovered) {
        if (!a.gaps.empty() || !a.recs.empty()) out.warnings.push_back("gaps/recommendations ignored for FULLY_COVERED");
        return out;
    }
    if (a.gaps.empty()) throw MalformedOutput(Stage::Joint, "no parseable GAP_TYPE block");
    if (a.recs.empty()) throw MalformedOutput(Stage::Joint, "no parseable recommendation block");
    out.value.gaps = std::move(a.gaps);
    out.value.recommendations = std::move(a.recs);
    return out;
}

std::string format_number(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string format_coverage(const CoverageJudgment& c) {
    return "STATUS: " + std::string(to_string(c.status)) + "\nCONFIDENCE: " + format_number(c.confidence) +
           "\nREASONING: " + c.reasoning;
}

std::string format_gaps(const std::vector<Gap>& gaps) {
    std::vector<std::string> blocks;
    for (const auto& g : gaps) {
        blocks.push_back("GAP_TYPE: " + std::string(display_name(g.gap_type)) + "\nSEVERITY: " +
                         std::string(to_string(g.severity)) + "\nEXPLANATION: " + g.explanation +
                         "\nAFFECTED_ELEMENTS: " + text::join(g.affected_elements, ", "));
    }
    return text::join(blocks, "\n\n");
}

std::string format_recommendations(const std::vector<Recommendation>& recs) {
    std::vector<std::string> blocks;
    for (const auto& r : recs) {
        blocks.push_back("TITLE: " + r.title + "\nPRIORITY: " + std::string(to_string(r.priority)) +
                         "\nDESCRIPTION: " + r.description + "\nRATIONALE: " + r.rationale +
                         "\nIMPLEMENTATION_GUIDANCE: " + r.implementation_guidance);
    }
    return text::join(blocks, "\n\n---\n\n");
}

std::string format_explanation(const Explanation& e) {
    return "SUMMARY: " + e.summary + "\nGAP_EXPLANATION: " + e.gap_explanation + "\nIMPACT: " + e.impact +
           "\nRECOMMENDATION_RATIONALE: " + e.recommendation_rationale + "\nEVIDENCE: " + e.evidence_citations;
}

std::string format_quality(const QualityScores& q) {
    std::string out = "CLARITY: " + format_number(q.clarity) + "\nACTIONABILITY: " + format_number(q.actionability) +
                      "\nGOVERNANCE_MATURITY: " + format_number(q.governance_maturity) + "\nINSIGHTS:";
    for (const auto& i : q.insights) out += "\n- " + i;
    return out;
}

std::string format_joint(const JointAssessment& j) {
    std::string out = format_coverage(j.coverage);
    if (!j.gaps.empty()) out += "\n\n" + format_gaps(j.gaps);
    if (!j.recommendations.empty()) out += "\n\n" + format_recommendations(j.recommendations);
    return out;
}

}  // namespace covaudit
