#include "covaudit/reporting.hpp"

#include <algorithm>
#include <sstream>

#include "covaudit/text.hpp"
#include "json.hpp"

namespace covaudit {

using nlohmann::json;

double completeness_score(std::size_t n_full, std::size_t n_partial, std::size_t n_total) {
    if (n_total == 0) throw Error(ErrorKind::UndefinedScore, "completeness undefined for zero controls");
    if (n_full + n_partial > n_total)
        throw Error(ErrorKind::ConfigError, "n_full + n_partial exceeds n_total");
    return (static_cast<double>(n_full) + 0.5 * static_cast<double>(n_partial)) / static_cast<double>(n_total);
}

namespace {

void count(Totals& t, const AssessmentRecord& r) {
    if (r.failed() || !r.label) {
        ++t.failed;
        return;
    }
    switch (*r.label) {
        case CoverageStatus::FullyCovered: ++t.full; break;
        case CoverageStatus::PartiallyCovered: ++t.partial; break;
        case CoverageStatus::NotCovered: ++t.not_covered; break;
    }
}

std::string pct(std::size_t part, std::size_t total) {
    return total == 0 ? "0.0" : text::format_fixed(100.0 * static_cast<double>(part) / static_cast<double>(total), 1);
}

ReportPromptInput prompt_input(const AuditReport& rep, const std::vector<AssessmentRecord>& records,
                               const ControlSet& controls, double quality_overall) {
    ReportPromptInput in;
    in.framework = rep.framework_name;
    in.total_controls = rep.totals.total();
    in.fully_covered = rep.totals.full;
    in.partially_covered = rep.totals.partial;
    in.not_covered = rep.totals.not_covered;
    for (const auto& [g, n] : rep.gap_type_counts) in.gaps_total += n;
    in.gaps_high = rep.severity_counts.at(Level::High);
    in.gaps_medium = rep.severity_counts.at(Level::Medium);
    for (const auto& [p, n] : rep.priority_counts) in.recs_total += n;
    in.recs_high = rep.priority_counts.at(Level::High);
    in.quality_overall = quality_overall;
    for (const auto& r : records) {
        if (r.failed() || !r.label) continue;
        if (*r.label == CoverageStatus::NotCovered) {
            const auto* c = controls.find(r.control_id);
            in.critical_findings.emplace_back(r.control_id, c ? c->control_name : std::string());
        }
        if (in.sample_findings.size() < 10)
            in.sample_findings.emplace_back(r.control_id, std::string(to_string(*r.label)), r.reasoning);
    }
    return in;
}

json totals_json(const Totals& t) {
    return {{"fully_covered", t.full},
            {"partially_covered", t.partial},
            {"not_covered", t.not_covered},
            {"failed", t.failed},
            {"total", t.total()}};
}

Totals totals_from(const json& j) {
    return {j.at("fully_covered").get<std::size_t>(), j.at("partially_covered").get<std::size_t>(),
            j.at("not_covered").get<std::size_t>(), j.at("failed").get<std::size_t>()};
}

template <class T, class F>
T need(std::string_view s, F parse, const char* what) {
    auto v = parse(s);
    if (!v) throw Error(ErrorKind::IoError, std::string("report: bad ") + what + " '" + std::string(s) + "'");
    return *v;
}

}  // namespace

std::string templated_summary(const AuditReport& r) {
    const auto& t = r.totals;
    std::ostringstream out;
    out << kTemplatedSummaryHeader << "\n\n";
    out << r.framework_name << ": " << t.total() << " controls assessed. Fully covered " << t.full << " ("
        << pct(t.full, t.total()) << "%), partially covered " << t.partial << " (" << pct(t.partial, t.total())
        << "%), not covered " << t.not_covered << " (" << pct(t.not_covered, t.total()) << "%)";
    if (t.failed) out << ", not assessable " << t.failed;
    out << ". Completeness score " << text::format_fixed(r.completeness, 4) << ".\n\n";
    std::size_t gaps = 0;
    for (const auto& [g, n] : r.gap_type_counts) gaps += n;
    out << "Gaps identified: " << gaps << " (" << r.severity_counts.at(Level::High) << " high severity).";
    if (!r.recurring_gaps.empty()) {
        out << " Most frequent gap types:";
        for (std::size_t i = 0; i < r.recurring_gaps.size() && i < 3; ++i)
            out << (i ? ", " : " ") << display_name(r.recurring_gaps[i].gap_type) << " ("
                << r.recurring_gaps[i].count << ")";
        out << ".";
    }
    out << "\n\nRecommendations: " << r.recommendations.size() << " (" << r.priority_counts.at(Level::High)
        << " high priority).\n";
    return out.str();
}

AuditReport aggregate_report(const std::vector<AssessmentRecord>& records, const ControlSet& controls,
                             GenerationBackend* backend, const CompletionPolicy& policy) {
    AuditReport rep;
    rep.framework_name = controls.framework_name();
    for (auto g : kAllGapTypes) rep.gap_type_counts[g] = 0;
    for (auto l : {Level::Low, Level::Medium, Level::High}) {
        rep.priority_counts[l] = 0;
        rep.severity_counts[l] = 0;
    }
    std::map<GapType, std::vector<std::string>> examples;
    for (const auto& r : records) {
        count(rep.totals, r);
        const auto* c = controls.find(r.control_id);
        count(rep.per_family[c ? c->family : std::string("UNKNOWN")], r);
        for (const auto& g : r.gaps) {
            ++rep.gap_type_counts[g.gap_type];
            ++rep.severity_counts[g.severity];
            auto& ex = examples[g.gap_type];
            if (ex.size() < 5 && (ex.empty() || ex.back() != r.control_id)) ex.push_back(r.control_id);
        }
        for (const auto& x : r.recommendations) {
            ++rep.priority_counts[x.priority];
            rep.recommendations.emplace_back(r.control_id, x.title, x.priority);
        }
    }
    std::stable_sort(rep.recommendations.begin(), rep.recommendations.end(),
                     [](const auto& a, const auto& b) { return std::get<2>(a) > std::get<2>(b); });
    for (auto g : kAllGapTypes)
        if (rep.gap_type_counts[g] > 0) rep.recurring_gaps.push_back({g, rep.gap_type_counts[g], examples[g]});
    std::stable_sort(rep.recurring_gaps.begin(), rep.recurring_gaps.end(),
                     [](const auto& a, const auto& b) { return a.count > b.count; });

    if (rep.totals.total() > 0) {
        rep.completeness = text::round4(completeness_score(rep.totals.full, rep.totals.partial, rep.totals.total()));
    } else {
        rep.warnings.push_back("no records: completeness undefined, reported as 0");
    }

    if (!backend) {
        rep.executive_summary = templated_summary(rep);
        return rep;
    }
    double overall = rep.completeness;
    try {
        const auto in = prompt_input(rep, records, controls, 0.0);
        const auto res = complete(*backend, GenerationRequest::from(Stage::Quality, quality_prompt(in)), policy);
        auto q = parse_quality(res.text);
        q.clarity = text::round4(q.clarity);
        q.actionability = text::round4(q.actionability);
        q.governance_maturity = text::round4(q.governance_maturity);
        rep.quality = q;
        overall = q.overall();
    } catch (const Error& e) {
        rep.warnings.push_back(std::string("quality assessment failed: ") + e.what());
    }
    try {
        const auto in = prompt_input(rep, records, controls, overall);
        const auto res =
            complete(*backend, GenerationRequest::from(Stage::ReportSummary, report_summary_prompt(in)), policy);
        rep.executive_summary = text::trim(res.text);
        if (rep.executive_summary.empty()) throw Error(ErrorKind::MalformedOutput, "empty summary");
    } catch (const Error& e) {
        rep.warnings.push_back(std::string("executive summary generation failed, using template: ") + e.what());
        rep.executive_summary = templated_summary(rep);
    }
    return rep;
}

std::string emit_report(const AuditReport& r, ReportFormat format) {
    if (format == ReportFormat::Json) {
        json j;
        j["framework"] = r.framework_name;
        j["totals"] = totals_json(r.totals);
        j["completeness"] = text::round4(r.completeness);
        json fam = json::object();
        for (const auto& [f, t] : r.per_family) fam[f] = totals_json(t);
        j["per_family"] = fam;
        json gaps = json::object();
        for (const auto& [g, n] : r.gap_type_counts) gaps[std::string(to_string(g))] = n;
        j["gap_type_counts"] = gaps;
        json pri = json::object();
        for (const auto& [l, n] : r.priority_counts) pri[std::string(to_string(l))] = n;
        j["priority_counts"] = pri;
        json sev = json::object();
        for (const auto& [l, n] : r.severity_counts) sev[std::string(to_string(l))] = n;
        j["severity_counts"] = sev;
        json rg = json::array();
        for (const auto& g : r.recurring_gaps)
            rg.push_back({{"gap_type", to_string(g.gap_type)}, {"count", g.count}, {"example_controls", g.example_controls}});
        j["recurring_gaps"] = rg;
        json recs = json::array();
        for (const auto& [id, title, p] : r.recommendations)
            recs.push_back({{"control_id", id}, {"title", title}, {"priority", to_string(p)}});
        j["recommendations"] = recs;
        j["executive_summary"] = r.executive_summary;
        if (r.quality) {
            j["quality"] = {{"clarity", text::round4(r.quality->clarity)},
                            {"actionability", text::round4(r.quality->actionability)},
                            {"governance_maturity", text::round4(r.quality->governance_maturity)},
                            {"overall", text::round4(r.quality->overall())},
                            {"insights", r.quality->insights}};
        } else {
            j["quality"] = nullptr;
        }
        j["warnings"] = r.warnings;
        return j.dump(2) + "\n";
    }

    const auto& t = r.totals;
    std::ostringstream md;
    md << "# Compliance Assessment Report: " << r.framework_name << "\n\n";
    md << "## Executive summary\n\n" << text::trim(r.executive_summary) << "\n\n";
    md << "## Coverage totals\n\n| Status | Count | Share |\n|---|---:|---:|\n";
    md << "| Fully covered | " << t.full << " | " << pct(t.full, t.total()) << "% |\n";
    md << "| Partially covered | " << t.partial << " | " << pct(t.partial, t.total()) << "% |\n";
    md << "| Not covered | " << t.not_covered << " | " << pct(t.not_covered, t.total()) << "% |\n";
    md << "| Failed | " << t.failed << " | " << pct(t.failed, t.total()) << "% |\n";
    md << "| Total | " << t.total() << " | " << (t.total() ? "100.0" : "0.0") << "% |\n\n";
    md << "Completeness score: **" << text::format_fixed(r.completeness, 4) << "**\n\n";

    md << "## Coverage by family\n\n| Family | Fully | Partial | Not covered | Failed | Total |\n"
          "|---|---:|---:|---:|---:|---:|\n";
    for (const auto& [f, ft] : r.per_family)
        md << "| " << f << " | " << ft.full << " | " << ft.partial << " | " << ft.not_covered << " | " << ft.failed
           << " | " << ft.total() << " |\n";
    md << "\n## Top gaps\n\n";
    if (r.recurring_gaps.empty()) {
        md << "No gaps identified.\n\n";
    } else {
        md << "| Gap type | Count | Example controls |\n|---|---:|---|\n";
        for (const auto& g : r.recurring_gaps)
            md << "| " << display_name(g.gap_type) << " | " << g.count << " | "
               << text::join(g.example_controls, ", ") << " |\n";
        md << "\n";
    }
    md << "## Recommendations by priority\n\n";
    if (r.recommendations.empty()) {
        md << "No recommendations.\n\n";
    } else {
        md << "| Priority | Count |\n|---|---:|\n";
        for (auto l : {Level::High, Level::Medium, Level::Low})
            md << "| " << to_string(l) << " | " << r.priority_counts.at(l) << " |\n";
        md << "\n| Control | Priority | Recommendation |\n|---|---|---|\n";
        for (const auto& [id, title, p] : r.recommendations)
            md << "| " << id << " | " << to_string(p) << " | " << title << " |\n";
        md << "\n";
    }
    if (r.quality) {
        md << "## Policy quality\n\n| Dimension | Score |\n|---|---:|\n";
        md << "| Clarity | " << text::format_fixed(r.quality->clarity, 2) << " |\n";
        md << "| Actionability | " << text::format_fixed(r.quality->actionability, 2) << " |\n";
        md << "| Governance maturity | " << text::format_fixed(r.quality->governance_maturity, 2) << " |\n";
        md << "| Overall | " << text::format_fixed(r.quality->overall(), 2) << " |\n\n";
        for (const auto& i : r.quality->insights) md << "- " << i << "\n";
        if (!r.quality->insights.empty()) md << "\n";
    }
    if (!r.warnings.empty()) {
        md << "## Warnings\n\n";
        for (const auto& w : r.warnings) md << "- " << w << "\n";
        md << "\n";
    }
    return md.str();
}

AuditReport report_from_json(std::string_view json_text) {
    try {
        const auto j = json::parse(json_text);
        AuditReport r;
        r.framework_name = j.at("framework").get<std::string>();
        r.totals = totals_from(j.at("totals"));
        r.completeness = j.at("completeness").get<double>();
        for (const auto& [f, t] : j.at("per_family").items()) r.per_family[f] = totals_from(t);
        for (const auto& [g, n] : j.at("gap_type_counts").items())
            r.gap_type_counts[need<GapType>(g, parse_gap_type, "gap type")] = n.get<std::size_t>();
        for (const auto& [l, n] : j.at("priority_counts").items())
            r.priority_counts[need<Level>(l, parse_level, "priority")] = n.get<std::size_t>();
        for (const auto& [l, n] : j.at("severity_counts").items())
            r.severity_counts[need<Level>(l, parse_level, "severity")] = n.get<std::size_t>();
        for (const auto& g : j.at("recurring_gaps"))
            r.recurring_gaps.push_back({need<GapType>(g.at("gap_type").get<std::string>(), parse_gap_type, "gap type"),
                                        g.at("count").get<std::size_t>(),
                                        g.at("example_controls").get<std::vector<std::string>>()});
        for (const auto& x : j.at("recommendations"))
            r.recommendations.emplace_back(x.at("control_id").get<std::string>(), x.at("title").get<std::string>(),
                                           need<Level>(x.at("priority").get<std::string>(), parse_level, "priority"));
        r.executive_summary = j.at("executive_summary").get<std::string>();
        if (!j.at("quality").is_null()) {
            const auto& q = j["quality"];
            r.quality = QualityScores{q.at("clarity").get<double>(), q.at("actionability").get<double>(),
                                      q.at("governance_maturity").get<double>(),
                                      q.at("insights").get<std::vector<std::string>>()};
        }
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::IoError, std::string("report: ") + e.what());
    }
}

std::string EfficiencyStats::to_json() const {
    json j;
    j["n_records"] = n_records;
    j["n_counted"] = n_counted;
    j["mean_tokens_per_control"] = text::round4(mean_tokens_per_control);
    j["mean_input_tokens"] = text::round4(mean_input_tokens);
    j["mean_output_tokens"] = text::round4(mean_output_tokens);
    j["mean_latency_ms"] = text::round4(mean_latency_ms);
    j["mean_calls"] = text::round4(mean_calls);
    j["total_tokens"] = total_tokens;
    j["estimated_cost"] = text::round4(estimated_cost);
    j["cost_per_100_controls"] = text::round4(cost_per_100_controls);
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

EfficiencyStats efficiency_summary(const std::vector<AssessmentRecord>& records, const Pricing& pricing) {
    EfficiencyStats s;
    s.n_records = records.size();
    auto cost = [&](const Usage& u) {
        return static_cast<double>(u.input_tokens) / 1000.0 * pricing.input_price_per_1k +
               static_cast<double>(u.output_tokens) / 1000.0 * pricing.output_price_per_1k;
    };
    double counted_cost = 0.0;
    for (const auto& r : records) {
        s.total_tokens += r.usage.total_tokens();
        s.estimated_cost += cost(r.usage);
        if (r.failed()) continue;
        ++s.n_counted;
        s.mean_tokens_per_control += static_cast<double>(r.usage.total_tokens());
        s.mean_input_tokens += static_cast<double>(r.usage.input_tokens);
        s.mean_output_tokens += static_cast<double>(r.usage.output_tokens);
        s.mean_latency_ms += static_cast<double>(r.usage.latency_ms);
        s.mean_calls += static_cast<double>(r.usage.calls);
        counted_cost += cost(r.usage);
    }
    if (s.n_counted == 0) {
        s.mean_tokens_per_control = s.mean_input_tokens = s.mean_output_tokens = s.mean_latency_ms = s.mean_calls = 0;
        s.warnings.push_back(records.empty() ? "no records" : "all records failed; means reported as 0");
        return s;
    }
    const double n = static_cast<double>(s.n_counted);
    s.mean_tokens_per_control /= n;
    s.mean_input_tokens /= n;
    s.mean_output_tokens /= n;
    s.mean_latency_ms /= n;
    s.mean_calls /= n;
    s.cost_per_100_controls = counted_cost / n * 100.0;
    return s;
}

}  // namespace covaudit
