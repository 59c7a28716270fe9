#include "covaudit/orchestrator.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "covaudit/text.hpp"
#include "json.hpp"

namespace covaudit {

using nlohmann::json;

namespace {

constexpr std::string_view kPhaseNames[] = {"INIT",        "RETRIEVED", "COVERED", "GAPPED",
                                            "RECOMMENDED", "EXPLAINED", "DONE",    "FAILED"};

json gap_json(const Gap& g) {
    return {{"gap_type", to_string(g.gap_type)},
            {"severity", to_string(g.severity)},
            {"explanation", g.explanation},
            {"affected_elements", g.affected_elements}};
}

json rec_json(const Recommendation& r) {
    return {{"title", r.title},
            {"priority", to_string(r.priority)},
            {"description", r.description},
            {"rationale", r.rationale},
            {"implementation_guidance", r.implementation_guidance}};
}

template <class T, class F>
T parse_enum(const json& j, F parse, const char* what) {
    const auto v = parse(j.get<std::string>());
    if (!v) throw Error(ErrorKind::IoError, std::string("record: bad ") + what + " '" + j.get<std::string>() + "'");
    return *v;
}

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<std::string> gap_texts(const std::vector<Gap>& gaps) {
    std::vector<std::string> out;
    for (const auto& g : gaps) {
        out.push_back(g.explanation);
        for (const auto& e : g.affected_elements) out.push_back(e);
    }
    return out;
}

std::vector<std::string> explanation_texts(const Explanation& e) {
    return {e.summary, e.gap_explanation, e.impact, e.recommendation_rationale, e.evidence_citations};
}

}  // namespace

std::string_view to_string(Phase p) { return kPhaseNames[static_cast<int>(p)]; }

std::optional<Phase> parse_phase(std::string_view text) {
    for (int i = 0; i < 8; ++i)
        if (text == kPhaseNames[i]) return static_cast<Phase>(i);
    return std::nullopt;
}

void AssessmentState::advance(Phase next) {
    const bool forward = static_cast<int>(next) > static_cast<int>(phase_) && next != Phase::Failed;
    const bool fail = next == Phase::Failed && phase_ != Phase::Done && phase_ != Phase::Failed;
    if (!forward && !fail)
        throw std::logic_error("illegal phase transition " + std::string(to_string(phase_)) + " -> " +
                               std::string(to_string(next)));
    phase_ = next;
}

void Usage::add(const GenerationResult& r) {
    ++calls;
    input_tokens += std::max(0L, r.input_tokens);
    output_tokens += std::max(0L, r.output_tokens);
    latency_ms += std::max(0L, r.latency_ms);
}

std::string AssessmentRecord::label_text() const {
    if (failed() && parse_failed) return "PARSE_FAILED";
    if (failed()) return "FAILED";
    return label ? std::string(to_string(*label)) : "FAILED";
}

std::string record_to_json(const AssessmentRecord& r) {
    json j;
    j["control_id"] = r.control_id;
    j["control_text"] = r.control_text;
    j["pipeline_mode"] = to_string(r.mode);
    j["retrieval_strategy"] = r.strategy ? json(to_string(*r.strategy)) : json(nullptr);
    json ev = json::array();
    for (const auto& e : r.evidence)
        ev.push_back({{"chunk_id", e.chunk_id},
                      {"doc_id", e.doc_id},
                      {"excerpt", e.text},
                      {"score", text::round4(e.score)},
                      {"section", e.section_heading ? json(*e.section_heading) : json(nullptr)}});
    j["evidence"] = ev;
    j["coverage_label"] = r.label_text();
    j["assessed_label"] = r.label ? json(to_string(*r.label)) : json(nullptr);
    j["confidence"] = text::round4(r.confidence);
    j["reasoning"] = r.reasoning;
    json gaps = json::array();
    for (const auto& g : r.gaps) gaps.push_back(gap_json(g));
    j["gaps"] = gaps;
    json recs = json::array();
    for (const auto& x : r.recommendations) recs.push_back(rec_json(x));
    j["recommendations"] = recs;
    if (r.explanation) {
        j["explanation"] = {{"summary", r.explanation->summary},
                            {"gap_explanation", r.explanation->gap_explanation},
                            {"impact", r.explanation->impact},
                            {"recommendation_rationale", r.explanation->recommendation_rationale},
                            {"evidence_citations", r.explanation->evidence_citations}};
    } else {
        j["explanation"] = nullptr;
    }
    j["grounded"] = r.grounded;
    j["grounding_overlap"] = text::round4(r.grounding_overlap);
    j["usage"] = {{"calls", r.usage.calls},
                  {"retries", r.usage.retries},
                  {"input_tokens", r.usage.input_tokens},
                  {"output_tokens", r.usage.output_tokens},
                  {"latency_ms", r.usage.latency_ms}};
    j["phase"] = to_string(r.phase);
    j["failed_stage"] = r.failed_stage ? json(to_string(*r.failed_stage)) : json(nullptr);
    j["warnings"] = r.warnings;
    return j.dump(2) + "\n";
}

AssessmentRecord record_from_json(std::string_view json_text) {
    try {
        const auto j = json::parse(json_text);
        AssessmentRecord r;
        r.control_id = j.at("control_id").get<std::string>();
        r.control_text = j.value("control_text", "");
        r.mode = parse_enum<PipelineMode>(j.at("pipeline_mode"), parse_mode, "pipeline_mode");
        if (!j.at("retrieval_strategy").is_null())
            r.strategy = parse_enum<Strategy>(j["retrieval_strategy"], parse_strategy, "retrieval_strategy");
        for (const auto& e : j.at("evidence")) {
            EvidenceItem it;
            it.chunk_id = e.at("chunk_id").get<std::string>();
            it.doc_id = e.at("doc_id").get<std::string>();
            it.text = e.at("excerpt").get<std::string>();
            it.score = e.value("score", 0.0);
            if (e.contains("section") && !e["section"].is_null()) it.section_heading = e["section"].get<std::string>();
            const auto colon = it.chunk_id.rfind(':');
            if (colon != std::string::npos) it.chunk_index = std::stoul(it.chunk_id.substr(colon + 1));
            r.evidence.push_back(std::move(it));
        }
        if (!j.at("assessed_label").is_null())
            r.label = parse_enum<CoverageStatus>(j["assessed_label"], parse_status, "assessed_label");
        r.confidence = j.value("confidence", 0.0);
        r.reasoning = j.value("reasoning", "");
        for (const auto& g : j.at("gaps")) {
            Gap x;
            x.gap_type = parse_enum<GapType>(g.at("gap_type"), parse_gap_type, "gap_type");
            x.severity = parse_enum<Level>(g.at("severity"), parse_level, "severity");
            x.explanation = g.value("explanation", "");
            x.affected_elements = g.value("affected_elements", std::vector<std::string>{});
            r.gaps.push_back(std::move(x));
        }
        for (const auto& g : j.at("recommendations")) {
            Recommendation x;
            x.title = g.at("title").get<std::string>();
            x.priority = parse_enum<Level>(g.at("priority"), parse_level, "priority");
            x.description = g.value("description", "");
            x.rationale = g.value("rationale", "");
            x.implementation_guidance = g.value("implementation_guidance", "");
            r.recommendations.push_back(std::move(x));
        }
        if (!j.at("explanation").is_null()) {
            const auto& e = j["explanation"];
            r.explanation = Explanation{e.value("summary", ""), e.value("gap_explanation", ""), e.value("impact", ""),
                                        e.value("recommendation_rationale", ""), e.value("evidence_citations", "")};
        }
        r.grounded = j.value("grounded", true);
        r.grounding_overlap = j.value("grounding_overlap", 1.0);
        const auto& u = j.at("usage");
        r.usage.calls = u.value("calls", std::size_t{0});
        r.usage.retries = u.value("retries", std::size_t{0});
        r.usage.input_tokens = u.value("input_tokens", 0L);
        r.usage.output_tokens = u.value("output_tokens", 0L);
        r.usage.latency_ms = u.value("latency_ms", 0L);
        r.phase = parse_enum<Phase>(j.at("phase"), parse_phase, "phase");
        if (!j.at("failed_stage").is_null())
            r.failed_stage = parse_enum<Stage>(j["failed_stage"], parse_stage, "failed_stage");
        r.parse_failed = j.value("coverage_label", "") == "PARSE_FAILED";
        r.warnings = j.value("warnings", std::vector<std::string>{});
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::IoError, std::string("record: ") + e.what());
    }
}

GroundingResult verify_grounding(const std::vector<std::string>& texts, const EvidenceSet& evidence, double tau) {
    std::set<std::string> out;
    for (const auto& t : texts) {
        auto w = text::content_word_set(t);
        out.insert(w.begin(), w.end());
    }
    if (out.empty()) return {true, 1.0};
    const auto ev = text::content_word_set(evidence.concatenated_text());
    std::size_t hit = 0;
    for (const auto& w : out) hit += ev.count(w);
    const double overlap = static_cast<double>(hit) / static_cast<double>(out.size());
    return {overlap >= tau, overlap};
}

// ---------------------------------------------------------------------------

std::optional<Strategy> PipelineConfig::effective_strategy() const {
    switch (mode) {
        case PipelineMode::Full: return strategy.value_or(Strategy::Dense);
        case PipelineMode::B1: return std::nullopt;
        case PipelineMode::B2: return Strategy::Dense;
        case PipelineMode::B3: return Strategy::Lexical;
        case PipelineMode::B4: return Strategy::DenseReranked;
        case PipelineMode::B5: return Strategy::Document;
    }
    return std::nullopt;
}

void PipelineConfig::validate() const {
    if (mode != PipelineMode::Full && strategy && strategy != effective_strategy())
        throw Error(ErrorKind::ConfigError, "mode " + std::string(to_string(mode)) + " cannot use strategy " +
                                                std::string(to_string(*strategy)));
    if (mode == PipelineMode::B1 && strategy)
        throw Error(ErrorKind::ConfigError, "mode B1 performs no retrieval");
    if (k == 0) throw Error(ErrorKind::ConfigError, "k must be >= 1");
    if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorKind::ConfigError, "tau must be in [0, 1]");
    if (concurrency == 0) throw Error(ErrorKind::ConfigError, "concurrency must be >= 1");
    if (!(degraded_threshold >= 0.0 && degraded_threshold <= 1.0))
        throw Error(ErrorKind::ConfigError, "degraded threshold must be in [0, 1]");
}

std::string PipelineConfig::to_json() const {
    json j;
    j["mode"] = to_string(mode);
    j["k"] = k;
    const auto s = effective_strategy();
    j["strategy"] = s ? json(to_string(*s)) : json(nullptr);
    j["sector"] = sector ? json(sector->sector) : json(nullptr);
    j["priorities"] = sector ? json(sector->priorities) : json(nullptr);
    j["tau"] = text::round4(tau);
    j["concurrency"] = concurrency;
    j["seed"] = seed;
    j["degraded_threshold"] = text::round4(degraded_threshold);
    j["b1_context_tokens"] = b1_context_tokens;
    j["max_output"] = max_output;
    return j.dump();
}

// ---------------------------------------------------------------------------

struct Pipeline::Ctx {
    AssessmentState state;
    AssessmentRecord record;
    std::vector<TranscriptEntry>* transcript = nullptr;
    std::optional<Stage> failed_stage;
    bool parse_failed = false;
};

Pipeline::Pipeline(const CorpusIndex* index, const EmbeddingProvider* embedder, GenerationBackend& backend,
                   PipelineConfig cfg, CompletionPolicy policy)
    : index_(index), embedder_(embedder), backend_(backend), cfg_(std::move(cfg)), policy_(std::move(policy)) {
    cfg_.validate();
    if (cfg_.mode != PipelineMode::B1) {
        if (!index_ || index_->empty()) throw Error(ErrorKind::EmptyIndex, "retrieval modes need a non-empty index");
        retriever_.emplace(*index_, embedder_);
    }
    if (cfg_.mode == PipelineMode::B1 && index_) {
        std::vector<std::string> tokens;
        std::size_t total = 0;
        for (const auto& doc : index_->doc_ids()) {
            const auto t = index_->document_tokens(doc);
            total += t.size();
            for (const auto& tok : t) {
                if (tokens.size() >= cfg_.b1_context_tokens) break;
                tokens.push_back(tok);
            }
        }
        b1_context_ = text::join(tokens, " ");
        if (total > tokens.size())
            b1_warning_ = "B1 context truncated to " + std::to_string(tokens.size()) + " of " + std::to_string(total) +
                          " corpus tokens";
    }
}

std::optional<std::string> Pipeline::call(Stage stage, const Prompt& prompt, Ctx& ctx, bool retry) const {
    auto req = GenerationRequest::from(stage, prompt, ctx.record.control_id);
    req.max_output = cfg_.max_output;
    ctx.state.touch(ctx.record.control_id);
    try {
        const auto r = complete(backend_, req, policy_);
        ctx.record.usage.add(r);
        if (retry) ++ctx.record.usage.retries;
        if (ctx.transcript) {
            ctx.transcript->push_back({stage, req.prompt_hash(), req.system_prompt, req.user_prompt, r.text,
                                       r.input_tokens, r.output_tokens, r.latency_ms});
        }
        return r.text;
    } catch (const Error& e) {
        ctx.state.warnings.push_back(std::string(to_string(stage)) + " backend error: " + e.what());
        ctx.failed_stage = stage;
        return std::nullopt;
    }
}

template <class T, class Parse>
std::optional<T> Pipeline::call_parsed(Stage stage, const Prompt& prompt, Ctx& ctx, Parse parse) const {
    auto raw = call(stage, prompt, ctx, false);
    if (!raw) return std::nullopt;
    try {
        return parse(*raw);
    } catch (const MalformedOutput&) {
    }
    Prompt again = prompt;
    again.user += kReaskInstruction;
    raw = call(stage, again, ctx, true);
    if (!raw) return std::nullopt;
    try {
        return parse(*raw);
    } catch (const MalformedOutput&) {
        ctx.state.warnings.push_back(text::to_lower(to_string(stage)) + " parse failed");
        ctx.failed_stage = stage;
        ctx.parse_failed = true;
        return std::nullopt;
    }
}

void Pipeline::run_full(const ControlSpec& c, Ctx& ctx) const {
    auto& st = ctx.state;
    const auto& evidence = *st.evidence;
    auto warn_all = [&](const std::vector<std::string>& ws, Stage s) {
        for (const auto& w : ws) st.warnings.push_back(std::string(to_string(s)) + ": " + w);
    };

    auto cov = call_parsed<CoverageJudgment>(Stage::Coverage, coverage_prompt(c, evidence), ctx,
                                             [](const std::string& t) { return parse_coverage(t); });
    if (!cov) return;
    st.coverage = *cov;
    st.advance(Phase::Covered);

    const bool check = !evidence.empty();
    if (!check) st.warnings.push_back("no evidence retrieved; grounding not checked");
    std::vector<std::string> grounded_texts;
    bool grounded = true;

    if (cov->status != CoverageStatus::FullyCovered) {
        const auto gp = gap_prompt(c, *cov, evidence);
        auto parse = [](const std::string& t) { return parse_gaps(t); };
        auto gaps = call_parsed<Parsed<std::vector<Gap>>>(Stage::Gap, gp, ctx, parse);
        if (!gaps) return;
        if (check && !verify_grounding(gap_texts(gaps->value), evidence, cfg_.tau).grounded) {
            Prompt again = gp;
            again.user += kGroundingInstruction;
            auto regen = call_parsed<Parsed<std::vector<Gap>>>(Stage::Gap, again, ctx, parse);
            // the regeneration is a retry, whichever way it turns out
            ++ctx.record.usage.retries;
            if (!regen) return;
            if (verify_grounding(gap_texts(regen->value), evidence, cfg_.tau).grounded) {
                gaps = std::move(regen);
            } else {
                grounded = false;
                st.warnings.push_back("GAP: output not grounded in evidence after regeneration");
            }
        }
        warn_all(gaps->warnings, Stage::Gap);
        st.gaps = gaps->value;
        for (const auto& t : gap_texts(st.gaps)) grounded_texts.push_back(t);
        st.advance(Phase::Gapped);

        auto recs = call_parsed<Parsed<std::vector<Recommendation>>>(
            Stage::Recommendation, recommendation_prompt(c, st.gaps, cfg_.sector), ctx,
            [](const std::string& t) { return parse_recommendations(t); });
        if (!recs) return;
        warn_all(recs->warnings, Stage::Recommendation);
        st.recommendations = recs->value;
        st.advance(Phase::Recommended);
    }

    const auto ep = explanation_prompt(c, *cov, st.gaps, st.recommendations, evidence);
    auto parse = [](const std::string& t) { return parse_explanation(t); };
    auto expl = call_parsed<Explanation>(Stage::Explanation, ep, ctx, parse);
    if (!expl) return;
    if (check && !verify_grounding(explanation_texts(*expl), evidence, cfg_.tau).grounded) {
        Prompt again = ep;
        again.user += kGroundingInstruction;
        auto regen = call_parsed<Explanation>(Stage::Explanation, again, ctx, parse);
        ++ctx.record.usage.retries;
        if (!regen) return;
        if (verify_grounding(explanation_texts(*regen), evidence, cfg_.tau).grounded) {
            expl = std::move(regen);
        } else {
            grounded = false;
            st.warnings.push_back("EXPLANATION: output not grounded in evidence after regeneration");
        }
    }
    st.explanation = *expl;
    for (const auto& t : explanation_texts(*expl)) grounded_texts.push_back(t);
    st.advance(Phase::Explained);

    ctx.record.grounded = grounded;
    ctx.record.grounding_overlap = check ? verify_grounding(grounded_texts, evidence, cfg_.tau).overlap : 1.0;
    st.advance(Phase::Done);
}

void Pipeline::run_joint(const ControlSpec& c, Ctx& ctx) const {
    auto& st = ctx.state;
    auto joint = call_parsed<Parsed<JointAssessment>>(Stage::Joint, joint_prompt(c, *st.evidence), ctx,
                                                      [](const std::string& t) { return parse_joint(t); });
    if (!joint) return;
    for (const auto& w : joint->warnings) st.warnings.push_back("JOINT: " + w);
    st.coverage = joint->value.coverage;
    st.advance(Phase::Covered);
    if (joint->value.coverage.status != CoverageStatus::FullyCovered) {
        st.gaps = joint->value.gaps;
        st.advance(Phase::Gapped);
        st.recommendations = joint->value.recommendations;
        st.advance(Phase::Recommended);
        if (!st.evidence->empty()) {
            const auto g = verify_grounding(gap_texts(st.gaps), *st.evidence, cfg_.tau);
            ctx.record.grounded = g.grounded;
            ctx.record.grounding_overlap = g.overlap;
        }
    }
    st.advance(Phase::Done);
}

void Pipeline::run_coverage_only(const ControlSpec& c, Ctx& ctx, std::string_view context) const {
    auto& st = ctx.state;
    const Prompt p = cfg_.mode == PipelineMode::B1 ? coverage_prompt_with_context(c, context)
                                                   : coverage_prompt(c, *st.evidence);
    auto cov = call_parsed<CoverageJudgment>(Stage::Coverage, p, ctx,
                                             [](const std::string& t) { return parse_coverage(t); });
    if (!cov) return;
    st.coverage = *cov;
    st.advance(Phase::Covered);
    st.advance(Phase::Done);
}

AssessmentRecord Pipeline::assess(const ControlSpec& control, std::vector<TranscriptEntry>* transcript) const {
    Ctx ctx{AssessmentState(control.control_id), {}, transcript, std::nullopt, false};
    auto& rec = ctx.record;
    auto& st = ctx.state;
    rec.control_id = control.control_id;
    rec.control_text = control.control_text;
    rec.mode = cfg_.mode;
    rec.strategy = cfg_.effective_strategy();
    st.touch(control.control_id);

    if (cfg_.mode == PipelineMode::B1) {
        if (!b1_warning_.empty()) st.warnings.push_back(b1_warning_);
        st.evidence = EvidenceSet{control.control_id, {}, Strategy::Lexical, 0};
        run_coverage_only(control, ctx, b1_context_);
    } else {
        const QueryMode qm = (cfg_.mode == PipelineMode::Full || cfg_.mode == PipelineMode::B2)
                                 ? QueryMode::IntentConditioned
                                 : QueryMode::Raw;
        st.evidence = retriever_->retrieve(*rec.strategy, control.control_id, build_query(control, qm), cfg_.k);
        st.advance(Phase::Retrieved);
        rec.evidence = st.evidence->items;
        switch (cfg_.mode) {
            case PipelineMode::Full: run_full(control, ctx); break;
            case PipelineMode::B2: run_joint(control, ctx); break;
            default: run_coverage_only(control, ctx, {}); break;
        }
    }

    if (st.phase() != Phase::Done) {
        st.advance(Phase::Failed);
        rec.failed_stage = ctx.failed_stage;
        rec.parse_failed = ctx.parse_failed;
    }
    rec.phase = st.phase();
    if (st.coverage) {
        rec.label = st.coverage->status;
        rec.confidence = st.coverage->confidence;
        rec.reasoning = st.coverage->reasoning;
    }
    rec.gaps = st.gaps;
    rec.recommendations = st.recommendations;
    rec.explanation = st.explanation;
    rec.warnings = st.warnings;
    if (on_state_done) on_state_done(st);
    return rec;
}

RunResult Pipeline::run(const ControlSet& controls) const {
    const auto started = now_iso8601();
    const auto& list = controls.controls();
    std::vector<std::optional<AssessmentRecord>> slots(list.size());
    std::vector<std::vector<TranscriptEntry>> transcripts(list.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= list.size()) return;
            try {
                slots[i] = assess(list[i], &transcripts[i]);
            } catch (...) {
                std::lock_guard lk(error_mu);
                if (!error) error = std::current_exception();
                next = list.size();
                return;
            }
        }
    };
    const std::size_t n_workers = std::min(cfg_.concurrency, std::max<std::size_t>(list.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    RunResult out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        out.records.push_back(std::move(*slots[i]));
        if (out.records.back().failed()) ++out.failed;
        for (auto& e : transcripts[i]) out.transcript.push_back(std::move(e));
    }

    json m;
    m["config"] = json::parse(cfg_.to_json());
    m["seed"] = cfg_.seed;
    m["backend_id"] = backend_.id();
    m["framework"] = controls.framework_name();
    m["n_controls"] = list.size();
    m["n_failed"] = out.failed;
    json ids = json::array();
    for (const auto& c : list) ids.push_back(c.control_id);
    m["controls"] = ids;
    if (index_) {
        m["index"] = {{"chunks", index_->size()},
                      {"documents", index_->doc_ids().size()},
                      {"embedder_id", index_->embedder_id()},
                      {"chunk_size", index_->params().chunk_size},
                      {"overlap", index_->params().overlap}};
    } else {
        m["index"] = nullptr;
    }
    m["retrieval_calls"] = retrieval_calls();
    m["timestamps"] = {{"started", started}, {"finished", now_iso8601()}};
    out.manifest = m.dump(2) + "\n";
    return out;
}

void check_degraded(const RunResult& run, double threshold) {
    if (run.records.empty()) return;
    const double frac = static_cast<double>(run.failed) / static_cast<double>(run.records.size());
    if (frac > threshold)
        throw Error(ErrorKind::RunDegraded, std::to_string(run.failed) + " of " + std::to_string(run.records.size()) +
                                                " controls failed (threshold " + text::format_fixed(threshold * 100, 1) +
                                                "%)");
}

std::string record_file_name(const std::string& control_id) {
    std::string out;
    for (char c : control_id) {
        const auto u = static_cast<unsigned char>(c);
        out.push_back(std::isalnum(u) || c == '-' || c == '.' || c == '_' ? c : '_');
    }
    if (out.empty() || out[0] == '.') out.insert(out.begin(), '_');
    return out + ".json";
}

void write_run(const RunResult& run, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const auto rdir = dir / "records";
    fs::create_directories(rdir);
    for (const auto& entry : fs::directory_iterator(rdir))
        if (entry.path().extension() == ".json") fs::remove(entry.path());
    for (const auto& r : run.records) {
        std::ofstream out(rdir / record_file_name(r.control_id), std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoError, "cannot write record for " + r.control_id);
        out << record_to_json(r);
    }
    std::ofstream m(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!m) throw Error(ErrorKind::IoError, "cannot write manifest.json");
    m << run.manifest;
    write_transcript(dir / "transcript.jsonl", run.transcript);
}

std::vector<AssessmentRecord> load_records(const std::filesystem::path& records_dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(records_dir)) throw Error(ErrorKind::IoError, "not a directory: " + records_dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(records_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<AssessmentRecord> out;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out.push_back(record_from_json(ss.str()));
    }
    // prefer the run's control order when the manifest is alongside
    const auto manifest = records_dir.parent_path() / "manifest.json";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest, std::ios::binary);
        try {
            const auto m = json::parse(in);
            std::map<std::string, std::size_t> pos;
            for (std::size_t i = 0; i < m.at("controls").size(); ++i) pos[m["controls"][i].get<std::string>()] = i;
            std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
                const auto pa = pos.count(a.control_id) ? pos[a.control_id] : pos.size();
                const auto pb = pos.count(b.control_id) ? pos[b.control_id] : pos.size();
                return pa < pb;
            });
        } catch (const json::exception&) {
        }
    }
    return out;
}

}  // namespace covaudit
