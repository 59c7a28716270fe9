#include "covaudit/backend.hpp"

#include "httplib.h"
#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "covaudit/text.hpp"

namespace covaudit {

using nlohmann::json;

GenerationRequest GenerationRequest::from(Stage stage, const Prompt& p, std::string control_id) {
    GenerationRequest r;
    r.stage = stage;
    r.system_prompt = p.system;
    r.user_prompt = p.user;
    r.control_id = std::move(control_id);
    return r;
}

std::string GenerationRequest::prompt_hash() const { return text::sha256_hex(system_prompt + "\n\n" + user_prompt); }

// ---------------------------------------------------------------------------
// Mock

namespace {

std::vector<std::string> string_list(const json& v, const std::string& where) {
    if (v.is_string()) return {v.get<std::string>()};
    if (v.is_array() && !v.empty()) {
        std::vector<std::string> out;
        for (const auto& e : v) {
            if (!e.is_string()) throw Error(ErrorKind::ConfigError, "mock script: non-string response at " + where);
            out.push_back(e.get<std::string>());
        }
        return out;
    }
    throw Error(ErrorKind::ConfigError, "mock script: expected string or non-empty list at " + where);
}

std::map<Stage, std::vector<std::string>> stage_map(const json& obj, const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorKind::ConfigError, "mock script: expected object at " + where);
    std::map<Stage, std::vector<std::string>> out;
    for (const auto& [k, v] : obj.items()) {
        const auto stage = parse_stage(k);
        if (!stage) throw Error(ErrorKind::ConfigError, "mock script: unknown stage '" + k + "' at " + where);
        out[*stage] = string_list(v, where + "." + k);
    }
    return out;
}

/// Text following the last of `markers` in `prompt`, without excerpt headers.
std::string section_after(std::string_view prompt, std::initializer_list<std::string_view> markers) {
    std::size_t best = std::string_view::npos;
    std::size_t len = 0;
    for (auto m : markers) {
        const auto p = prompt.rfind(m);
        if (p != std::string_view::npos && (best == std::string_view::npos || p > best)) {
            best = p;
            len = m.size();
        }
    }
    if (best == std::string_view::npos) return {};
    std::string out;
    for (const auto& line : text::split(prompt.substr(best + len), '\n')) {
        if (line.starts_with("[Excerpt ")) continue;
        out += line;
        out += '\n';
    }
    return out;
}

std::vector<std::string> list_after(std::string_view prompt, std::string_view marker) {
    std::vector<std::string> out;
    const auto p = prompt.find(marker);
    if (p == std::string_view::npos) return out;
    for (const auto& line : text::split(prompt.substr(p + marker.size()), '\n')) {
        if (line.empty() && !out.empty()) break;
        if (line.starts_with("- ")) out.push_back(line.substr(2));
    }
    return out;
}

std::string line_value(std::string_view prompt, std::string_view key) {
    const auto p = prompt.find(key);
    if (p == std::string_view::npos) return {};
    const auto e = prompt.find('\n', p);
    return text::trim(prompt.substr(p + key.size(), e == std::string_view::npos ? e : e - p - key.size()));
}

std::string words(const std::vector<std::string>& w, std::size_t from, std::size_t n) {
    std::vector<std::string> part;
    for (std::size_t i = from; i < w.size() && part.size() < n; ++i) part.push_back(w[i]);
    return text::join(part, " ");
}

std::string no_commas(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ' ';
    return text::trim(s);
}

struct Synth {
    std::uint64_t h;
    std::vector<std::string> ev;       // evidence content words
    std::vector<std::string> expected;

    std::string coverage(CoverageStatus st) const {
        CoverageJudgment c;
        c.status = st;
        c.confidence = 0.6 + static_cast<double>(h % 4) / 10.0;
        c.reasoning = ev.empty() ? std::string("No policy evidence addresses the control requirement.")
                                 : "The policy evidence states " + words(ev, 0, 30) + ".";
        return format_coverage(c);
    }

    std::vector<Gap> gaps() const {
        Gap g;
        g.gap_type = kAllGapTypes[h % kAllGapTypes.size()];
        g.severity = static_cast<Level>((h >> 8) % 3);
        g.explanation = ev.empty() ? std::string("The policy does not address the control requirement.")
                                   : "The policy covers " + words(ev, 0, 12) + " but leaves " + words(ev, 12, 8) +
                                         " underspecified.";
        for (std::size_t i = 0; i < expected.size() && i < 2; ++i) g.affected_elements.push_back(no_commas(expected[i]));
        if (g.affected_elements.empty()) g.affected_elements.push_back("policy statement");
        return {g};
    }

    std::vector<Recommendation> recs(std::size_t n) const {
        std::vector<Recommendation> out;
        for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i) {
            Recommendation r;
            const std::string elem = i < expected.size() ? expected[i] : std::string("the control requirement");
            r.title = "Define " + no_commas(elem);
            r.priority = static_cast<Level>((h >> (12 + i)) % 3);
            r.description = "Add a policy statement that defines " + elem + ".";
            r.rationale = "Closes the identified gap.";
            r.implementation_guidance = "Assign an owner and a review cadence for " + elem + ".";
            out.push_back(std::move(r));
        }
        return out;
    }
};

}  // namespace

MockScript MockScript::parse(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ConfigError, std::string("mock script: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::ConfigError, "mock script: top level must be an object");
    MockScript s;
    if (j.contains("by_control")) {
        if (!j["by_control"].is_object()) throw Error(ErrorKind::ConfigError, "mock script: by_control must be an object");
        for (const auto& [id, v] : j["by_control"].items()) s.by_control[id] = stage_map(v, "by_control." + id);
    }
    if (j.contains("by_stage")) s.by_stage = stage_map(j["by_stage"], "by_stage");
    if (j.contains("labels")) {
        if (!j["labels"].is_object()) throw Error(ErrorKind::ConfigError, "mock script: labels must be an object");
        for (const auto& [id, v] : j["labels"].items()) {
            const auto st = v.is_string() ? parse_status(v.get<std::string>()) : std::nullopt;
            if (!st) throw Error(ErrorKind::ConfigError, "mock script: bad label for " + id);
            s.labels[id] = *st;
        }
    }
    return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read mock script " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

CoverageStatus default_mock_label(std::string_view control_id) {
    return kAllStatuses[text::fnv1a64(control_id) % kAllStatuses.size()];
}

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {}

std::size_t MockBackend::calls() const {
    std::lock_guard lk(mu_);
    return calls_;
}

GenerationResult MockBackend::generate(const GenerationRequest& req) {
    const std::vector<std::string>* scripted = nullptr;
    if (auto c = script_.by_control.find(req.control_id); c != script_.by_control.end()) {
        if (auto s = c->second.find(req.stage); s != c->second.end()) scripted = &s->second;
    }
    if (!scripted) {
        if (auto s = script_.by_stage.find(req.stage); s != script_.by_stage.end()) scripted = &s->second;
    }
    GenerationResult r;
    {
        std::lock_guard lk(mu_);
        ++calls_;
        if (scripted) {
            auto& n = consumed_[{req.control_id, req.stage}];
            r.text = (*scripted)[std::min(n, scripted->size() - 1)];
            ++n;
        }
    }
    if (!scripted) r.text = synthesize(req);
    r.input_tokens = static_cast<long>(text::count_whitespace_tokens(req.system_prompt) +
                                       text::count_whitespace_tokens(req.user_prompt));
    r.output_tokens = static_cast<long>(text::count_whitespace_tokens(r.text));
    r.latency_ms = 0;
    r.backend_id = id();
    return r;
}

std::string MockBackend::synthesize(const GenerationRequest& req) const {
    const std::string& p = req.user_prompt;
    Synth s;
    s.h = text::fnv1a64(req.control_id + "|" + std::string(to_string(req.stage)));
    const auto label = [&] {
        auto it = script_.labels.find(req.control_id);
        return it != script_.labels.end() ? it->second : default_mock_label(req.control_id);
    }();
    auto evidence_words = [&](std::initializer_list<std::string_view> markers) {
        auto sec = section_after(p, markers);
        if (sec.find(kNoEvidenceText) != std::string::npos) return std::vector<std::string>{};
        return text::content_words(sec);
    };

    switch (req.stage) {
        case Stage::Coverage:
            s.ev = evidence_words({"ORGANIZATIONAL POLICY EVIDENCE:\n"});
            return s.coverage(label);
        case Stage::Gap:
            s.ev = evidence_words({"POLICY EVIDENCE FOUND:\n"});
            s.expected = list_after(p, "EXPECTED ELEMENTS:\n");
            return format_gaps(s.gaps());
        case Stage::Recommendation: {
            s.expected = list_after(p, "EXPECTED POLICY ELEMENTS:\n");
            std::size_t n = 0;
            const auto g = p.find("IDENTIFIED GAPS:\n");
            if (g != std::string::npos)
                for (const auto& line : text::split(std::string_view(p).substr(g), '\n'))
                    if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) ++n;
            return format_recommendations(s.recs(n));
        }
        case Stage::Explanation: {
            s.ev = evidence_words({"EVIDENCE FOUND:\n"});
            Explanation e;
            const std::string status = line_value(p, "COVERAGE STATUS: ");
            e.summary = "The control is assessed as " + status + ". " +
                        (s.ev.empty() ? std::string("No supporting policy text was found.")
                                      : "The policy addresses " + words(s.ev, 0, 15) + ".");
            e.gap_explanation = status == "FULLY_COVERED" ? std::string("No gaps were identified.")
                                                          : "Coverage of " + words(s.ev, 15, 10) + " is incomplete.";
            e.impact = "Incomplete policy coverage weakens " + words(s.ev, 25, 6) + ".";
            e.recommendation_rationale = "The recommendations close the identified gaps.";
            e.evidence_citations = words(s.ev, 0, 20);
            return format_explanation(e);
        }
        case Stage::ReportSummary: {
            const std::string total = line_value(p, "TOTAL CONTROLS EVALUATED: ");
            return "This audit assessed " + total + " controls of " + line_value(p, "FRAMEWORK: ") +
                   " against the organizational policy corpus using retrieved policy evidence.\n\n"
                   "Coverage: fully covered " + line_value(p, "- Fully Covered: ") + "; partially covered " +
                   line_value(p, "- Partially Covered: ") + "; not covered " + line_value(p, "- Not Covered: ") +
                   ".\n\nRemediation should start with the high-severity gaps listed in this report.";
        }
        case Stage::Quality: {
            QualityScores q;
            q.clarity = 0.5 + static_cast<double>(s.h % 40) / 100.0;
            q.actionability = 0.4 + static_cast<double>((s.h >> 8) % 40) / 100.0;
            q.governance_maturity = 0.3 + static_cast<double>((s.h >> 16) % 40) / 100.0;
            q.insights = {"Policies state objectives clearly.", "Review cadences are often unspecified.",
                          "Ownership of controls is inconsistently assigned."};
            return format_quality(q);
        }
        case Stage::Joint: {
            s.ev = evidence_words({"ORGANIZATIONAL POLICY EVIDENCE:\n"});
            s.expected = list_after(p, "EXPECTED POLICY ELEMENTS:\n");
            JointAssessment j;
            j.coverage = parse_coverage(s.coverage(label));
            if (label != CoverageStatus::FullyCovered) {
                j.gaps = s.gaps();
                j.recommendations = s.recs(1);
            }
            return format_joint(j);
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Transcript and replay

std::string TranscriptEntry::to_json_line() const {
    json j;
    j["stage"] = std::string(to_string(stage));
    j["prompt_sha256"] = prompt_sha256;
    j["system"] = system;
    j["user"] = user;
    j["response"] = response;
    j["input_tokens"] = input_tokens;
    j["output_tokens"] = output_tokens;
    j["latency_ms"] = latency_ms;
    return j.dump();
}

TranscriptEntry TranscriptEntry::from_json_line(std::string_view line) {
    try {
        const auto j = json::parse(line);
        TranscriptEntry e;
        const auto stage = parse_stage(j.at("stage").get<std::string>());
        if (!stage) throw Error(ErrorKind::IoError, "transcript: unknown stage");
        e.stage = *stage;
        e.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
        e.system = j.value("system", "");
        e.user = j.value("user", "");
        e.response = j.at("response").get<std::string>();
        e.input_tokens = j.value("input_tokens", 0L);
        e.output_tokens = j.value("output_tokens", 0L);
        e.latency_ms = j.value("latency_ms", 0L);
        return e;
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::IoError, std::string("transcript: ") + ex.what());
    }
}

std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read transcript " + path.string());
    std::vector<TranscriptEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        out.push_back(TranscriptEntry::from_json_line(line));
    }
    return out;
}

void write_transcript(const std::filesystem::path& path, const std::vector<TranscriptEntry>& entries) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write transcript " + path.string());
    for (const auto& e : entries) out << e.to_json_line() << '\n';
}

ReplayBackend::ReplayBackend(const std::vector<TranscriptEntry>& entries) {
    for (const auto& e : entries) by_hash_.emplace(e.prompt_sha256, e);
}

std::unique_ptr<ReplayBackend> ReplayBackend::load(const std::filesystem::path& path) {
    return std::make_unique<ReplayBackend>(load_transcript(path));
}

GenerationResult ReplayBackend::generate(const GenerationRequest& req) {
    const auto h = req.prompt_hash();
    const auto it = by_hash_.find(h);
    if (it == by_hash_.end())
        throw Error(ErrorKind::ReplayMiss, "no transcript entry for prompt " + h + " (" +
                                               std::string(to_string(req.stage)) + ")");
    GenerationResult r;
    r.text = it->second.response;
    r.input_tokens = it->second.input_tokens;
    r.output_tokens = it->second.output_tokens;
    r.latency_ms = 0;
    r.backend_id = id();
    r.replayed = true;
    return r;
}

// ---------------------------------------------------------------------------
// HTTP

HttpBackend::HttpBackend(std::string endpoint, std::string model, std::string api_key, int timeout_s)
    : model_(std::move(model)), api_key_(std::move(api_key)), timeout_s_(timeout_s) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorKind::ConfigError, "endpoint needs a scheme: " + endpoint);
    const auto path_start = endpoint.find('/', scheme_end + 3);
    scheme_host_ = endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/v1/chat/completions" : endpoint.substr(path_start);
}

std::string HttpBackend::request_body(const GenerationRequest& req) const {
    json j;
    j["model"] = model_;
    j["messages"] = json::array({{{"role", "system"}, {"content", req.system_prompt}},
                                 {{"role", "user"}, {"content", req.user_prompt}}});
    j["temperature"] = req.temperature;
    j["top_p"] = req.top_p;
    j["max_tokens"] = req.max_output;
    return j.dump();
}

GenerationResult HttpBackend::parse_response(std::string_view body) {
    GenerationResult r;
    try {
        const auto j = json::parse(body);
        r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage") && j["usage"].is_object()) {
            r.input_tokens = j["usage"].value("prompt_tokens", -1L);
            r.output_tokens = j["usage"].value("completion_tokens", -1L);
        }
    } catch (const json::exception& e) {
        throw TransientBackendError(std::string("unparseable completion response: ") + e.what());
    }
    return r;
}

GenerationResult HttpBackend::generate(const GenerationRequest& req) {
    httplib::Client cli(scheme_host_);
    cli.set_connection_timeout(timeout_s_);
    cli.set_read_timeout(timeout_s_);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    const auto start = std::chrono::steady_clock::now();
    auto res = cli.Post(path_, headers, request_body(req), "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (!res) throw TransientBackendError("transport error: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransientBackendError("HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw Error(ErrorKind::BackendUnavailable, "HTTP " + std::to_string(res->status) + ": " +
                                                       text::truncate_chars(res->body, 300));
    auto r = parse_response(res->body);
    r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    r.backend_id = id();
    return r;
}

// ---------------------------------------------------------------------------
// Admission and budget

RateLimiter::RateLimiter(std::size_t max_concurrency, std::size_t rpm, std::size_t tpm, Clock clock, Sleeper sleeper)
    : max_concurrency_(max_concurrency), rpm_(rpm), tpm_(tpm), clock_(std::move(clock)), sleeper_(std::move(sleeper)) {
    if (!clock_) {
        clock_ = [] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
        };
    }
    if (!sleeper_) sleeper_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
}

void RateLimiter::prune(double now) const {
    while (!window_.empty() && window_.front().first <= now - 60.0) window_.pop_front();
}

double RateLimiter::wait_time(double now, std::size_t tokens) const {
    std::lock_guard lk(mu_);
    prune(now);
    double wait = 0.0;
    if (rpm_ > 0 && window_.size() >= rpm_) {
        wait = std::max(wait, window_[window_.size() - rpm_].first + 60.0 - now);
    }
    if (tpm_ > 0 && !window_.empty()) {
        std::size_t sum = tokens;
        for (const auto& e : window_) sum += e.second;
        // drop oldest entries until the new request fits
        for (std::size_t i = 0; i < window_.size() && sum > tpm_; ++i) {
            sum -= window_[i].second;
            wait = std::max(wait, window_[i].first + 60.0 - now);
        }
    }
    return std::max(wait, 0.0);
}

void RateLimiter::acquire(std::size_t tokens) {
    {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return max_concurrency_ == 0 || in_flight_ < max_concurrency_; });
        ++in_flight_;
    }
    for (;;) {
        const double now = clock_();
        const double w = wait_time(now, tokens);
        if (w <= 0.0) {
            std::lock_guard lk(mu_);
            window_.emplace_back(now, tokens);
            return;
        }
        sleeper_(w);
    }
}

void RateLimiter::release() {
    {
        std::lock_guard lk(mu_);
        if (in_flight_ > 0) --in_flight_;
    }
    cv_.notify_one();
}

std::size_t RateLimiter::in_flight() const {
    std::lock_guard lk(mu_);
    return in_flight_;
}

void TokenBudget::check(std::size_t estimate) const {
    if (limit_ == 0) return;
    std::lock_guard lk(mu_);
    if (used_ + estimate > limit_)
        throw Error(ErrorKind::TokenBudgetExceeded, "token budget " + std::to_string(limit_) + " exceeded (used " +
                                                        std::to_string(used_) + ", next request ~" +
                                                        std::to_string(estimate) + ")");
}

void TokenBudget::charge(std::size_t tokens) {
    std::lock_guard lk(mu_);
    used_ += tokens;
}

std::size_t TokenBudget::used() const {
    std::lock_guard lk(mu_);
    return used_;
}

GenerationResult complete(GenerationBackend& backend, const GenerationRequest& req, const CompletionPolicy& policy) {
    const std::size_t estimate =
        text::count_whitespace_tokens(req.system_prompt) + text::count_whitespace_tokens(req.user_prompt);
    if (policy.budget) policy.budget->check(estimate);
    const auto sleep = policy.sleep ? policy.sleep
                                    : [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };

    for (int attempt = 0;; ++attempt) {
        if (policy.limiter) policy.limiter->acquire(estimate);
        struct Release {
            RateLimiter* l;
            ~Release() {
                if (l) l->release();
            }
        } guard{policy.limiter};
        try {
            auto r = backend.generate(req);
            if (r.input_tokens < 0) r.input_tokens = static_cast<long>(estimate);
            if (r.output_tokens < 0) r.output_tokens = static_cast<long>(text::count_whitespace_tokens(r.text));
            if (r.latency_ms < 0) r.latency_ms = 0;
            if (r.backend_id.empty()) r.backend_id = backend.id();
            if (policy.budget) policy.budget->charge(static_cast<std::size_t>(r.input_tokens + r.output_tokens));
            return r;
        } catch (const TransientBackendError& e) {
            if (attempt >= policy.retries)
                throw Error(ErrorKind::BackendUnavailable, "gave up after " + std::to_string(attempt + 1) +
                                                               " attempt(s): " + e.what());
            sleep(policy.backoff_s * std::pow(2.0, attempt));
        }
    }
}

BackendConfig BackendConfig::from(const ConfigFile& cfg) {
    auto str = [&](const std::string& k) {
        if (auto v = cfg.get_string("backend." + k)) return v;
        return cfg.get_string(k);
    };
    auto num = [&](const std::string& k) {
        if (auto v = cfg.get_int("backend." + k)) return v;
        return cfg.get_int(k);
    };
    BackendConfig b;
    if (auto v = str("kind")) b.kind = *v;
    if (auto v = str("endpoint")) b.endpoint = *v;
    if (auto v = str("model")) b.model = *v;
    if (auto v = str("api_key_env")) b.api_key_env = *v;
    if (auto v = str("script")) b.script = *v;
    if (auto v = str("transcript")) b.transcript = *v;
    auto nonneg = [](long long v, const char* k) {
        if (v < 0) throw Error(ErrorKind::ConfigError, std::string("backend.") + k + " must be >= 0");
        return v;
    };
    if (auto v = num("max_concurrency")) b.max_concurrency = static_cast<std::size_t>(nonneg(*v, "max_concurrency"));
    if (auto v = num("rpm")) b.rpm = static_cast<std::size_t>(nonneg(*v, "rpm"));
    if (auto v = num("tpm")) b.tpm = static_cast<std::size_t>(nonneg(*v, "tpm"));
    if (auto v = num("retries")) b.retries = static_cast<int>(nonneg(*v, "retries"));
    return b;
}

std::unique_ptr<GenerationBackend> make_backend(const BackendConfig& cfg) {
    if (cfg.kind == "mock") {
        return std::make_unique<MockBackend>(cfg.script.empty() ? MockScript{} : MockScript::load(cfg.script));
    }
    if (cfg.kind == "replay") {
        if (cfg.transcript.empty()) throw Error(ErrorKind::ConfigError, "replay backend needs backend.transcript");
        return ReplayBackend::load(cfg.transcript);
    }
    if (cfg.kind == "http") {
        if (cfg.endpoint.empty() || cfg.model.empty())
            throw Error(ErrorKind::ConfigError, "http backend needs backend.endpoint and backend.model");
        std::string key;
        if (!cfg.api_key_env.empty()) {
            const char* v = std::getenv(cfg.api_key_env.c_str());
            if (!v) throw Error(ErrorKind::ConfigError, "environment variable " + cfg.api_key_env + " is not set");
            key = v;
        }
        return std::make_unique<HttpBackend>(cfg.endpoint, cfg.model, key);
    }
    throw Error(ErrorKind::ConfigError, "unknown backend kind '" + cfg.kind + "'");
}

}  // namespace covaudit
