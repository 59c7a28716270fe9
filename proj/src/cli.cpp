#include "covaudit/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "covaudit/backend.hpp"
#include "covaudit/config.hpp"
#include "covaudit/controls.hpp"
#include "covaudit/corpus.hpp"
#include "covaudit/embedding.hpp"
#include "covaudit/evaluation.hpp"
#include "covaudit/orchestrator.hpp"
#include "covaudit/reporting.hpp"
#include "covaudit/retrieval.hpp"
#include "covaudit/text.hpp"
#include "json.hpp"

namespace covaudit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Settings shared by the subcommands: config file values, then flags.
struct Settings {
    std::string config_path;
    ConfigFile file;

    std::string corpus_dir, index_dir, controls, out, framework = kDefaultFramework;
    std::string mode = "full", strategy, sector, priorities;
    std::size_t k = 5, concurrency = 4, chunk_size = 512, overlap = 50, b1_tokens = 12000;
    double tau = 0.05, degraded = 0.10;
    std::uint64_t seed = 0;
    std::string tokenizer = "whitespace", embedder = "hashing-v1-d256";
    BackendConfig backend;
    Pricing pricing;

    void load_file() {
        if (config_path.empty()) return;
        file = ConfigFile::load(config_path);
        auto s = [&](const char* k, std::string& dst) {
            if (auto v = file.get_string(std::string("run.") + k)) dst = *v;
        };
        auto n = [&](const char* k, std::size_t& dst) {
            if (auto v = file.get_int(std::string("run.") + k)) {
                if (*v < 0) throw Error(ErrorKind::ConfigError, std::string("run.") + k + " must be >= 0");
                dst = static_cast<std::size_t>(*v);
            }
        };
        auto d = [&](const char* k, double& dst) {
            if (auto v = file.get_double(std::string("run.") + k)) dst = *v;
        };
        s("corpus_dir", corpus_dir);
        s("index_dir", index_dir);
        s("controls", controls);
        s("out", out);
        s("framework", framework);
        s("mode", mode);
        s("strategy", strategy);
        s("sector", sector);
        s("priorities", priorities);
        s("tokenizer", tokenizer);
        s("embedder", embedder);
        n("k", k);
        n("concurrency", concurrency);
        n("chunk_size", chunk_size);
        n("overlap", overlap);
        n("b1_context_tokens", b1_tokens);
        d("tau", tau);
        d("degraded_threshold", degraded);
        if (auto v = file.get_int("run.seed")) seed = static_cast<std::uint64_t>(*v);
        backend = BackendConfig::from(file);
        if (auto v = file.get_double("pricing.input_price_per_1k")) pricing.input_price_per_1k = *v;
        if (auto v = file.get_double("pricing.output_price_per_1k")) pricing.output_price_per_1k = *v;
    }
};

void write_file(const fs::path& p, const std::string& content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
    out << content;
}

void require(const std::string& value, const char* what) {
    if (value.empty()) throw Error(ErrorKind::ConfigError, std::string("missing required setting: ") + what);
}

PipelineMode mode_of(const std::string& s) {
    const auto m = parse_mode(s);
    if (!m) throw Error(ErrorKind::ConfigError, "unknown mode '" + s + "'");
    return m.value();
}

PipelineConfig pipeline_config(const Settings& s, PipelineMode mode) {
    PipelineConfig cfg;
    cfg.mode = mode;
    cfg.k = s.k;
    if (!s.strategy.empty()) {
        const auto st = parse_strategy(s.strategy);
        if (!st) throw Error(ErrorKind::ConfigError, "unknown strategy '" + s.strategy + "'");
        cfg.strategy = st;
    }
    if (!s.sector.empty()) cfg.sector = SectorContext{s.sector, s.priorities};
    cfg.tau = s.tau;
    cfg.concurrency = s.concurrency;
    cfg.seed = s.seed;
    cfg.degraded_threshold = s.degraded;
    cfg.b1_context_tokens = s.b1_tokens;
    cfg.validate();
    return cfg;
}

struct LoadedIndex {
    CorpusIndex index;
    std::unique_ptr<EmbeddingProvider> embedder;
};

LoadedIndex open_index(const std::string& dir) {
    require(dir, "index directory (--index)");
    LoadedIndex li{load_index(dir), nullptr};
    if (li.index.has_vectors()) {
        li.embedder = make_embedder(li.index.embedder_id());
        if (!li.embedder)
            throw Error(ErrorKind::EmbedderMismatch, "this build cannot embed with '" + li.index.embedder_id() + "'");
    }
    return li;
}

ControlSet open_controls(const Settings& s) {
    require(s.controls, "controls file (--controls)");
    return load_controls(s.controls, s.framework);
}

RunResult assess_mode(const Settings& s, const LoadedIndex& li, const ControlSet& controls, PipelineMode mode,
                      GenerationBackend& backend, RateLimiter& limiter) {
    CompletionPolicy policy;
    policy.retries = s.backend.retries;
    policy.limiter = &limiter;
    Pipeline p(&li.index, li.embedder.get(), backend, pipeline_config(s, mode), policy);
    return p.run(controls);
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Settings& s) {
    require(s.corpus_dir, "corpus directory (--corpus)");
    require(s.index_dir, "index directory (--index)");
    ChunkParams params;
    params.chunk_size = s.chunk_size;
    params.overlap = s.overlap;
    const auto tok = parse_tokenizer_mode(s.tokenizer);
    if (!tok) throw Error(ErrorKind::ConfigError, "unknown tokenizer '" + s.tokenizer + "'");
    params.tokenizer = *tok;
    params.validate();
    std::unique_ptr<EmbeddingProvider> embedder;
    if (s.embedder != "none") {
        embedder = make_embedder(s.embedder);
        if (!embedder) throw Error(ErrorKind::ConfigError, "unknown embedder '" + s.embedder + "'");
    }
    const auto docs = load_corpus_dir(s.corpus_dir);
    const auto index = build_corpus_index(docs, embedder.get(), params);
    save_index(index, s.index_dir);
    std::cout << "indexed " << docs.size() << " documents into " << index.size() << " chunks ("
              << (index.has_vectors() ? index.embedder_id() : std::string("lexical only")) << ")\n";
    return 0;
}

int cmd_assess(const Settings& s) {
    require(s.out, "output directory (--out)");
    const auto controls = open_controls(s);
    const auto mode = mode_of(s.mode);
    const auto cfg = pipeline_config(s, mode);
    const auto li = open_index(s.index_dir);
    auto backend = make_backend(s.backend);
    RateLimiter limiter(s.backend.max_concurrency, s.backend.rpm, s.backend.tpm);
    const auto run = assess_mode(s, li, controls, mode, *backend, limiter);
    write_run(run, s.out);
    std::cout << "assessed " << run.records.size() << " controls (" << run.failed << " failed) -> " << s.out << "\n";
    check_degraded(run, cfg.degraded_threshold);
    return 0;
}

int cmd_report(const Settings& s, const std::string& run_dir, const std::string& backend_kind) {
    require(run_dir, "run directory (--run)");
    const auto controls = open_controls(s);
    const fs::path rdir = fs::is_directory(fs::path(run_dir) / "records") ? fs::path(run_dir) / "records" : fs::path(run_dir);
    // defaults to the run directory
    const fs::path out = s.out.empty() ? rdir.parent_path() : fs::path(s.out);
    const auto records = load_records(rdir);
    std::unique_ptr<GenerationBackend> backend;
    if (backend_kind != "none") backend = make_backend(s.backend);
    CompletionPolicy policy;
    policy.retries = s.backend.retries;
    const auto report = aggregate_report(records, controls, backend.get(), policy);
    write_file(out / "report.json", emit_report(report, ReportFormat::Json));
    write_file(out / "report.md", emit_report(report, ReportFormat::Markdown));
    write_file(out / "efficiency.json", efficiency_summary(records, s.pricing).to_json());
    std::cout << "completeness " << text::format_fixed(report.completeness, 4) << " over " << report.totals.total()
              << " controls -> " << out.string() << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string pred, gold, compare, annotator;
    bool bootstrap = false, weighted = false;
    std::size_t iters = 2000;
    double level = 0.95;
};

int cmd_evaluate(const Settings& s, const EvaluateArgs& a) {
    require(a.pred, "predictions (--pred)");
    require(a.gold, "gold labels (--gold)");
    require(s.out, "output directory (--out)");
    const auto pred = load_predictions(a.pred);
    const auto gold = load_labels_csv(a.gold);
    const auto cm = confusion_matrix(pred, gold);
    const auto m = metrics(cm, a.weighted ? Averaging::Weighted : Averaging::Macro);
    auto j = json::parse(metrics_to_json(cm, m));
    if (!a.compare.empty()) {
        const auto other = load_predictions(a.compare);
        const auto mc = mcnemar(pred, other, gold);
        j["mcnemar"] = {{"b", mc.b},
                        {"c", mc.c},
                        {"p", text::round4(mc.p_value)},
                        {"p_value_raw", mc.p_value},
                        {"test", mc.exact ? "exact" : "chi2_cc"},
                        {"statistic", text::round4(mc.statistic)}};
    }
    if (a.bootstrap) {
        const auto ci = bootstrap_f1_ci(pred, gold, a.iters, a.level, s.seed);
        j["bootstrap"] = {{"macro_f1", text::round4(ci.f1)}, {"lo", text::round4(ci.lo)},
                          {"hi", text::round4(ci.hi)},       {"iters", ci.iters},
                          {"level", text::round4(ci.level)}, {"seed", s.seed}};
    }
    if (!a.annotator.empty()) {
        const auto other = load_labels_csv(a.annotator);
        j["kappa"] = {{"value", text::round4(cohen_kappa(gold, other))}, {"n", gold.size()}};
    }
    write_file(fs::path(s.out) / "metrics.json", j.dump(2) + "\n");
    std::cout << "accuracy " << text::format_fixed(m.accuracy, 4) << ", macro-F1 " << text::format_fixed(m.macro_f1, 4)
              << " over " << m.n << " controls\n";
    return 0;
}

int cmd_retrieval_eval(const Settings& s, const std::string& judgments_path, const std::string& query_mode) {
    require(judgments_path, "judgments file (--judgments)");
    require(s.out, "output directory (--out)");
    const auto controls = open_controls(s);
    const auto li = open_index(s.index_dir);
    const auto judgments = load_judgments(judgments_path);
    Retriever retriever(li.index, li.embedder.get());
    const QueryMode qm = query_mode == "raw" ? QueryMode::Raw : QueryMode::IntentConditioned;
    if (query_mode != "raw" && query_mode != "intent")
        throw Error(ErrorKind::ConfigError, "--query must be 'intent' or 'raw'");

    std::vector<Strategy> strategies;
    if (s.strategy.empty()) {
        strategies = {Strategy::Lexical, Strategy::DenseReranked, Strategy::Document};
        if (li.embedder) strategies.insert(strategies.begin() + 1, Strategy::Dense);
        else std::erase(strategies, Strategy::DenseReranked);
    } else {
        const auto st = parse_strategy(s.strategy);
        if (!st) throw Error(ErrorKind::ConfigError, "unknown strategy '" + s.strategy + "'");
        strategies = {*st};
    }
    json out = json::object();
    for (const auto st : strategies) {
        std::vector<EvidenceSet> rankings;
        for (const auto& id : judgments.control_ids()) {
            const auto* c = controls.find(id);
            if (!c) continue;
            rankings.push_back(retriever.retrieve(st, id, build_query(*c, qm), std::max<std::size_t>(s.k, 3)));
        }
        out[std::string(to_string(st))] = json::parse(evaluate_retrieval(rankings, judgments).to_json());
    }
    out["query_mode"] = query_mode;
    write_file(fs::path(s.out) / "retrieval_metrics.json", out.dump(2) + "\n");
    std::cout << "retrieval metrics for " << judgments.control_ids().size() << " judged controls -> " << s.out << "\n";
    return 0;
}

int cmd_baselines(const Settings& s, const std::string& modes_arg, const std::string& gold_path) {
    require(s.out, "output directory (--out)");
    const auto controls = open_controls(s);
    const auto li = open_index(s.index_dir);
    std::optional<LabeledSet> gold;
    if (!gold_path.empty()) gold = load_labels_csv(gold_path);

    std::ostringstream csv;
    csv << "mode,n,fully_covered,partially_covered,not_covered,failed,completeness,mean_tokens_per_control,"
           "mean_calls";
    if (gold) csv << ",accuracy,macro_f1";
    csv << "\n";
    bool degraded = false;
    for (const auto& name : text::split(modes_arg, ',')) {
        if (text::trim(name).empty()) continue;
        const auto mode = mode_of(text::trim(name));
        auto backend = make_backend(s.backend);
        RateLimiter limiter(s.backend.max_concurrency, s.backend.rpm, s.backend.tpm);
        Settings ms = s;
        if (mode != PipelineMode::Full) ms.strategy.clear();  // baselines fix their own
        const auto run = assess_mode(ms, li, controls, mode, *backend, limiter);
        const auto dir = fs::path(s.out) / text::to_lower(to_string(mode));
        write_run(run, dir);
        const auto rep = aggregate_report(run.records, controls);
        const auto eff = efficiency_summary(run.records, s.pricing);
        csv << to_string(mode) << ',' << rep.totals.total() << ',' << rep.totals.full << ',' << rep.totals.partial
            << ',' << rep.totals.not_covered << ',' << rep.totals.failed << ','
            << text::format_fixed(rep.completeness, 4) << ',' << text::format_fixed(eff.mean_tokens_per_control, 1)
            << ',' << text::format_fixed(eff.mean_calls, 2);
        if (gold) {
            const auto m = metrics(confusion_matrix(labels_from_records(run.records), *gold));
            csv << ',' << text::format_fixed(m.accuracy, 4) << ',' << text::format_fixed(m.macro_f1, 4);
        }
        csv << "\n";
        std::cout << to_string(mode) << ": " << run.records.size() << " records, " << run.failed << " failed\n";
        try {
            check_degraded(run, s.degraded);
        } catch (const Error& e) {
            std::cerr << to_string(mode) << ": " << e.what() << "\n";
            degraded = true;
        }
    }
    write_file(fs::path(s.out) / "comparison.csv", csv.str());
    if (degraded) throw Error(ErrorKind::RunDegraded, "at least one baseline run exceeded the failure threshold");
    return 0;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigError:
        case ErrorKind::SchemaError:
        case ErrorKind::DuplicateControl:
        case ErrorKind::InvalidChunkParams:
        case ErrorKind::TemplateError:
        case ErrorKind::EmbedderMismatch:
        case ErrorKind::EmptyIndex:
        case ErrorKind::DuplicateDocument:
        case ErrorKind::EmptyDocument:
        case ErrorKind::MissingPrediction:
            return 2;
        case ErrorKind::RunDegraded:
            return 3;
        default:
            return 1;
    }
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Control-centric policy compliance assessment", "covaudit"};
    app.require_subcommand(1);
    app.fallthrough();
    Settings s;
    app.add_option("--config", s.config_path, "Run configuration file ([run], [backend], [pricing] sections)");

    // flags recorded separately so they can override the config file afterwards
    Settings f;
    std::string backend_kind, script, transcript, run_dir, judgments, query_mode = "intent",
                                                                       modes = "b1,b2,b3,b4,b5", gold;
    EvaluateArgs ev;
    std::string report_backend = "none";

    auto add_index = [&](CLI::App* c) { c->add_option("--index", f.index_dir, "Index directory"); };
    auto add_controls = [&](CLI::App* c) {
        c->add_option("--controls", f.controls, "Controls JSON file");
        c->add_option("--framework", f.framework, "Framework name");
    };
    auto add_out = [&](CLI::App* c) { c->add_option("--out", f.out, "Output directory"); };
    auto add_backend = [&](CLI::App* c) {
        c->add_option("--backend", backend_kind, "Generation backend: mock | replay | http");
        c->add_option("--script", script, "Mock backend script (JSON)");
        c->add_option("--transcript", transcript, "Replay backend transcript (JSONL)");
    };
    auto add_pipeline = [&](CLI::App* c) {
        c->add_option("--k", f.k, "Evidence items per control");
        c->add_option("--tau", f.tau, "Grounding threshold");
        c->add_option("--sector", f.sector, "Sector name for recommendation tailoring");
        c->add_option("--priorities", f.priorities, "Sector priorities text");
        c->add_option("--concurrency", f.concurrency, "Worker count");
        c->add_option("--seed", f.seed, "Seed recorded in the manifest");
        c->add_option("--strategy", f.strategy, "Retrieval strategy for FULL mode");
    };

    auto* ingest = app.add_subcommand("ingest", "Normalize, chunk, embed and index a policy corpus");
    ingest->add_option("--corpus", f.corpus_dir, "Directory of .txt/.md policy documents");
    add_index(ingest);
    ingest->add_option("--chunk-size", f.chunk_size, "Tokens per chunk");
    ingest->add_option("--overlap", f.overlap, "Overlapping tokens between chunks");
    ingest->add_option("--tokenizer", f.tokenizer, "whitespace | pretokenized");
    ingest->add_option("--embedder", f.embedder, "Embedding provider id, or 'none'");

    auto* assess = app.add_subcommand("assess", "Assess every control and write records");
    add_index(assess);
    add_controls(assess);
    add_out(assess);
    add_backend(assess);
    add_pipeline(assess);
    assess->add_option("--mode", f.mode, "full | b1 | b2 | b3 | b4 | b5");

    auto* report = app.add_subcommand("report", "Aggregate records into report.json, report.md, efficiency.json");
    report->add_option("--run", run_dir, "Run directory (or records directory)");
    add_controls(report);
    add_out(report);
    report->add_option("--summary-backend", report_backend, "Backend for summary/quality prompts, or 'none'");
    add_backend(report);
    report->add_option("--input-price", f.pricing.input_price_per_1k, "Price per 1k input tokens");
    report->add_option("--output-price", f.pricing.output_price_per_1k, "Price per 1k output tokens");

    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold labels");
    evaluate->add_option("--pred", ev.pred, "Run directory, records directory or CSV");
    evaluate->add_option("--gold", ev.gold, "gold.csv");
    evaluate->add_option("--compare", ev.compare, "Second prediction set for McNemar's test");
    evaluate->add_flag("--bootstrap", ev.bootstrap, "Add a percentile bootstrap CI for macro-F1");
    evaluate->add_option("--iters", ev.iters, "Bootstrap iterations");
    evaluate->add_option("--level", ev.level, "Confidence level");
    evaluate->add_option("--annotator", ev.annotator, "Second annotator CSV for Cohen's kappa against gold");
    evaluate->add_flag("--weighted", ev.weighted, "Support-weighted instead of macro averages");
    evaluate->add_option("--seed", f.seed, "Bootstrap seed");
    add_out(evaluate);

    auto* reval = app.add_subcommand("retrieval-eval", "Precision@1/3 and top-1 sufficiency per strategy");
    add_index(reval);
    add_controls(reval);
    add_out(reval);
    reval->add_option("--judgments", judgments, "judgments.csv");
    reval->add_option("--query", query_mode, "intent | raw");
    reval->add_option("--strategy", f.strategy, "Single strategy (default: all available)");
    reval->add_option("--k", f.k, "Ranking depth (at least 3)");

    auto* baselines = app.add_subcommand("baselines", "Run baseline modes and write comparison.csv");
    add_index(baselines);
    add_controls(baselines);
    add_out(baselines);
    add_backend(baselines);
    add_pipeline(baselines);
    baselines->add_option("--modes", modes, "Comma-separated modes");
    baselines->add_option("--gold", gold, "Optional gold.csv for accuracy columns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        s.load_file();
        // flags win over the config file
        auto over = [](CLI::App* c, const char* name, auto& dst, const auto& src) {
            if (const auto* o = c->get_option_no_throw(name); o != nullptr && o->count() > 0) dst = src;
        };
        for (CLI::App* c : app.get_subcommands()) {
            over(c, "--corpus", s.corpus_dir, f.corpus_dir);
            over(c, "--index", s.index_dir, f.index_dir);
            over(c, "--controls", s.controls, f.controls);
            over(c, "--framework", s.framework, f.framework);
            over(c, "--out", s.out, f.out);
            over(c, "--mode", s.mode, f.mode);
            over(c, "--strategy", s.strategy, f.strategy);
            over(c, "--sector", s.sector, f.sector);
            over(c, "--priorities", s.priorities, f.priorities);
            over(c, "--k", s.k, f.k);
            over(c, "--tau", s.tau, f.tau);
            over(c, "--concurrency", s.concurrency, f.concurrency);
            over(c, "--seed", s.seed, f.seed);
            over(c, "--chunk-size", s.chunk_size, f.chunk_size);
            over(c, "--overlap", s.overlap, f.overlap);
            over(c, "--tokenizer", s.tokenizer, f.tokenizer);
            over(c, "--embedder", s.embedder, f.embedder);
            over(c, "--input-price", s.pricing.input_price_per_1k, f.pricing.input_price_per_1k);
            over(c, "--output-price", s.pricing.output_price_per_1k, f.pricing.output_price_per_1k);
            over(c, "--backend", s.backend.kind, backend_kind);
            over(c, "--script", s.backend.script, script);
            over(c, "--transcript", s.backend.transcript, transcript);
        }

        if (ingest->parsed()) return cmd_ingest(s);
        if (assess->parsed()) return cmd_assess(s);
        if (report->parsed()) {
            std::string kind = report_backend;
            if (report->count("--backend") > 0 && report->count("--summary-backend") == 0) kind = backend_kind;
            return cmd_report(s, run_dir, kind);
        }
        if (evaluate->parsed()) return cmd_evaluate(s, ev);
        if (reval->parsed()) return cmd_retrieval_eval(s, judgments, query_mode);
        if (baselines->parsed()) return cmd_baselines(s, modes, gold);
    } catch (const Error& e) {
        std::cerr << "covaudit: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "covaudit: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace covaudit::cli
