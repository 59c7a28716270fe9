#include <sys/wait.h>

#include <cstdlib>

#include "doctest.h"
#include "json.hpp"
#include "support/synth.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

Result cli(const std::string& args, const fs::path& scratch) {
    const auto out = scratch / "stdout.txt";
    const auto err = scratch / "stderr.txt";
    const std::string cmd = std::string("'") + COVAUDIT_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = synth::slurp(out);
    r.err = synth::slurp(err);
    return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::size_t json_files(const fs::path& dir) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".json";
    return n;
}

struct Workspace {
    synth::TempDir dir{"cli"};
    fs::path index = dir.path / "index";
    std::string controls = q(synth::fixture("controls.json"));
    std::string script = q(synth::fixture("mock_script.json"));
    std::string gold = q(synth::fixture("gold.csv"));

    Workspace() {
        const auto r = cli("ingest --corpus " + q(synth::fixture("corpus")) + " --index " + q(index), dir.path);
        REQUIRE_MESSAGE(r.code == 0, r.err);
    }

    Result assess(const fs::path& out, const std::string& extra = "") {
        return cli("assess --index " + q(index) + " --controls " + controls + " --backend mock --script " + script +
                       " --out " + q(out) + " " + extra,
                   dir.path);
    }
};

}  // namespace

TEST_CASE("help and usage errors") {
    synth::TempDir d("cli-help");
    CHECK(cli("--help", d.path).code == 0);
    CHECK(cli("assess --help", d.path).code == 0);
    CHECK(cli("", d.path).code == 2);
    CHECK(cli("frobnicate", d.path).code == 2);
    CHECK(cli("assess --k notanumber", d.path).code == 2);
}

TEST_CASE("ingest, assess, report") {
    Workspace w;
    CHECK(fs::exists(w.index / "chunks.jsonl"));
    const auto run = w.dir.path / "run";
    const auto r = w.assess(run);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(json_files(run / "records") == 25);
    CHECK(fs::exists(run / "manifest.json"));
    CHECK(fs::exists(run / "transcript.jsonl"));
    const auto m = json::parse(synth::slurp(run / "manifest.json"));
    CHECK(m["n_controls"] == 25);
    CHECK(m["n_failed"] == 0);

    const auto rep = cli("report --run " + q(run) + " --controls " + w.controls, w.dir.path);
    REQUIRE_MESSAGE(rep.code == 0, rep.err);
    const auto j = json::parse(synth::slurp(run / "report.json"));
    CHECK(j["totals"]["total"] == 25);
    CHECK(j["totals"]["fully_covered"] == 8);
    CHECK(j["totals"]["partially_covered"] == 9);
    CHECK(j["totals"]["not_covered"] == 8);
    CHECK(j["completeness"] == 0.5);
    CHECK(synth::slurp(run / "report.md").find("Executive Summary (templated)") != std::string::npos);
    const auto eff = json::parse(synth::slurp(run / "efficiency.json"));
    CHECK(eff["n_counted"] == 25);

    SUBCASE("same inputs give identical records") {
        const auto again = w.dir.path / "again";
        REQUIRE(w.assess(again, "--concurrency 1").code == 0);
        for (const auto& e : fs::directory_iterator(run / "records"))
            CHECK(synth::slurp(e.path()) == synth::slurp(again / "records" / e.path().filename()));
    }
}

TEST_CASE("evaluate with comparison and bootstrap") {
    Workspace w;
    const auto run = w.dir.path / "run";
    REQUIRE(w.assess(run).code == 0);
    const auto other = w.dir.path / "other";
    REQUIRE(w.assess(other, "--mode b3").code == 0);
    const auto out = w.dir.path / "eval";
    const auto r = cli("evaluate --pred " + q(run) + " --gold " + w.gold + " --compare " + q(other) +
                           " --bootstrap --iters 300 --seed 5 --annotator " + w.gold + " --out " + q(out),
                       w.dir.path);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto j = json::parse(synth::slurp(out / "metrics.json"));
    CHECK(j["n"] == 25);
    // gold differs from the script on three controls
    CHECK(j["accuracy"] == 0.88);
    REQUIRE(j.contains("mcnemar"));
    CHECK(j["mcnemar"].contains("b"));
    CHECK(j["mcnemar"].contains("c"));
    CHECK(j["mcnemar"]["p"].get<double>() > 0.0);
    CHECK(j["mcnemar"]["p"].get<double>() <= 1.0);
    CHECK(j["bootstrap"]["iters"] == 300);
    CHECK(j["bootstrap"]["lo"].get<double>() <= j["bootstrap"]["hi"].get<double>());
    CHECK(j["kappa"]["value"] == 1.0);

    const auto csv = w.dir.path / "pred.csv";
    synth::spit(csv, "control_id,label\nAC-1,FULLY_COVERED\n");
    const auto miss = cli("evaluate --pred " + q(csv) + " --gold " + w.gold + " --out " + q(out), w.dir.path);
    CHECK(miss.code == 2);
    CHECK(miss.err.find("covaudit:") != std::string::npos);
}

TEST_CASE("retrieval-eval and baselines") {
    Workspace w;
    const auto out = w.dir.path / "reval";
    const auto r = cli("retrieval-eval --index " + q(w.index) + " --controls " + w.controls + " --judgments " +
                           q(synth::fixture("judgments.csv")) + " --out " + q(out),
                       w.dir.path);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto j = json::parse(synth::slurp(out / "retrieval_metrics.json"));
    for (const char* s : {"LEXICAL", "DENSE", "DENSE_RERANKED", "DOCUMENT"}) {
        REQUIRE(j.contains(s));
        CHECK(j[s]["precision_at_1"].get<double>() >= 0.0);
        CHECK(j[s]["precision_at_1"].get<double>() <= 1.0);
        CHECK(j[s]["precision_at_3"].get<double>() <= 1.0);
    }

    const auto bl = w.dir.path / "bl";
    const auto b = cli("baselines --index " + q(w.index) + " --controls " + w.controls + " --backend mock --script " +
                           w.script + " --modes b1,b3,b5 --gold " + w.gold + " --out " + q(bl),
                       w.dir.path);
    REQUIRE_MESSAGE(b.code == 0, b.err);
    const auto csv = synth::slurp(bl / "comparison.csv");
    CHECK(csv.rfind("mode,", 0) == 0);
    CHECK(csv.find("\nB1,25,") != std::string::npos);
    CHECK(csv.find("\nB3,25,") != std::string::npos);
    CHECK(csv.find("\nB5,25,") != std::string::npos);
    CHECK(csv.find("\nB2,") == std::string::npos);
    CHECK(json_files(bl / "b1" / "records") == 25);
    CHECK(json::parse(synth::slurp(bl / "b1" / "manifest.json"))["retrieval_calls"] == 0);
}

TEST_CASE("config file and error exit codes") {
    Workspace w;
    SUBCASE("schema error names the record") {
        const auto bad = w.dir.path / "bad.json";
        synth::spit(bad, R"([{"control_id":"X-1","control_name":"n","family":"X","control_text":"t","intent":"i",
            "expected_elements":["a"]},{"control_id":"X-2","family":"X","control_text":"t","intent":"i",
            "expected_elements":["a"]}])");
        const auto r = cli("assess --index " + q(w.index) + " --controls " + q(bad) + " --backend mock --out " +
                               q(w.dir.path / "r"),
                           w.dir.path);
        CHECK(r.code == 2);
        CHECK(r.err.find("record 1") != std::string::npos);
        CHECK(r.err.find("control_name") != std::string::npos);
    }
    SUBCASE("bad option values") {
        CHECK(w.assess(w.dir.path / "r", "--mode b3 --strategy DENSE").code == 2);
        CHECK(w.assess(w.dir.path / "r", "--k 0").code == 2);
        CHECK(w.assess(w.dir.path / "r", "--mode b9").code == 2);
        CHECK(cli("ingest --corpus " + q(synth::fixture("corpus")) + " --index " + q(w.dir.path / "i2") +
                      " --chunk-size 10 --overlap 10",
                  w.dir.path)
                  .code == 2);
        CHECK(cli("assess --index " + q(w.dir.path / "missing") + " --controls " + w.controls +
                      " --backend mock --out " + q(w.dir.path / "r"),
                  w.dir.path)
                  .code != 0);
    }
    SUBCASE("config supplies the run settings") {
        const auto cfg = w.dir.path / "run.toml";
        synth::spit(cfg, "[run]\nindex_dir = \"" + w.index.string() + "\"\ncontrols = \"" +
                             synth::fixture("controls.json") + "\"\nout = \"" + (w.dir.path / "cfgrun").string() +
                             "\"\nseed = 11\nk = 3\n\n[backend]\nkind = \"mock\"\nscript = \"" +
                             synth::fixture("mock_script.json") + "\"\n");
        const auto r = cli("assess --config " + q(cfg), w.dir.path);
        REQUIRE_MESSAGE(r.code == 0, r.err);
        const auto m = json::parse(synth::slurp(w.dir.path / "cfgrun" / "manifest.json"));
        CHECK(m["seed"] == 11);
        CHECK(m["config"]["k"] == 3);

        const auto flag = cli("assess --config " + q(cfg) + " --k 2 --out " + q(w.dir.path / "flagrun"), w.dir.path);
        REQUIRE_MESSAGE(flag.code == 0, flag.err);
        CHECK(json::parse(synth::slurp(w.dir.path / "flagrun" / "manifest.json"))["config"]["k"] == 2);
    }
}
