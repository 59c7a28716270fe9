#include <random>

#include "covaudit/corpus.hpp"
#include "covaudit/embedding.hpp"
#include "covaudit/error.hpp"
#include "covaudit/text.hpp"
#include "doctest.h"
#include "support/synth.hpp"

using namespace covaudit;

namespace {

struct StubEmbedder final : EmbeddingProvider {
    std::size_t dim = 8;
    std::string fail_on;
    std::string id() const override { return "stub-d" + std::to_string(dim); }
    std::size_t dimension() const override { return dim; }
    std::vector<float> embed(std::string_view t) const override {
        if (!fail_on.empty() && t.find(fail_on) != std::string_view::npos) throw std::runtime_error("stub failure");
        std::vector<float> v(dim, 0.0f);
        v[text::fnv1a64(t) % dim] = 1.0f;
        return v;
    }
};

PolicyDocument doc_of_tokens(const std::string& id, std::size_t n) {
    std::string body;
    for (std::size_t i = 0; i < n; ++i) body += (i ? " w" : "w") + std::to_string(i);
    return make_document(id, body);
}

}  // namespace

TEST_CASE("normalize: hyphen rejoin") { CHECK(normalize_text("Access con-\ntrol policy") == "Access control policy"); }

TEST_CASE("normalize: lone page-number line is removed") {
    const std::string raw = "first paragraph text.\n\nPage 4\n\nsecond paragraph text.";
    CHECK(normalize_text(raw) == "first paragraph text.\n\nsecond paragraph text.");
}

TEST_CASE("normalize: only page numbers -> EmptyDocument") {
    try {
        normalize_text("Page 1\nPage 2");
        FAIL("expected EmptyDocument");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyDocument);
    }
}

TEST_CASE("normalize: running headers on three pages are dropped") {
    const std::string raw =
        "ACME Confidential\nalpha text.\f"
        "ACME Confidential\nbeta text.\f"
        "ACME Confidential\ngamma text.";
    const auto n = normalize_document(raw);
    CHECK(n.text.find("ACME") == std::string::npos);
    CHECK(n.text.find("alpha") != std::string::npos);
    REQUIRE(n.page_marks.size() == 3);
    CHECK(n.page_marks[2].page == 3);
}

TEST_CASE("normalize: wrapped lines join, list items stay separate") {
    const std::string raw = "body text that\nwraps here.\n- item one\n- item two";
    CHECK(normalize_text(raw) == "body text that wraps here.\n- item one\n- item two");
}

TEST_CASE("normalize is idempotent on noisy random documents") {
    std::mt19937_64 rng(21);
    const std::vector<std::string> pieces = {"review",   "Policy",   "owner.",  "con-",   "trol",   "Page 3",
                                             "# Scope",  "- item",   "1.2 Access", "| a | b |", "12", "text,",
                                             "annual",   "Section",  "\f",      "  ",     "\t"};
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1), sep(0, 3);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        std::string raw;
        for (int i = 0; i < 40; ++i) {
            raw += pieces[pick(rng)];
            const auto s = sep(rng);
            raw += s == 0 ? "\n" : s == 1 ? "\n\n" : " ";
        }
        std::string once;
        try {
            once = normalize_text(raw);
        } catch (const Error&) {
            continue;
        }
        ++checked;
        CHECK(normalize_text(once) == once);
    }
    CHECK(checked > 250);
}

TEST_CASE("headings and page hints reach chunks") {
    const auto d = make_document("p.md", "# Title\n\nintro text.\f\n## Scope\n\nscope text here.");
    CHECK(d.title == "Title");
    const auto hs = detect_headings(d.body);
    REQUIRE(hs.size() == 2);
    CHECK(hs[1].text == "Scope");
    const auto chunks = chunk_document(d, {4, 1, TokenizerMode::Whitespace});
    REQUIRE(chunks.size() >= 2);
    CHECK(chunks.front().section_heading == "Title");
    CHECK(chunks.back().section_heading == "Scope");
    CHECK(chunks.back().page_hint == 2);
}

TEST_CASE("chunk windows: worked examples") {
    using W = TokenWindow;
    const ChunkParams p{512, 50, TokenizerMode::Whitespace};
    CHECK(chunk_windows(1000, p) == std::vector<W>{{0, 512}, {462, 974}, {924, 1000}});
    CHECK(chunk_windows(100, p) == std::vector<W>{{0, 100}});
    CHECK(chunk_windows(512, p) == std::vector<W>{{0, 512}});
    CHECK(chunk_windows(0, p).empty());
    CHECK_THROWS_AS(chunk_windows(10, {50, 50, TokenizerMode::Whitespace}), Error);
    CHECK_THROWS_AS(chunk_windows(10, {50, 60, TokenizerMode::Whitespace}), Error);
}

TEST_CASE("chunk windows agree with a brute-force enumeration") {
    for (std::size_t size = 1; size <= 12; ++size) {
        for (std::size_t overlap = 0; overlap < size; ++overlap) {
            const ChunkParams p{size, overlap, TokenizerMode::Whitespace};
            for (std::size_t n = 0; n <= 40; ++n) {
                // oracle: every stride-aligned window, minus those inside an earlier one
                std::vector<TokenWindow> want;
                std::size_t hi = 0;
                for (std::size_t s = 0; s < n; s += size - overlap) {
                    const std::size_t e = std::min(s + size, n);
                    if (e > hi) want.push_back({s, e});
                    hi = std::max(hi, e);
                }
                CHECK(chunk_windows(n, p) == want);
            }
        }
    }
}

TEST_CASE("chunk ids, token ranges and text") {
    const auto d = doc_of_tokens("a.md", 1000);
    const auto chunks = chunk_document(d);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[1].chunk_id == "a.md:1");
    CHECK(chunks[1].token_start == 462);
    CHECK(chunks[1].token_end == 974);
    CHECK(text::split_whitespace(chunks[1].text).front() == "w462");
    CHECK(text::count_whitespace_tokens(chunks[2].text) == 76);
}

TEST_CASE("reconstruction property on 200 random documents") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> len(1, 1500), size(2, 600);
    for (int i = 0; i < 200; ++i) {
        const auto doc = synth::random_document(rng, "d" + std::to_string(i), len(rng));
        const std::size_t cs = size(rng);
        std::uniform_int_distribution<std::size_t> ov(0, cs - 1);
        const ChunkParams p{cs, ov(rng), i % 2 ? TokenizerMode::Pretokenized : TokenizerMode::Whitespace};
        const CorpusIndex idx(chunk_document(doc, p), p);
        CHECK(idx.document_tokens(doc.doc_id) == tokenize(doc.body, p.tokenizer));
        for (const auto& c : idx.chunks()) CHECK(c.token_end - c.token_start <= cs);
    }
}

TEST_CASE("index: 2 docs of 1000 tokens, no embedder -> 6 chunks, no vectors") {
    const auto idx = build_corpus_index({doc_of_tokens("a", 1000), doc_of_tokens("b", 1000)});
    CHECK(idx.size() == 6);
    CHECK_FALSE(idx.has_vectors());
    CHECK(idx.doc_ids() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("index: stub embedder of dimension 8 -> 6 vectors of length 8") {
    StubEmbedder e;
    const auto idx = build_corpus_index({doc_of_tokens("a", 1000), doc_of_tokens("b", 1000)}, &e);
    CHECK(idx.has_vectors());
    CHECK(idx.dimension() == 8);
    CHECK(idx.vectors().size() == 48);
    CHECK(idx.embedder_id() == "stub-d8");
}

TEST_CASE("index: empty, duplicate and failing provider") {
    CHECK(build_corpus_index({}).size() == 0);
    try {
        build_corpus_index({doc_of_tokens("a", 5), doc_of_tokens("a", 5)});
        FAIL("expected DuplicateDocument");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DuplicateDocument);
    }
    StubEmbedder e;
    e.fail_on = "w600";
    try {
        build_corpus_index({doc_of_tokens("x", 1000)}, &e);
        FAIL("expected EmbeddingBackendError");
    } catch (const EmbeddingBackendError& err) {
        CHECK(err.chunk_id() == "x:1");
    }
}

TEST_CASE("lexical statistics match a direct count") {
    const auto idx = build_corpus_index({make_document("a", "Access review access"), make_document("b", "review")});
    const auto& lex = idx.lexical();
    CHECK(lex.df.at("review") == 2);
    CHECK(lex.df.at("access") == 1);
    CHECK(lex.chunks[0].tf.at("access") == 2);
    CHECK(lex.avg_length == doctest::Approx(2.0));
    CHECK(LexicalStats::deserialize(lex.serialize()).serialize() == lex.serialize());
}

TEST_CASE("save and load preserve the index") {
    synth::TempDir dir("index");
    HashingEmbedder e;
    std::mt19937_64 rng(8);
    std::vector<PolicyDocument> docs;
    for (int i = 0; i < 4; ++i) docs.push_back(synth::random_document(rng, "doc" + std::to_string(i), 700));
    const auto idx = build_corpus_index(docs, &e);
    save_index(idx, dir.path);
    const auto back = load_index(dir.path);
    CHECK(back.chunks() == idx.chunks());
    CHECK(back.embedder_id() == idx.embedder_id());
    CHECK(std::equal(back.vectors().begin(), back.vectors().end(), idx.vectors().begin(), idx.vectors().end()));
    CHECK(back.lexical().serialize() == idx.lexical().serialize());
    CHECK(back.params().chunk_size == 512);
}

TEST_CASE("corpus directory loading") {
    synth::TempDir dir("corpus");
    synth::spit(dir.path / "b.md", "# B\n\nbody b.");
    synth::spit(dir.path / "sub/a.txt", "body a.");
    synth::spit(dir.path / "skip.pdf", "binary");
    const auto docs = load_corpus_dir(dir.path);
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "b.md");
    CHECK(docs[1].doc_id == "sub/a.txt");
    CHECK(docs[0].title == "B");
}

TEST_CASE("hashing embedder is deterministic and unit length") {
    HashingEmbedder e;
    const auto a = e.embed("account review owner"), b = e.embed("account review owner");
    CHECK(a == b);
    double n = 0;
    for (float x : a) n += double(x) * x;
    CHECK(n == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(make_embedder(e.id()) != nullptr);
    CHECK(make_embedder("all-MiniLM-L6-v2") == nullptr);
}
