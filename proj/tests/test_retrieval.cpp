#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>

#include "covaudit/corpus.hpp"
#include "covaudit/error.hpp"
#include "covaudit/retrieval.hpp"
#include "covaudit/text.hpp"
#include "doctest.h"
#include "support/synth.hpp"

using namespace covaudit;

namespace {

// Independent BM25: lowercase alphanumeric runs, Lucene-style IDF.
std::vector<std::string> oracle_terms(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s + " ") {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    return out;
}

std::vector<double> oracle_bm25(const std::vector<std::string>& chunks, const std::string& query) {
    const double k1 = 1.2, b = 0.75;
    const double n = static_cast<double>(chunks.size());
    std::vector<std::vector<std::string>> docs;
    double total = 0;
    for (const auto& c : chunks) {
        docs.push_back(oracle_terms(c));
        total += static_cast<double>(docs.back().size());
    }
    const double avgdl = total / n;
    std::vector<double> out(chunks.size(), 0.0);
    for (const auto& q : oracle_terms(query)) {
        double df = 0;
        for (const auto& d : docs) df += std::count(d.begin(), d.end(), q) > 0 ? 1 : 0;
        if (df == 0) continue;
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), q));
            const double dl = static_cast<double>(docs[i].size());
            out[i] += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl));
        }
    }
    return out;
}

struct Ranked {
    std::size_t pos;
    double score;
};

// Oracle top-k under the shared tie rule (score desc, doc, chunk index);
// positions index the chunk list, whose order is doc then chunk index.
std::vector<Ranked> oracle_rank(const std::vector<double>& scores, std::size_t k, bool drop_zero) {
    std::vector<Ranked> r;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (!drop_zero || scores[i] > 0) r.push_back({i, scores[i]});
    std::stable_sort(r.begin(), r.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });
    if (r.size() > k) r.resize(k);
    return r;
}

// Ranks agree position by position; positions whose oracle scores are within
// rounding noise of a neighbour may swap.
void check_same_ranking(const EvidenceSet& got, const std::vector<Ranked>& want, const CorpusIndex& idx,
                        const std::vector<double>& oracle_scores) {
    REQUIRE(got.items.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        const auto pos = idx.find_chunk(got.items[i].chunk_id);
        REQUIRE(pos.has_value());
        CHECK(got.items[i].score == doctest::Approx(oracle_scores[*pos]).epsilon(1e-9));
        if (*pos != want[i].pos) CHECK(std::abs(oracle_scores[*pos] - want[i].score) < 1e-9);
    }
}

struct RandomEmbedder final : EmbeddingProvider {
    std::string id() const override { return "rand-d8"; }
    std::size_t dimension() const override { return 8; }
    std::vector<float> embed(std::string_view t) const override {
        std::mt19937_64 rng(text::fnv1a64(t));
        std::normal_distribution<float> d;
        std::vector<float> v(8);
        for (auto& x : v) x = d(rng);
        return v;
    }
};

struct FixedEmbedder final : EmbeddingProvider {
    std::map<std::string, std::vector<float>, std::less<>> table;
    std::string id() const override { return "fixed-d2"; }
    std::size_t dimension() const override { return 2; }
    std::vector<float> embed(std::string_view t) const override {
        auto it = table.find(t);
        return it == table.end() ? std::vector<float>{0, 0} : it->second;
    }
};

std::vector<std::string> texts_of(const CorpusIndex& idx) {
    std::vector<std::string> out;
    for (const auto& c : idx.chunks()) out.push_back(c.text);
    return out;
}

CorpusIndex small_index(const std::vector<std::pair<std::string, std::string>>& docs,
                        const EmbeddingProvider* e = nullptr, ChunkParams p = {}) {
    std::vector<PolicyDocument> d;
    for (const auto& [id, body] : docs) d.push_back(make_document(id, body));
    return build_corpus_index(d, e, p);
}

}  // namespace

TEST_CASE("lexical: unique term ranks its chunk first") {
    const auto idx = small_index({{"a", "access review"}, {"b", "backup plan"}, {"c", "review cadence"}});
    const auto r = retrieve_lexical(idx, "backup", 3);
    REQUIRE(r.items.size() == 1);
    CHECK(r.items[0].doc_id == "b");
    CHECK(r.items[0].score > 0);
    CHECK(retrieve_lexical(idx, "zebra unicorn", 3).items.empty());
}

TEST_CASE("lexical: 5-chunk fixture equals the oracle for 'access review'") {
    const auto idx = small_index({{"p1", "Access review is performed quarterly by the account owner."},
                                  {"p2", "Backups are reviewed and access to backup media is limited."},
                                  {"p3", "Incident review meetings follow each major incident."},
                                  {"p4", "Access requests need approval. Access is removed at termination."},
                                  {"p5", "Training is annual."}});
    const auto oracle = oracle_bm25(texts_of(idx), "access review");
    check_same_ranking(retrieve_lexical(idx, "access review", 5), oracle_rank(oracle, 5, true), idx, oracle);
}

TEST_CASE("lexical: empty index and k = 0") {
    const CorpusIndex empty;
    CHECK_THROWS_AS(retrieve_lexical(empty, "x", 3), Error);
    const auto idx = small_index({{"a", "access"}});
    CHECK_THROWS_AS(retrieve_lexical(idx, "access", 0), Error);
}

TEST_CASE("lexical: rank agreement with brute force on 100 random corpora") {
    std::mt19937_64 rng(99);
    const std::vector<std::string> vocab(synth::vocabulary().begin(), synth::vocabulary().begin() + 20);
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<std::size_t> nchunks(1, 50), len(1, 40), qlen(1, 5), k(1, 10);
        std::vector<PolicyDocument> docs;
        const std::size_t n = nchunks(rng);
        for (std::size_t i = 0; i < n; ++i)
            docs.push_back(make_document("d" + std::to_string(100 + i), synth::random_text(rng, len(rng), vocab)));
        const auto idx = build_corpus_index(docs);
        const std::string q = synth::random_text(rng, qlen(rng), vocab);
        const std::size_t kk = k(rng);
        const auto oracle = oracle_bm25(texts_of(idx), q);
        check_same_ranking(retrieve_lexical(idx, q, kk), oracle_rank(oracle, kk, true), idx, oracle);
    }
}

TEST_CASE("dense: identical vector scores 1, orthogonal 0") {
    FixedEmbedder e;
    e.table = {{"alpha", {1, 0}}, {"beta", {0, 1}}, {"query", {1, 0}}};
    const auto idx = small_index({{"a", "alpha"}, {"b", "beta"}}, &e);
    const auto r = retrieve_dense(idx, e, "query", 2);
    REQUIRE(r.items.size() == 2);
    CHECK(r.items[0].doc_id == "a");
    CHECK(r.items[0].score == doctest::Approx(1.0));
    CHECK(r.items[1].score == doctest::Approx(0.0));
}

TEST_CASE("dense: ranking equals an exhaustive cosine oracle") {
    RandomEmbedder e;
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::pair<std::string, std::string>> docs;
        const std::size_t n = trial == 0 ? 6 : 1 + trial * 2;
        for (std::size_t i = 0; i < n; ++i) docs.push_back({"d" + std::to_string(i), synth::random_text(rng, 6)});
        const auto idx = small_index(docs, &e);
        const std::string q = synth::random_text(rng, 3);
        const auto qv = e.embed(q);
        std::vector<double> cos;
        for (const auto& c : idx.chunks()) {
            const auto v = e.embed(c.text);
            double dot = 0, a = 0, b = 0;
            for (int j = 0; j < 8; ++j) dot += double(qv[j]) * v[j], a += double(qv[j]) * qv[j], b += double(v[j]) * v[j];
            cos.push_back(dot / std::sqrt(a * b));
        }
        const auto want = oracle_rank(cos, 4, false);
        const auto got = retrieve_dense(idx, e, q, 4);
        REQUIRE(got.items.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            const auto pos = *idx.find_chunk(got.items[i].chunk_id);
            CHECK(got.items[i].score == doctest::Approx(cos[pos]).epsilon(1e-5));
            if (pos != want[i].pos) CHECK(std::abs(cos[pos] - want[i].score) < 1e-5);
        }
    }
}

TEST_CASE("dense: mismatched provider or missing vectors") {
    RandomEmbedder e;
    FixedEmbedder other;
    const auto idx = small_index({{"a", "alpha"}}, &e);
    CHECK_THROWS_AS(retrieve_dense(idx, other, "q", 1), Error);
    const auto lexical_only = small_index({{"a", "alpha"}});
    CHECK_THROWS_AS(retrieve_dense(lexical_only, e, "q", 1), Error);
}

TEST_CASE("rerank: overlap ratios, stability") {
    EvidenceSet s;
    auto item = [](std::string id, std::string t) {
        EvidenceItem it;
        it.chunk_id = it.doc_id = std::move(id);
        it.text = std::move(t);
        return it;
    };
    // query content words: account, review, owner, quarterly
    s.items = {item("c1", "owner assigned"), item("c2", "account review quarterly"),
               item("c3", "account review quarterly owner"), item("c4", "nothing relevant")};
    const auto r = rerank(s, "account review by the owner quarterly");
    REQUIRE(r.items.size() == 4);
    CHECK(r.items[0].chunk_id == "c3");
    CHECK(r.items[0].score == doctest::Approx(1.0));
    CHECK(r.items[1].chunk_id == "c2");
    CHECK(r.items[1].score == doctest::Approx(0.75));
    CHECK(r.items[2].chunk_id == "c1");
    CHECK(r.items[2].score == doctest::Approx(0.25));
    CHECK(r.items[3].score == 0.0);
    CHECK(r.strategy == Strategy::DenseReranked);

    EvidenceSet z;
    z.items = {item("x", "aaa"), item("y", "bbb"), item("z", "ccc")};
    const auto rz = rerank(z, "account");
    CHECK(rz.items[0].chunk_id == "x");
    CHECK(rz.items[1].chunk_id == "y");
    CHECK(rz.items[2].chunk_id == "z");
}

TEST_CASE("documents: single doc, max-chunk dominance, oracle") {
    const auto one = small_index({{"only", "access review"}});
    CHECK(retrieve_documents(one, "access", 5).items.size() == 1);

    const auto two = small_index({{"A", "backup plan"}, {"B", "access review owner"}});
    const auto r2 = retrieve_documents(two, "owner", 2);
    REQUIRE(r2.items.size() == 1);
    CHECK(r2.items[0].doc_id == "B");

    std::mt19937_64 rng(17);
    const ChunkParams p{8, 2, TokenizerMode::Whitespace};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::pair<std::string, std::string>> docs;
        for (int d = 0; d < 3; ++d) docs.push_back({"doc" + std::to_string(d), synth::random_text(rng, 30)});
        const auto idx = small_index(docs, nullptr, p);
        const std::string q = synth::random_text(rng, 3);
        const auto scores = oracle_bm25(texts_of(idx), q);
        std::map<std::string, double> best;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            auto& b = best[idx.chunks()[i].doc_id];
            b = std::max(b, scores[i]);
        }
        std::vector<std::pair<std::string, double>> want(best.begin(), best.end());
        std::erase_if(want, [](const auto& x) { return x.second <= 0; });
        std::stable_sort(want.begin(), want.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        const auto got = retrieve_documents(idx, q, 3);
        REQUIRE(got.items.size() == want.size());
        std::set<std::string> seen;
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(seen.insert(got.items[i].doc_id).second);
            CHECK(got.items[i].score == doctest::Approx(best[got.items[i].doc_id]).epsilon(1e-9));
            if (got.items[i].doc_id != want[i].first) CHECK(std::abs(best[got.items[i].doc_id] - want[i].second) < 1e-9);
        }
    }
}

TEST_CASE("documents: excerpt covers the best chunk and its neighbours without repeats") {
    std::string body;
    for (int i = 0; i < 40; ++i) body += (i ? " t" : "t") + std::to_string(i);
    body += " needle";
    for (int i = 40; i < 80; ++i) body += " t" + std::to_string(i);
    const auto idx = small_index({{"d", body}}, nullptr, {10, 3, TokenizerMode::Whitespace});
    const auto r = retrieve_documents(idx, "needle", 1);
    REQUIRE(r.items.size() == 1);
    const auto words = text::split_whitespace(r.items[0].text);
    std::set<std::string_view> uniq(words.begin(), words.end());
    CHECK(uniq.size() == words.size());
    CHECK(r.items[0].text.find("needle") != std::string::npos);
    CHECK(words.size() <= 3 * 10);
}

TEST_CASE("precision@k and top-1 sufficiency examples") {
    JudgmentSet j;
    j.add({"C", "a", true, true});
    j.add({"C", "b", false, false});
    j.add({"C", "c", true, false});
    EvidenceSet r;
    r.control_id = "C";
    for (auto id : {"a", "b", "c"}) {
        EvidenceItem it;
        it.chunk_id = id;
        r.items.push_back(it);
    }
    CHECK(precision_at_k(r, j, 3) == doctest::Approx(2.0 / 3.0));
    CHECK(precision_at_k(r, j, 1) == 1.0);
    EvidenceSet shortlist = r;
    shortlist.items = {r.items[1], r.items[2]};
    CHECK(precision_at_k(shortlist, j, 3) == doctest::Approx(1.0 / 3.0));
    CHECK(top1_sufficiency({r}, j) == 1.0);
    CHECK(top1_sufficiency({shortlist}, j) == 0.0);
    CHECK_THROWS_AS(j.add({"C", "z", false, true}), Error);
}

TEST_CASE("top-1 sufficiency: 130 of 200 -> 0.65") {
    JudgmentSet j;
    std::vector<EvidenceSet> rankings;
    for (int i = 0; i < 200; ++i) {
        const std::string id = "X-" + std::to_string(i);
        j.add({id, "top", true, i < 130});
        EvidenceSet r;
        r.control_id = id;
        EvidenceItem it;
        it.chunk_id = "top";
        r.items.push_back(it);
        rankings.push_back(r);
    }
    CHECK(top1_sufficiency(rankings, j) == doctest::Approx(0.65));
}

TEST_CASE("judgments csv") {
    const auto j = parse_judgments("control_id,chunk_id,relevant,sufficient\nA,x:0,1,0\nB,y:0,1,1\n");
    CHECK(j.size() == 2);
    CHECK(j.find("B", "y:0")->sufficient);
    CHECK(j.control_ids() == std::vector<std::string>{"A", "B"});
    CHECK_THROWS_AS(parse_judgments("A,x,2,0"), Error);
    CHECK_THROWS_AS(parse_judgments("A,x,1"), Error);
}

TEST_CASE("retriever dispatch counts calls and caps reranked depth") {
    RandomEmbedder e;
    std::mt19937_64 rng(2);
    std::vector<std::pair<std::string, std::string>> docs;
    for (int i = 0; i < 30; ++i) docs.push_back({"d" + std::to_string(i), synth::random_text(rng, 10)});
    const auto idx = small_index(docs, &e);
    const Retriever r(idx, &e);
    CHECK(r.retrieve(Strategy::Lexical, "C", "access review", 3).strategy == Strategy::Lexical);
    const auto rr = r.retrieve(Strategy::DenseReranked, "C", "access review", 3);
    CHECK(rr.items.size() == 3);
    CHECK(rr.control_id == "C");
    CHECK(r.calls() == 2);
    CHECK(Retriever::rerank_pool(3) == 20);
    CHECK(Retriever::rerank_pool(10) == 40);
    const Retriever no_embed(idx, nullptr);
    CHECK_THROWS_AS(no_embed.retrieve(Strategy::Dense, "C", "x", 1), Error);
}
