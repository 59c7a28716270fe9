#include <random>

#include "covaudit/parsers.hpp"
#include "doctest.h"
#include "support/synth.hpp"

using namespace covaudit;

TEST_CASE("coverage: template instance") {
    const auto c = parse_coverage("STATUS: PARTIALLY_COVERED\nCONFIDENCE: 0.8\nREASONING: mentions reviews but no frequency");
    CHECK(c.status == CoverageStatus::PartiallyCovered);
    CHECK(c.confidence == doctest::Approx(0.8));
    CHECK(c.reasoning == "mentions reviews but no frequency");
}

TEST_CASE("coverage: lowercase keys and clamped confidence") {
    const auto c = parse_coverage("status: fully_covered\nconfidence: 1.2\nreasoning: x");
    CHECK(c.status == CoverageStatus::FullyCovered);
    CHECK(c.confidence == 1.0);
    CHECK(c.reasoning == "x");
}

TEST_CASE("coverage: no status") {
    try {
        parse_coverage("The policy is fine.");
        FAIL("expected MalformedOutput");
    } catch (const MalformedOutput& e) {
        CHECK(e.stage() == Stage::Coverage);
    }
}

TEST_CASE("coverage: markdown, percent, fraction, multi-line reasoning") {
    const auto c = parse_coverage("**Status:** [NOT_COVERED]\n**Confidence**: 85%\nReasoning: line one\nline two");
    CHECK(c.status == CoverageStatus::NotCovered);
    CHECK(c.confidence == doctest::Approx(0.85));
    CHECK(c.reasoning == "line one\nline two");
    CHECK(parse_coverage("STATUS: FULLY_COVERED\nCONFIDENCE: 4/5").confidence == doctest::Approx(0.8));
    CHECK(parse_coverage("STATUS: FULLY_COVERED").confidence == 0.0);
}

TEST_CASE("gaps: one block, two blocks, unknown type") {
    auto one = parse_gaps(
        "GAP_TYPE: No Review Cycle\nSEVERITY: MEDIUM\nEXPLANATION: no cadence\nAFFECTED_ELEMENTS: review frequency, owner");
    REQUIRE(one.value.size() == 1);
    CHECK(one.value[0] == Gap{GapType::NoReviewCycle, Level::Medium, "no cadence", {"review frequency", "owner"}});
    CHECK(one.warnings.empty());

    auto two = parse_gaps("GAP_TYPE: Missing Control\nSEVERITY: HIGH\nEXPLANATION: a\n\n"
                          "GAP_TYPE: NO_PROCEDURE\nSEVERITY: LOW\nEXPLANATION: b");
    REQUIRE(two.value.size() == 2);
    CHECK(two.value[0].gap_type == GapType::MissingControl);
    CHECK(two.value[1].gap_type == GapType::NoProcedure);

    auto odd = parse_gaps("GAP_TYPE: Vague Language\nSEVERITY: LOW\nEXPLANATION: e");
    REQUIRE(odd.value.size() == 1);
    CHECK(odd.value[0].gap_type == GapType::WeakSpecification);
    CHECK(odd.value[0].severity == Level::Low);
    CHECK(odd.warnings.size() == 1);

    CHECK_THROWS_AS(parse_gaps("nothing here"), MalformedOutput);
    CHECK(parse_gaps("nothing here", false).value.empty());
}

TEST_CASE("recommendations: separator, default priority, empty") {
    auto two = parse_recommendations("TITLE: A\nPRIORITY: HIGH\nDESCRIPTION: d\n---\nTITLE: B\nPRIORITY: LOW");
    REQUIRE(two.value.size() == 2);
    CHECK(two.value[1].priority == Level::Low);

    auto noprio = parse_recommendations("TITLE: A\nDESCRIPTION: d");
    REQUIRE(noprio.value.size() == 1);
    CHECK(noprio.value[0].priority == Level::Medium);
    CHECK(noprio.warnings.size() == 1);

    try {
        parse_recommendations("---");
        FAIL("expected MalformedOutput");
    } catch (const MalformedOutput& e) {
        CHECK(e.stage() == Stage::Recommendation);
    }
}

TEST_CASE("explanation and quality") {
    const auto e = parse_explanation(
        "SUMMARY: s\nGAP_EXPLANATION: g\nIMPACT: i\nRECOMMENDATION_RATIONALE: r\nEVIDENCE: [Excerpt 1]");
    CHECK(e == Explanation{"s", "g", "i", "r", "[Excerpt 1]"});
    CHECK_THROWS_AS(parse_explanation("IMPACT: i"), MalformedOutput);

    const auto q = parse_quality("CLARITY: 0.7\nACTIONABILITY: 0.6\nGOVERNANCE_MATURITY: 0.5\nINSIGHTS: - a\n- b");
    CHECK(q.clarity == doctest::Approx(0.7));
    CHECK(q.actionability == doctest::Approx(0.6));
    CHECK(q.governance_maturity == doctest::Approx(0.5));
    CHECK(q.insights == std::vector<std::string>{"a", "b"});
    CHECK(q.overall() == doctest::Approx(0.6));
    CHECK_THROWS_AS(parse_quality("CLARITY: 0.7"), MalformedOutput);
}

TEST_CASE("joint grammar: status, gap and recommendation in one text") {
    const auto j = parse_joint(
        "STATUS: PARTIALLY_COVERED\nCONFIDENCE: 0.7\nREASONING: partial\n\n"
        "GAP_TYPE: No Ownership Defined\nSEVERITY: HIGH\nEXPLANATION: nobody owns it\nAFFECTED_ELEMENTS: owner\n\n"
        "TITLE: Assign an owner\nPRIORITY: HIGH\nDESCRIPTION: name one\nRATIONALE: accountability\n"
        "IMPLEMENTATION_GUIDANCE: update the charter");
    CHECK(j.value.coverage.status == CoverageStatus::PartiallyCovered);
    CHECK(j.value.coverage.reasoning == "partial");
    REQUIRE(j.value.gaps.size() == 1);
    CHECK(j.value.gaps[0].gap_type == GapType::NoOwnershipDefined);
    REQUIRE(j.value.recommendations.size() == 1);
    CHECK(j.value.recommendations[0].title == "Assign an owner");

    const auto full = parse_joint("STATUS: FULLY_COVERED\nCONFIDENCE: 1\nREASONING: ok");
    CHECK(full.value.gaps.empty());
    CHECK_THROWS_AS(parse_joint("STATUS: NOT_COVERED\nREASONING: none"), MalformedOutput);
}

TEST_CASE("fuzz: 10,000 random byte strings per parser") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> byte(0, 255), len(0, 400);
    const std::vector<std::string> fragments = {"STATUS:", "GAP_TYPE:", "TITLE:", "---", "\n", "CONFIDENCE: ",
                                                "SEVERITY:", "CLARITY:", "SUMMARY:", "%", "/", "1e999", "-"};
    std::uniform_int_distribution<std::size_t> frag(0, fragments.size() - 1);
    std::size_t other = 0;
    auto guard = [&](auto&& f) {
        try {
            f();
        } catch (const MalformedOutput&) {
        } catch (...) {
            ++other;
        }
    };
    for (int i = 0; i < 10000; ++i) {
        std::string s;
        const int n = len(rng);
        for (int j = 0; j < n; ++j) {
            // half the inputs mix grammar fragments into the noise
            if (i % 2 && j % 7 == 0) s += fragments[frag(rng)];
            else s += static_cast<char>(byte(rng));
        }
        guard([&] {
            const auto c = parse_coverage(s);
            CHECK((c.confidence >= 0.0 && c.confidence <= 1.0));
        });
        guard([&] { parse_gaps(s); });
        guard([&] { parse_recommendations(s); });
        guard([&] { parse_explanation(s); });
        guard([&] {
            const auto q = parse_quality(s);
            CHECK((q.clarity >= 0.0 && q.clarity <= 1.0));
        });
        guard([&] { parse_joint(s); });
    }
    CHECK(other == 0);
}

namespace {

std::string sentence(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    std::uniform_int_distribution<std::size_t> n(lo, hi);
    std::string s = synth::random_text(rng, n(rng));
    for (char& c : s)
        if (c == '\n') c = ' ';
    return s;
}

double unit(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

template <class T>
T pick(std::mt19937_64& rng, const T* items, std::size_t n) {
    return items[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)];
}

}  // namespace

TEST_CASE("round trip: 1,000 well-formed instances per grammar") {
    std::mt19937_64 rng(77);
    const Level levels[] = {Level::Low, Level::Medium, Level::High};
    for (int i = 0; i < 1000; ++i) {
        const CoverageJudgment c{pick(rng, kAllStatuses.data(), 3), unit(rng), sentence(rng, 1, 30)};
        CHECK(parse_coverage(format_coverage(c)) == c);

        std::vector<Gap> gaps;
        for (int g = 0, n = 1 + i % 3; g < n; ++g)
            gaps.push_back({pick(rng, kAllGapTypes.data(), 6), pick(rng, levels, 3), sentence(rng, 1, 20),
                            {sentence(rng, 1, 3), sentence(rng, 1, 3)}});
        const auto pg = parse_gaps(format_gaps(gaps));
        CHECK(pg.value == gaps);
        CHECK(pg.warnings.empty());

        std::vector<Recommendation> recs;
        for (int r = 0, n = 1 + i % 4; r < n; ++r)
            recs.push_back({sentence(rng, 1, 6), pick(rng, levels, 3), sentence(rng, 1, 20), sentence(rng, 1, 10),
                            sentence(rng, 1, 10)});
        const auto pr = parse_recommendations(format_recommendations(recs));
        CHECK(pr.value == recs);
        CHECK(pr.warnings.empty());

        const Explanation e{sentence(rng, 1, 20), sentence(rng, 0, 20), sentence(rng, 0, 10), sentence(rng, 0, 10),
                            sentence(rng, 0, 5)};
        CHECK(parse_explanation(format_explanation(e)) == e);

        QualityScores q{unit(rng), unit(rng), unit(rng), {}};
        for (int k = 0, n = i % 4; k < n; ++k) q.insights.push_back(sentence(rng, 1, 8));
        CHECK(parse_quality(format_quality(q)) == q);

        JointAssessment j{c, {}, {}};
        if (c.status != CoverageStatus::FullyCovered) {
            j.gaps = gaps;
            j.recommendations = recs;
        }
        const auto pj = parse_joint(format_joint(j));
        CHECK(pj.value.coverage == j.coverage);
        CHECK(pj.value.gaps == j.gaps);
        CHECK(pj.value.recommendations == j.recommendations);
    }
}
