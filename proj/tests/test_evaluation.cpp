#include <cmath>
#include <random>

#include "covaudit/error.hpp"
#include "covaudit/evaluation.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/synth.hpp"

using namespace covaudit;
using nlohmann::json;

namespace {

constexpr auto F = CoverageStatus::FullyCovered;
constexpr auto P = CoverageStatus::PartiallyCovered;
constexpr auto N = CoverageStatus::NotCovered;

LabeledSet labeled(const std::vector<CoverageStatus>& labels, const std::string& prefix = "C") {
    LabeledSet out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%s-%03zu", prefix.c_str(), i);
        out[buf] = labels[i];
    }
    return out;
}

struct Oracle {
    double accuracy, macro_p, macro_r, macro_f1;
};

// straight from the (pred, gold) pairs, no confusion matrix
Oracle brute(const std::vector<int>& pred, const std::vector<int>& gold) {
    Oracle o{0, 0, 0, 0};
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) correct += pred[i] == gold[i];
    o.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
    for (int c = 0; c < 3; ++c) {
        double tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            if (pred[i] == c && gold[i] == c) tp += 1;
            if (pred[i] == c && gold[i] != c) fp += 1;
            if (pred[i] != c && gold[i] == c) fn += 1;
        }
        const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        o.macro_p += p / 3;
        o.macro_r += r / 3;
        o.macro_f1 += f / 3;
    }
    return o;
}

double binom(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST_CASE("six item confusion matrix") {
    const auto gold = labeled({F, F, P, P, N, N});
    const auto pred = labeled({F, P, P, P, N, F});
    const auto cm = confusion_matrix(pred, gold);
    CHECK(cm.counts[0] == std::array<std::size_t, 3>{1, 1, 0});
    CHECK(cm.counts[1] == std::array<std::size_t, 3>{0, 2, 0});
    CHECK(cm.counts[2] == std::array<std::size_t, 3>{1, 0, 1});
    const auto m = metrics(cm);
    CHECK(m.accuracy == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
    CHECK(m.per_class[0].f1 == doctest::Approx(0.5));
    CHECK(m.per_class[1].f1 == doctest::Approx(0.8));
    CHECK(m.per_class[2].f1 == doctest::Approx(2.0 / 3.0));
    CHECK(std::abs(m.macro_f1 - 0.6556) < 1e-4);
    CHECK(m.warnings.empty());
    CHECK(m.n == 6);
}

TEST_CASE("perfect agreement") {
    const auto gold = labeled({F, P, N, F, P, N, F, P, N, N});
    const auto cm = confusion_matrix(gold, gold);
    CHECK(cm.trace() == 10);
    CHECK(cm.total() == 10);
    const auto m = metrics(cm);
    CHECK(m.accuracy == 1.0);
    CHECK(m.macro_f1 == 1.0);
    CHECK(m.macro_precision == 1.0);
}

TEST_CASE("id mismatches and empty input") {
    try {
        confusion_matrix(labeled({F, P}, "A"), labeled({F, P}, "B"));
        FAIL("expected MissingPrediction");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MissingPrediction);
        CHECK(std::string(e.what()).find("A-000") != std::string::npos);
    }
    try {
        metrics(ConfusionMatrix{});
        FAIL("expected UndefinedMetrics");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UndefinedMetrics);
    }
}

TEST_CASE("absent class scores zero with a warning") {
    const auto m = metrics(confusion_matrix(labeled({F, P, F}), labeled({F, P, P})));
    CHECK(m.per_class[2].precision == 0.0);
    CHECK(m.per_class[2].recall == 0.0);
    CHECK(m.per_class[2].f1 == 0.0);
    CHECK_FALSE(m.warnings.empty());
}

TEST_CASE("metrics match the brute force oracle") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng() % 80;
        std::vector<int> p(n), g(n);
        std::vector<CoverageStatus> ps, gs;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = static_cast<int>(rng() % 3);
            g[i] = static_cast<int>(rng() % 3);
            ps.push_back(synth::status_of(p[i]));
            gs.push_back(synth::status_of(g[i]));
        }
        const auto m = metrics(confusion_matrix(labeled(ps), labeled(gs)));
        const auto o = brute(p, g);
        CHECK(std::abs(m.accuracy - o.accuracy) <= 1e-12);
        CHECK(std::abs(m.macro_precision - o.macro_p) <= 1e-12);
        CHECK(std::abs(m.macro_recall - o.macro_r) <= 1e-12);
        CHECK(std::abs(m.macro_f1 - o.macro_f1) <= 1e-12);
        CHECK(std::abs(macro_f1(confusion_matrix(labeled(ps), labeled(gs))) - o.macro_f1) <= 1e-12);
    }
}

TEST_CASE("weighted averaging") {
    const auto cm = confusion_matrix(labeled({F, P, P, P, N, F}), labeled({F, F, P, P, N, N}));
    const auto mw = metrics(cm, Averaging::Weighted);
    const auto mm = metrics(cm);
    double expect = 0;
    for (int c = 0; c < 3; ++c) expect += mm.per_class[c].f1 * static_cast<double>(mm.per_class[c].support) / 6.0;
    CHECK(mw.macro_f1 == doctest::Approx(expect).epsilon(1e-12));
    CHECK(mw.averaging == Averaging::Weighted);
}

TEST_CASE("cohen kappa") {
    CHECK(std::abs(cohen_kappa(labeled({F, F, P, N}), labeled({F, P, P, N})) - 0.6364) < 1e-4);
    CHECK(cohen_kappa(labeled({F, F, P, N}), labeled({F, P, P, N})) ==
          doctest::Approx((0.75 - 0.3125) / 0.6875).epsilon(1e-12));
    CHECK(cohen_kappa(labeled({F, F}), labeled({F, F})) == 1.0);
    CHECK_THROWS_AS(cohen_kappa(labeled({F, F}), labeled({F, F}, "X")), Error);
    // constant but different raters: p_e = 0, so kappa = p_o = 0
    CHECK(cohen_kappa(labeled({F, F}), labeled({P, P})) == 0.0);

    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        std::vector<CoverageStatus> a, b;
        const std::size_t n = 2 + rng() % 60;
        for (std::size_t i = 0; i < n; ++i) {
            a.push_back(synth::status_of(static_cast<int>(rng() % 3)));
            b.push_back(synth::status_of(static_cast<int>(rng() % 3)));
        }
        CHECK(cohen_kappa(labeled(a), labeled(a)) == doctest::Approx(1.0).epsilon(1e-12));
        const double ab = cohen_kappa(labeled(a), labeled(b));
        CHECK(ab == doctest::Approx(cohen_kappa(labeled(b), labeled(a))).epsilon(1e-12));
        CHECK(ab >= -1.0);
        CHECK(ab <= 1.0);
    }
}

TEST_CASE("mcnemar") {
    CHECK(mcnemar_exact_p(6, 2) == doctest::Approx(74.0 / 256.0).epsilon(1e-12));
    CHECK(mcnemar_exact_p(4, 4) == 1.0);
    CHECK(mcnemar_exact_p(0, 0) == 1.0);
    for (int b = 0; b <= 12; ++b) {
        for (int c = 0; b + c <= 12; ++c) {
            const int n = b + c;
            double tail = 0;
            for (int i = 0; i <= std::min(b, c); ++i) tail += binom(n, i);
            const double expect = std::min(1.0, 2.0 * tail / std::pow(2.0, n));
            const double got = mcnemar_exact_p(static_cast<std::size_t>(b), static_cast<std::size_t>(c));
            CHECK(got == doctest::Approx(expect).epsilon(1e-12));
            CHECK(got > 0.0);
            CHECK(got <= 1.0);
            CHECK(got == mcnemar_exact_p(static_cast<std::size_t>(c), static_cast<std::size_t>(b)));
        }
    }
    double stat = 0;
    const double p = mcnemar_chi2_p(120, 40, &stat);
    CHECK(stat == doctest::Approx((80.0 - 1) * (80.0 - 1) / 160.0).epsilon(1e-12));
    CHECK(p < 0.001);
    CHECK(p == doctest::Approx(std::erfc(std::sqrt(stat / 2.0))).epsilon(1e-9));
}

TEST_CASE("mcnemar on label sets") {
    // 1007 items; A right and B wrong on 120, the reverse on 40
    std::vector<CoverageStatus> gold, a, b;
    for (int i = 0; i < 1007; ++i) {
        gold.push_back(F);
        a.push_back(i < 120 ? F : (i < 160 ? N : F));
        b.push_back(i < 120 ? P : (i < 160 ? F : F));
    }
    const auto r = mcnemar(labeled(a), labeled(b), labeled(gold));
    CHECK(r.b == 120);
    CHECK(r.c == 40);
    CHECK_FALSE(r.exact);
    CHECK(r.p_value < 0.001);
    const auto swapped = mcnemar(labeled(b), labeled(a), labeled(gold));
    CHECK(swapped.b == 40);
    CHECK(swapped.c == 120);
    CHECK(swapped.p_value == r.p_value);

    const auto small = mcnemar(labeled({F, F, F, P}), labeled({P, F, F, F}), labeled({F, F, F, F}));
    CHECK(small.b == 1);
    CHECK(small.c == 1);
    CHECK(small.exact);
    CHECK(small.p_value == 1.0);
}

TEST_CASE("bootstrap intervals") {
    std::mt19937_64 rng(9);
    std::vector<CoverageStatus> g, p;
    for (int i = 0; i < 60; ++i) {
        const int c = static_cast<int>(rng() % 3);
        g.push_back(synth::status_of(c));
        p.push_back(rng() % 10 < 7 ? synth::status_of(c) : synth::status_of((c + 1) % 3));
    }
    SUBCASE("perfect predictions") {
        const auto ci = bootstrap_f1_ci(labeled(g), labeled(g), 500, 0.95, 1);
        CHECK(ci.f1 == 1.0);
        CHECK(ci.lo == 1.0);
        CHECK(ci.hi == 1.0);
    }
    SUBCASE("deterministic under a seed") {
        const auto a = bootstrap_f1_ci(labeled(p), labeled(g), 400, 0.95, 42);
        const auto b = bootstrap_f1_ci(labeled(p), labeled(g), 400, 0.95, 42);
        CHECK(a.f1 == b.f1);
        CHECK(a.lo == b.lo);
        CHECK(a.hi == b.hi);
        CHECK(a.iters == 400);
    }
    SUBCASE("interval brackets the point estimate") {
        // holds for these seeds; a percentile interval need not contain f1 in general
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto ci = bootstrap_f1_ci(labeled(p), labeled(g), 300, 0.95, seed * 1000);
            CHECK(ci.lo <= ci.hi);
            CHECK(ci.lo <= ci.f1);
            CHECK(ci.f1 <= ci.hi);
        }
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(bootstrap_f1_ci(labeled({F}), labeled({F}), 10, 0.95, 0), Error);
        CHECK_THROWS_AS(bootstrap_f1_ci(labeled(p), labeled(g), 10, 1.5, 0), Error);
    }
}

TEST_CASE("label csv") {
    const auto s = parse_labels_csv("control_id,label\nAC-1,FULLY_COVERED\n\"AC-2\", partially_covered\r\nAU-1,NOT_COVERED\n");
    CHECK(s.size() == 3);
    CHECK(s.at("AC-2") == P);
    CHECK(parse_labels_csv("AC-1,FULLY_COVERED\n").size() == 1);
    CHECK_THROWS_AS(parse_labels_csv("id,label\nAC-1,MAYBE\n"), Error);
    CHECK_THROWS_AS(parse_labels_csv("AC-1,FULLY_COVERED\nAC-1,NOT_COVERED\n"), Error);
    CHECK_THROWS_AS(parse_labels_csv("AC-1\n"), Error);

    const auto gold = load_labels_csv(synth::fixture("gold.csv"));
    CHECK(gold.size() == 25);
}

TEST_CASE("labels from records and metrics json") {
    AssessmentRecord ok;
    ok.control_id = "A";
    ok.label = P;
    ok.phase = Phase::Done;
    AssessmentRecord failed;
    failed.control_id = "B";
    failed.phase = Phase::Failed;
    const auto l = labels_from_records({ok, failed});
    CHECK(l.at("A") == P);
    CHECK(l.at("B") == N);

    const auto cm = confusion_matrix(labeled({F, P, P, P, N, F}), labeled({F, F, P, P, N, N}));
    const auto j = json::parse(metrics_to_json(cm, metrics(cm)));
    CHECK(j["n"] == 6);
    CHECK(j["accuracy"] == 0.6667);
    CHECK(j["macro_f1"] == 0.6556);
}
