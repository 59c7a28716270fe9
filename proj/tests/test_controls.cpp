#include "covaudit/controls.hpp"
#include "covaudit/error.hpp"
#include "doctest.h"
#include "support/synth.hpp"

using namespace covaudit;

namespace {

ControlSpec review_control() {
    ControlSpec c;
    c.control_id = "AC-2";
    c.control_name = "Account Management";
    c.family = "AC";
    c.control_text = "The organization reviews accounts…";
    c.intent = "Accounts are reviewed periodically";
    c.expected_elements = {"owner", "frequency"};
    return c;
}

const char* kRecord = R"({"control_id":"%s","control_name":"n","family":"%s","control_text":"t","intent":"i",
  "expected_elements":["e"]})";

std::string record(const std::string& id, const std::string& fam) {
    std::string s = kRecord;
    s.replace(s.find("%s"), 2, id);
    s.replace(s.find("%s"), 2, fam);
    return s;
}

}  // namespace

TEST_CASE("build_query: intent-conditioned, raw and no elements") {
    auto c = review_control();
    CHECK(build_query(c) == "Accounts are reviewed periodically. owner; frequency. The organization reviews accounts…");
    CHECK(build_query(c, QueryMode::Raw) == c.control_text);
    c.expected_elements.clear();
    CHECK(build_query(c) == "Accounts are reviewed periodically. The organization reviews accounts…");
}

TEST_CASE("fixture: 25 controls with family counts") {
    const auto set = load_controls(synth::fixture("controls.json"));
    CHECK(set.size() == 25);
    CHECK(set.family_counts().at("AC") == 5);
    CHECK(set.find("IR-4") != nullptr);
    CHECK(set.find("ZZ-1") == nullptr);
    CHECK(set.framework_name() == kDefaultFramework);
}

TEST_CASE("1007 records across 20 families") {
    const ControlSet set("NIST SP 800-53", synth::controls(1007));
    CHECK(set.size() == 1007);
    CHECK(set.family_counts().size() == 20);
    CHECK(parse_controls(serialize_controls(set)) == set);
}

TEST_CASE("empty array gives an empty set") { CHECK(parse_controls("[]").empty()); }

TEST_CASE("duplicate control ids") {
    try {
        parse_controls("[" + record("AC-2", "AC") + "," + record("AC-2", "AC") + "]");
        FAIL("expected DuplicateControl");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DuplicateControl);
    }
}

TEST_CASE("missing field names the record index") {
    const std::string bad = R"({"control_id":"AC-3","control_name":"n","family":"AC","intent":"i","expected_elements":[]})";
    try {
        parse_controls("[" + record("AC-1", "AC") + "," + bad + "]");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.record_index() == 1);
        CHECK(std::string(e.what()).find("control_text") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_controls("{}"), Error);
    CHECK_THROWS_AS(parse_controls("not json"), Error);
}
