#include "covaudit/controls.hpp"

#include <fstream>
#include <sstream>

#include "covaudit/error.hpp"
#include "covaudit/text.hpp"
#include "json.hpp"

namespace covaudit {

using nlohmann::json;

ControlSet::ControlSet(std::string framework_name, std::vector<ControlSpec> controls)
    : framework_name_(std::move(framework_name)), controls_(std::move(controls)) {
    for (std::size_t i = 0; i < controls_.size(); ++i) {
        const auto& c = controls_[i];
        if (c.control_id.empty()) throw SchemaError(i, "empty control_id");
        if (text::trim(c.control_text).empty()) throw SchemaError(i, "empty control_text for " + c.control_id);
        if (text::trim(c.family).empty()) throw SchemaError(i, "empty family for " + c.control_id);
        if (c.expected_elements.empty() && text::trim(c.intent).empty()) {
            throw SchemaError(i, "control " + c.control_id + " needs an intent or expected_elements");
        }
        if (!by_id_.emplace(c.control_id, i).second) {
            throw Error(ErrorKind::DuplicateControl,
                        "control_id '" + c.control_id + "' repeated at record " + std::to_string(i));
        }
        ++family_counts_[c.family];
    }
}

const ControlSpec* ControlSet::find(const std::string& control_id) const {
    auto it = by_id_.find(control_id);
    return it == by_id_.end() ? nullptr : &controls_[it->second];
}

namespace {

std::string required_string(const json& rec, const char* field, std::size_t index) {
    if (!rec.contains(field)) throw SchemaError(index, std::string("missing required field '") + field + "'");
    if (!rec[field].is_string()) throw SchemaError(index, std::string("field '") + field + "' must be a string");
    return rec[field].get<std::string>();
}

}  // namespace

ControlSet parse_controls(const std::string& json_text, std::string framework_name) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::SchemaError, std::string("controls file is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw Error(ErrorKind::SchemaError, "controls file must be a JSON array");

    std::vector<ControlSpec> controls;
    controls.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& rec = doc[i];
        if (!rec.is_object()) throw SchemaError(i, "record is not an object");
        ControlSpec c;
        c.control_id = required_string(rec, "control_id", i);
        c.control_name = required_string(rec, "control_name", i);
        c.family = required_string(rec, "family", i);
        c.control_text = required_string(rec, "control_text", i);
        c.intent = required_string(rec, "intent", i);
        if (!rec.contains("expected_elements")) throw SchemaError(i, "missing required field 'expected_elements'");
        const auto& el = rec["expected_elements"];
        if (!el.is_array()) throw SchemaError(i, "field 'expected_elements' must be an array");
        for (const auto& e : el) {
            if (!e.is_string()) throw SchemaError(i, "expected_elements entries must be strings");
            c.expected_elements.push_back(e.get<std::string>());
        }
        if (rec.contains("severity") && !rec["severity"].is_null()) {
            if (!rec["severity"].is_string()) throw SchemaError(i, "field 'severity' must be a string");
            c.severity = rec["severity"].get<std::string>();
        }
        controls.push_back(std::move(c));
    }
    return ControlSet(std::move(framework_name), std::move(controls));
}

ControlSet load_controls(const std::filesystem::path& path, std::string framework_name) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open controls file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_controls(ss.str(), std::move(framework_name));
}

std::string serialize_controls(const ControlSet& set) {
    json arr = json::array();
    for (const auto& c : set.controls()) {
        json j = {{"control_id", c.control_id},
                  {"control_name", c.control_name},
                  {"family", c.family},
                  {"control_text", c.control_text},
                  {"intent", c.intent},
                  {"expected_elements", c.expected_elements}};
        if (c.severity) j["severity"] = *c.severity;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string build_query(const ControlSpec& control, QueryMode mode) {
    if (mode == QueryMode::Raw) return control.control_text;
    std::string q;
    auto append = [&q](const std::string& segment) {
        if (segment.empty()) return;
        if (!q.empty()) q += ". ";
        q += segment;
    };
    std::string intent = control.intent;
    while (!intent.empty() && (intent.back() == '.' || text::is_space(intent.back()))) intent.pop_back();
    append(intent);
    append(text::join(control.expected_elements, "; "));
    append(control.control_text);
    return q;
}

}  // namespace covaudit
