#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace covaudit {

struct ControlSpec {
    std::string control_id;
    std::string control_name;
    std::string family;
    std::string control_text;
    std::string intent;
    std::vector<std::string> expected_elements;
    std::optional<std::string> severity;

    bool operator==(const ControlSpec&) const = default;
};

/// Controls in file order. Immutable after load.
class ControlSet {
public:
    ControlSet() = default;
    /// Validates every record; throws DuplicateControl or SchemaError.
    ControlSet(std::string framework_name, std::vector<ControlSpec> controls);

    const std::string& framework_name() const { return framework_name_; }
    const std::vector<ControlSpec>& controls() const { return controls_; }
    const std::map<std::string, std::size_t>& family_counts() const { return family_counts_; }
    std::size_t size() const { return controls_.size(); }
    bool empty() const { return controls_.empty(); }

    const ControlSpec* find(const std::string& control_id) const;

    bool operator==(const ControlSet& other) const {
        return framework_name_ == other.framework_name_ && controls_ == other.controls_;
    }

private:
    std::string framework_name_;
    std::vector<ControlSpec> controls_;
    std::map<std::string, std::size_t> family_counts_;
    std::map<std::string, std::size_t> by_id_;
};

inline constexpr const char* kDefaultFramework = "NIST SP 800-53";

/// Reads a JSON array of control records.
ControlSet load_controls(const std::filesystem::path& path, std::string framework_name = kDefaultFramework);
ControlSet parse_controls(const std::string& json_text, std::string framework_name = kDefaultFramework);
std::string serialize_controls(const ControlSet& set);

enum class QueryMode {
    IntentConditioned,  // "intent. e1; e2. control_text"
    Raw,                // control_text alone
};

std::string build_query(const ControlSpec& control, QueryMode mode = QueryMode::IntentConditioned);

}  // namespace covaudit
