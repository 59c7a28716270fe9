#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace covaudit {

/// Flat `key = value` configuration with optional `[section]` headers, the
/// subset of TOML the run and backend configs use. Keys are addressed as
/// "section.key"; keys before any header have no prefix.
class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile parse(std::string_view text);
    static ConfigFile load(const std::filesystem::path& path);

    bool contains(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<long long> get_int(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace covaudit
