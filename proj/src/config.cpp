#include "covaudit/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "covaudit/error.hpp"
#include "covaudit/text.hpp"

namespace covaudit {

namespace {

std::string unquote(const std::string& raw, std::size_t line_no) {
    if (raw.size() >= 2 && (raw.front() == '"' || raw.front() == '\'')) {
        if (raw.back() != raw.front()) {
            throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": unterminated string");
        }
        std::string out;
        const std::string body = raw.substr(1, raw.size() - 2);
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (raw.front() == '"' && body[i] == '\\' && i + 1 < body.size()) {
                const char n = body[++i];
                out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
            } else {
                out.push_back(body[i]);
            }
        }
        return out;
    }
    return raw;
}

// Strips a trailing "# comment" that is not inside quotes.
std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
    ConfigFile cfg;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = text::trim(strip_comment(line));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": bad section header");
            }
            section = text::trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = text::trim(t.substr(0, eq));
        if (key.empty()) throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        cfg.values_[full] = unquote(text::trim(t.substr(eq + 1)), line_no);
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<std::string> ConfigFile::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::optional<long long> ConfigFile::get_int(const std::string& key) const {
    auto v = get_string(key);
    if (!v) return std::nullopt;
    long long out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size()) {
        throw Error(ErrorKind::ConfigError, "key " + key + ": expected integer, got '" + *v + "'");
    }
    return out;
}

std::optional<double> ConfigFile::get_double(const std::string& key) const {
    auto v = get_string(key);
    if (!v) return std::nullopt;
    try {
        std::size_t used = 0;
        const double d = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigError, "key " + key + ": expected number, got '" + *v + "'");
    }
}

std::optional<bool> ConfigFile::get_bool(const std::string& key) const {
    auto v = get_string(key);
    if (!v) return std::nullopt;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw Error(ErrorKind::ConfigError, "key " + key + ": expected true/false, got '" + *v + "'");
}

}  // namespace covaudit
