#include "covaudit/text.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "covaudit/error.hpp"

namespace covaudit::text {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "a",     "about", "above", "after",  "again", "against", "all",    "also",  "am",
        "an",    "and",   "any",   "are",    "as",    "at",      "be",     "been",  "before",
        "being", "below", "between", "both", "but",   "by",      "can",    "could", "did",
        "do",    "does",  "doing", "down",   "during", "each",   "either", "etc",   "few",
        "for",   "from",  "further", "had",  "has",   "have",    "having", "he",    "her",
        "here",  "hers",  "him",   "his",    "how",   "i",       "if",     "in",    "into",
        "is",    "it",    "its",   "itself", "may",   "me",      "might",  "more",  "most",
        "must",  "my",    "no",    "nor",    "not",   "of",      "off",    "on",    "once",
        "only",  "or",    "other", "our",    "ours",  "out",     "over",   "own",   "per",
        "same",  "shall", "she",   "should", "so",    "some",    "such",   "than",  "that",
        "the",   "their", "theirs", "them",  "then",  "there",   "these",  "they",  "this",
        "those", "through", "to",  "too",    "under", "until",   "up",     "upon",  "very",
        "via",   "was",   "we",    "were",   "what",  "when",    "where",  "which", "while",
        "who",   "whom",  "why",   "will",   "with",  "within",  "would",  "you",   "your",
    };
    return words;
}

}  // namespace

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::vector<TokenSpan> whitespace_spans(std::string_view s) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        if (i >= s.size()) break;
        const std::size_t b = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        spans.push_back({b, i});
    }
    return spans;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> out;
    for (const auto& sp : whitespace_spans(s)) out.push_back(s.substr(sp.begin, sp.end - sp.begin));
    return out;
}

std::size_t count_whitespace_tokens(std::string_view s) {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : s) {
        const bool sp = is_space(c);
        if (!sp && !in_token) ++n;
        in_token = !sp;
    }
    return n;
}

std::vector<TokenSpan> pretokenized_spans(std::string_view s) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (is_space(s[i])) {
            ++i;
            continue;
        }
        const std::size_t b = i;
        if (std::isdigit(c)) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        } else if (is_word_byte(c)) {
            while (i < s.size()) {
                const auto d = static_cast<unsigned char>(s[i]);
                if (!is_word_byte(d) || std::isdigit(d)) break;
                ++i;
            }
        } else {
            ++i;
        }
        spans.push_back({b, i});
    }
    return spans;
}

std::vector<std::string> analyze(std::string_view s) {
    std::vector<std::string> terms;
    std::string cur;
    for (char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            terms.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) terms.push_back(std::move(cur));
    return terms;
}

bool is_stopword(std::string_view lowered_term) { return stopwords().count(lowered_term) > 0; }

std::vector<std::string> content_words(std::string_view s) {
    auto terms = analyze(s);
    std::erase_if(terms, [](const std::string& t) { return t.size() < 2 || is_stopword(t); });
    return terms;
}

std::set<std::string> content_word_set(std::string_view s) {
    auto words = content_words(s);
    return {std::make_move_iterator(words.begin()), std::make_move_iterator(words.end())};
}

std::string truncate_chars(std::string_view s, std::size_t n) {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        // continuation bytes do not start a code point
        if ((c & 0xC0) != 0x80) {
            if (count == n) break;
            ++count;
        }
        ++i;
    }
    return std::string(s.substr(0, i));
}

std::size_t utf8_length(std::string_view s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char ch) {
        return (static_cast<unsigned char>(ch) & 0xC0) != 0x80;
    }));
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::IoError, "sha256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

double round4(double x) {
    if (!std::isfinite(x)) return 0.0;
    const double r = std::round(x * 10000.0) / 10000.0;
    return r == 0.0 ? 0.0 : r;  // no "-0"
}

std::string format_fixed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace covaudit::text
