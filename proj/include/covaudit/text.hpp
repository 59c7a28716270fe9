#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

// Byte-level text helpers. Everything here treats non-ASCII bytes as word
// characters so UTF-8 words are never split mid-sequence.

namespace covaudit::text {

struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool is_space(char c);

std::vector<std::string_view> split_whitespace(std::string_view s);
std::vector<TokenSpan> whitespace_spans(std::string_view s);
std::size_t count_whitespace_tokens(std::string_view s);

/// Approximates model pre-tokenization: runs of word characters, runs of
/// digits and single punctuation marks are separate tokens.
std::vector<TokenSpan> pretokenized_spans(std::string_view s);

/// Lowercased alphanumeric terms. Used for BM25 statistics.
std::vector<std::string> analyze(std::string_view s);

bool is_stopword(std::string_view lowered_term);

/// Analyzed terms minus stop-words and single characters.
std::vector<std::string> content_words(std::string_view s);
std::set<std::string> content_word_set(std::string_view s);

/// First `n` UTF-8 code points of `s`.
std::string truncate_chars(std::string_view s, std::size_t n);
std::size_t utf8_length(std::string_view s);

std::string sha256_hex(std::string_view data);
std::uint64_t fnv1a64(std::string_view data);

/// Round to 4 decimals; used everywhere floats are persisted so output bytes
/// are stable.
double round4(double x);
std::string format_fixed(double x, int decimals);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace covaudit::text
