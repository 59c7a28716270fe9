#include "covaudit/embedding.hpp"

#include <charconv>
#include <cmath>

#include "covaudit/error.hpp"
#include "covaudit/text.hpp"

namespace covaudit {

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error(ErrorKind::ConfigError, "embedding dimension must be positive");
}

std::string HashingEmbedder::id() const { return "hashing-v1-d" + std::to_string(dimension_); }

std::vector<float> HashingEmbedder::embed(std::string_view input) const {
    std::vector<float> v(dimension_, 0.0f);
    const auto words = text::content_words(input);
    auto add = [&](std::string_view feature, float weight) {
        const std::uint64_t h = text::fnv1a64(feature);
        const float sign = (h >> 63) ? -1.0f : 1.0f;
        v[h % dimension_] += sign * weight;
    };
    for (std::size_t i = 0; i < words.size(); ++i) {
        add(words[i], 1.0f);
        if (i + 1 < words.size()) add(words[i] + " " + words[i + 1], 0.5f);
    }
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    if (norm > 0.0) {
        const auto inv = static_cast<float>(1.0 / std::sqrt(norm));
        for (float& x : v) x *= inv;
    }
    return v;
}

std::unique_ptr<EmbeddingProvider> make_embedder(std::string_view id) {
    constexpr std::string_view prefix = "hashing-v1-d";
    if (id.substr(0, prefix.size()) != prefix) return nullptr;
    const auto digits = id.substr(prefix.size());
    std::size_t dim = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
    if (ec != std::errc{} || p != digits.data() + digits.size() || dim == 0) return nullptr;
    return std::make_unique<HashingEmbedder>(dim);
}

}  // namespace covaudit
