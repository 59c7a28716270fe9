#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace covaudit {

/// Maps text to a fixed-dimension vector. Implementations must be
/// deterministic and safe to call concurrently.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string id() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<float> embed(std::string_view text) const = 0;
};

/// Signed feature hashing of content-word unigrams and bigrams, L2
/// normalised. Needs no model files, so indexes built with it are
/// reproducible anywhere.
class HashingEmbedder final : public EmbeddingProvider {
public:
    explicit HashingEmbedder(std::size_t dimension = 256);

    std::string id() const override;
    std::size_t dimension() const override { return dimension_; }
    std::vector<float> embed(std::string_view text) const override;

private:
    std::size_t dimension_;
};

/// Reconstructs a provider from the id stored in an index ("hashing-v1-d256").
/// Returns nullptr for ids this build cannot instantiate.
std::unique_ptr<EmbeddingProvider> make_embedder(std::string_view id);

}  // namespace covaudit
