#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "covaudit/embedding.hpp"

namespace covaudit {

// ---------------------------------------------------------------------------
// Normalisation
// ---------------------------------------------------------------------------

/// First output byte contributed by a source page. Pages are separated by
/// form feeds in the raw text; documents without form feeds carry no marks.
struct PageMark {
    std::size_t offset = 0;
    int page = 1;
};

struct NormalizedText {
    std::string text;
    std::vector<PageMark> page_marks;
};

/// Removes page-number lines, lines repeated on three or more pages
/// (running headers/footers), rejoins words hyphenated across line breaks and
/// joins wrapped paragraph lines. Paragraph breaks, headings, list items and
/// table rows keep their own lines. Throws EmptyDocument if nothing remains.
NormalizedText normalize_document(std::string_view raw);
std::string normalize_text(std::string_view raw);

bool is_page_number_line(std::string_view line);
/// Short line with no sentence punctuation at the end, or a numbered section
/// ("1.2 Scope"), or a markdown heading.
bool looks_like_heading(std::string_view line);

struct Heading {
    std::size_t offset = 0;
    std::string text;
};

/// Headings of a normalised body, in order.
std::vector<Heading> detect_headings(std::string_view body);

// ---------------------------------------------------------------------------
// Documents and chunks
// ---------------------------------------------------------------------------

struct PolicyDocument {
    std::string doc_id;
    std::string title;
    std::string body;
    std::string source_path;
    std::size_t word_count = 0;
    std::vector<PageMark> page_marks;
};

PolicyDocument make_document(std::string doc_id, std::string_view raw, std::string source_path = {});

/// Every `.txt` / `.md` file below `dir`; doc_id is the '/'-separated relative
/// path. Sorted by doc_id.
std::vector<PolicyDocument> load_corpus_dir(const std::filesystem::path& dir);

enum class TokenizerMode { Whitespace, Pretokenized };

std::string_view to_string(TokenizerMode mode);
std::optional<TokenizerMode> parse_tokenizer_mode(std::string_view text);

struct ChunkParams {
    std::size_t chunk_size = 512;
    std::size_t overlap = 50;
    TokenizerMode tokenizer = TokenizerMode::Whitespace;

    std::size_t stride() const { return chunk_size - overlap; }
    void validate() const;  // throws InvalidChunkParams
};

struct PolicyChunk {
    std::string chunk_id;  // doc_id + ":" + index
    std::string doc_id;
    std::size_t index = 0;
    std::size_t token_start = 0;
    std::size_t token_end = 0;  // exclusive
    std::string text;
    std::optional<std::string> section_heading;
    std::optional<int> page_hint;

    bool operator==(const PolicyChunk&) const = default;
};

struct TokenWindow {
    std::size_t start = 0;
    std::size_t end = 0;
    bool operator==(const TokenWindow&) const = default;
};

/// Window i starts at i*stride; a window is kept only if it reaches a token
/// no earlier window covered.
std::vector<TokenWindow> chunk_windows(std::size_t n_tokens, const ChunkParams& params);

std::vector<PolicyChunk> chunk_document(const PolicyDocument& doc, const ChunkParams& params = {});

/// Tokens of `text` under the chunking tokenizer.
std::vector<std::string> tokenize(std::string_view text, TokenizerMode mode);

// ---------------------------------------------------------------------------
// Index
// ---------------------------------------------------------------------------

struct ChunkTerms {
    std::size_t length = 0;
    std::map<std::string, std::uint32_t> tf;
};

struct LexicalStats {
    std::map<std::string, std::uint32_t> df;  // number of chunks containing the term
    std::vector<ChunkTerms> chunks;           // parallel to CorpusIndex::chunks()
    double avg_length = 0.0;

    static LexicalStats compute(const std::vector<PolicyChunk>& chunks);
    std::string serialize() const;  // canonical JSON
    static LexicalStats deserialize(std::string_view json_text);
};

/// Immutable once constructed; safe for concurrent readers.
class CorpusIndex {
public:
    struct Posting {
        std::uint32_t chunk = 0;
        std::uint32_t tf = 0;
    };

    CorpusIndex() = default;
    CorpusIndex(std::vector<PolicyChunk> chunks, ChunkParams params, std::vector<float> vectors = {},
                std::size_t dimension = 0, std::string embedder_id = {});

    const std::vector<PolicyChunk>& chunks() const { return chunks_; }
    const LexicalStats& lexical() const { return lexical_; }
    const ChunkParams& params() const { return params_; }
    std::size_t size() const { return chunks_.size(); }
    bool empty() const { return chunks_.empty(); }

    bool has_vectors() const { return dimension_ > 0; }
    std::size_t dimension() const { return dimension_; }
    const std::string& embedder_id() const { return embedder_id_; }
    std::span<const float> vectors() const { return vectors_; }
    std::span<const float> vector(std::size_t chunk) const;
    float norm(std::size_t chunk) const { return norms_[chunk]; }

    /// nullptr when the term occurs nowhere.
    const std::vector<Posting>* postings(const std::string& term) const;

    /// Document ids in index order.
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    /// Chunk positions of a document, by chunk index.
    const std::vector<std::size_t>& chunks_of(const std::string& doc_id) const;
    std::optional<std::size_t> find_chunk(const std::string& chunk_id) const;

    /// Document token sequence rebuilt from its chunks with overlaps removed.
    std::vector<std::string> document_tokens(const std::string& doc_id) const;

private:
    std::vector<PolicyChunk> chunks_;
    ChunkParams params_;
    LexicalStats lexical_;
    std::vector<float> vectors_;
    std::vector<float> norms_;
    std::size_t dimension_ = 0;
    std::string embedder_id_;

    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::vector<std::string> doc_ids_;
    std::unordered_map<std::string, std::vector<std::size_t>> doc_chunks_;
    std::unordered_map<std::string, std::size_t> chunk_pos_;
};

/// Chunks every document and computes lexical statistics; embeds each chunk
/// once when `embed` is given. Throws DuplicateDocument, EmbeddingBackendError.
CorpusIndex build_corpus_index(const std::vector<PolicyDocument>& docs,
                               const EmbeddingProvider* embed = nullptr,
                               const ChunkParams& params = {});

/// Writes chunks.jsonl, lexical.json and, with vectors, vectors.f32 (row-major
/// little-endian float32) plus vectors.meta.json.
void save_index(const CorpusIndex& index, const std::filesystem::path& dir);
CorpusIndex load_index(const std::filesystem::path& dir);

}  // namespace covaudit
