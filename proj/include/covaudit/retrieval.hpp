#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "covaudit/corpus.hpp"
#include "covaudit/embedding.hpp"
#include "covaudit/labels.hpp"

namespace covaudit {

struct EvidenceItem {
    std::string chunk_id;
    std::string doc_id;
    std::size_t chunk_index = 0;
    double score = 0.0;
    std::string text;
    std::optional<std::string> section_heading;

    bool operator==(const EvidenceItem&) const = default;
};

/// Ranked evidence for one control: score descending, ties by
/// (doc_id, chunk_index) ascending; at most `k` items.
struct EvidenceSet {
    std::string control_id;
    std::vector<EvidenceItem> items;
    Strategy strategy = Strategy::Lexical;
    std::size_t k = 0;

    bool empty() const { return items.empty(); }
    /// All excerpt texts joined by blank lines.
    std::string concatenated_text() const;
};

/// Ordering used by every strategy.
bool ranks_before(const EvidenceItem& a, const EvidenceItem& b);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// BM25 score of every chunk for `query` (Lucene-style non-negative IDF).
std::vector<double> bm25_scores(const CorpusIndex& index, std::string_view query, const Bm25Params& params = {});

/// Top-k chunks by BM25; chunks scoring zero are dropped. Throws EmptyIndex.
EvidenceSet retrieve_lexical(const CorpusIndex& index, std::string_view query, std::size_t k,
                             const Bm25Params& params = {});

/// Top-k chunks by cosine similarity against the stored vectors. Throws
/// EmbedderMismatch when the index has no vectors, was built by another
/// provider or has a different dimension.
EvidenceSet retrieve_dense(const CorpusIndex& index, const EmbeddingProvider& embed, std::string_view query,
                           std::size_t k);

/// Re-scores by content-word overlap |query ∩ chunk| / |query| and
/// stable-sorts on the new score, keeping prior rank among equals.
EvidenceSet rerank(EvidenceSet candidates, std::string_view query);

/// One item per document, scored by its best chunk's BM25; the item text is
/// that chunk together with its immediate neighbours. Throws EmptyIndex.
EvidenceSet retrieve_documents(const CorpusIndex& index, std::string_view query, std::size_t k,
                               const Bm25Params& params = {});

// ---------------------------------------------------------------------------
// Relevance judgments and retrieval quality

struct RelevanceJudgment {
    std::string control_id;
    std::string chunk_id;
    bool relevant = false;
    bool sufficient = false;
};

class JudgmentSet {
public:
    /// Throws SchemaError if sufficient && !relevant.
    void add(const RelevanceJudgment& j);
    std::optional<RelevanceJudgment> find(const std::string& control_id, const std::string& chunk_id) const;
    /// Controls with at least one judgment, sorted.
    std::vector<std::string> control_ids() const;
    std::size_t size() const { return judgments_.size(); }

private:
    std::map<std::pair<std::string, std::string>, RelevanceJudgment> judgments_;
};

/// `judgments.csv`: control_id,chunk_id,relevant,sufficient (0/1), header optional.
JudgmentSet load_judgments(const std::filesystem::path& path);
JudgmentSet parse_judgments(std::string_view csv);

/// relevant items among the first min(k, |items|), divided by k. Unjudged
/// items are not relevant.
double precision_at_k(const EvidenceSet& ranking, const JudgmentSet& judgments, std::size_t k);

/// Fraction of rankings whose first item is judged sufficient; an empty
/// ranking counts as insufficient. 0 for no rankings.
double top1_sufficiency(const std::vector<EvidenceSet>& rankings, const JudgmentSet& judgments);

struct RetrievalMetrics {
    double precision_at_1 = 0.0;
    double precision_at_3 = 0.0;
    double top1_sufficiency = 0.0;
    std::size_t n_controls = 0;

    std::string to_json() const;
};

RetrievalMetrics evaluate_retrieval(const std::vector<EvidenceSet>& rankings, const JudgmentSet& judgments);

// ---------------------------------------------------------------------------

/// Dispatches to a strategy and counts calls. Shares the index read-only.
class Retriever {
public:
    Retriever(const CorpusIndex& index, const EmbeddingProvider* embedder, Bm25Params bm25 = {});

    EvidenceSet retrieve(Strategy strategy, const std::string& control_id, std::string_view query,
                         std::size_t k) const;

    std::size_t calls() const { return calls_.load(); }
    const CorpusIndex& index() const { return index_; }

    /// Candidate depth fetched before re-ranking down to k.
    static std::size_t rerank_pool(std::size_t k) { return std::max<std::size_t>(4 * k, 20); }

private:
    const CorpusIndex& index_;
    const EmbeddingProvider* embedder_;
    Bm25Params bm25_;
    mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace covaudit
