#include "covaudit/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "covaudit/error.hpp"
#include "covaudit/simd.hpp"
#include "covaudit/text.hpp"
#include "json.hpp"

namespace covaudit {

std::string EvidenceSet::concatenated_text() const {
    std::string out;
    for (const auto& it : items) {
        if (!out.empty()) out += "\n\n";
        out += it.text;
    }
    return out;
}

bool ranks_before(const EvidenceItem& a, const EvidenceItem& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
    return a.chunk_index < b.chunk_index;
}

namespace {

void require_nonempty(const CorpusIndex& index) {
    if (index.empty()) throw Error(ErrorKind::EmptyIndex, "index has no chunks");
}

EvidenceItem make_item(const CorpusIndex& index, std::size_t pos, double score) {
    const auto& c = index.chunks()[pos];
    return {c.chunk_id, c.doc_id, c.index, score, c.text, c.section_heading};
}

// Keeps the best k of `items` in rank order.
void take_top_k(std::vector<EvidenceItem>& items, std::size_t k) {
    if (items.size() > k) {
        std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k), items.end(), ranks_before);
        items.resize(k);
    } else {
        std::sort(items.begin(), items.end(), ranks_before);
    }
}

}  // namespace

std::vector<double> bm25_scores(const CorpusIndex& index, std::string_view query, const Bm25Params& params) {
    const auto& lex = index.lexical();
    std::vector<double> scores(index.size(), 0.0);
    if (index.empty()) return scores;
    const double n = static_cast<double>(index.size());
    const double avgdl = lex.avg_length > 0.0 ? lex.avg_length : 1.0;

    // Repeated query terms contribute once per occurrence.
    std::map<std::string, int> qtf;
    for (auto& t : text::analyze(query)) ++qtf[std::move(t)];

    for (const auto& [term, count] : qtf) {
        const auto* postings = index.postings(term);
        if (postings == nullptr) continue;
        const double df = static_cast<double>(postings->size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& p : *postings) {
            const double tf = p.tf;
            const double dl = static_cast<double>(lex.chunks[p.chunk].length);
            const double norm = params.k1 * (1.0 - params.b + params.b * dl / avgdl);
            scores[p.chunk] += count * idf * (tf * (params.k1 + 1.0)) / (tf + norm);
        }
    }
    return scores;
}

EvidenceSet retrieve_lexical(const CorpusIndex& index, std::string_view query, std::size_t k,
                             const Bm25Params& params) {
    require_nonempty(index);
    if (k == 0) throw Error(ErrorKind::ConfigError, "k must be >= 1");
    const auto scores = bm25_scores(index, query, params);
    EvidenceSet out;
    out.strategy = Strategy::Lexical;
    out.k = k;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > 0.0) out.items.push_back(make_item(index, i, scores[i]));
    }
    take_top_k(out.items, k);
    return out;
}

EvidenceSet retrieve_dense(const CorpusIndex& index, const EmbeddingProvider& embed, std::string_view query,
                           std::size_t k) {
    if (k == 0) throw Error(ErrorKind::ConfigError, "k must be >= 1");
    if (!index.has_vectors()) {
        throw Error(ErrorKind::EmbedderMismatch, "index was built without dense vectors");
    }
    if (index.dimension() != embed.dimension()) {
        throw Error(ErrorKind::EmbedderMismatch, "index dimension " + std::to_string(index.dimension()) +
                                                     " != provider dimension " + std::to_string(embed.dimension()));
    }
    if (index.embedder_id() != embed.id()) {
        throw Error(ErrorKind::EmbedderMismatch,
                    "index embedder '" + index.embedder_id() + "' != provider '" + embed.id() + "'");
    }
    const auto q = embed.embed(query);
    if (q.size() != index.dimension()) {
        throw Error(ErrorKind::EmbedderMismatch, "query vector has dimension " + std::to_string(q.size()));
    }
    const float qnorm = std::sqrt(simd::squared_norm(q));

    std::vector<float> dots(index.size());
    simd::dot_rows(q, index.vectors(), index.dimension(), dots);

    EvidenceSet out;
    out.strategy = Strategy::Dense;
    out.k = k;
    out.items.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const float denom = qnorm * index.norm(i);
        const double sim = denom > 0.0f ? static_cast<double>(dots[i] / denom) : 0.0;
        out.items.push_back(make_item(index, i, std::isfinite(sim) ? sim : 0.0));
    }
    take_top_k(out.items, k);
    return out;
}

EvidenceSet rerank(EvidenceSet candidates, std::string_view query) {
    candidates.strategy = Strategy::DenseReranked;
    const auto qwords = text::content_word_set(query);
    for (auto& item : candidates.items) {
        if (qwords.empty()) {
            item.score = 0.0;
            continue;
        }
        const auto cwords = text::content_word_set(item.text);
        std::size_t shared = 0;
        for (const auto& w : qwords) shared += cwords.count(w);
        item.score = static_cast<double>(shared) / static_cast<double>(qwords.size());
    }
    // Input is already in prior rank order, so a stable sort on score keeps it among equals.
    std::stable_sort(candidates.items.begin(), candidates.items.end(),
                     [](const EvidenceItem& a, const EvidenceItem& b) { return a.score > b.score; });
    return candidates;
}

EvidenceSet retrieve_documents(const CorpusIndex& index, std::string_view query, std::size_t k,
                               const Bm25Params& params) {
    require_nonempty(index);
    if (k == 0) throw Error(ErrorKind::ConfigError, "k must be >= 1");
    const auto scores = bm25_scores(index, query, params);

    EvidenceSet out;
    out.strategy = Strategy::Document;
    out.k = k;
    for (const auto& doc_id : index.doc_ids()) {
        const auto& positions = index.chunks_of(doc_id);
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t j = 0; j < positions.size(); ++j) {
            if (scores[positions[j]] > best_score) {
                best_score = scores[positions[j]];
                best = j;
            }
        }
        if (best_score <= 0.0) continue;

        // Best chunk with one neighbour on each side, overlap tokens removed.
        const std::size_t lo = best == 0 ? 0 : best - 1;
        const std::size_t hi = std::min(best + 1, positions.size() - 1);
        const auto mode = index.params().tokenizer;
        std::vector<std::string> tokens;
        std::size_t covered = 0;
        for (std::size_t j = lo; j <= hi; ++j) {
            const auto& c = index.chunks()[positions[j]];
            auto ct = tokenize(c.text, mode);
            const std::size_t skip = (j == lo || covered <= c.token_start) ? 0 : covered - c.token_start;
            for (std::size_t t = skip; t < ct.size(); ++t) tokens.push_back(std::move(ct[t]));
            covered = c.token_end;
        }
        auto item = make_item(index, positions[best], best_score);
        item.text = text::join(tokens, " ");
        out.items.push_back(std::move(item));
    }
    take_top_k(out.items, k);
    return out;
}

// ---------------------------------------------------------------------------

void JudgmentSet::add(const RelevanceJudgment& j) {
    if (j.sufficient && !j.relevant) {
        throw Error(ErrorKind::SchemaError,
                    "judgment " + j.control_id + "/" + j.chunk_id + " is sufficient but not relevant");
    }
    judgments_[{j.control_id, j.chunk_id}] = j;
}

std::optional<RelevanceJudgment> JudgmentSet::find(const std::string& control_id,
                                                   const std::string& chunk_id) const {
    auto it = judgments_.find({control_id, chunk_id});
    if (it == judgments_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> JudgmentSet::control_ids() const {
    std::set<std::string> ids;
    for (const auto& [key, _] : judgments_) ids.insert(key.first);
    return {ids.begin(), ids.end()};
}

namespace {

bool parse_flag(const std::string& s, std::size_t line_no) {
    const std::string t = text::trim(s);
    if (t == "1" || t == "true") return true;
    if (t == "0" || t == "false") return false;
    throw SchemaError(line_no, "expected 0/1, got '" + t + "'");
}

}  // namespace

JudgmentSet parse_judgments(std::string_view csv) {
    JudgmentSet set;
    std::istringstream in{std::string(csv)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto cols = text::split(line, ',');
        if (cols.size() != 4) throw SchemaError(line_no, "judgments row needs 4 columns");
        if (line_no == 1 && text::trim(cols[0]) == "control_id") continue;
        set.add({text::trim(cols[0]), text::trim(cols[1]), parse_flag(cols[2], line_no),
                 parse_flag(cols[3], line_no)});
    }
    return set;
}

JudgmentSet load_judgments(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot open judgments file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_judgments(ss.str());
}

double precision_at_k(const EvidenceSet& ranking, const JudgmentSet& judgments, std::size_t k) {
    if (k == 0) throw Error(ErrorKind::ConfigError, "precision_at_k requires k >= 1");
    const std::size_t depth = std::min(k, ranking.items.size());
    std::size_t relevant = 0;
    for (std::size_t i = 0; i < depth; ++i) {
        auto j = judgments.find(ranking.control_id, ranking.items[i].chunk_id);
        if (j && j->relevant) ++relevant;
    }
    return static_cast<double>(relevant) / static_cast<double>(k);
}

double top1_sufficiency(const std::vector<EvidenceSet>& rankings, const JudgmentSet& judgments) {
    if (rankings.empty()) return 0.0;
    std::size_t sufficient = 0;
    for (const auto& r : rankings) {
        if (r.items.empty()) continue;
        auto j = judgments.find(r.control_id, r.items.front().chunk_id);
        if (j && j->sufficient) ++sufficient;
    }
    return static_cast<double>(sufficient) / static_cast<double>(rankings.size());
}

RetrievalMetrics evaluate_retrieval(const std::vector<EvidenceSet>& rankings, const JudgmentSet& judgments) {
    RetrievalMetrics m;
    m.n_controls = rankings.size();
    if (rankings.empty()) return m;
    double p1 = 0.0;
    double p3 = 0.0;
    for (const auto& r : rankings) {
        p1 += precision_at_k(r, judgments, 1);
        p3 += precision_at_k(r, judgments, 3);
    }
    m.precision_at_1 = p1 / static_cast<double>(rankings.size());
    m.precision_at_3 = p3 / static_cast<double>(rankings.size());
    m.top1_sufficiency = top1_sufficiency(rankings, judgments);
    return m;
}

std::string RetrievalMetrics::to_json() const {
    nlohmann::json j = {{"precision_at_1", text::round4(precision_at_1)},
                        {"precision_at_3", text::round4(precision_at_3)},
                        {"top1_sufficiency", text::round4(top1_sufficiency)},
                        {"n_controls", n_controls}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

Retriever::Retriever(const CorpusIndex& index, const EmbeddingProvider* embedder, Bm25Params bm25)
    : index_(index), embedder_(embedder), bm25_(bm25) {}

EvidenceSet Retriever::retrieve(Strategy strategy, const std::string& control_id, std::string_view query,
                                std::size_t k) const {
    ++calls_;
    EvidenceSet out;
    auto need_embedder = [&]() -> const EmbeddingProvider& {
        if (embedder_ == nullptr) throw Error(ErrorKind::EmbedderMismatch, "dense retrieval needs an embedder");
        return *embedder_;
    };
    switch (strategy) {
        case Strategy::Lexical:
            out = retrieve_lexical(index_, query, k, bm25_);
            break;
        case Strategy::Dense:
            out = retrieve_dense(index_, need_embedder(), query, k);
            break;
        case Strategy::DenseReranked: {
            out = rerank(retrieve_dense(index_, need_embedder(), query, rerank_pool(k)), query);
            if (out.items.size() > k) out.items.resize(k);
            out.k = k;
            break;
        }
        case Strategy::Document:
            out = retrieve_documents(index_, query, k, bm25_);
            break;
    }
    out.control_id = control_id;
    return out;
}

}  // namespace covaudit
