#include "covaudit/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_set>

#include "covaudit/error.hpp"
#include "covaudit/simd.hpp"
#include "covaudit/text.hpp"
#include "json.hpp"

namespace covaudit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class LineKind { Heading, List, Table, Text };

struct SourceLine {
    std::string text;
    int page = 1;
};

std::string collapse_spaces(std::string_view line) {
    std::string out;
    out.reserve(line.size());
    bool pending_space = false;
    for (char c : line) {
        if (text::is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

bool ends_with_sentence_punct(std::string_view line) {
    if (line.empty()) return false;
    const char c = line.back();
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

bool has_letter(std::string_view line) {
    return std::any_of(line.begin(), line.end(),
                       [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

bool is_numbered_heading(std::string_view line) {
    static const std::regex multi(R"(^\d+(\.\d+)+\.?\s+\S.*$)");
    static const std::regex single(R"(^\d+\.?\s+[A-Z].*$)");
    if (line.size() >= 80 || ends_with_sentence_punct(line)) return false;
    const std::string s(line);
    return std::regex_match(s, multi) || std::regex_match(s, single);
}

bool is_table_row(std::string_view line) { return !line.empty() && line.front() == '|'; }

bool is_list_item(std::string_view line) {
    static const std::regex marker(R"(^([-*+]|\d+[.)]|[A-Za-z][.)]|\(\w{1,4}\))\s+\S.*$)");
    if (line.rfind("\xE2\x80\xA2", 0) == 0) return true;  // bullet
    return std::regex_match(std::string(line), marker);
}

bool is_plain_heading(std::string_view line) {
    if (line.empty() || line.size() >= 80) return false;
    if (ends_with_sentence_punct(line) || !has_letter(line)) return false;
    const auto first = static_cast<unsigned char>(line.front());
    return !std::islower(first);
}

LineKind classify(std::string_view line, bool first_in_block) {
    if (!line.empty() && line.front() == '#') return LineKind::Heading;
    if (is_numbered_heading(line)) return LineKind::Heading;
    if (is_table_row(line)) return LineKind::Table;
    if (is_list_item(line)) return LineKind::List;
    if (first_in_block && is_plain_heading(line)) return LineKind::Heading;
    return LineKind::Text;
}

bool hyphen_joinable(const std::string& cur, const std::string& next) {
    if (cur.size() < 2 || next.empty()) return false;
    if (cur.back() != '-' || !std::isalpha(static_cast<unsigned char>(cur[cur.size() - 2]))) return false;
    return std::islower(static_cast<unsigned char>(next.front())) != 0;
}

std::string heading_text(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && line[i] == '#') ++i;
    return text::trim(line.substr(i));
}

}  // namespace

bool is_page_number_line(std::string_view line) {
    static const std::regex pattern(
        R"(^(page\s+\d+(\s+of\s+\d+)?|-\s*\d+\s*-|\d+|\d+\s*/\s*\d+|\[\d+\]|p\.\s*\d+)$)",
        std::regex::icase);
    const std::string t = text::trim(line);
    return !t.empty() && std::regex_match(t, pattern);
}

bool looks_like_heading(std::string_view line) {
    const std::string t = text::trim(line);
    return classify(t, true) == LineKind::Heading;
}

NormalizedText normalize_document(std::string_view raw) {
    // Split into pages and lines.
    std::vector<SourceLine> lines;
    int page = 1;
    bool has_pages = false;
    std::string cur;
    auto flush = [&] {
        lines.push_back({collapse_spaces(cur), page});
        cur.clear();
    };
    for (char c : raw) {
        if (c == '\f') {
            if (!cur.empty()) flush();
            ++page;
            has_pages = true;
        } else if (c == '\n') {
            flush();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    flush();
    const int n_pages = page;

    // Running headers and footers: identical line on >= 3 pages.
    std::unordered_set<std::string> repeated;
    if (n_pages >= 3) {
        std::unordered_map<std::string, std::set<int>> pages_of;
        for (const auto& l : lines) {
            if (!l.text.empty()) pages_of[l.text].insert(l.page);
        }
        for (const auto& [t, ps] : pages_of) {
            if (ps.size() >= 3) repeated.insert(t);
        }
    }
    std::erase_if(lines, [&](const SourceLine& l) {
        return !l.text.empty() && (repeated.count(l.text) > 0 || is_page_number_line(l.text));
    });

    // Words hyphenated across a line break.
    std::vector<SourceLine> joined;
    for (auto& l : lines) {
        if (!joined.empty() && hyphen_joinable(joined.back().text, l.text)) {
            joined.back().text.pop_back();
            joined.back().text += l.text;
        } else {
            joined.push_back(std::move(l));
        }
    }

    // Blocks separated by blank lines; wrapped text lines are joined.
    struct OutLine {
        std::string text;
        LineKind kind;
        std::vector<std::pair<std::size_t, int>> page_starts;  // (offset within line, page)
    };
    std::vector<std::vector<OutLine>> blocks;
    std::vector<OutLine> block;
    auto end_block = [&] {
        if (!block.empty()) blocks.push_back(std::move(block));
        block.clear();
    };
    for (const auto& l : joined) {
        if (l.text.empty()) {
            end_block();
            continue;
        }
        const LineKind kind = classify(l.text, block.empty());
        if (kind == LineKind::Text && !block.empty() &&
            (block.back().kind == LineKind::Text || block.back().kind == LineKind::List)) {
            auto& prev = block.back();
            prev.text += ' ';
            prev.page_starts.emplace_back(prev.text.size(), l.page);
            prev.text += l.text;
        } else {
            block.push_back({l.text, kind, {{0, l.page}}});
        }
    }
    end_block();

    NormalizedText out;
    int last_page = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (b) out.text += "\n\n";
        for (std::size_t i = 0; i < blocks[b].size(); ++i) {
            if (i) out.text += '\n';
            const std::size_t base = out.text.size();
            for (const auto& [off, pg] : blocks[b][i].page_starts) {
                if (has_pages && pg > last_page) {
                    out.page_marks.push_back({base + off, pg});
                    last_page = pg;
                }
            }
            out.text += blocks[b][i].text;
        }
    }
    if (out.text.empty()) throw Error(ErrorKind::EmptyDocument, "document is empty after normalization");
    return out;
}

std::string normalize_text(std::string_view raw) { return normalize_document(raw).text; }

std::vector<Heading> detect_headings(std::string_view body) {
    std::vector<Heading> headings;
    std::size_t pos = 0;
    bool first_in_block = true;
    while (pos <= body.size()) {
        std::size_t eol = body.find('\n', pos);
        if (eol == std::string_view::npos) eol = body.size();
        const std::string line = text::trim(body.substr(pos, eol - pos));
        if (line.empty()) {
            first_in_block = true;
        } else {
            if (classify(line, first_in_block) == LineKind::Heading) {
                headings.push_back({pos, heading_text(line)});
            }
            first_in_block = false;
        }
        pos = eol + 1;
    }
    return headings;
}

PolicyDocument make_document(std::string doc_id, std::string_view raw, std::string source_path) {
    NormalizedText norm;
    try {
        norm = normalize_document(raw);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::EmptyDocument) {
            throw Error(ErrorKind::EmptyDocument, "document '" + doc_id + "' is empty after normalization");
        }
        throw;
    }
    PolicyDocument doc;
    doc.doc_id = std::move(doc_id);
    doc.source_path = source_path.empty() ? doc.doc_id : std::move(source_path);
    doc.word_count = text::count_whitespace_tokens(norm.text);
    doc.page_marks = std::move(norm.page_marks);
    doc.body = std::move(norm.text);
    const auto headings = detect_headings(doc.body);
    if (!headings.empty() && headings.front().offset == 0) {
        doc.title = headings.front().text;
    } else {
        doc.title = fs::path(doc.doc_id).stem().string();
    }
    return doc;
}

std::vector<PolicyDocument> load_corpus_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::IoError, "corpus directory not found: " + dir.string());
    std::vector<std::pair<std::string, fs::path>> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = text::to_lower(entry.path().extension().string());
        if (ext != ".txt" && ext != ".md") continue;
        files.emplace_back(fs::relative(entry.path(), dir).generic_string(), entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<PolicyDocument> docs;
    docs.reserve(files.size());
    for (const auto& [id, path] : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        docs.push_back(make_document(id, ss.str(), path.string()));
    }
    return docs;
}

std::string_view to_string(TokenizerMode mode) {
    return mode == TokenizerMode::Whitespace ? "whitespace" : "pretokenized";
}

std::optional<TokenizerMode> parse_tokenizer_mode(std::string_view text) {
    if (text == "whitespace") return TokenizerMode::Whitespace;
    if (text == "pretokenized" || text == "model") return TokenizerMode::Pretokenized;
    return std::nullopt;
}

void ChunkParams::validate() const {
    if (chunk_size == 0 || overlap >= chunk_size) {
        throw Error(ErrorKind::InvalidChunkParams, "need 0 <= overlap < chunk_size, got chunk_size=" +
                                                       std::to_string(chunk_size) +
                                                       " overlap=" + std::to_string(overlap));
    }
}

std::vector<TokenWindow> chunk_windows(std::size_t n_tokens, const ChunkParams& params) {
    params.validate();
    std::vector<TokenWindow> windows;
    std::size_t covered = 0;
    for (std::size_t start = 0; start < n_tokens; start += params.stride()) {
        const std::size_t end = std::min(start + params.chunk_size, n_tokens);
        if (end > covered) {
            windows.push_back({start, end});
            covered = end;
        }
        if (end == n_tokens) break;
    }
    return windows;
}

namespace {

std::vector<text::TokenSpan> token_spans(std::string_view s, TokenizerMode mode) {
    return mode == TokenizerMode::Whitespace ? text::whitespace_spans(s) : text::pretokenized_spans(s);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s, TokenizerMode mode) {
    std::vector<std::string> out;
    for (const auto& sp : token_spans(s, mode)) out.emplace_back(s.substr(sp.begin, sp.end - sp.begin));
    return out;
}

std::vector<PolicyChunk> chunk_document(const PolicyDocument& doc, const ChunkParams& params) {
    params.validate();
    const auto spans = token_spans(doc.body, params.tokenizer);
    if (spans.empty()) throw Error(ErrorKind::EmptyDocument, "document '" + doc.doc_id + "' has no tokens");
    const auto headings = detect_headings(doc.body);

    std::vector<PolicyChunk> chunks;
    for (const auto& w : chunk_windows(spans.size(), params)) {
        PolicyChunk c;
        c.doc_id = doc.doc_id;
        c.index = chunks.size();
        c.chunk_id = doc.doc_id + ":" + std::to_string(c.index);
        c.token_start = w.start;
        c.token_end = w.end;
        const std::size_t b = spans[w.start].begin;
        const std::size_t e = spans[w.end - 1].end;
        c.text = doc.body.substr(b, e - b);

        auto h = std::upper_bound(headings.begin(), headings.end(), b,
                                  [](std::size_t off, const Heading& hd) { return off < hd.offset; });
        if (h != headings.begin()) c.section_heading = std::prev(h)->text;

        auto p = std::upper_bound(doc.page_marks.begin(), doc.page_marks.end(), b,
                                  [](std::size_t off, const PageMark& m) { return off < m.offset; });
        if (p != doc.page_marks.begin()) c.page_hint = std::prev(p)->page;
        chunks.push_back(std::move(c));
    }
    return chunks;
}

// ---------------------------------------------------------------------------

LexicalStats LexicalStats::compute(const std::vector<PolicyChunk>& chunks) {
    LexicalStats stats;
    stats.chunks.reserve(chunks.size());
    double total = 0.0;
    for (const auto& c : chunks) {
        ChunkTerms ct;
        for (auto& term : text::analyze(c.text)) {
            ++ct.tf[std::move(term)];
            ++ct.length;
        }
        for (const auto& [term, _] : ct.tf) ++stats.df[term];
        total += static_cast<double>(ct.length);
        stats.chunks.push_back(std::move(ct));
    }
    stats.avg_length = chunks.empty() ? 0.0 : total / static_cast<double>(chunks.size());
    return stats;
}

std::string LexicalStats::serialize() const {
    json j;
    j["avg_length"] = avg_length;
    j["df"] = df;
    json arr = json::array();
    for (const auto& c : chunks) arr.push_back({{"length", c.length}, {"tf", c.tf}});
    j["chunks"] = std::move(arr);
    return j.dump();
}

LexicalStats LexicalStats::deserialize(std::string_view json_text) {
    LexicalStats s;
    try {
        const json j = json::parse(json_text);
        s.avg_length = j.at("avg_length").get<double>();
        s.df = j.at("df").get<std::map<std::string, std::uint32_t>>();
        for (const auto& c : j.at("chunks")) {
            s.chunks.push_back({c.at("length").get<std::size_t>(),
                                c.at("tf").get<std::map<std::string, std::uint32_t>>()});
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::IoError, std::string("malformed lexical stats: ") + e.what());
    }
    return s;
}

CorpusIndex::CorpusIndex(std::vector<PolicyChunk> chunks, ChunkParams params, std::vector<float> vectors,
                         std::size_t dimension, std::string embedder_id)
    : chunks_(std::move(chunks)),
      params_(params),
      lexical_(LexicalStats::compute(chunks_)),
      vectors_(std::move(vectors)),
      dimension_(dimension),
      embedder_id_(std::move(embedder_id)) {
    if (dimension_ > 0 && vectors_.size() != chunks_.size() * dimension_) {
        throw Error(ErrorKind::EmbedderMismatch, "vector count does not match chunk count");
    }
    if (dimension_ == 0 && !vectors_.empty()) {
        throw Error(ErrorKind::EmbedderMismatch, "vectors given without a dimension");
    }
    norms_.resize(chunks_.size(), 0.0f);
    for (std::size_t i = 0; dimension_ > 0 && i < chunks_.size(); ++i) {
        norms_[i] = std::sqrt(simd::squared_norm(vector(i)));
    }
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        const auto& c = chunks_[i];
        for (const auto& [term, tf] : lexical_.chunks[i].tf) {
            postings_[term].push_back({static_cast<std::uint32_t>(i), tf});
        }
        auto [it, inserted] = doc_chunks_.try_emplace(c.doc_id);
        if (inserted) doc_ids_.push_back(c.doc_id);
        it->second.push_back(i);
        chunk_pos_.emplace(c.chunk_id, i);
    }
    for (auto& [_, idx] : doc_chunks_) {
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return chunks_[a].index < chunks_[b].index; });
    }
}

std::span<const float> CorpusIndex::vector(std::size_t chunk) const {
    return std::span<const float>(vectors_).subspan(chunk * dimension_, dimension_);
}

const std::vector<CorpusIndex::Posting>* CorpusIndex::postings(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
}

const std::vector<std::size_t>& CorpusIndex::chunks_of(const std::string& doc_id) const {
    static const std::vector<std::size_t> none;
    auto it = doc_chunks_.find(doc_id);
    return it == doc_chunks_.end() ? none : it->second;
}

std::optional<std::size_t> CorpusIndex::find_chunk(const std::string& chunk_id) const {
    auto it = chunk_pos_.find(chunk_id);
    if (it == chunk_pos_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> CorpusIndex::document_tokens(const std::string& doc_id) const {
    std::vector<std::string> tokens;
    for (std::size_t pos : chunks_of(doc_id)) {
        const auto& c = chunks_[pos];
        auto chunk_tokens = tokenize(c.text, params_.tokenizer);
        const std::size_t skip = tokens.size() > c.token_start ? tokens.size() - c.token_start : 0;
        for (std::size_t i = skip; i < chunk_tokens.size(); ++i) tokens.push_back(std::move(chunk_tokens[i]));
    }
    return tokens;
}

CorpusIndex build_corpus_index(const std::vector<PolicyDocument>& docs, const EmbeddingProvider* embed,
                               const ChunkParams& params) {
    params.validate();
    std::unordered_set<std::string> seen;
    std::vector<PolicyChunk> chunks;
    for (const auto& d : docs) {
        if (!seen.insert(d.doc_id).second) {
            throw Error(ErrorKind::DuplicateDocument, "duplicate doc_id '" + d.doc_id + "'");
        }
        auto dc = chunk_document(d, params);
        std::move(dc.begin(), dc.end(), std::back_inserter(chunks));
    }
    std::vector<float> vectors;
    std::size_t dim = 0;
    std::string embedder_id;
    if (embed != nullptr) {
        dim = embed->dimension();
        embedder_id = embed->id();
        vectors.reserve(chunks.size() * dim);
        for (const auto& c : chunks) {
            std::vector<float> v;
            try {
                v = embed->embed(c.text);
            } catch (const std::exception& e) {
                throw EmbeddingBackendError(c.chunk_id, e.what());
            }
            if (v.size() != dim) {
                throw EmbeddingBackendError(c.chunk_id, "provider returned dimension " + std::to_string(v.size()) +
                                                            ", expected " + std::to_string(dim));
            }
            for (float x : v) {
                if (!std::isfinite(x)) throw EmbeddingBackendError(c.chunk_id, "non-finite embedding value");
            }
            vectors.insert(vectors.end(), v.begin(), v.end());
        }
    }
    return CorpusIndex(std::move(chunks), params, std::move(vectors), dim, std::move(embedder_id));
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json chunk_to_json(const PolicyChunk& c) {
    json j;
    j["chunk_id"] = c.chunk_id;
    j["doc_id"] = c.doc_id;
    j["index"] = c.index;
    j["token_start"] = c.token_start;
    j["token_end"] = c.token_end;
    j["text"] = c.text;
    j["section_heading"] = c.section_heading ? json(*c.section_heading) : json(nullptr);
    j["page_hint"] = c.page_hint ? json(*c.page_hint) : json(nullptr);
    return j;
}

PolicyChunk chunk_from_json(const json& j) {
    PolicyChunk c;
    c.chunk_id = j.at("chunk_id").get<std::string>();
    c.doc_id = j.at("doc_id").get<std::string>();
    c.index = j.at("index").get<std::size_t>();
    c.token_start = j.at("token_start").get<std::size_t>();
    c.token_end = j.at("token_end").get<std::size_t>();
    c.text = j.at("text").get<std::string>();
    if (j.contains("section_heading") && !j["section_heading"].is_null()) {
        c.section_heading = j["section_heading"].get<std::string>();
    }
    if (j.contains("page_hint") && !j["page_hint"].is_null()) c.page_hint = j["page_hint"].get<int>();
    return c;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, std::string_view data) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

}  // namespace

void save_index(const CorpusIndex& index, const fs::path& dir) {
    fs::create_directories(dir);
    std::string lines;
    for (const auto& c : index.chunks()) lines += chunk_to_json(c).dump() + "\n";
    write_file(dir / "chunks.jsonl", lines);

    json lex = json::parse(index.lexical().serialize());
    lex["params"] = {{"chunk_size", index.params().chunk_size},
                     {"overlap", index.params().overlap},
                     {"tokenizer", std::string(to_string(index.params().tokenizer))}};
    write_file(dir / "lexical.json", lex.dump() + "\n");

    fs::remove(dir / "vectors.f32");
    fs::remove(dir / "vectors.meta.json");
    if (index.has_vectors()) {
        std::string bytes;
        bytes.reserve(index.vectors().size() * 4);
        for (float f : index.vectors()) {
            auto u = std::bit_cast<std::uint32_t>(f);
            for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<char>((u >> (8 * k)) & 0xFF));
        }
        write_file(dir / "vectors.f32", bytes);
        json meta = {{"dimension", index.dimension()},
                     {"count", index.size()},
                     {"embedder_id", index.embedder_id()}};
        write_file(dir / "vectors.meta.json", meta.dump(2) + "\n");
    }
}

CorpusIndex load_index(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::IoError, "index directory not found: " + dir.string());
    std::vector<PolicyChunk> chunks;
    {
        std::istringstream in(read_file(dir / "chunks.jsonl"));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (text::trim(line).empty()) continue;
            try {
                chunks.push_back(chunk_from_json(json::parse(line)));
            } catch (const json::exception& e) {
                throw Error(ErrorKind::IoError,
                            "chunks.jsonl line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    }
    ChunkParams params;
    const std::string lex_text = read_file(dir / "lexical.json");
    try {
        const json lex = json::parse(lex_text);
        const auto& p = lex.at("params");
        params.chunk_size = p.at("chunk_size").get<std::size_t>();
        params.overlap = p.at("overlap").get<std::size_t>();
        params.tokenizer =
            parse_tokenizer_mode(p.at("tokenizer").get<std::string>()).value_or(TokenizerMode::Whitespace);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::IoError, std::string("lexical.json: ") + e.what());
    }

    std::vector<float> vectors;
    std::size_t dim = 0;
    std::string embedder_id;
    if (fs::exists(dir / "vectors.meta.json")) {
        const json meta = json::parse(read_file(dir / "vectors.meta.json"));
        dim = meta.at("dimension").get<std::size_t>();
        const auto count = meta.at("count").get<std::size_t>();
        embedder_id = meta.at("embedder_id").get<std::string>();
        const std::string bytes = read_file(dir / "vectors.f32");
        if (count != chunks.size() || bytes.size() != count * dim * 4) {
            throw Error(ErrorKind::IoError, "vectors.f32 does not match chunks.jsonl");
        }
        vectors.resize(count * dim);
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            std::uint32_t u = 0;
            for (int k = 0; k < 4; ++k) {
                u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + k])) << (8 * k);
            }
            vectors[i] = std::bit_cast<float>(u);
        }
    }
    CorpusIndex index(std::move(chunks), params, std::move(vectors), dim, std::move(embedder_id));

    json stored = json::parse(lex_text);
    stored.erase("params");
    if (stored.dump() != index.lexical().serialize()) {
        throw Error(ErrorKind::IoError, "lexical.json is inconsistent with chunks.jsonl");
    }
    return index;
}

}  // namespace covaudit
