#pragma once

#include "selfscore/ingest.hpp"
#include "selfscore/kernels.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace selfscore {

using kernels::Bm25Params;

struct RagHit {
    std::int64_t entry_id = 0;
    double score = 0.0;
};

/// Lowercased whitespace tokens with leading/trailing ASCII punctuation
/// trimmed.
std::vector<std::string> tokenize(std::string_view text);

/// BM25 lexical index over the RAG pool. Each document is the entry's
/// title, question body and accepted answer.
class RagIndex {
public:
    /// Throws PreconditionError on an empty pool.
    static RagIndex build(std::span<const BenchmarkEntry> rag_pool, Bm25Params params = {});

    /// Up to top_k documents with a positive score, best first; ties go to
    /// the lower entry id.
    std::vector<RagHit> search(std::string_view query, std::size_t top_k) const;

    /// Score of every document in build order.
    std::vector<double> score_all(std::string_view query, bool parallel = true) const;

    std::size_t size() const noexcept { return ids_.size(); }
    bool contains(std::int64_t entry_id) const;
    const std::string& document(std::int64_t entry_id) const;
    const std::string& title(std::int64_t entry_id) const;
    const kernels::Bm25Corpus& corpus() const noexcept { return corpus_; }
    std::vector<std::uint32_t> query_terms(std::string_view query) const;

private:
    Bm25Params params_;
    std::vector<std::int64_t> ids_;
    std::vector<std::string> titles_;
    std::vector<std::string> texts_;
    std::unordered_map<std::int64_t, std::size_t> position_;
    std::unordered_map<std::string, std::uint32_t> vocabulary_;
    kernels::Bm25Corpus corpus_;
};

} // namespace selfscore
