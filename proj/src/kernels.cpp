#include "selfscore/kernels.hpp"

#include <algorithm>
#include <cstddef>

namespace selfscore::kernels {
namespace {

double score_document(const Bm25Corpus& corpus, std::size_t doc, std::span<const std::uint32_t> query_terms,
                      const Bm25Params& params) {
    const auto& terms = corpus.doc_terms[doc];
    const double norm =
        params.k1 * (1.0 - params.b + params.b * static_cast<double>(corpus.doc_length[doc]) / corpus.avg_doc_length);
    double score = 0.0;
    for (std::uint32_t q : query_terms) {
        auto it = std::lower_bound(terms.begin(), terms.end(), q,
                                   [](const auto& entry, std::uint32_t id) { return entry.first < id; });
        if (it == terms.end() || it->first != q) continue;
        const double tf = it->second;
        score += corpus.idf[q] * tf * (params.k1 + 1.0) / (tf + norm);
    }
    return score;
}

} // namespace

void bm25_scores_serial(const Bm25Corpus& corpus, std::span<const std::uint32_t> query_terms,
                        const Bm25Params& params, std::span<double> out) {
    for (std::size_t d = 0; d < corpus.doc_terms.size(); ++d) out[d] = score_document(corpus, d, query_terms, params);
}

void bm25_scores_parallel(const Bm25Corpus& corpus, std::span<const std::uint32_t> query_terms,
                          const Bm25Params& params, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(corpus.doc_terms.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t d = 0; d < n; ++d) {
        out[static_cast<std::size_t>(d)] = score_document(corpus, static_cast<std::size_t>(d), query_terms, params);
    }
}

} // namespace selfscore::kernels
