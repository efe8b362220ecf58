#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

// Data-parallel numeric kernels. Each has a serial reference that the tests
// compare against and the benchmarks time.
namespace selfscore::kernels {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Term-frequency form of a document collection.
struct Bm25Corpus {
    /// Per document: (term id, frequency) sorted by term id.
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> doc_terms;
    std::vector<std::uint32_t> doc_length;
    /// Per term: ln(1 + (N - df + 0.5) / (df + 0.5)).
    std::vector<double> idf;
    double avg_doc_length = 0.0;
};

/// `query_terms` must be sorted and unique; `out` has one slot per document.
void bm25_scores_serial(const Bm25Corpus& corpus, std::span<const std::uint32_t> query_terms,
                        const Bm25Params& params, std::span<double> out);
void bm25_scores_parallel(const Bm25Corpus& corpus, std::span<const std::uint32_t> query_terms,
                          const Bm25Params& params, std::span<double> out);

} // namespace selfscore::kernels
