#include "selfscore/rag_index.hpp"

#include "selfscore/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace selfscore {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        std::size_t b = i;
        std::size_t e = j;
        while (b < e && std::ispunct(static_cast<unsigned char>(text[b]))) ++b;
        while (e > b && std::ispunct(static_cast<unsigned char>(text[e - 1]))) --e;
        if (b < e) {
            std::string tok(text.substr(b, e - b));
            for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            tokens.push_back(std::move(tok));
        }
        i = j;
    }
    return tokens;
}

RagIndex RagIndex::build(std::span<const BenchmarkEntry> rag_pool, Bm25Params params) {
    if (rag_pool.empty()) throw PreconditionError("build_rag_index: empty RAG pool");
    RagIndex index;
    index.params_ = params;
    std::vector<std::uint32_t> doc_freq;
    std::uint64_t total_length = 0;
    for (const auto& entry : rag_pool) {
        std::string text = entry.title + "\n" + entry.question_body + "\n" + entry.accepted_answer;
        std::map<std::uint32_t, std::uint32_t> tf;
        const auto tokens = tokenize(text);
        for (const auto& tok : tokens) {
            auto [it, inserted] = index.vocabulary_.try_emplace(tok, static_cast<std::uint32_t>(index.vocabulary_.size()));
            if (inserted) doc_freq.push_back(0);
            ++tf[it->second];
        }
        for (const auto& [term, _] : tf) ++doc_freq[term];
        index.corpus_.doc_terms.emplace_back(tf.begin(), tf.end());
        index.corpus_.doc_length.push_back(static_cast<std::uint32_t>(tokens.size()));
        total_length += tokens.size();
        index.position_.emplace(entry.entry_id, index.ids_.size());
        index.ids_.push_back(entry.entry_id);
        index.titles_.push_back(entry.title);
        index.texts_.push_back(std::move(text));
    }
    const double n = static_cast<double>(rag_pool.size());
    index.corpus_.avg_doc_length = std::max(1.0, static_cast<double>(total_length) / n);
    index.corpus_.idf.reserve(doc_freq.size());
    for (auto df : doc_freq) index.corpus_.idf.push_back(std::log(1.0 + (n - df + 0.5) / (df + 0.5)));
    return index;
}

std::vector<std::uint32_t> RagIndex::query_terms(std::string_view query) const {
    std::vector<std::uint32_t> ids;
    for (const auto& tok : tokenize(query)) {
        if (auto it = vocabulary_.find(tok); it != vocabulary_.end()) ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::vector<double> RagIndex::score_all(std::string_view query, bool parallel) const {
    std::vector<double> scores(ids_.size(), 0.0);
    const auto terms = query_terms(query);
    if (parallel) {
        kernels::bm25_scores_parallel(corpus_, terms, params_, scores);
    } else {
        kernels::bm25_scores_serial(corpus_, terms, params_, scores);
    }
    return scores;
}

std::vector<RagHit> RagIndex::search(std::string_view query, std::size_t top_k) const {
    const auto scores = score_all(query);
    std::vector<RagHit> hits;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > 0.0) hits.push_back({ids_[i], scores[i]});
    }
    const auto keep = std::min(top_k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                      [](const RagHit& a, const RagHit& b) {
                          return a.score != b.score ? a.score > b.score : a.entry_id < b.entry_id;
                      });
    hits.resize(keep);
    return hits;
}

bool RagIndex::contains(std::int64_t entry_id) const { return position_.contains(entry_id); }

const std::string& RagIndex::document(std::int64_t entry_id) const { return texts_.at(position_.at(entry_id)); }

const std::string& RagIndex::title(std::int64_t entry_id) const { return titles_.at(position_.at(entry_id)); }

} // namespace selfscore
