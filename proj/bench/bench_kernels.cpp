#include "selfscore/kernels.hpp"
#include "selfscore/stats.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace selfscore;

namespace {

kernels::Bm25Corpus synthetic_corpus(std::size_t docs, std::uint32_t vocabulary) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::uint32_t> term(0, vocabulary - 1), length(20, 400);
    kernels::Bm25Corpus c;
    std::vector<std::uint32_t> df(vocabulary, 0);
    double total = 0;
    for (std::size_t d = 0; d < docs; ++d) {
        std::vector<std::uint32_t> words(length(rng));
        for (auto& w : words) w = term(rng);
        std::sort(words.begin(), words.end());
        std::vector<std::pair<std::uint32_t, std::uint32_t>> tf;
        for (auto w : words) {
            if (!tf.empty() && tf.back().first == w) {
                ++tf.back().second;
            } else {
                tf.emplace_back(w, 1);
                ++df[w];
            }
        }
        c.doc_length.push_back(static_cast<std::uint32_t>(words.size()));
        total += static_cast<double>(words.size());
        c.doc_terms.push_back(std::move(tf));
    }
    const double n = static_cast<double>(docs);
    for (auto f : df) c.idf.push_back(std::log(1.0 + (n - f + 0.5) / (f + 0.5)));
    c.avg_doc_length = std::max(1.0, total / n);
    return c;
}

const std::vector<std::uint32_t> kQuery{3, 17, 99, 512, 1024, 4000};

void BM_Bm25Serial(benchmark::State& state) {
    const auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 5000);
    std::vector<double> out(corpus.doc_terms.size());
    for (auto _ : state) {
        kernels::bm25_scores_serial(corpus, kQuery, {}, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Bm25Parallel(benchmark::State& state) {
    const auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 5000);
    std::vector<double> out(corpus.doc_terms.size());
    for (auto _ : state) {
        kernels::bm25_scores_parallel(corpus, kQuery, {}, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::vector<stats::Cohort> cohorts(int k) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(50, 10);
    std::vector<stats::Cohort> out;
    for (int i = 0; i < k; ++i) {
        stats::Cohort c{"g" + std::to_string(i), std::vector<double>(60)};
        for (auto& x : c.values) x = noise(rng);
        out.push_back(std::move(c));
    }
    return out;
}

void BM_TukeySerial(benchmark::State& state) {
    const auto groups = cohorts(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stats::tukey_hsd(groups, 0.05, stats::Execution::serial));
}

void BM_TukeyParallel(benchmark::State& state) {
    const auto groups = cohorts(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(stats::tukey_hsd(groups, 0.05, stats::Execution::parallel));
}

} // namespace

BENCHMARK(BM_Bm25Serial)->Arg(1000)->Arg(20000);
BENCHMARK(BM_Bm25Parallel)->Arg(1000)->Arg(20000);
BENCHMARK(BM_TukeySerial)->Arg(4)->Arg(12);
BENCHMARK(BM_TukeyParallel)->Arg(4)->Arg(12);
BENCHMARK_MAIN();
