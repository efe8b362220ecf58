#include "selfscore/ingest.hpp"

#include "selfscore/error.hpp"
#include "selfscore/gateway.hpp"
#include "selfscore/templates.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <thread>
#include <unordered_map>

namespace selfscore {

using json = nlohmann::ordered_json;

EntrySelector::EntrySelector(std::int64_t min_answer_upvotes) : threshold_(min_answer_upvotes) {}

void EntrySelector::add(const RawPost& post) {
    switch (post.post_type) {
    case PostType::question:
        ++question_count_;
        if (!post.accepted_answer_id) {
            ++without_accepted_;
            return;
        }
        questions_.push_back(post);
        return;
    case PostType::answer:
        answer_parent_[post.post_id] = post.parent_id.value_or(0);
        if (post.score >= threshold_) {
            qualifying_[post.post_id] = Answer{post.parent_id.value_or(0), post.score, post.body};
        }
        return;
    case PostType::other:
        return;
    }
}

Selection EntrySelector::finish() const {
    Selection out;
    out.stats.questions = question_count_;
    out.stats.without_accepted_answer = without_accepted_;
    for (const auto& q : questions_) {
        const std::int64_t accepted = *q.accepted_answer_id;
        auto parent = answer_parent_.find(accepted);
        if (parent == answer_parent_.end() || parent->second != q.post_id) {
            ++out.stats.missing_accepted_answer;
            continue;
        }
        auto ans = qualifying_.find(accepted);
        if (ans == qualifying_.end()) {
            ++out.stats.below_threshold;
            continue;
        }
        BenchmarkEntry e;
        e.entry_id = q.post_id;
        e.title = q.title.value_or("");
        e.question_body = q.body;
        e.accepted_answer = ans->second.body;
        e.answer_upvotes = ans->second.score;
        out.entries.push_back(std::move(e));
    }
    return out;
}

Selection select_entries(std::span<const RawPost> posts, std::int64_t min_answer_upvotes) {
    EntrySelector selector(min_answer_upvotes);
    for (const auto& p : posts) selector.add(p);
    return selector.finish();
}

namespace {

std::string question_text(const BenchmarkEntry& entry) {
    if (entry.title.empty()) return entry.question_body;
    return entry.title + "\n\n" + entry.question_body;
}

// Asks one extraction prompt up to `policy.attempts` times. Empty replies and
// gateway errors both count as failed attempts.
std::optional<std::string> ask_with_retries(Gateway& judge, const std::string& prompt, const ExtractionPolicy& policy) {
    const std::vector<ChatMessage> request{{Role::user, prompt}};
    for (int attempt = 0; attempt < policy.attempts; ++attempt) {
        if (attempt > 0) policy.sleep(policy.base_delay * (1LL << (attempt - 1)));
        try {
            ChatResponse r = judge.complete(request);
            auto first = r.text.find_first_not_of(" \t\r\n");
            if (first == std::string::npos) continue;
            auto last = r.text.find_last_not_of(" \t\r\n");
            return r.text.substr(first, last - first + 1);
        } catch (const Error&) {
        }
    }
    return std::nullopt;
}

} // namespace

std::string question_extraction_prompt(const BenchmarkEntry& entry) {
    return render_template(kQuestionExtractionPrompt, {{"question", question_text(entry)}});
}

std::string problem_extraction_prompt(const BenchmarkEntry& entry) {
    return render_template(kProblemExtractionPrompt, {{"problem", entry.accepted_answer}});
}

BenchmarkEntry extract_summaries(const BenchmarkEntry& entry, Gateway& judge, const ExtractionPolicy& policy) {
    if (entry.question_body.empty()) throw PreconditionError("extract_summaries: empty question body");
    if (entry.accepted_answer.empty()) throw PreconditionError("extract_summaries: empty accepted answer");
    BenchmarkEntry out = entry;
    out.question_summary.clear();
    out.underlying_problem.clear();
    auto summary = ask_with_retries(judge, question_extraction_prompt(entry), policy);
    if (!summary) return out;
    auto problem = ask_with_retries(judge, problem_extraction_prompt(entry), policy);
    if (!problem) return out;
    out.question_summary = std::move(*summary);
    out.underlying_problem = std::move(*problem);
    return out;
}

ExtractionReport extract_all(std::span<const BenchmarkEntry> entries, Gateway& judge, int parallelism,
                             const ExtractionPolicy& policy) {
    if (parallelism < 1) throw ConfigError("extraction parallelism must be >= 1");
    ExtractionReport report;
    report.entries.resize(entries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < entries.size(); i = next++) {
            try {
                report.entries[i] = extract_summaries(entries[i], judge, policy);
            } catch (const PreconditionError&) {
                // Nothing to extract from (empty body or answer); counted as unextracted.
                report.entries[i] = entries[i];
                report.entries[i].question_summary.clear();
                report.entries[i].underlying_problem.clear();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(parallelism), entries.size());
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    report.unextracted = static_cast<std::size_t>(
        std::count_if(report.entries.begin(), report.entries.end(), [](const auto& e) { return !e.extracted(); }));
    return report;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    // Unbiased bounded draw by rejection; std::uniform_int_distribution is
    // implementation-defined, which would make splits platform-dependent.
    auto bounded = [&rng](std::uint64_t bound) {
        const std::uint64_t reject_below = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = rng();
            if (x >= reject_below) return x % bound;
        }
    };
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

CorpusSplit split_pool(std::span<const BenchmarkEntry> entries, std::uint64_t seed) {
    if (entries.empty()) throw PreconditionError("split_pool: no entries");
    const auto perm = seeded_permutation(entries.size(), seed);
    CorpusSplit split;
    split.seed = seed;
    const std::size_t rag_count = entries.size() / 2;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        (i < rag_count ? split.rag_pool : split.eval_pool).push_back(entries[perm[i]]);
    }
    return split;
}

namespace {

json entry_to_json(const BenchmarkEntry& e) {
    return json{{"entry_id", e.entry_id},
                {"title", e.title},
                {"question_body", e.question_body},
                {"question_summary", e.question_summary},
                {"underlying_problem", e.underlying_problem},
                {"accepted_answer", e.accepted_answer},
                {"answer_upvotes", e.answer_upvotes}};
}

BenchmarkEntry entry_from_json(const json& j) {
    BenchmarkEntry e;
    e.entry_id = j.at("entry_id").get<std::int64_t>();
    e.title = j.value("title", std::string{});
    e.question_body = j.at("question_body").get<std::string>();
    e.question_summary = j.value("question_summary", std::string{});
    e.underlying_problem = j.value("underlying_problem", std::string{});
    e.accepted_answer = j.at("accepted_answer").get<std::string>();
    e.answer_upvotes = j.at("answer_upvotes").get<std::int64_t>();
    return e;
}

std::vector<std::int64_t> ids_of(const std::vector<BenchmarkEntry>& pool) {
    std::vector<std::int64_t> ids;
    ids.reserve(pool.size());
    for (const auto& e : pool) ids.push_back(e.entry_id);
    return ids;
}

} // namespace

void write_corpus(std::ostream& out, std::span<const BenchmarkEntry> entries) {
    for (const auto& e : entries) out << entry_to_json(e).dump() << '\n';
    if (!out) throw IoError("failed writing corpus");
}

std::vector<BenchmarkEntry> read_corpus(std::istream& in) {
    std::vector<BenchmarkEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            entries.push_back(entry_from_json(json::parse(line)));
        } catch (const nlohmann::json::exception& ex) {
            throw IoError("corpus line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return entries;
}

std::string split_to_json(const CorpusSplit& split, std::int64_t min_upvotes, std::int64_t rag_min_upvotes) {
    json doc{{"seed", split.seed},
             {"min_upvotes", min_upvotes},
             {"rag_min_upvotes", rag_min_upvotes},
             {"rag_pool", ids_of(split.rag_pool)},
             {"eval_pool", ids_of(split.eval_pool)}};
    return doc.dump(2) + "\n";
}

SplitIds split_ids_from_json(std::string_view text) {
    auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw IoError("split file is not a JSON object");
    try {
        return SplitIds{doc.at("seed").get<std::uint64_t>(), doc.at("rag_pool").get<std::vector<std::int64_t>>(),
                        doc.at("eval_pool").get<std::vector<std::int64_t>>()};
    } catch (const nlohmann::json::exception& ex) {
        throw IoError(std::string("split file: ") + ex.what());
    }
}

CorpusSplit apply_split(std::span<const BenchmarkEntry> corpus, const SplitIds& ids) {
    std::unordered_map<std::int64_t, const BenchmarkEntry*> by_id;
    for (const auto& e : corpus) by_id.emplace(e.entry_id, &e);
    auto take = [&](const std::vector<std::int64_t>& list) {
        std::vector<BenchmarkEntry> pool;
        for (auto id : list) {
            auto it = by_id.find(id);
            if (it == by_id.end()) throw ConfigError("split references entry " + std::to_string(id) + " not in corpus");
            pool.push_back(*it->second);
        }
        return pool;
    };
    return CorpusSplit{take(ids.rag_ids), take(ids.eval_ids), ids.seed};
}

} // namespace selfscore
