#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace selfscore {

class Gateway;

enum class PostType { question, answer, other };

/// One `<row>` of a Stack Exchange Posts.xml dump. `body` is plain text.
struct RawPost {
    std::int64_t post_id = 0;
    PostType post_type = PostType::other;
    std::optional<std::int64_t> parent_id;
    std::optional<std::int64_t> accepted_answer_id;
    std::int64_t score = 0;
    std::optional<std::string> title;
    std::string body;
    std::vector<std::string> tags;
};

/// Pull-based streaming reader over a Posts.xml document. Only the current
/// element is buffered, so memory does not grow with the document.
///
/// Rows missing `Id`/`PostTypeId` (or answers missing `ParentId`) are skipped
/// and counted. Structural XML errors throw XmlParseError carrying the byte
/// offset of the last fully consumed construct.
class PostsReader {
public:
    explicit PostsReader(std::istream& in, std::size_t chunk_size = 64 * 1024);

    /// Next well-formed row, or nullopt once the root element has closed.
    std::optional<RawPost> next();

    std::size_t skipped_rows() const noexcept { return skipped_; }
    std::size_t rows_read() const noexcept { return rows_; }
    std::uint64_t offset() const noexcept { return consumed_; }

private:
    struct Element {
        std::string name;
        std::vector<std::pair<std::string, std::string>> attributes;
        bool self_closing = false;
        bool closing = false;
    };

    int peek();
    int get();
    bool fill();
    [[noreturn]] void fail(const std::string& what) const;
    void expect(std::string_view literal);
    void skip_whitespace();
    void skip_until(std::string_view terminator);
    std::string read_name();
    std::string read_attribute_value();
    Element read_element();
    void read_prolog();
    std::optional<RawPost> to_post(const Element& row);

    std::istream& in_;
    std::size_t chunk_size_;
    std::string buffer_;
    std::size_t pos_ = 0;
    std::uint64_t consumed_ = 0;   // bytes consumed from the stream
    std::uint64_t last_valid_ = 0; // end offset of the last complete construct
    bool started_ = false;
    bool finished_ = false;
    std::string root_;
    std::size_t skipped_ = 0;
    std::size_t rows_ = 0;
};

struct ParsedPosts {
    std::vector<RawPost> posts;
    std::size_t skipped_rows = 0;
};

/// Reads an entire dump into memory; for large dumps prefer PostsReader.
ParsedPosts parse_posts_dump(std::istream& xml);

/// Strips HTML markup to plain text: tags removed, entities decoded, text in
/// `<pre>` kept verbatim, whitespace elsewhere collapsed. Block-level tags
/// become line breaks.
std::string html_to_text(std::string_view html);

/// Decodes one XML/HTML character or entity reference body (without `&`/`;`).
std::optional<std::string> decode_entity(std::string_view name);

/// One curated problem.
struct BenchmarkEntry {
    std::int64_t entry_id = 0;
    std::string title;
    std::string question_body;
    std::string question_summary;
    std::string underlying_problem;
    std::string accepted_answer;
    std::int64_t answer_upvotes = 0;

    bool extracted() const noexcept { return !question_summary.empty() && !underlying_problem.empty(); }
    bool operator==(const BenchmarkEntry&) const = default;
};

struct SelectionStats {
    std::size_t questions = 0;
    std::size_t without_accepted_answer = 0;
    std::size_t missing_accepted_answer = 0;
    std::size_t below_threshold = 0;
};

struct Selection {
    std::vector<BenchmarkEntry> entries;
    SelectionStats stats;
};

/// Incremental form of select_entries, fed one post at a time so a dump can
/// be streamed. Holds only questions that name an accepted answer and the
/// answers that clear the threshold.
class EntrySelector {
public:
    explicit EntrySelector(std::int64_t min_answer_upvotes);

    void add(const RawPost& post);
    /// Entries in question document order.
    Selection finish() const;

private:
    struct Answer {
        std::int64_t parent_id;
        std::int64_t score;
        std::string body;
    };

    std::int64_t threshold_;
    std::size_t question_count_ = 0;
    std::size_t without_accepted_ = 0;
    std::vector<RawPost> questions_;
    std::unordered_map<std::int64_t, Answer> qualifying_;
    std::unordered_map<std::int64_t, std::int64_t> answer_parent_;
};

/// One entry per question whose accepted answer is present in `posts` and
/// has score >= min_answer_upvotes. Summaries are left empty.
Selection select_entries(std::span<const RawPost> posts, std::int64_t min_answer_upvotes);

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper default_sleeper();

inline constexpr std::string_view kQuestionExtractionPrompt =
    "Dumb this question down and summarize it in one or two sentence(s):{{question}}.";
inline constexpr std::string_view kProblemExtractionPrompt =
    "Extract a problem statement from this post. For example, \"The computer is not plugged in\", or "
    "\"The DNS servers are down\". Respond with only the problem: {{problem}}.";

std::string question_extraction_prompt(const BenchmarkEntry& entry);
std::string problem_extraction_prompt(const BenchmarkEntry& entry);

struct ExtractionPolicy {
    int attempts = 3;
    std::chrono::milliseconds base_delay{500};
    Sleeper sleep = default_sleeper();
};

/// Fills question_summary (from the question) and underlying_problem (from
/// the accepted answer) via the judge gateway. If either extraction still
/// fails after `policy.attempts` tries the entry comes back unextracted.
BenchmarkEntry extract_summaries(const BenchmarkEntry& entry, Gateway& judge,
                                 const ExtractionPolicy& policy = {});

struct ExtractionReport {
    std::vector<BenchmarkEntry> entries; // same order as the input
    std::size_t unextracted = 0;
};

/// Runs extract_summaries over many entries with at most `parallelism`
/// concurrent extractions.
ExtractionReport extract_all(std::span<const BenchmarkEntry> entries, Gateway& judge, int parallelism,
                             const ExtractionPolicy& policy = {});

struct CorpusSplit {
    std::vector<BenchmarkEntry> rag_pool;
    std::vector<BenchmarkEntry> eval_pool;
    std::uint64_t seed = 0;
};

/// Seeded Fisher-Yates shuffle, then the first floor(n/2) entries go to the
/// RAG pool and the rest to the evaluation pool.
CorpusSplit split_pool(std::span<const BenchmarkEntry> entries, std::uint64_t seed);

/// The permutation split_pool applies; exposed for reproducibility checks.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

void write_corpus(std::ostream& out, std::span<const BenchmarkEntry> entries);
std::vector<BenchmarkEntry> read_corpus(std::istream& in);

/// split.json: the id lists of both pools plus the seed.
std::string split_to_json(const CorpusSplit& split, std::int64_t min_upvotes, std::int64_t rag_min_upvotes);

struct SplitIds {
    std::uint64_t seed = 0;
    std::vector<std::int64_t> rag_ids;
    std::vector<std::int64_t> eval_ids;
};
SplitIds split_ids_from_json(std::string_view text);

/// Rebuilds a split from a corpus and the id lists in split.json.
CorpusSplit apply_split(std::span<const BenchmarkEntry> corpus, const SplitIds& ids);

} // namespace selfscore
