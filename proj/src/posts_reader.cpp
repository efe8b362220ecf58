#include "selfscore/error.hpp"
#include "selfscore/ingest.hpp"

#include <charconv>
#include <istream>

namespace selfscore {
namespace {

bool is_xml_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_char(int c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.' || c == ':' || c >= 0x80;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

// Stack Exchange dumps encode tags as "<a><b>" (older) or "|a|b|" (newer).
std::vector<std::string> split_tags(std::string_view raw) {
    std::vector<std::string> tags;
    std::string cur;
    for (char c : raw) {
        if (c == '<' || c == '>' || c == '|') {
            if (!cur.empty()) tags.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tags.push_back(std::move(cur));
    return tags;
}

} // namespace

PostsReader::PostsReader(std::istream& in, std::size_t chunk_size) : in_(in), chunk_size_(chunk_size) {}

bool PostsReader::fill() {
    if (pos_ < buffer_.size()) return true;
    buffer_.resize(chunk_size_);
    in_.read(buffer_.data(), static_cast<std::streamsize>(chunk_size_));
    buffer_.resize(static_cast<std::size_t>(in_.gcount()));
    pos_ = 0;
    return !buffer_.empty();
}

int PostsReader::peek() {
    if (!fill()) return -1;
    return static_cast<unsigned char>(buffer_[pos_]);
}

int PostsReader::get() {
    if (!fill()) return -1;
    ++consumed_;
    return static_cast<unsigned char>(buffer_[pos_++]);
}

void PostsReader::fail(const std::string& what) const { throw XmlParseError(what, last_valid_); }

void PostsReader::expect(std::string_view literal) {
    for (char c : literal) {
        int got = get();
        if (got == -1) fail("unexpected end of document");
        if (got != static_cast<unsigned char>(c)) fail("expected '" + std::string(literal) + "'");
    }
}

void PostsReader::skip_whitespace() {
    while (is_xml_space(peek())) get();
}

void PostsReader::skip_until(std::string_view terminator) {
    std::size_t matched = 0;
    while (matched < terminator.size()) {
        int c = get();
        if (c == -1) fail("unexpected end of document");
        if (c == static_cast<unsigned char>(terminator[matched])) {
            ++matched;
        } else {
            matched = (c == static_cast<unsigned char>(terminator[0])) ? 1 : 0;
        }
    }
}

std::string PostsReader::read_name() {
    std::string name;
    while (is_name_char(peek())) name.push_back(static_cast<char>(get()));
    if (name.empty()) {
        if (peek() == -1) fail("unexpected end of document");
        fail("expected a name");
    }
    return name;
}

std::string PostsReader::read_attribute_value() {
    int quote = get();
    if (quote == -1) fail("unexpected end of document");
    if (quote != '"' && quote != '\'') fail("attribute value must be quoted");
    std::string value;
    for (;;) {
        int c = get();
        if (c == -1) fail("unexpected end of document");
        if (c == quote) break;
        if (c == '<') fail("'<' inside attribute value");
        if (c == '&') {
            std::string ref;
            for (;;) {
                int r = get();
                if (r == -1) fail("unexpected end of document");
                if (r == ';') break;
                if (ref.size() > 16 || r == quote) fail("unterminated entity reference");
                ref.push_back(static_cast<char>(r));
            }
            auto decoded = decode_entity(ref);
            if (!decoded) fail("unknown entity '&" + ref + ";'");
            value += *decoded;
        } else if (c == '\t' || c == '\n' || c == '\r') {
            value.push_back(' '); // attribute-value normalization
        } else {
            value.push_back(static_cast<char>(c));
        }
    }
    return value;
}

PostsReader::Element PostsReader::read_element() {
    // Positioned just after '<'.
    Element el;
    if (peek() == '/') {
        get();
        el.closing = true;
        el.name = read_name();
        skip_whitespace();
        expect(">");
        return el;
    }
    el.name = read_name();
    for (;;) {
        bool had_space = is_xml_space(peek());
        skip_whitespace();
        int c = peek();
        if (c == -1) fail("unexpected end of document");
        if (c == '/') {
            get();
            expect(">");
            el.self_closing = true;
            return el;
        }
        if (c == '>') {
            get();
            return el;
        }
        if (!had_space) fail("expected whitespace between attributes");
        std::string key = read_name();
        skip_whitespace();
        expect("=");
        skip_whitespace();
        el.attributes.emplace_back(std::move(key), read_attribute_value());
    }
}

void PostsReader::read_prolog() {
    if (peek() == 0xEF) expect("\xEF\xBB\xBF");
    for (;;) {
        skip_whitespace();
        last_valid_ = consumed_;
        int c = get();
        if (c == -1) fail("unexpected end of document");
        if (c != '<') fail("expected '<'");
        if (peek() == '?') {
            skip_until("?>");
        } else if (peek() == '!') {
            get();
            if (peek() == '-') {
                expect("--");
                skip_until("-->");
            } else {
                skip_until(">"); // DOCTYPE without internal subset
            }
        } else {
            Element root = read_element();
            if (root.closing) fail("unexpected closing tag");
            root_ = root.name;
            last_valid_ = consumed_;
            if (root.self_closing) finished_ = true;
            return;
        }
    }
}

std::optional<RawPost> PostsReader::next() {
    if (!started_) {
        started_ = true;
        read_prolog();
    }
    while (!finished_) {
        skip_whitespace();
        last_valid_ = consumed_;
        int c = get();
        if (c == -1) fail("unexpected end of document");
        if (c != '<') {
            // Stray character data between rows carries no posts.
            while (peek() != '<' && peek() != -1) get();
            continue;
        }
        if (peek() == '!') {
            expect("!--");
            skip_until("-->");
            continue;
        }
        if (peek() == '?') {
            skip_until("?>");
            continue;
        }
        Element el = read_element();
        if (el.closing) {
            if (el.name != root_) fail("mismatched closing tag </" + el.name + ">");
            last_valid_ = consumed_;
            finished_ = true;
            skip_whitespace();
            if (peek() != -1) {
                // Only comments/PIs may follow the root element.
                while (peek() != -1) {
                    last_valid_ = consumed_;
                    if (get() != '<') fail("content after root element");
                    if (peek() == '!') {
                        expect("!--");
                        skip_until("-->");
                    } else if (peek() == '?') {
                        skip_until("?>");
                    } else {
                        fail("content after root element");
                    }
                    skip_whitespace();
                }
            }
            break;
        }
        if (!el.self_closing) skip_until("</" + el.name + ">");
        last_valid_ = consumed_;
        if (el.name != "row") continue;
        ++rows_;
        if (auto post = to_post(el)) return post;
        ++skipped_;
    }
    return std::nullopt;
}

std::optional<RawPost> PostsReader::to_post(const Element& row) {
    RawPost post;
    bool have_id = false;
    bool have_type = false;
    for (const auto& [key, value] : row.attributes) {
        if (key == "Id") {
            auto v = parse_int(value);
            if (!v) return std::nullopt;
            post.post_id = *v;
            have_id = true;
        } else if (key == "PostTypeId") {
            auto v = parse_int(value);
            if (!v) return std::nullopt;
            post.post_type = *v == 1 ? PostType::question : *v == 2 ? PostType::answer : PostType::other;
            have_type = true;
        } else if (key == "ParentId") {
            post.parent_id = parse_int(value);
            if (!post.parent_id) return std::nullopt;
        } else if (key == "AcceptedAnswerId") {
            post.accepted_answer_id = parse_int(value);
            if (!post.accepted_answer_id) return std::nullopt;
        } else if (key == "Score") {
            auto v = parse_int(value);
            if (!v) return std::nullopt;
            post.score = *v;
        } else if (key == "Title") {
            post.title = value;
        } else if (key == "Body") {
            post.body = html_to_text(value);
        } else if (key == "Tags") {
            post.tags = split_tags(value);
        }
    }
    if (!have_id || !have_type) return std::nullopt;
    if (post.post_type == PostType::answer && !post.parent_id) return std::nullopt;
    return post;
}

ParsedPosts parse_posts_dump(std::istream& xml) {
    PostsReader reader(xml);
    ParsedPosts out;
    while (auto post = reader.next()) out.posts.push_back(std::move(*post));
    out.skipped_rows = reader.skipped_rows();
    return out;
}

} // namespace selfscore
