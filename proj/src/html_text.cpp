#include "selfscore/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <string_view>
#include <utility>

namespace selfscore {
namespace {

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

constexpr std::array kBlockTags = {"p",  "div", "br", "li", "ul", "ol", "h1",         "h2",  "h3",
                                   "h4", "h5",  "h6", "hr", "tr", "table", "blockquote", "pre"};

bool is_block(std::string_view name) {
    return std::find(kBlockTags.begin(), kBlockTags.end(), name) != kBlockTags.end();
}

// Named references that show up in forum posts; numeric references cover the rest.
constexpr std::array<std::pair<std::string_view, char32_t>, 52> kNamedEntities{{
    {"lt", U'<'},         {"gt", U'>'},         {"amp", U'&'},        {"quot", U'"'},       {"apos", U'\''},
    {"copy", 0xA9},       {"reg", 0xAE},        {"trade", 0x2122},    {"hellip", 0x2026},   {"mdash", 0x2014},
    {"ndash", 0x2013},    {"lsquo", 0x2018},    {"rsquo", 0x2019},    {"ldquo", 0x201C},    {"rdquo", 0x201D},
    {"laquo", 0xAB},      {"raquo", 0xBB},      {"larr", 0x2190},     {"uarr", 0x2191},     {"rarr", 0x2192},
    {"darr", 0x2193},     {"harr", 0x2194},     {"lArr", 0x21D0},     {"rArr", 0x21D2},     {"hArr", 0x21D4},
    {"times", 0xD7},      {"divide", 0xF7},     {"deg", 0xB0},        {"plusmn", 0xB1},     {"middot", 0xB7},
    {"bull", 0x2022},     {"euro", 0x20AC},     {"pound", 0xA3},      {"yen", 0xA5},        {"cent", 0xA2},
    {"sect", 0xA7},       {"para", 0xB6},       {"micro", 0xB5},      {"iexcl", 0xA1},      {"iquest", 0xBF},
    {"frac12", 0xBD},     {"frac14", 0xBC},     {"frac34", 0xBE},     {"sup2", 0xB2},       {"sup3", 0xB3},
    {"ne", 0x2260},       {"le", 0x2264},       {"ge", 0x2265},       {"infin", 0x221E},    {"shy", 0xAD},
    {"zwj", 0x200D},      {"zwnj", 0x200C},
}};

class TextBuilder {
public:
    void text(char c) {
        if (pre_depth_ > 0) {
            out_.push_back(c);
            return;
        }
        if (is_space(c)) {
            if (!out_.empty() && out_.back() != ' ' && out_.back() != '\n') out_.push_back(' ');
            return;
        }
        out_.push_back(c);
    }

    void text(std::string_view s) {
        for (char c : s) text(c);
    }

    void block_break() {
        if (pre_depth_ > 0) return;
        while (!out_.empty() && out_.back() == ' ') out_.pop_back();
        if (!out_.empty() && out_.back() != '\n') out_.push_back('\n');
    }

    void open_pre() {
        block_break();
        ++pre_depth_;
    }

    void close_pre() {
        if (pre_depth_ > 0) --pre_depth_;
        block_break();
    }

    std::string finish() && {
        while (!out_.empty() && is_space(out_.back())) out_.pop_back();
        return std::move(out_);
    }

private:
    std::string out_;
    int pre_depth_ = 0;
};

} // namespace

std::optional<std::string> decode_entity(std::string_view name) {
    if (name == "nbsp") return " ";
    if (auto it = std::find_if(kNamedEntities.begin(), kNamedEntities.end(),
                               [&](const auto& e) { return e.first == name; });
        it != kNamedEntities.end()) {
        std::string out;
        append_utf8(out, it->second);
        return out;
    }
    if (name.size() < 2 || name[0] != '#') return std::nullopt;
    std::uint32_t cp = 0;
    std::from_chars_result res{};
    if (name[1] == 'x' || name[1] == 'X') {
        if (name.size() < 3) return std::nullopt;
        res = std::from_chars(name.data() + 2, name.data() + name.size(), cp, 16);
    } else {
        res = std::from_chars(name.data() + 1, name.data() + name.size(), cp, 10);
    }
    if (res.ec != std::errc{} || res.ptr != name.data() + name.size()) return std::nullopt;
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return std::nullopt;
    std::string out;
    append_utf8(out, static_cast<char32_t>(cp));
    return out;
}

std::string html_to_text(std::string_view html) {
    TextBuilder tb;
    std::size_t i = 0;
    const std::size_t n = html.size();
    while (i < n) {
        char c = html[i];
        if (c == '&') {
            auto semi = html.find(';', i + 1);
            if (semi != std::string_view::npos && semi - i <= 12) {
                if (auto decoded = decode_entity(html.substr(i + 1, semi - i - 1))) {
                    tb.text(*decoded);
                    i = semi + 1;
                    continue;
                }
            }
            tb.text(c);
            ++i;
            continue;
        }
        if (c != '<') {
            tb.text(c);
            ++i;
            continue;
        }
        if (html.substr(i, 4) == "<!--") {
            auto end = html.find("-->", i + 4);
            i = end == std::string_view::npos ? n : end + 3;
            continue;
        }
        const bool closing = i + 1 < n && html[i + 1] == '/';
        const std::size_t name_start = i + (closing ? 2 : 1);
        if (name_start >= n || !(is_alpha(html[name_start]) || (!closing && html[name_start] == '!'))) {
            tb.text(c); // a literal '<'
            ++i;
            continue;
        }
        // Find the closing '>' while honouring quoted attribute values.
        std::size_t j = name_start;
        char quote = 0;
        while (j < n) {
            char d = html[j];
            if (quote) {
                if (d == quote) quote = 0;
            } else if (d == '"' || d == '\'') {
                quote = d;
            } else if (d == '>') {
                break;
            }
            ++j;
        }
        if (j >= n) {
            tb.text(c);
            ++i;
            continue;
        }
        std::string name;
        for (std::size_t k = name_start; k < j && (is_alpha(html[k]) || std::isdigit(static_cast<unsigned char>(html[k]))); ++k) {
            name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(html[k]))));
        }
        i = j + 1;
        if (name == "pre") {
            closing ? tb.close_pre() : tb.open_pre();
        } else if (is_block(name)) {
            tb.block_break();
        } else if (name == "td" || name == "th") {
            tb.text(' ');
        }
    }
    return std::move(tb).finish();
}

} // namespace selfscore
