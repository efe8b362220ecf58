#include "selfscore/templates.hpp"

#include "selfscore/error.hpp"

#include <fstream>
#include <sstream>

namespace selfscore {

std::string render_template(std::string_view tmpl, const TemplateVars& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const auto open = tmpl.find("{{", i);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        out.append(tmpl.substr(i, open - i));
        const auto name = tmpl.substr(open + 2, close - open - 2);
        if (auto it = vars.find(name); it != vars.end()) {
            out.append(it->second);
        } else {
            out.append(tmpl.substr(open, close + 2 - open));
        }
        i = close + 2;
    }
    return out;
}

std::optional<std::string> read_template_file(const std::filesystem::path& dir, std::string_view name) {
    for (const auto& candidate : {dir / (std::string(name) + ".txt"), dir / std::string(name)}) {
        std::error_code ec;
        if (!std::filesystem::is_regular_file(candidate, ec)) continue;
        std::ifstream in(candidate, std::ios::binary);
        if (!in) throw IoError("cannot read template " + candidate.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    return std::nullopt;
}

} // namespace selfscore
