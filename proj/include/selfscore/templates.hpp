#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace selfscore {

using TemplateVars = std::map<std::string, std::string, std::less<>>;

/// Single-pass `{{name}}` substitution. Substituted text is never rescanned;
/// placeholders without a value are left untouched.
std::string render_template(std::string_view tmpl, const TemplateVars& vars);

/// Reads `<dir>/<name>.txt` (or `<dir>/<name>`) if present.
std::optional<std::string> read_template_file(const std::filesystem::path& dir, std::string_view name);

} // namespace selfscore
