#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace affect {

// Ordered key=value text: one pair per line, '#' starts a comment, blank
// lines ignored, surrounding whitespace trimmed. Duplicate keys and lines
// without '=' raise ConfigError naming the line.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::string_view text, std::string_view origin = "config");
KeyValues read_key_values(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& kv);

double parse_double(std::string_view key, std::string_view value);
long long parse_int(std::string_view key, std::string_view value);

}  // namespace affect
