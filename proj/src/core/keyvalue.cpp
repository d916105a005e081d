#include "affect/core/keyvalue.hpp"

#include <charconv>
#include <sstream>

#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"

namespace affect {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_key_values(std::string_view text, std::string_view origin) {
  KeyValues kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!kv.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  return parse_key_values(io::read_text(path), path.string());
}

std::string format_key_values(const KeyValues& kv) {
  std::ostringstream out;
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  return out.str();
}

double parse_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ConfigError("key '" + std::string(key) + "': '" + std::string(value) + "' is not a number");
  }
  return v;
}

long long parse_int(std::string_view key, std::string_view value) {
  long long v = 0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ConfigError("key '" + std::string(key) + "': '" + std::string(value) + "' is not an integer");
  }
  return v;
}

}  // namespace affect
