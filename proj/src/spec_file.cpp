#include "dsgd/spec_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dsgd {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* kind) {
  throw std::invalid_argument("key '" + key + "': '" + value + "' is not " + kind);
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view text) {
  KeyValueFile file;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": unterminated section");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (file.values_.count(key) != 0) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": key '" + key +
                                  "' repeated (first on line " +
                                  std::to_string(file.lines_[key]) + ")");
    }
    file.values_[key] = value;
    file.lines_[key] = line_no;
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  return get_string(key).value_or(fallback);
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  const auto v = get_string(key);
  if (!v) return fallback;
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) bad_value(key, *v, "an integer");
  return out;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return get_optional_double(key).value_or(fallback);
}

std::optional<double> KeyValueFile::get_optional_double(const std::string& key) const {
  const auto v = get_string(key);
  if (!v) return std::nullopt;
  try {
    std::size_t used = 0;
    const double out = std::stod(*v, &used);
    if (used != v->size()) bad_value(key, *v, "a number");
    return out;
  } catch (const std::logic_error&) {
    bad_value(key, *v, "a number");
  }
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  const auto v = get_string(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad_value(key, *v, "a boolean");
}

std::string KeyValueFile::get_choice(const std::string& key, const std::vector<std::string>& choices,
                                     const std::string& fallback) const {
  const std::string v = get_string(key, fallback);
  if (std::find(choices.begin(), choices.end(), v) == choices.end()) {
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : "|") + c;
    bad_value(key, v, ("one of " + list).c_str());
  }
  return v;
}

void KeyValueFile::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (known.count(key) == 0) {
      throw std::invalid_argument("unknown key '" + key + "' on line " +
                                  std::to_string(lines_.count(key) ? lines_.at(key) : 0));
    }
  }
}

}  // namespace dsgd
