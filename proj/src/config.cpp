#include "shadow/config.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace shadow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parses_real(const std::string& v, double* out = nullptr) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) return false;
  if (out) *out = x;
  return true;
}

bool parses_integer(const std::string& v, long long* out = nullptr) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) return false;
  if (out) *out = x;
  return true;
}

bool parses_unsigned(const std::string& v, std::uint64_t* out = nullptr) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) return false;
  if (out) *out = x;
  return true;
}

bool parses_bool(const std::string& v, bool* out = nullptr) {
  if (v == "true" || v == "false") {
    if (out) *out = v == "true";
    return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::vector<std::string> bad;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        bad.push_back(where + ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      bad.push_back(where + ": expected key = value");
      continue;
    }
    if (section.empty()) {
      bad.push_back(where + ": key outside any section");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      bad.push_back(where + ": empty key");
      continue;
    }
    auto& sec = doc[section];
    if (sec.count(key) != 0) {
      bad.push_back(where + ": duplicate key " + section + "." + key);
      continue;
    }
    sec[key] = trim(line.substr(eq + 1));
  }
  if (!bad.empty()) throw ConfigError("config: syntax errors", bad);
  return doc;
}

std::string to_ini(const IniDocument& doc) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [section, keys] : doc) {
    if (!first) os << '\n';
    first = false;
    os << '[' << section << "]\n";
    for (const auto& [k, v] : keys) os << k << " = " << v << '\n';
  }
  return os.str();
}

std::string config_hash(const IniDocument& doc) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : to_ini(doc)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const IniDocument& doc, const ConfigSchema& schema) {
  std::vector<std::string> bad;
  for (const auto& [section, keys] : doc) {
    if (section == "config") {
      for (const auto& [k, v] : keys) {
        long long version = 0;
        if (k != "version") {
          bad.push_back("config." + k + ": unknown key");
        } else if (!parses_integer(v, &version) || version != kConfigVersion) {
          bad.push_back("config.version: unsupported version '" + v + "'");
        }
      }
      continue;
    }
    const auto sit = schema.find(section);
    if (sit == schema.end()) {
      bad.push_back(section + ": unknown section");
      continue;
    }
    for (const auto& [k, v] : keys) {
      const std::string name = section + "." + k;
      const auto kit = sit->second.find(k);
      if (kit == sit->second.end()) {
        bad.push_back(name + ": unknown key");
        continue;
      }
      const KeySpec& spec = kit->second;
      bool ok = true;
      switch (spec.type) {
        case ValueType::Real: ok = parses_real(v); break;
        case ValueType::Integer: ok = parses_integer(v); break;
        case ValueType::Unsigned: ok = parses_unsigned(v); break;
        case ValueType::Boolean: ok = parses_bool(v); break;
        case ValueType::List: ok = true; break;
        case ValueType::String:
          if (!spec.choices.empty()) {
            ok = false;
            for (const auto& c : spec.choices) ok = ok || c == v;
          }
          break;
      }
      if (!ok) bad.push_back(name + ": invalid value '" + v + "'");
    }
  }
  if (!bad.empty()) {
    std::string msg = "config: " + std::to_string(bad.size()) + " invalid entr" + (bad.size() == 1 ? "y" : "ies");
    throw ConfigError(msg, bad);
  }
}

const std::string* ConfigView::find(const std::string& section, const std::string& key) const {
  const auto s = doc_.find(section);
  if (s == doc_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool ConfigView::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

double ConfigView::real(const std::string& section, const std::string& key, double fallback) const {
  const auto* v = find(section, key);
  double x = fallback;
  if (v && !parses_real(*v, &x)) throw ConfigError("config: not a number", {section + "." + key});
  return x;
}

long long ConfigView::integer(const std::string& section, const std::string& key, long long fallback) const {
  const auto* v = find(section, key);
  long long x = fallback;
  if (v && !parses_integer(*v, &x)) throw ConfigError("config: not an integer", {section + "." + key});
  return x;
}

std::uint64_t ConfigView::u64(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  const auto* v = find(section, key);
  std::uint64_t x = fallback;
  if (v && !parses_unsigned(*v, &x)) throw ConfigError("config: not an unsigned integer", {section + "." + key});
  return x;
}

std::size_t ConfigView::count(const std::string& section, const std::string& key, std::size_t fallback) const {
  return static_cast<std::size_t>(u64(section, key, fallback));
}

bool ConfigView::boolean(const std::string& section, const std::string& key, bool fallback) const {
  const auto* v = find(section, key);
  bool x = fallback;
  if (v && !parses_bool(*v, &x)) throw ConfigError("config: not a boolean", {section + "." + key});
  return x;
}

std::string ConfigView::str(const std::string& section, const std::string& key, const std::string& fallback) const {
  const auto* v = find(section, key);
  return v ? *v : fallback;
}

std::vector<std::string> ConfigView::list(const std::string& section, const std::string& key,
                                          const std::vector<std::string>& fallback) const {
  const auto* v = find(section, key);
  return v ? split_list(*v) : fallback;
}

}  // namespace shadow
