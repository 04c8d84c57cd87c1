/**
 * @file config.hpp
 * @brief Run configuration: a small INI dialect checked against a schema.
 *
 * Dialect, version 1:
 *   - `[section]` headers; `key = value` pairs; `#` or `;` start a comment line.
 *   - Keys and section names are case-sensitive; whitespace around them is trimmed.
 *   - An optional `[config]` section may carry `version = 1`.
 *   - Lists are comma-separated. Booleans are true/false.
 *   - A key may appear once per section.
 * Canonical form (to_ini) sorts sections and keys, so parse(to_ini(c)) == c.
 */
#pragma once

#include "shadow/errors.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace shadow {

inline constexpr int kConfigVersion = 1;

/// section -> key -> raw value.
using IniDocument = std::map<std::string, std::map<std::string, std::string>>;

/// Parses dialect text. Syntax errors list every offending line.
IniDocument parse_ini(const std::string& text);

std::string to_ini(const IniDocument& doc);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const IniDocument& doc);

enum class ValueType { Real, Integer, Unsigned, Boolean, String, List };

struct KeySpec {
  ValueType type = ValueType::String;
  std::string help;
  std::vector<std::string> choices;  ///< String: allowed values when non-empty
};

/// section -> key -> spec.
using ConfigSchema = std::map<std::string, std::map<std::string, KeySpec>>;

/// Throws ConfigError naming every unknown section, unknown key and value that
/// does not parse as its declared type.
void validate(const IniDocument& doc, const ConfigSchema& schema);

/// Typed lookups with defaults; values are assumed validated.
class ConfigView {
 public:
  explicit ConfigView(const IniDocument& doc) : doc_(doc) {}
  [[nodiscard]] bool has(const std::string& section, const std::string& key) const;
  [[nodiscard]] double real(const std::string& section, const std::string& key, double fallback) const;
  [[nodiscard]] long long integer(const std::string& section, const std::string& key, long long fallback) const;
  [[nodiscard]] std::uint64_t u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  [[nodiscard]] std::size_t count(const std::string& section, const std::string& key, std::size_t fallback) const;
  [[nodiscard]] bool boolean(const std::string& section, const std::string& key, bool fallback) const;
  [[nodiscard]] std::string str(const std::string& section, const std::string& key, const std::string& fallback) const;
  [[nodiscard]] std::vector<std::string> list(const std::string& section, const std::string& key,
                                              const std::vector<std::string>& fallback) const;

 private:
  const std::string* find(const std::string& section, const std::string& key) const;
  const IniDocument& doc_;
};

std::vector<std::string> split_list(const std::string& s);

}  // namespace shadow
