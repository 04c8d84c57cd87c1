#include "shadow/config.hpp"

#include <doctest.h>

#include <algorithm>

using namespace shadow;

namespace {

ConfigSchema schema() {
  ConfigSchema s;
  s["model"] = {{"name", {ValueType::String, "", {"lorenz63", "rijke"}}}, {"dt", {ValueType::Real, "", {}}}};
  s["run"] = {{"seed", {ValueType::Unsigned, "", {}}}, {"verbose", {ValueType::Boolean, "", {}}}};
  s["scan"] = {{"values", {ValueType::List, "", {}}}, {"offset", {ValueType::Integer, "", {}}}};
  return s;
}

const char* kText = R"(# comment
[config]
version = 1

[model]
name = rijke
dt = 0.01

; another comment
[run]
seed = 12
verbose = true

[scan]
values = 1.5, 2.5 ,3.5
offset = -4
)";

bool mentions(const ConfigError& e, const std::string& key) {
  return std::any_of(e.keys().begin(), e.keys().end(), [&](const std::string& k) { return k.rfind(key, 0) == 0; });
}

}  // namespace

TEST_CASE("parse and typed lookups") {
  const IniDocument doc = parse_ini(kText);
  CHECK_NOTHROW(validate(doc, schema()));
  const ConfigView v(doc);
  CHECK(v.str("model", "name", "") == "rijke");
  CHECK(v.real("model", "dt", 0.0) == 0.01);
  CHECK(v.u64("run", "seed", 0) == 12);
  CHECK(v.boolean("run", "verbose", false));
  CHECK(v.integer("scan", "offset", 0) == -4);
  CHECK(v.list("scan", "values", {}) == std::vector<std::string>{"1.5", "2.5", "3.5"});
  CHECK(v.real("model", "missing", 7.5) == 7.5);
  CHECK_FALSE(v.has("run", "out"));
}

TEST_CASE("canonical form round-trips") {
  const IniDocument doc = parse_ini(kText);
  const std::string text = to_ini(doc);
  CHECK(parse_ini(text) == doc);
  CHECK(to_ini(parse_ini(text)) == text);
  CHECK(config_hash(doc) == config_hash(parse_ini(text)));
  CHECK(config_hash(doc).size() == 16);
  IniDocument changed = doc;
  changed["run"]["seed"] = "13";
  CHECK(config_hash(changed) != config_hash(doc));
}

TEST_CASE("fnv-1a reference value") {
  // FNV-1a 64 of the empty string is the offset basis.
  CHECK(config_hash(IniDocument{}) == "cbf29ce484222325");
}

TEST_CASE("validation lists every offending key") {
  const IniDocument doc = parse_ini(R"([model]
name = pendulum
dt = fast
colour = red
[run]
seed = -1
verbose = yes
[extra]
a = 1
[config]
version = 2
)");
  try {
    validate(doc, schema());
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.keys().size() == 7);
    for (const char* k : {"model.name", "model.dt", "model.colour", "run.seed", "run.verbose", "extra", "config.version"})
      CHECK_MESSAGE(mentions(e, k), k);
  }
}

TEST_CASE("syntax errors") {
  CHECK_THROWS_AS(parse_ini("key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_ini("[model\nname = x\n"), ConfigError);
  CHECK_THROWS_AS(parse_ini("[model]\njust words\n"), ConfigError);
  try {
    parse_ini("[model]\nname = a\nname = b\n");
    FAIL("expected a duplicate-key error");
  } catch (const ConfigError& e) {
    CHECK(e.keys().size() == 1);
  }
}
