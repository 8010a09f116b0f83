#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace taxon::toml {

// Small TOML subset: [section] / [a.b] headers, key = value pairs,
// strings, integers, floats, booleans, homogeneous arrays, # comments.
// Enough for flat config files; no inline tables or multiline strings.
struct Value {
  std::variant<std::string, std::int64_t, double, bool,
               std::vector<Value>> v;

  bool is_string() const { return v.index() == 0; }
  bool is_int() const { return v.index() == 1; }
  bool is_float() const { return v.index() == 2; }
  bool is_bool() const { return v.index() == 3; }
  bool is_array() const { return v.index() == 4; }

  const std::string& as_string() const;
  std::int64_t as_int() const;
  double as_float() const;  // accepts integers too
  bool as_bool() const;
  const std::vector<Value>& as_array() const;
};

class Table {
 public:
  // keys are fully dotted paths, e.g. "cluster.k_min"
  std::map<std::string, Value> entries;

  bool has(const std::string& key) const { return entries.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_float(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // throwing accessors for required keys
  const Value& at(const std::string& key) const;
};

Table parse(const std::string& text);
Table parse_file(const std::string& path);

}  // namespace taxon::toml
