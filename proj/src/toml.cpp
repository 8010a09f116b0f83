#include "taxon/toml.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "taxon/common.hpp"
#include "taxon/io.hpp"

namespace taxon::toml {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ValidationError("config line " + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// removes a trailing comment that is not inside a string literal
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_str) {
      if (c == '\\') ++i;
      else if (c == '"') in_str = false;
    } else if (c == '"') {
      in_str = true;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.')
      return false;
  return true;
}

struct Cursor {
  const std::string& s;
  std::size_t i = 0;
  int line;

  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
  bool done() const { return i >= s.size(); }
  char peek() const { return s[i]; }
};

Value parse_value(Cursor& c);

std::string parse_string(Cursor& c) {
  ++c.i;  // opening quote
  std::string out;
  while (!c.done() && c.peek() != '"') {
    char ch = c.s[c.i++];
    if (ch == '\\') {
      if (c.done()) fail(c.line, "dangling escape in string");
      char esc = c.s[c.i++];
      switch (esc) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(c.line, std::string("unsupported escape \\") + esc);
      }
    } else {
      out += ch;
    }
  }
  if (c.done()) fail(c.line, "unterminated string");
  ++c.i;  // closing quote
  return out;
}

Value parse_scalar_token(const std::string& tok, int line) {
  if (tok == "true") return Value{true};
  if (tok == "false") return Value{false};
  // integer?
  bool int_like = !tok.empty();
  for (std::size_t i = 0; i < tok.size(); ++i) {
    char ch = tok[i];
    if (i == 0 && (ch == '+' || ch == '-')) continue;
    if (!std::isdigit(static_cast<unsigned char>(ch)) && ch != '_') {
      int_like = false;
      break;
    }
  }
  std::string digits;
  for (char ch : tok)
    if (ch != '_') digits += ch;
  if (int_like && !digits.empty() && digits != "+" && digits != "-") {
    std::int64_t iv = 0;
    auto [p, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), iv);
    if (ec == std::errc() && p == digits.data() + digits.size())
      return Value{iv};
  }
  // float
  try {
    std::size_t used = 0;
    double dv = std::stod(digits, &used);
    if (used == digits.size()) return Value{dv};
  } catch (...) {
  }
  fail(line, "cannot parse value '" + tok + "'");
}

Value parse_array(Cursor& c) {
  ++c.i;  // '['
  std::vector<Value> items;
  c.skip_ws();
  while (!c.done() && c.peek() != ']') {
    items.push_back(parse_value(c));
    c.skip_ws();
    if (!c.done() && c.peek() == ',') {
      ++c.i;
      c.skip_ws();
    } else {
      break;
    }
  }
  if (c.done() || c.peek() != ']') fail(c.line, "unterminated array");
  ++c.i;
  for (std::size_t i = 1; i < items.size(); ++i)
    if (items[i].v.index() != items[0].v.index() &&
        !(items[i].is_int() && items[0].is_float()) &&
        !(items[i].is_float() && items[0].is_int()))
      fail(c.line, "mixed-type array");
  return Value{std::move(items)};
}

Value parse_value(Cursor& c) {
  c.skip_ws();
  if (c.done()) fail(c.line, "missing value");
  if (c.peek() == '"') return Value{parse_string(c)};
  if (c.peek() == '[') return parse_array(c);
  std::size_t start = c.i;
  while (!c.done() && c.peek() != ',' && c.peek() != ']' && c.peek() != ' ' &&
         c.peek() != '\t')
    ++c.i;
  return parse_scalar_token(c.s.substr(start, c.i - start), c.line);
}

}  // namespace

const std::string& Value::as_string() const {
  if (!is_string()) throw ValidationError("config value is not a string");
  return std::get<std::string>(v);
}
std::int64_t Value::as_int() const {
  if (!is_int()) throw ValidationError("config value is not an integer");
  return std::get<std::int64_t>(v);
}
double Value::as_float() const {
  if (is_int()) return static_cast<double>(std::get<std::int64_t>(v));
  if (!is_float()) throw ValidationError("config value is not a number");
  return std::get<double>(v);
}
bool Value::as_bool() const {
  if (!is_bool()) throw ValidationError("config value is not a boolean");
  return std::get<bool>(v);
}
const std::vector<Value>& Value::as_array() const {
  if (!is_array()) throw ValidationError("config value is not an array");
  return std::get<std::vector<Value>>(v);
}

std::string Table::get_string(const std::string& key,
                              const std::string& fallback) const {
  auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second.as_string();
}
std::int64_t Table::get_int(const std::string& key,
                            std::int64_t fallback) const {
  auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second.as_int();
}
double Table::get_float(const std::string& key, double fallback) const {
  auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second.as_float();
}
bool Table::get_bool(const std::string& key, bool fallback) const {
  auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second.as_bool();
}
const Value& Table::at(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end())
    throw ValidationError("missing config key '" + key + "'");
  return it->second;
}

Table parse(const std::string& text) {
  Table table;
  std::string prefix;
  std::istringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = strip(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      std::string name = strip(line.substr(1, line.size() - 2));
      if (!valid_key(name)) fail(line_no, "bad section name '" + name + "'");
      prefix = name + ".";
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    std::string key = strip(line.substr(0, eq));
    if (!valid_key(key)) fail(line_no, "bad key '" + key + "'");
    std::string rhs = strip(line.substr(eq + 1));
    Cursor c{rhs, 0, line_no};
    Value value = parse_value(c);
    c.skip_ws();
    if (!c.done()) fail(line_no, "trailing characters after value");
    std::string full = prefix + key;
    if (table.entries.count(full)) fail(line_no, "duplicate key '" + full + "'");
    table.entries.emplace(std::move(full), std::move(value));
  }
  return table;
}

Table parse_file(const std::string& path) {
  return parse(io::read_text(path));
}

}  // namespace taxon::toml
