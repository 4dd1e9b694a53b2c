#include "aimdsync/toml.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aimdsync::toml {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment, ignoring # inside quoted strings.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

struct ValueParser {
  const std::string& s;
  size_t pos = 0;
  int line;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  Value parse_value() {
    skip_ws();
    if (pos >= s.size()) fail(line, "expected a value");
    const char c = s[pos];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    return parse_scalar();
  }

  Value parse_string() {
    ++pos;  // opening quote
    std::string out;
    while (pos < s.size() && s[pos] != '"') {
      char c = s[pos++];
      if (c == '\\') {
        if (pos >= s.size()) fail(line, "dangling escape in string");
        const char e = s[pos++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(line, std::string("unsupported escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos >= s.size()) fail(line, "unterminated string");
    ++pos;  // closing quote
    return Value(std::move(out));
  }

  Value parse_array() {
    ++pos;  // '['
    Array arr;
    skip_ws();
    if (pos < s.size() && s[pos] == ']') {
      ++pos;
      return Value(std::move(arr));
    }
    while (true) {
      arr.push_back(parse_value());
      skip_ws();
      if (pos >= s.size()) fail(line, "unterminated array (arrays must be single-line)");
      if (s[pos] == ',') {
        ++pos;
        continue;
      }
      if (s[pos] == ']') {
        ++pos;
        return Value(std::move(arr));
      }
      fail(line, "expected ',' or ']' in array");
    }
  }

  Value parse_scalar() {
    size_t end = pos;
    while (end < s.size() && s[end] != ',' && s[end] != ']' && s[end] != ' ' &&
           s[end] != '\t')
      ++end;
    const std::string tok = s.substr(pos, end - pos);
    pos = end;
    if (tok == "true") return Value(true);
    if (tok == "false") return Value(false);
    if (tok.empty()) fail(line, "expected a value");

    const bool looks_float = tok.find_first_of(".eE") != std::string::npos ||
                             tok == "inf" || tok == "-inf" || tok == "nan";
    errno = 0;
    char* endp = nullptr;
    if (!looks_float) {
      const long long i = std::strtoll(tok.c_str(), &endp, 10);
      if (errno == 0 && endp && *endp == '\0') return Value(static_cast<std::int64_t>(i));
    }
    const double d = std::strtod(tok.c_str(), &endp);
    if (endp == nullptr || *endp != '\0') fail(line, "cannot parse value '" + tok + "'");
    return Value(d);
  }
};

Table& descend(Table& root, const std::string& path, int line) {
  Table* cur = &root;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    part = trim(part);
    if (!valid_key(part)) fail(line, "invalid table name '" + path + "'");
    auto it = cur->find(part);
    if (it == cur->end()) it = cur->emplace(part, Value(Table{})).first;
    if (!it->second.is_table()) fail(line, "'" + part + "' is not a table");
    cur = &it->second.as_table();
  }
  return *cur;
}

void serialize_table(const Table& t, const std::string& prefix, std::string& out);

std::string serialize_value(const Value& v) {
  if (v.is_bool()) return v.as_bool() ? "true" : "false";
  if (v.is_int()) return std::to_string(v.as_int());
  if (v.is_double()) return format_double(v.as_double());
  if (v.is_string()) {
    std::string out = "\"";
    for (char c : v.as_string()) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out.push_back(c);
      }
    }
    out += "\"";
    return out;
  }
  if (v.is_array()) {
    std::string out = "[";
    const Array& arr = v.as_array();
    for (size_t i = 0; i < arr.size(); ++i) {
      if (i) out += ", ";
      out += serialize_value(arr[i]);
    }
    out += "]";
    return out;
  }
  throw std::logic_error("serialize_value: tables are handled separately");
}

void serialize_table(const Table& t, const std::string& prefix, std::string& out) {
  for (const auto& [k, v] : t)
    if (!v.is_table()) out += k + " = " + serialize_value(v) + "\n";
  for (const auto& [k, v] : t) {
    if (!v.is_table()) continue;
    const std::string path = prefix.empty() ? k : prefix + "." + k;
    out += "\n[" + path + "]\n";
    serialize_table(v.as_table(), path, out);
  }
}

}  // namespace

bool Value::as_bool() const {
  if (!is_bool()) throw std::runtime_error("value is not a boolean");
  return std::get<bool>(v_);
}

std::int64_t Value::as_int() const {
  if (!is_int()) throw std::runtime_error("value is not an integer");
  return std::get<std::int64_t>(v_);
}

double Value::as_double() const {
  if (is_int()) return static_cast<double>(std::get<std::int64_t>(v_));
  if (!is_double()) throw std::runtime_error("value is not a number");
  return std::get<double>(v_);
}

const std::string& Value::as_string() const {
  if (!is_string()) throw std::runtime_error("value is not a string");
  return std::get<std::string>(v_);
}

const Array& Value::as_array() const {
  if (!is_array()) throw std::runtime_error("value is not an array");
  return std::get<Array>(v_);
}

const Table& Value::as_table() const {
  if (!is_table()) throw std::runtime_error("value is not a table");
  return std::get<Table>(v_);
}

Table& Value::as_table() {
  if (!is_table()) throw std::runtime_error("value is not a table");
  return std::get<Table>(v_);
}

Table parse(const std::string& text) {
  Table root;
  Table* cur = &root;
  std::stringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string body = trim(strip_comment(raw));
    if (body.empty()) continue;

    if (body.front() == '[') {
      if (body.back() != ']') fail(line_no, "unterminated table header");
      cur = &descend(root, trim(body.substr(1, body.size() - 2)), line_no);
      continue;
    }

    const size_t eq = body.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (!valid_key(key)) fail(line_no, "invalid key '" + key + "'");

    const std::string rhs = trim(body.substr(eq + 1));
    ValueParser vp{rhs, 0, line_no};
    Value val = vp.parse_value();
    vp.skip_ws();
    if (vp.pos != rhs.size()) fail(line_no, "trailing characters after value");
    if (cur->count(key)) fail(line_no, "duplicate key '" + key + "'");
    cur->emplace(key, std::move(val));
  }
  return root;
}

Table parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string serialize(const Table& table) {
  std::string out;
  serialize_table(table, "", out);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep the value a float on re-parse.
  if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

}  // namespace aimdsync::toml
