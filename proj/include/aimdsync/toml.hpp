#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace aimdsync::toml {

// Minimal TOML subset: [table.path] headers, key = value lines, strings,
// booleans, integers, floats, and single-line arrays. Enough for the
// experiment configs; nothing more.

class Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

class Value {
 public:
  Value() : v_(false) {}
  Value(bool b) : v_(b) {}
  Value(std::int64_t i) : v_(i) {}
  Value(double d) : v_(d) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(Array a) : v_(std::move(a)) {}
  Value(Table t) : v_(std::move(t)) {}

  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_double() const { return std::holds_alternative<double>(v_); }
  bool is_number() const { return is_int() || is_double(); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_array() const { return std::holds_alternative<Array>(v_); }
  bool is_table() const { return std::holds_alternative<Table>(v_); }

  bool as_bool() const;
  std::int64_t as_int() const;
  double as_double() const;  // accepts integers
  const std::string& as_string() const;
  const Array& as_array() const;
  const Table& as_table() const;
  Table& as_table();

  bool operator==(const Value& o) const { return v_ == o.v_; }

 private:
  std::variant<bool, std::int64_t, double, std::string, Array, Table> v_;
};

/// Parses the subset; throws std::runtime_error with "<line>: message".
Table parse(const std::string& text);
Table parse_file(const std::string& path);

/// Serializes with nested [table] headers. parse(serialize(t)) == t.
std::string serialize(const Table& table);

std::string format_double(double v);  // %.17g with a guaranteed decimal marker

}  // namespace aimdsync::toml
