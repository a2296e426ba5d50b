#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cubicqn::toml {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line_number, const std::string& message)
      : std::runtime_error("toml line " + std::to_string(line_number) + ": " + message),
        line(line_number) {}
  int line;
};

/// A deliberately small TOML subset: [tables], [[arrays of tables]], bare
/// keys, strings, numbers, booleans, and flat arrays. Enough for hand-edited
/// experiment configs; schema documented in the README.
class Value {
 public:
  enum class Kind { Table, Array, String, Float, Integer, Boolean };

  Value() : kind_(Kind::Table) {}
  static Value make_string(std::string s);
  static Value make_float(double v);
  static Value make_integer(std::int64_t v);
  static Value make_boolean(bool v);
  static Value make_array();

  Kind kind() const { return kind_; }
  bool is_table() const { return kind_ == Kind::Table; }
  bool is_array() const { return kind_ == Kind::Array; }

  // Table access. find returns nullptr when the key is absent.
  const Value* find(const std::string& key) const;
  Value& insert(const std::string& key, Value v);
  const std::map<std::string, Value>& entries() const { return table_; }

  // Array access.
  std::vector<Value>& items() { return array_; }
  const std::vector<Value>& items() const { return array_; }

  // Typed reads; throw std::runtime_error on a kind mismatch.
  const std::string& as_string() const;
  double as_number() const;  // accepts Integer or Float
  std::int64_t as_integer() const;
  bool as_boolean() const;

  static Value parse(const std::string& text);
  static Value parse_file(const std::string& path);

 private:
  Kind kind_;
  std::map<std::string, Value> table_;
  std::vector<Value> array_;
  std::string string_;
  double float_ = 0.0;
  std::int64_t integer_ = 0;
  bool boolean_ = false;
};

}  // namespace cubicqn::toml
