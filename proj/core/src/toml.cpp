#include "cubicqn/toml.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <fstream>
#include <sstream>

namespace cubicqn::toml {

namespace {

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Strips a trailing comment, respecting '#' inside quoted strings.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

std::vector<std::string> split_path(std::string_view path, int line) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : path) {
    if (c == '.') {
      if (current.empty()) throw ParseError(line, "empty path segment");
      parts.push_back(current);
      current.clear();
    } else if (is_bare_key_char(c)) {
      current.push_back(c);
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      throw ParseError(line, std::string("invalid character '") + c + "' in table path");
    }
  }
  if (current.empty()) throw ParseError(line, "empty path segment");
  parts.push_back(current);
  return parts;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : stream_(text) {}

  Value run() {
    Value root;
    Value* current = &root;
    std::string raw;
    while (std::getline(stream_, raw)) {
      ++line_;
      std::string_view line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        current = enter_header(root, line);
      } else {
        parse_key_value(*current, line);
      }
    }
    return root;
  }

 private:
  Value* enter_header(Value& root, std::string_view line) {
    const bool array = line.size() >= 2 && line[1] == '[';
    const std::string_view closer = array ? "]]" : "]";
    if (line.substr(line.size() - closer.size()) != closer) {
      throw ParseError(line_, "unterminated table header");
    }
    const std::size_t open = array ? 2 : 1;
    const std::string_view path =
        trim(line.substr(open, line.size() - open - closer.size()));
    if (path.empty()) throw ParseError(line_, "empty table header");

    const std::vector<std::string> parts = split_path(path, line_);
    Value* node = &root;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const bool last = i + 1 == parts.size();
      const Value* existing = node->is_table() ? node->find(parts[i]) : nullptr;
      if (last && array) {
        Value* arr;
        if (existing == nullptr) {
          arr = &node->insert(parts[i], Value::make_array());
        } else {
          arr = const_cast<Value*>(existing);
          if (!arr->is_array()) throw ParseError(line_, "'" + parts[i] + "' is not an array");
        }
        arr->items().push_back(Value{});
        node = &arr->items().back();
      } else if (existing == nullptr) {
        node = &node->insert(parts[i], Value{});
      } else {
        Value* next = const_cast<Value*>(existing);
        if (next->is_array()) {
          if (next->items().empty()) throw ParseError(line_, "empty table array");
          next = &next->items().back();
        }
        if (!next->is_table()) {
          throw ParseError(line_, "'" + parts[i] + "' is not a table");
        }
        node = next;
      }
    }
    return node;
  }

  void parse_key_value(Value& table, std::string_view line) {
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_, "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(line_, "empty key");
    for (char c : key) {
      if (!is_bare_key_char(c)) {
        throw ParseError(line_, std::string("invalid character '") + c + "' in key");
      }
    }
    std::string_view rest = trim(line.substr(eq + 1));
    if (rest.empty()) throw ParseError(line_, "missing value");
    Value v = parse_value(rest);
    if (!rest.empty()) throw ParseError(line_, "trailing characters after value");
    if (table.find(std::string(key)) != nullptr) {
      throw ParseError(line_, "duplicate key '" + std::string(key) + "'");
    }
    table.insert(std::string(key), std::move(v));
  }

  Value parse_value(std::string_view& rest) {
    rest = trim(rest);
    if (rest.empty()) throw ParseError(line_, "missing value");
    if (rest.front() == '"') return parse_string(rest);
    if (rest.front() == '[') return parse_array(rest);
    // Bare scalar runs to the next comma/bracket (inside arrays) or the end.
    std::size_t stop = 0;
    while (stop < rest.size() && rest[stop] != ',' && rest[stop] != ']') ++stop;
    const std::string_view token = trim(rest.substr(0, stop));
    rest.remove_prefix(stop);
    return parse_scalar(token);
  }

  Value parse_string(std::string_view& rest) {
    std::string out;
    std::size_t i = 1;
    for (; i < rest.size(); ++i) {
      const char c = rest[i];
      if (c == '\\') {
        if (i + 1 >= rest.size()) throw ParseError(line_, "dangling escape");
        const char next = rest[++i];
        switch (next) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          default: throw ParseError(line_, std::string("unsupported escape \\") + next);
        }
      } else if (c == '"') {
        rest.remove_prefix(i + 1);
        rest = trim(rest);
        return Value::make_string(std::move(out));
      } else {
        out.push_back(c);
      }
    }
    throw ParseError(line_, "unterminated string");
  }

  Value parse_array(std::string_view& rest) {
    Value out = Value::make_array();
    rest.remove_prefix(1);  // '['
    rest = trim(rest);
    if (!rest.empty() && rest.front() == ']') {
      rest.remove_prefix(1);
      rest = trim(rest);
      return out;
    }
    for (;;) {
      out.items().push_back(parse_value(rest));
      rest = trim(rest);
      if (rest.empty()) throw ParseError(line_, "unterminated array");
      if (rest.front() == ',') {
        rest.remove_prefix(1);
        continue;
      }
      if (rest.front() == ']') {
        rest.remove_prefix(1);
        rest = trim(rest);
        return out;
      }
      throw ParseError(line_, "expected ',' or ']' in array");
    }
  }

  Value parse_scalar(std::string_view token) {
    if (token == "true") return Value::make_boolean(true);
    if (token == "false") return Value::make_boolean(false);
    if (token == "inf" || token == "+inf") {
      return Value::make_float(std::numeric_limits<double>::infinity());
    }
    if (token == "-inf") return Value::make_float(-std::numeric_limits<double>::infinity());
    {
      std::int64_t i;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), i);
      if (ec == std::errc{} && ptr == token.data() + token.size()) {
        return Value::make_integer(i);
      }
    }
    {
      double d;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), d);
      if (ec == std::errc{} && ptr == token.data() + token.size()) {
        return Value::make_float(d);
      }
    }
    throw ParseError(line_, "cannot parse value '" + std::string(token) + "'");
  }

  std::istringstream stream_;
  int line_ = 0;
};

}  // namespace

Value Value::make_string(std::string s) {
  Value v;
  v.kind_ = Kind::String;
  v.string_ = std::move(s);
  return v;
}

Value Value::make_float(double d) {
  Value v;
  v.kind_ = Kind::Float;
  v.float_ = d;
  return v;
}

Value Value::make_integer(std::int64_t i) {
  Value v;
  v.kind_ = Kind::Integer;
  v.integer_ = i;
  return v;
}

Value Value::make_boolean(bool b) {
  Value v;
  v.kind_ = Kind::Boolean;
  v.boolean_ = b;
  return v;
}

Value Value::make_array() {
  Value v;
  v.kind_ = Kind::Array;
  return v;
}

const Value* Value::find(const std::string& key) const {
  if (kind_ != Kind::Table) return nullptr;
  const auto it = table_.find(key);
  return it == table_.end() ? nullptr : &it->second;
}

Value& Value::insert(const std::string& key, Value v) {
  if (kind_ != Kind::Table) throw std::runtime_error("toml: insert into non-table");
  return table_[key] = std::move(v);
}

const std::string& Value::as_string() const {
  if (kind_ != Kind::String) throw std::runtime_error("toml: expected string");
  return string_;
}

double Value::as_number() const {
  if (kind_ == Kind::Float) return float_;
  if (kind_ == Kind::Integer) return static_cast<double>(integer_);
  throw std::runtime_error("toml: expected number");
}

std::int64_t Value::as_integer() const {
  if (kind_ != Kind::Integer) throw std::runtime_error("toml: expected integer");
  return integer_;
}

bool Value::as_boolean() const {
  if (kind_ != Kind::Boolean) throw std::runtime_error("toml: expected boolean");
  return boolean_;
}

Value Value::parse(const std::string& text) { return Parser(text).run(); }

Value Value::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace cubicqn::toml
