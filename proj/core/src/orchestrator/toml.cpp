#include "teleop/orchestrator/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

namespace teleop {

using nlohmann::json;

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  json run() {
    json root = json::object();
    json* table = &root;
    while (!eof()) {
      skip_blank();
      if (eof()) break;
      const char c = peek();
      if (c == '\n') {
        advance();
        continue;
      }
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '[') {
        table = header(root);
      } else {
        key_value(*table);
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(fmt::format("line {}: {}", line_, msg));
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  void skip_blank() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }
  void skip_comment() {
    while (!eof() && peek() != '\n') advance();
  }
  // Blank lines and comments inside arrays.
  void skip_space_and_newlines() {
    for (;;) {
      skip_blank();
      if (peek() == '\n') {
        advance();
      } else if (peek() == '#') {
        skip_comment();
      } else {
        return;
      }
    }
  }
  void end_of_line() {
    skip_blank();
    if (peek() == '#') skip_comment();
    if (!eof() && peek() != '\n') fail(fmt::format("unexpected '{}' after value", peek()));
  }

  std::string key_part() {
    skip_blank();
    std::string k;
    if (peek() == '"' || peek() == '\'') return string_value();
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) {
      k += advance();
    }
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{key_part()};
    skip_blank();
    while (peek() == '.') {
      advance();
      parts.push_back(key_part());
      skip_blank();
    }
    return parts;
  }

  // Walks a dotted path from the root; arrays of tables resolve to their
  // last element, as in TOML.
  json* descend(json& root, const std::vector<std::string>& path, std::size_t count) {
    json* at = &root;
    for (std::size_t i = 0; i < count; ++i) {
      json& next = (*at)[path[i]];
      if (next.is_null()) next = json::object();
      if (next.is_array()) {
        if (next.empty() || !next.back().is_object()) fail(fmt::format("'{}' is not a table", path[i]));
        at = &next.back();
      } else if (next.is_object()) {
        at = &next;
      } else {
        fail(fmt::format("'{}' is already a value", path[i]));
      }
    }
    return at;
  }

  json* header(json& root) {
    advance();  // '['
    const bool array = peek() == '[';
    if (array) advance();
    const auto path = dotted_key();
    if (peek() != ']') fail("expected ']'");
    advance();
    if (array) {
      if (peek() != ']') fail("expected ']]'");
      advance();
    }
    json* parent = descend(root, path, path.size() - 1);
    json& slot = (*parent)[path.back()];
    if (array) {
      if (slot.is_null()) slot = json::array();
      if (!slot.is_array()) fail(fmt::format("'{}' is not an array of tables", path.back()));
      slot.push_back(json::object());
      return &slot.back();
    }
    if (slot.is_null()) slot = json::object();
    if (!slot.is_object()) fail(fmt::format("'{}' is already a value", path.back()));
    return &slot;
  }

  void key_value(json& table) {
    const auto path = dotted_key();
    if (peek() != '=') fail("expected '='");
    advance();
    skip_blank();
    json* parent = descend(table, path, path.size() - 1);
    if (parent->contains(path.back())) fail(fmt::format("duplicate key '{}'", path.back()));
    (*parent)[path.back()] = value();
  }

  json value() {
    const char c = peek();
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') return array_value();
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number_value();
  }

  std::string string_value() {
    const char quote = advance();
    std::string s;
    while (!eof() && peek() != quote) {
      char c = advance();
      if (c == '\n') fail("newline in string");
      if (quote == '"' && c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = advance();
        switch (e) {
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case 'r': c = '\r'; break;
          default: fail(fmt::format("unsupported escape '\\{}'", e));
        }
      }
      s += c;
    }
    if (eof()) fail("unterminated string");
    advance();
    return s;
  }

  json array_value() {
    advance();  // '['
    json arr = json::array();
    for (;;) {
      skip_space_and_newlines();
      if (peek() == ']') {
        advance();
        return arr;
      }
      if (peek() == '[') fail("nested arrays are not supported");
      arr.push_back(value());
      skip_space_and_newlines();
      if (peek() == ',') {
        advance();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  json number_value() {
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' ||
                      peek() == '-' || peek() == '.' || peek() == '_')) {
      const char c = advance();
      if (c != '_') tok += c;
    }
    if (tok.empty()) fail("expected a value");
    std::string_view body = tok;
    const bool neg = body.front() == '-';
    if (body.front() == '+' || body.front() == '-') body.remove_prefix(1);
    if (body == "inf") return neg ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      int64_t v = 0;
      const auto [p, ec] = std::from_chars(tok.data() + (tok.front() == '+'), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size()) fail(fmt::format("invalid value '{}'", tok));
      return v;
    }
    double v = 0.0;
    const auto [p, ec] = std::from_chars(tok.data() + (tok.front() == '+'), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail(fmt::format("invalid number '{}'", tok));
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

json parse_toml(std::string_view text) { return Parser(text).run(); }

}  // namespace teleop
