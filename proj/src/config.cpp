#include "pift/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace pift {

namespace {

class TomlParser {
 public:
  TomlParser(const std::string& text, std::string source)
      : text_(text), source_(std::move(source)) {}

  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        parse_key_value(*table);
      }
      expect_line_end();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << source_ << ":" << line_ << ": " << what;
    throw ConfigError(os.str());
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  char get() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) get();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') get();
    }
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_spaces();
      skip_comment();
      if (peek() == '\r') get();
      if (peek() == '\n') {
        get();
      } else {
        break;
      }
    }
  }
  // Inside arrays and inline tables newlines and comments are whitespace.
  void skip_all_whitespace() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void expect_line_end() {
    skip_spaces();
    skip_comment();
    if (peek() == '\r') get();
    if (eof()) return;
    if (peek() != '\n') fail(std::string("unexpected '") + peek() + "' after value");
    get();
  }

  static bool is_bare(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
  }

  std::string parse_simple_key() {
    skip_spaces();
    if (peek() == '"') return parse_basic_string();
    if (peek() == '\'') return parse_literal_string();
    std::string key;
    while (!eof() && is_bare(peek())) key += get();
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts{parse_simple_key()};
    skip_spaces();
    while (peek() == '.') {
      get();
      parts.push_back(parse_simple_key());
      skip_spaces();
    }
    return parts;
  }

  nlohmann::json& descend(nlohmann::json& from, const std::vector<std::string>& path,
                          std::size_t count) {
    nlohmann::json* node = &from;
    for (std::size_t i = 0; i < count; ++i) {
      auto& child = (*node)[path[i]];
      if (child.is_null()) child = nlohmann::json::object();
      if (!child.is_object()) fail("key '" + path[i] + "' is not a table");
      node = &child;
    }
    return *node;
  }

  nlohmann::json& open_table(nlohmann::json& root) {
    get();  // '['
    if (peek() == '[') fail("arrays of tables are not supported; use an inline array");
    const auto path = parse_dotted_key();
    skip_spaces();
    if (peek() != ']') fail("expected ']' to close table header");
    get();
    std::string joined;
    for (const auto& p : path) joined += (joined.empty() ? "" : ".") + p;
    if (!defined_tables_.insert(joined).second) fail("table [" + joined + "] defined twice");
    return descend(root, path, path.size());
  }

  void parse_key_value(nlohmann::json& table) {
    const auto path = parse_dotted_key();
    skip_spaces();
    if (peek() != '=') fail("expected '=' after key");
    get();
    skip_spaces();
    nlohmann::json& parent = descend(table, path, path.size() - 1);
    if (parent.contains(path.back())) fail("duplicate key '" + path.back() + "'");
    parent[path.back()] = parse_value();
  }

  nlohmann::json parse_value() {
    const char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    if (text_.compare(pos_, 4, "true") == 0 && !is_bare(char_at(pos_ + 4))) {
      pos_ += 4;
      return true;
    }
    if (text_.compare(pos_, 5, "false") == 0 && !is_bare(char_at(pos_ + 5))) {
      pos_ += 5;
      return false;
    }
    return parse_number();
  }

  char char_at(std::size_t i) const { return i < text_.size() ? text_[i] : '\0'; }

  std::string parse_basic_string() {
    get();  // '"'
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      switch (const char e = get()) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        default: fail(std::string("unsupported escape '\\") + e + "'");
      }
    }
    return out;
  }

  std::string parse_literal_string() {
    get();  // '\''
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '\'') break;
      out += c;
    }
    return out;
  }

  nlohmann::json parse_array() {
    get();  // '['
    nlohmann::json arr = nlohmann::json::array();
    while (true) {
      skip_all_whitespace();
      if (peek() == ']') {
        get();
        return arr;
      }
      arr.push_back(parse_value());
      skip_all_whitespace();
      if (peek() == ',') {
        get();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  nlohmann::json parse_inline_table() {
    get();  // '{'
    nlohmann::json table = nlohmann::json::object();
    skip_spaces();
    if (peek() == '}') {
      get();
      return table;
    }
    while (true) {
      skip_spaces();
      parse_key_value(table);
      skip_spaces();
      if (peek() == ',') {
        get();
      } else if (peek() == '}') {
        get();
        return table;
      } else {
        fail("expected ',' or '}' in inline table");
      }
    }
  }

  nlohmann::json parse_number() {
    std::string token;
    while (!eof() && (is_bare(peek()) || peek() == '.' || peek() == '+')) token += get();
    if (token.empty()) fail("expected a value");
    std::string digits;
    for (char c : token) {
      if (c != '_') digits += c;
    }
    if (digits == "inf" || digits == "+inf") return std::numeric_limits<double>::infinity();
    if (digits == "-inf") return -std::numeric_limits<double>::infinity();
    if (digits == "nan" || digits == "+nan" || digits == "-nan") {
      return std::numeric_limits<double>::quiet_NaN();
    }
    const char* first = digits.data() + (digits.front() == '+' ? 1 : 0);
    const char* last = digits.data() + digits.size();
    const bool is_float = digits.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return v;
    } else {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return v;
    }
    fail("invalid value '" + token + "'");
  }

  const std::string& text_;
  std::string source_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> defined_tables_;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string> split_dotted(const std::string& dotted) {
  std::vector<std::string> parts;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("empty component in key path '" + dotted + "'");
    parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("empty key path");
  return parts;
}

}  // namespace

nlohmann::json parse_toml(const std::string& text, const std::string& source) {
  return TomlParser(text, source).parse();
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (ends_with(path, ".json")) {
    try {
      return nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  return parse_toml(buffer.str(), path);
}

void set_path(nlohmann::json& root, const std::string& dotted, const nlohmann::json& value) {
  const auto parts = split_dotted(dotted);
  nlohmann::json* node = &root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    auto& child = (*node)[parts[i]];
    if (child.is_null()) child = nlohmann::json::object();
    if (!child.is_object()) throw ConfigError("'" + parts[i] + "' in '" + dotted + "' is not a table");
    node = &child;
  }
  (*node)[parts.back()] = value;
}

nlohmann::json get_path(const nlohmann::json& root, const std::string& dotted) {
  const nlohmann::json* node = &root;
  for (const auto& part : split_dotted(dotted)) {
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
  }
  return *node;
}

// ---------------------------------------------------------------------------
// ConfigView

std::string ConfigView::where(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool ConfigView::has(const std::string& key) const {
  return node_.is_object() && node_.contains(key) && !node_[key].is_null();
}

const nlohmann::json& ConfigView::at(const std::string& key) const {
  if (!has(key)) throw ConfigError(where(key) + ": required key is missing");
  return node_[key];
}

ConfigView ConfigView::section(const std::string& key) const {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!has(key)) return ConfigView(empty, where(key));
  const auto& child = node_[key];
  if (!child.is_object()) throw ConfigError(where(key) + ": expected a table");
  return ConfigView(child, where(key));
}

double ConfigView::number(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
  return v.get<double>();
}

double ConfigView::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long ConfigView::integer(const std::string& key) const {
  const auto& v = at(key);
  if (v.is_number_integer()) return v.get<long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) {
      return static_cast<long>(d);
    }
  }
  throw ConfigError(where(key) + ": expected an integer");
}

long ConfigView::integer(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool ConfigView::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = node_[key];
  if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
  return v.get<bool>();
}

std::string ConfigView::string(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
  return v.get<std::string>();
}

std::string ConfigView::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> ConfigView::numbers(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::string> ConfigView::strings(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ConfigError(where(key) + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace pift
