#include "ftm/rdf_parser.hpp"

#include <cctype>
#include <optional>
#include <unordered_map>

#include "ftm/error.hpp"

namespace ftm {

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

namespace {

constexpr std::size_t kChunk = 1 << 16;

// Buffered character reader with arbitrary small lookahead and position tracking.
class Cursor {
 public:
  explicit Cursor(std::istream& in) : in_(in) {}

  int peek(std::size_t ahead = 0) {
    if (!fill(ahead + 1)) return -1;
    return static_cast<unsigned char>(buf_[pos_ + ahead]);
  }

  int get() {
    int c = peek();
    if (c < 0) return c;
    ++pos_;
    ++offset_;
    if (c == '\n') ++line_;
    return c;
  }

  bool eof() { return peek() < 0; }

  void expect(char c, const char* what) {
    if (peek() != static_cast<unsigned char>(c)) fail(std::string("expected ") + what);
    get();
  }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(line_, offset_, message); }

 private:
  bool fill(std::size_t need) {
    while (buf_.size() - pos_ < need) {
      if (!in_) return false;
      if (pos_ > kChunk) {
        buf_.erase(0, pos_);
        pos_ = 0;
      }
      std::size_t old = buf_.size();
      buf_.resize(old + kChunk);
      in_.read(buf_.data() + old, kChunk);
      buf_.resize(old + static_cast<std::size_t>(in_.gcount()));
      if (in_.gcount() == 0) return buf_.size() - pos_ >= need;
    }
    return true;
  }

  std::istream& in_;
  std::string buf_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t offset_ = 0;
};

int hex_digit(int c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Reads the hex digits of a \u or \U escape (the backslash and letter already consumed).
void read_uchar(Cursor& cur, int letter, std::string& out) {
  const int digits = letter == 'u' ? 4 : 8;
  char32_t cp = 0;
  for (int i = 0; i < digits; ++i) {
    int h = hex_digit(cur.peek());
    if (h < 0) cur.fail("invalid unicode escape");
    cur.get();
    cp = cp * 16 + static_cast<char32_t>(h);
  }
  if (cp > 0x10FFFF) cur.fail("unicode escape out of range");
  append_utf8(out, cp);
}

bool has_scheme(std::string_view iri) {
  if (iri.empty() || !std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
  for (std::size_t i = 1; i < iri.size(); ++i) {
    char c = iri[i];
    if (c == ':') return true;
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.')) return false;
  }
  return false;
}

std::string read_iriref(Cursor& cur) {
  cur.expect('<', "'<'");
  std::string out;
  while (true) {
    int c = cur.peek();
    if (c < 0) cur.fail("unterminated IRI");
    if (c == '>') {
      cur.get();
      return out;
    }
    if (c == '\\') {
      cur.get();
      int letter = cur.get();
      if (letter != 'u' && letter != 'U') cur.fail("invalid escape in IRI");
      read_uchar(cur, letter, out);
      continue;
    }
    if (c <= 0x20 || c == '<' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' || c == '`')
      cur.fail("invalid character in IRI");
    out.push_back(static_cast<char>(cur.get()));
  }
}

bool is_pn_chars_base(int c) { return std::isalpha(c) || c >= 0x80; }
bool is_pn_chars_u(int c) { return is_pn_chars_base(c) || c == '_'; }
bool is_pn_chars(int c) { return is_pn_chars_u(c) || c == '-' || std::isdigit(c); }

std::string read_blank_label(Cursor& cur) {
  cur.expect('_', "'_:'");
  cur.expect(':', "'_:'");
  std::string out = "_:";
  int c = cur.peek();
  if (!(is_pn_chars_u(c) || std::isdigit(c))) cur.fail("invalid blank node label");
  out.push_back(static_cast<char>(cur.get()));
  while (true) {
    c = cur.peek();
    if (is_pn_chars(c)) {
      out.push_back(static_cast<char>(cur.get()));
    } else if (c == '.' && is_pn_chars(cur.peek(1))) {
      out.push_back(static_cast<char>(cur.get()));
    } else {
      break;
    }
  }
  return out;
}

void read_echar(Cursor& cur, std::string& out) {
  int c = cur.get();
  switch (c) {
    case 't':
      out.push_back('\t');
      break;
    case 'b':
      out.push_back('\b');
      break;
    case 'n':
      out.push_back('\n');
      break;
    case 'r':
      out.push_back('\r');
      break;
    case 'f':
      out.push_back('\f');
      break;
    case '"':
      out.push_back('"');
      break;
    case '\'':
      out.push_back('\'');
      break;
    case '\\':
      out.push_back('\\');
      break;
    case 'u':
    case 'U':
      read_uchar(cur, c, out);
      break;
    default:
      cur.fail("invalid string escape");
  }
}

// Short or long quoted string. `allow_long` and `allow_single` gate the Turtle-only forms.
std::string read_string(Cursor& cur, bool turtle) {
  const int quote = cur.peek();
  if (quote != '"' && !(turtle && quote == '\'')) cur.fail("expected string literal");
  const bool is_long = turtle && cur.peek(1) == quote && cur.peek(2) == quote;
  cur.get();
  if (is_long) {
    cur.get();
    cur.get();
  }
  std::string out;
  while (true) {
    int c = cur.peek();
    if (c < 0) cur.fail("unterminated string literal");
    if (c == quote) {
      if (!is_long) {
        cur.get();
        return out;
      }
      if (cur.peek(1) == quote && cur.peek(2) == quote) {
        cur.get();
        cur.get();
        cur.get();
        return out;
      }
      out.push_back(static_cast<char>(cur.get()));
      continue;
    }
    if (c == '\\') {
      cur.get();
      read_echar(cur, out);
      continue;
    }
    if (!is_long && (c == '\n' || c == '\r')) cur.fail("line break in string literal");
    out.push_back(static_cast<char>(cur.get()));
  }
}

std::string read_langtag(Cursor& cur) {
  cur.expect('@', "'@'");
  std::string out;
  while (std::isalpha(cur.peek())) out.push_back(static_cast<char>(cur.get()));
  if (out.empty()) cur.fail("empty language tag");
  while (cur.peek() == '-') {
    out.push_back(static_cast<char>(cur.get()));
    std::size_t before = out.size();
    while (std::isalnum(cur.peek())) out.push_back(static_cast<char>(cur.get()));
    if (out.size() == before) cur.fail("malformed language tag");
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// N-Triples

void skip_inline_ws(Cursor& cur) {
  while (cur.peek() == ' ' || cur.peek() == '\t') cur.get();
}

std::string read_nt_node(Cursor& cur, bool allow_blank) {
  int c = cur.peek();
  if (c == '<') {
    std::string iri = read_iriref(cur);
    if (!has_scheme(iri)) cur.fail("relative IRI not allowed in N-Triples: " + iri);
    return iri;
  }
  if (allow_blank && c == '_') return read_blank_label(cur);
  cur.fail(allow_blank ? "expected IRI or blank node" : "expected IRI");
}

}  // namespace

void parse_ntriples(std::istream& in, const TripleSink& sink) {
  Cursor cur(in);
  while (true) {
    skip_inline_ws(cur);
    int c = cur.peek();
    if (c < 0) break;
    if (c == '\n' || c == '\r') {
      cur.get();
      continue;
    }
    if (c == '#') {
      while (cur.peek() >= 0 && cur.peek() != '\n' && cur.peek() != '\r') cur.get();
      continue;
    }
    std::string subject = read_nt_node(cur, true);
    skip_inline_ws(cur);
    std::string predicate = read_nt_node(cur, false);
    skip_inline_ws(cur);

    Term object = Iri("_:unset");
    c = cur.peek();
    if (c == '"') {
      std::string raw = read_string(cur, false);
      std::optional<Iri> datatype;
      std::optional<std::string> language;
      if (cur.peek() == '^') {
        cur.get();
        cur.expect('^', "'^^'");
        std::string dt = read_iriref(cur);
        if (!has_scheme(dt)) cur.fail("relative datatype IRI");
        datatype = Iri(std::move(dt));
      } else if (cur.peek() == '@') {
        language = read_langtag(cur);
      }
      object = classify_literal(std::move(raw), std::move(datatype), std::move(language));
    } else {
      object = Iri(read_nt_node(cur, true));
    }
    skip_inline_ws(cur);
    cur.expect('.', "'.' at end of triple");
    skip_inline_ws(cur);
    if (cur.peek() == '#') {
      while (cur.peek() >= 0 && cur.peek() != '\n' && cur.peek() != '\r') cur.get();
    }
    c = cur.peek();
    if (c >= 0 && c != '\n' && c != '\r') cur.fail("trailing characters after triple");
    sink(Triple{Iri(std::move(subject)), Iri(std::move(predicate)), std::move(object)});
  }
}

// ---------------------------------------------------------------------------------------------
// Turtle

namespace {

std::string resolve_iri(const std::string& base, const std::string& ref) {
  if (base.empty() || has_scheme(ref)) return ref;
  if (ref.empty()) {
    auto hash = base.find('#');
    return hash == std::string::npos ? base : base.substr(0, hash);
  }
  if (ref[0] == '#') {
    auto hash = base.find('#');
    return (hash == std::string::npos ? base : base.substr(0, hash)) + ref;
  }
  auto scheme_end = base.find("://");
  if (ref.rfind("//", 0) == 0) {
    return scheme_end == std::string::npos ? ref : base.substr(0, scheme_end + 1) + ref;
  }
  if (ref[0] == '/') {
    if (scheme_end == std::string::npos) return ref;
    auto path_start = base.find('/', scheme_end + 3);
    return (path_start == std::string::npos ? base : base.substr(0, path_start)) + ref;
  }
  std::string stem = base.substr(0, base.find_first_of("?#"));
  auto slash = stem.rfind('/');
  if (slash == std::string::npos || (scheme_end != std::string::npos && slash < scheme_end + 3)) return stem + "/" + ref;
  return stem.substr(0, slash + 1) + ref;
}

class TurtleParser {
 public:
  TurtleParser(std::istream& in, const TripleSink& sink, std::string base)
      : cur_(in), sink_(sink), base_(std::move(base)) {}

  void run() {
    while (true) {
      skip_ws();
      if (cur_.eof()) return;
      statement();
    }
  }

 private:
  void skip_ws() {
    while (true) {
      int c = cur_.peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        cur_.get();
      } else if (c == '#') {
        while (cur_.peek() >= 0 && cur_.peek() != '\n') cur_.get();
      } else {
        return;
      }
    }
  }

  bool keyword_ahead(std::string_view word) {
    for (std::size_t i = 0; i < word.size(); ++i) {
      int c = cur_.peek(i);
      if (c < 0 || std::toupper(c) != std::toupper(static_cast<unsigned char>(word[i]))) return false;
    }
    int after = cur_.peek(word.size());
    return after == ' ' || after == '\t' || after == '\n' || after == '\r' || after == '<';
  }

  void consume(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) cur_.get();
  }

  void statement() {
    if (cur_.peek() == '@') {
      if (keyword_ahead("@prefix")) {
        consume(7);
        prefix_directive();
        skip_ws();
        cur_.expect('.', "'.' after @prefix");
        return;
      }
      if (keyword_ahead("@base")) {
        consume(5);
        skip_ws();
        base_ = resolve_iri(base_, read_iriref(cur_));
        skip_ws();
        cur_.expect('.', "'.' after @base");
        return;
      }
      cur_.fail("unknown directive");
    }
    if (keyword_ahead("PREFIX")) {
      consume(6);
      prefix_directive();
      return;
    }
    if (keyword_ahead("BASE")) {
      consume(4);
      skip_ws();
      base_ = resolve_iri(base_, read_iriref(cur_));
      return;
    }
    triples();
    skip_ws();
    cur_.expect('.', "'.' at end of statement");
  }

  void prefix_directive() {
    skip_ws();
    std::string prefix;
    while (cur_.peek() >= 0 && cur_.peek() != ':') {
      int c = cur_.peek();
      if (!(is_pn_chars(c) || c == '.')) cur_.fail("invalid prefix name");
      prefix.push_back(static_cast<char>(cur_.get()));
    }
    cur_.expect(':', "':' in prefix declaration");
    skip_ws();
    prefixes_[prefix] = resolve_iri(base_, read_iriref(cur_));
  }

  void triples() {
    if (cur_.peek() == '[') {
      std::string subject = blank_property_list();
      skip_ws();
      if (cur_.peek() != '.') predicate_object_list(subject);
      return;
    }
    std::string subject = subject_node();
    skip_ws();
    predicate_object_list(subject);
  }

  std::string subject_node() {
    int c = cur_.peek();
    if (c == '<') return resolve_iri(base_, read_iriref(cur_));
    if (c == '_' && cur_.peek(1) == ':') return read_blank_label(cur_);
    if (c == '(') return collection();
    std::string token = read_name_token();
    return expand_pname(token);
  }

  void predicate_object_list(const std::string& subject) {
    while (true) {
      skip_ws();
      std::string predicate = verb();
      skip_ws();
      object_list(subject, predicate);
      skip_ws();
      if (cur_.peek() != ';') return;
      while (cur_.peek() == ';') {
        cur_.get();
        skip_ws();
      }
      int c = cur_.peek();
      if (c == '.' || c == ']' || c < 0) return;
    }
  }

  std::string verb() {
    if (cur_.peek() == '<') return resolve_iri(base_, read_iriref(cur_));
    std::string token = read_name_token();
    if (token == "a") return std::string(vocab::kRdfType);
    return expand_pname(token);
  }

  void object_list(const std::string& subject, const std::string& predicate) {
    while (true) {
      skip_ws();
      Term object = object_term();
      emit(subject, predicate, std::move(object));
      skip_ws();
      if (cur_.peek() != ',') return;
      cur_.get();
    }
  }

  Term object_term() {
    int c = cur_.peek();
    if (c == '<') return Iri(resolve_iri(base_, read_iriref(cur_)));
    if (c == '_' && cur_.peek(1) == ':') return Iri(read_blank_label(cur_));
    if (c == '[') return Iri(blank_property_list());
    if (c == '(') return Iri(collection());
    if (c == '"' || c == '\'') return rdf_literal();
    if (std::isdigit(c) || c == '+' || c == '-' || (c == '.' && std::isdigit(cur_.peek(1)))) return numeric_literal();
    std::string token = read_name_token();
    if (token == "true" || token == "false")
      return classify_literal(token, Iri(std::string(vocab::kXsdBoolean)));
    return Iri(expand_pname(token));
  }

  Term rdf_literal() {
    std::string raw = read_string(cur_, true);
    std::optional<Iri> datatype;
    std::optional<std::string> language;
    if (cur_.peek() == '@') {
      language = read_langtag(cur_);
    } else if (cur_.peek() == '^' && cur_.peek(1) == '^') {
      consume(2);
      if (cur_.peek() == '<') {
        datatype = Iri(resolve_iri(base_, read_iriref(cur_)));
      } else {
        datatype = Iri(expand_pname(read_name_token()));
      }
    }
    return classify_literal(std::move(raw), std::move(datatype), std::move(language));
  }

  Term numeric_literal() {
    std::string text;
    if (cur_.peek() == '+' || cur_.peek() == '-') text.push_back(static_cast<char>(cur_.get()));
    bool has_dot = false;
    bool has_exp = false;
    while (std::isdigit(cur_.peek())) text.push_back(static_cast<char>(cur_.get()));
    if (cur_.peek() == '.' && std::isdigit(cur_.peek(1))) {
      has_dot = true;
      text.push_back(static_cast<char>(cur_.get()));
      while (std::isdigit(cur_.peek())) text.push_back(static_cast<char>(cur_.get()));
    }
    if (cur_.peek() == 'e' || cur_.peek() == 'E') {
      has_exp = true;
      text.push_back(static_cast<char>(cur_.get()));
      if (cur_.peek() == '+' || cur_.peek() == '-') text.push_back(static_cast<char>(cur_.get()));
      if (!std::isdigit(cur_.peek())) cur_.fail("malformed exponent");
      while (std::isdigit(cur_.peek())) text.push_back(static_cast<char>(cur_.get()));
    }
    if (text.empty() || text == "+" || text == "-") cur_.fail("malformed number");
    std::string_view dt = has_exp ? vocab::kXsdDouble : has_dot ? vocab::kXsdDecimal : vocab::kXsdInteger;
    return classify_literal(std::move(text), Iri(std::string(dt)));
  }

  std::string blank_property_list() {
    cur_.expect('[', "'['");
    std::string node = fresh_blank();
    skip_ws();
    if (cur_.peek() == ']') {
      cur_.get();
      return node;
    }
    predicate_object_list(node);
    skip_ws();
    cur_.expect(']', "']'");
    return node;
  }

  std::string collection() {
    cur_.expect('(', "'('");
    std::string head(vocab::kRdfNil);
    std::string previous;
    while (true) {
      skip_ws();
      if (cur_.peek() == ')') {
        cur_.get();
        break;
      }
      if (cur_.eof()) cur_.fail("unterminated collection");
      std::string cell = fresh_blank();
      if (previous.empty()) {
        head = cell;
      } else {
        emit(previous, std::string(vocab::kRdfRest), Iri(cell));
      }
      Term item = object_term();
      emit(cell, std::string(vocab::kRdfFirst), std::move(item));
      previous = cell;
    }
    if (!previous.empty()) emit(previous, std::string(vocab::kRdfRest), Iri(std::string(vocab::kRdfNil)));
    return head;
  }

  // Prefixed name or bare keyword. A '.' is part of the token only when followed by a name char.
  std::string read_name_token() {
    std::string out;
    while (true) {
      int c = cur_.peek();
      if (c < 0) break;
      if (is_pn_chars(c) || c == ':' || c == '%') {
        out.push_back(static_cast<char>(cur_.get()));
      } else if (c == '.' && !out.empty()) {
        int next = cur_.peek(1);
        if (is_pn_chars(next) || next == ':' || next == '%') {
          out.push_back(static_cast<char>(cur_.get()));
        } else {
          break;
        }
      } else if (c == '\\') {
        cur_.get();
        int escaped = cur_.get();
        if (escaped < 0) cur_.fail("dangling escape in local name");
        out.push_back(static_cast<char>(escaped));
      } else {
        break;
      }
    }
    if (out.empty()) cur_.fail("unexpected character");
    return out;
  }

  std::string expand_pname(const std::string& token) {
    auto colon = token.find(':');
    if (colon == std::string::npos) cur_.fail("expected prefixed name, got '" + token + "'");
    auto it = prefixes_.find(token.substr(0, colon));
    if (it == prefixes_.end()) cur_.fail("undeclared prefix '" + token.substr(0, colon) + "'");
    return it->second + token.substr(colon + 1);
  }

  std::string fresh_blank() { return "_:genid" + std::to_string(++blank_counter_); }

  void emit(const std::string& s, const std::string& p, Term o) {
    sink_(Triple{Iri(s), Iri(p), std::move(o)});
  }

  Cursor cur_;
  const TripleSink& sink_;
  std::string base_;
  std::unordered_map<std::string, std::string> prefixes_;
  std::uint64_t blank_counter_ = 0;
};

}  // namespace

void parse_turtle(std::istream& in, const TripleSink& sink, std::string base) {
  TurtleParser(in, sink, std::move(base)).run();
}

}  // namespace ftm
