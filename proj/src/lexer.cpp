#include "typegate/error.hpp"
#include "typegate/source.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace typegate {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False",  "None",     "True",    "and",    "as",       "assert", "async",
    "await",  "break",    "class",   "continue", "def",    "del",    "elif",
    "else",   "except",   "finally", "for",    "from",     "global", "if",
    "import", "in",       "is",      "lambda", "nonlocal", "not",    "or",
    "pass",   "raise",    "return",  "try",    "while",    "with",   "yield",
};

// Longest first so the first match is the longest.
constexpr std::string_view kOperators[] = {
    "**=", "//=", ">>=", "<<=", "->", "**", "//", "<<", ">>", "<=", ">=", "==",
    "!=",  "+=",  "-=",  "*=",  "/=", "%=", "&=", "|=", "^=", "@=", ":=", "+",
    "-",   "*",   "/",   "%",   "&",  "|",  "^",  "~",  "<",  ">",  "=",  "@",
};

constexpr std::string_view kDelimiters = "()[]{},:.;";

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view word) {
  if (word.empty() || word.size() > 2) return false;
  std::string lower;
  for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "r" || lower == "u" || lower == "b" || lower == "f" || lower == "br" ||
         lower == "rb" || lower == "fr" || lower == "rf";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  TokenStream run() {
    while (pos_ < src_.size()) {
      if (at_line_start_ && depth_ == 0) {
        if (!handle_indentation()) continue;
      }
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\f') {
        trivia_.push_back(c);
        ++pos_;
      } else if (c == '#') {
        skip_comment();
      } else if (c == '\\' && is_newline_at(pos_ + 1)) {
        trivia_.push_back(c);
        ++pos_;
        consume_newline_into_trivia();
      } else if (c == '\\') {
        fail("unexpected character after line continuation");
      } else if (c == '\n' || c == '\r') {
        if (depth_ > 0) {
          consume_newline_into_trivia();
        } else {
          std::size_t start = pos_;
          std::size_t len = (c == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ? 2 : 1;
          emit(TokenKind::Newline, start, len);
          new_line();
          at_line_start_ = true;
        }
      } else {
        lex_token();
      }
    }
    finish();
    return std::move(out_);
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
  int depth_ = 0;
  bool at_line_start_ = true;
  std::vector<int> indents_{0};
  std::string trivia_;
  TokenStream out_;

  [[noreturn]] void fail(const std::string& msg) {
    throw SyntaxError(ErrorCode::Lex, msg, line_, column_at(pos_));
  }

  int column_at(std::size_t p) const {
    int col = 0;
    for (std::size_t i = line_start_; i < p && i < src_.size(); ++i) {
      if (src_[i] == '\t')
        col = (col / 8 + 1) * 8;
      else
        ++col;
    }
    return col;
  }

  bool is_newline_at(std::size_t p) const {
    return p < src_.size() && (src_[p] == '\n' || src_[p] == '\r');
  }

  void new_line() {
    ++line_;
    line_start_ = pos_;
  }

  // Moves a newline sequence at pos_ into trivia.
  void consume_newline_into_trivia() {
    if (src_[pos_] == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
      trivia_ += "\r\n";
      pos_ += 2;
    } else {
      trivia_.push_back(src_[pos_]);
      ++pos_;
    }
    new_line();
  }

  void skip_comment() {
    while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') trivia_.push_back(src_[pos_++]);
  }

  void emit(TokenKind kind, std::size_t start, std::size_t len) {
    Token tok;
    tok.kind = kind;
    tok.text = std::string(src_.substr(start, len));
    tok.leading = std::move(trivia_);
    trivia_.clear();
    tok.span.line = line_;
    tok.span.column = column_at(start);
    tok.span.token_index = out_.tokens.size();
    out_.tokens.push_back(std::move(tok));
    pos_ = start + len;
  }

  void emit_synthetic(TokenKind kind, int column) {
    Token tok;
    tok.kind = kind;
    tok.leading = std::move(trivia_);
    trivia_.clear();
    tok.span.line = line_;
    tok.span.column = column;
    tok.span.token_index = out_.tokens.size();
    out_.tokens.push_back(std::move(tok));
  }

  // Returns false when the line was blank and consumed entirely.
  bool handle_indentation() {
    std::size_t p = pos_;
    int col = 0;
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\f')) {
      if (src_[p] == '\t')
        col = (col / 8 + 1) * 8;
      else if (src_[p] == '\f')
        col = 0;
      else
        ++col;
      ++p;
    }
    trivia_.append(src_.substr(pos_, p - pos_));
    pos_ = p;
    if (p >= src_.size()) return false;
    if (src_[p] == '#') {
      skip_comment();
      if (pos_ < src_.size()) consume_newline_into_trivia();
      return false;
    }
    if (src_[p] == '\n' || src_[p] == '\r') {
      consume_newline_into_trivia();
      return false;
    }
    at_line_start_ = false;
    if (col > indents_.back()) {
      indents_.push_back(col);
      emit_synthetic(TokenKind::Indent, col);
    } else if (col < indents_.back()) {
      while (col < indents_.back()) {
        indents_.pop_back();
        emit_synthetic(TokenKind::Dedent, col);
      }
      if (col != indents_.back()) fail("unindent does not match any outer indentation level");
    }
    return true;
  }

  void lex_token() {
    unsigned char c = static_cast<unsigned char>(src_[pos_]);
    if (is_ident_start(c)) {
      std::size_t p = pos_;
      while (p < src_.size() && is_ident_char(static_cast<unsigned char>(src_[p]))) ++p;
      std::string_view word = src_.substr(pos_, p - pos_);
      if (p < src_.size() && (src_[p] == '\'' || src_[p] == '"') && is_string_prefix(word)) {
        lex_string(pos_, p);
        return;
      }
      emit(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, pos_, p - pos_);
      return;
    }
    if (std::isdigit(c) || (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number();
      return;
    }
    if (c == '\'' || c == '"') {
      lex_string(pos_, pos_);
      return;
    }
    if (src_.substr(pos_, 3) == "...") {
      emit(TokenKind::Delimiter, pos_, 3);
      return;
    }
    for (std::string_view op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        emit(TokenKind::Operator, pos_, op.size());
        return;
      }
    }
    if (kDelimiters.find(static_cast<char>(c)) != std::string_view::npos) {
      if (c == '(' || c == '[' || c == '{') ++depth_;
      if ((c == ')' || c == ']' || c == '}') && depth_ > 0) --depth_;
      emit(TokenKind::Delimiter, pos_, 1);
      return;
    }
    fail(std::string("unexpected character '") + static_cast<char>(c) + "'");
  }

  void lex_number() {
    std::size_t p = pos_;
    auto digits = [&](auto pred) {
      while (p < src_.size() && (pred(static_cast<unsigned char>(src_[p])) || src_[p] == '_')) ++p;
    };
    if (src_[p] == '0' && p + 1 < src_.size() &&
        std::string_view("xXoObB").find(src_[p + 1]) != std::string_view::npos) {
      p += 2;
      digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
    } else {
      digits([](unsigned char ch) { return std::isdigit(ch) != 0; });
      if (p < src_.size() && src_[p] == '.') {
        ++p;
        digits([](unsigned char ch) { return std::isdigit(ch) != 0; });
      }
      if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
        std::size_t q = p + 1;
        if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
        if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
          p = q;
          digits([](unsigned char ch) { return std::isdigit(ch) != 0; });
        }
      }
      if (p < src_.size() && (src_[p] == 'j' || src_[p] == 'J')) ++p;
    }
    emit(TokenKind::Number, pos_, p - pos_);
  }

  // `start` is the prefix start, `quote_pos` the opening quote.
  void lex_string(std::size_t start, std::size_t quote_pos) {
    const int start_line = line_;
    char q = src_[quote_pos];
    bool triple = src_.substr(quote_pos, 3) == std::string(3, q);
    std::size_t p = quote_pos + (triple ? 3 : 1);
    int line = line_;
    std::size_t ls = line_start_;
    for (;;) {
      if (p >= src_.size()) {
        throw SyntaxError(ErrorCode::Lex, "unterminated string literal", start_line, column_at(start));
      }
      char c = src_[p];
      if (c == '\\') {
        if (p + 1 < src_.size() && (src_[p + 1] == '\n' || src_[p + 1] == '\r')) {
          p += (src_[p + 1] == '\r' && p + 2 < src_.size() && src_[p + 2] == '\n') ? 3 : 2;
          ++line;
          ls = p;
        } else {
          p += 2;
        }
        continue;
      }
      if (c == '\n' || c == '\r') {
        if (!triple) {
          throw SyntaxError(ErrorCode::Lex, "unterminated string literal", start_line, column_at(start));
        }
        p += (c == '\r' && p + 1 < src_.size() && src_[p + 1] == '\n') ? 2 : 1;
        ++line;
        ls = p;
        continue;
      }
      if (c == q) {
        if (!triple) {
          ++p;
          break;
        }
        if (src_.substr(p, 3) == std::string(3, q)) {
          p += 3;
          break;
        }
      }
      ++p;
    }
    // Span refers to the line where the literal starts.
    emit(TokenKind::String, start, p - start);
    line_ = line;
    line_start_ = ls;
  }

  void finish() {
    if (!out_.tokens.empty() && out_.tokens.back().kind != TokenKind::Newline &&
        out_.tokens.back().kind != TokenKind::Dedent) {
      // Synthetic logical end of line for input without a final newline.
      Token tok;
      tok.kind = TokenKind::Newline;
      tok.leading = std::move(trivia_);
      trivia_.clear();
      tok.span.line = line_;
      tok.span.column = column_at(pos_);
      tok.span.token_index = out_.tokens.size();
      out_.tokens.push_back(std::move(tok));
    }
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit_synthetic(TokenKind::Dedent, 0);
    }
    out_.trailing = std::move(trivia_);
  }
};

}  // namespace

const char* token_kind_name(TokenKind kind) noexcept {
  switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Number: return "number";
    case TokenKind::String: return "string";
    case TokenKind::Operator: return "operator";
    case TokenKind::Delimiter: return "delimiter";
    case TokenKind::Newline: return "newline";
    case TokenKind::Indent: return "indent";
    case TokenKind::Dedent: return "dedent";
  }
  return "?";
}

bool is_keyword(std::string_view word) noexcept {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::string TokenStream::text() const {
  std::string s;
  for (const auto& t : tokens) {
    s += t.leading;
    s += t.text;
  }
  s += trailing;
  return s;
}

std::string TokenStream::text_with(std::size_t index, std::string_view replacement) const {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    s += tokens[i].leading;
    if (i == index)
      s += replacement;
    else
      s += tokens[i].text;
  }
  s += trailing;
  return s;
}

TokenStream tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace typegate
