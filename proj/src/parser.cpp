#include "typegate/error.hpp"
#include "typegate/source.hpp"

#include <algorithm>
#include <cctype>

namespace typegate {

namespace {

constexpr int kMaxDepth = 200;

ExprPtr make_expr(ExprKind kind, const SourceSpan& span, std::string text = {}) {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->span = span;
  e->text = std::move(text);
  return e;
}

bool is_aug_operator(std::string_view op) {
  static constexpr std::string_view kAug[] = {"+=", "-=", "*=", "/=", "//=", "%=", "**=",
                                              ">>=", "<<=", "&=", "|=", "^=", "@="};
  return std::find(std::begin(kAug), std::end(kAug), op) != std::end(kAug);
}

class Parser {
 public:
  explicit Parser(const TokenStream& ts) : toks_(ts.tokens) {}

  Module parse_module_body(bool allow_declarations) {
    Module m;
    while (!at_end()) {
      const Token& t = peek();
      if (t.kind == TokenKind::Newline) {
        ++pos_;
        continue;
      }
      if (t.kind == TokenKind::Indent) parse_error("unexpected indent");
      if (is_kw("import") || is_kw("from")) {
        auto imports = parse_import();
        m.imports.insert(m.imports.end(), imports.begin(), imports.end());
        end_simple_statement();
      } else if (is_kw("def")) {
        m.functions.push_back(parse_function_def());
      } else if (is_kw("class")) {
        if (!allow_declarations) unsupported("class definitions in analyzed source", t);
        m.classes.push_back(parse_class_def());
      } else if (is_op("@")) {
        unsupported("decorators", t);
      } else if (is_kw("async")) {
        unsupported("async functions", t);
      } else if (t.kind == TokenKind::String) {
        parse_exprlist();  // docstring
        end_simple_statement();
      } else if (allow_declarations && t.kind == TokenKind::Identifier && peek_is(1, TokenKind::Delimiter, ":")) {
        ClassAttribute g;
        g.name = t.text;
        g.span = t.span;
        pos_ += 2;
        g.annotation = parse_test();
        if (accept_op("=")) parse_test();
        m.globals.push_back(std::move(g));
        end_simple_statement();
      } else {
        unsupported("module-level statement", t);
      }
    }
    return m;
  }

  ExprPtr parse_standalone_expression() {
    ExprPtr e = parse_exprlist();
    if (peek().kind == TokenKind::Newline && pos_ < toks_.size()) ++pos_;
    if (!at_end()) parse_error("unexpected trailing tokens");
    return e;
  }

 private:
  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  bool in_function_ = false;
  bool saw_yield_ = false;

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth) p.parse_error("nesting too deep");
    }
    ~DepthGuard() { --p.depth_; }
  };

  // -- token helpers -------------------------------------------------------

  bool at_end() const {
    // Only synthetic dedents can follow the final newline.
    for (std::size_t i = pos_; i < toks_.size(); ++i)
      if (toks_[i].kind != TokenKind::Dedent) return false;
    return true;
  }

  const Token& peek(std::size_t ahead = 0) const {
    static const Token kEnd{TokenKind::Newline, "", "", {}};
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : (toks_.empty() ? kEnd : toks_.back());
  }

  bool peek_is(std::size_t ahead, TokenKind kind, std::string_view text) const {
    const Token& t = peek(ahead);
    return pos_ + ahead < toks_.size() && t.kind == kind && t.text == text;
  }

  bool is(TokenKind kind, std::string_view text) const { return peek_is(0, kind, text); }
  bool is_kw(std::string_view kw) const { return is(TokenKind::Keyword, kw); }
  bool is_op(std::string_view op) const { return is(TokenKind::Operator, op); }
  bool is_delim(std::string_view d) const { return is(TokenKind::Delimiter, d); }

  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size()) ++pos_;
    return t;
  }

  bool accept_kw(std::string_view kw) {
    if (!is_kw(kw)) return false;
    ++pos_;
    return true;
  }
  bool accept_op(std::string_view op) {
    if (!is_op(op)) return false;
    ++pos_;
    return true;
  }
  bool accept_delim(std::string_view d) {
    if (!is_delim(d)) return false;
    ++pos_;
    return true;
  }

  const Token& expect_delim(std::string_view d) {
    if (!is_delim(d)) parse_error("expected '" + std::string(d) + "'");
    return next();
  }
  const Token& expect_kw(std::string_view kw) {
    if (!is_kw(kw)) parse_error("expected '" + std::string(kw) + "'");
    return next();
  }
  const Token& expect_identifier() {
    if (peek().kind != TokenKind::Identifier || pos_ >= toks_.size()) parse_error("expected identifier");
    return next();
  }

  [[noreturn]] void parse_error(const std::string& msg) const {
    const Token& t = peek();
    std::string near = t.text.empty() ? token_kind_name(t.kind) : "'" + t.text + "'";
    throw SyntaxError(ErrorCode::Parse, msg + " near " + near, t.span.line, t.span.column);
  }

  [[noreturn]] void unsupported(const std::string& what, const Token& at) const {
    throw SyntaxError(ErrorCode::UnsupportedSyntax, "unsupported syntax: " + what, at.span.line,
                      at.span.column);
  }

  void end_simple_statement() {
    if (peek().kind == TokenKind::Newline && pos_ < toks_.size()) {
      ++pos_;
      return;
    }
    parse_error("expected end of statement");
  }

  // -- declarations --------------------------------------------------------

  std::vector<ImportBinding> parse_import() {
    std::vector<ImportBinding> out;
    if (accept_kw("import")) {
      do {
        const Token& first = expect_identifier();
        std::string module = first.text;
        while (accept_delim(".")) module += "." + expect_identifier().text;
        ImportBinding b;
        b.module = module;
        b.span = first.span;
        b.bound_name = first.text;
        if (accept_kw("as")) {
          const Token& alias = expect_identifier();
          b.bound_name = alias.text;
          b.span = alias.span;
        }
        out.push_back(std::move(b));
      } while (accept_delim(","));
      return out;
    }
    expect_kw("from");
    std::string module;
    while (is_delim(".") || is_delim("...")) module += next().text;
    if (peek().kind == TokenKind::Identifier) {
      module += next().text;
      while (accept_delim(".")) module += "." + expect_identifier().text;
    }
    if (module.empty()) parse_error("expected module name");
    expect_kw("import");
    if (is_op("*")) {
      ImportBinding b;
      b.module = module;
      b.span = next().span;
      b.star = true;
      out.push_back(std::move(b));
      return out;
    }
    bool paren = accept_delim("(");
    do {
      if (paren && is_delim(")")) break;
      const Token& name = expect_identifier();
      ImportBinding b;
      b.module = module;
      b.bound_name = name.text;
      b.span = name.span;
      if (accept_kw("as")) {
        const Token& alias = expect_identifier();
        b.bound_name = alias.text;
        b.span = alias.span;
      }
      out.push_back(std::move(b));
    } while (accept_delim(","));
    if (paren) expect_delim(")");
    return out;
  }

  FunctionDef parse_function_def() {
    expect_kw("def");
    const Token& name = expect_identifier();
    FunctionDef fn;
    fn.name = name.text;
    fn.span = name.span;
    expect_delim("(");
    while (!is_delim(")")) {
      if (is_op("*") || is_op("**") || is_op("/")) unsupported("star or positional-only parameters", peek());
      const Token& pname = expect_identifier();
      Param p;
      p.name = pname.text;
      p.span = pname.span;
      if (accept_delim(":")) p.annotation = parse_test();
      if (accept_op("=")) p.default_value = parse_test();
      fn.params.push_back(std::move(p));
      if (!accept_delim(",")) break;
    }
    expect_delim(")");
    if (accept_op("->")) fn.returns = parse_test();
    fn.header_end_token = pos_;
    expect_delim(":");
    bool outer_in_function = in_function_;
    bool outer_yield = saw_yield_;
    in_function_ = true;
    saw_yield_ = false;
    fn.body = parse_block();
    fn.is_generator = saw_yield_;
    in_function_ = outer_in_function;
    saw_yield_ = outer_yield;
    return fn;
  }

  ClassDef parse_class_def() {
    expect_kw("class");
    const Token& name = expect_identifier();
    ClassDef cls;
    cls.name = name.text;
    cls.span = name.span;
    if (accept_delim("(")) {
      while (!is_delim(")")) {
        ExprPtr base = parse_test();
        if (base->kind == ExprKind::Name) cls.bases.push_back(base->text);
        if (!accept_delim(",")) break;
      }
      expect_delim(")");
    }
    expect_delim(":");
    auto parse_member = [&]() {
      const Token& t = peek();
      if (is_kw("def")) {
        cls.methods.push_back(parse_function_def());
        return;
      }
      if (t.kind == TokenKind::Identifier && peek_is(1, TokenKind::Delimiter, ":")) {
        ClassAttribute a;
        a.name = t.text;
        a.span = t.span;
        pos_ += 2;
        a.annotation = parse_test();
        if (accept_op("=")) parse_test();
        cls.attributes.push_back(std::move(a));
      } else if (is_kw("pass") || is_delim("...") || t.kind == TokenKind::String) {
        next();
        while (peek().kind == TokenKind::String) next();
      } else {
        unsupported("class body statement", t);
      }
      end_simple_statement();
    };
    if (peek().kind == TokenKind::Newline) {
      next();
      if (peek().kind != TokenKind::Indent) parse_error("expected an indented block");
      next();
      while (peek().kind != TokenKind::Dedent && pos_ < toks_.size()) parse_member();
      if (pos_ < toks_.size()) next();
    } else {
      parse_member();
    }
    return cls;
  }

  // -- statements ----------------------------------------------------------

  std::vector<StmtPtr> parse_block() {
    std::vector<StmtPtr> body;
    if (peek().kind != TokenKind::Newline) {
      parse_simple_statements(body);
      return body;
    }
    next();
    if (peek().kind != TokenKind::Indent || pos_ >= toks_.size()) parse_error("expected an indented block");
    next();
    while (pos_ < toks_.size() && peek().kind != TokenKind::Dedent) {
      parse_statement(body);
    }
    if (pos_ < toks_.size()) next();  // dedent
    return body;
  }

  void parse_statement(std::vector<StmtPtr>& out) {
    DepthGuard guard(*this);
    const Token& t = peek();
    if (t.kind == TokenKind::Indent) parse_error("unexpected indent");
    if (t.kind == TokenKind::Keyword) {
      if (t.text == "if") {
        out.push_back(parse_if());
        return;
      }
      if (t.text == "for") {
        out.push_back(parse_for());
        return;
      }
      if (t.text == "while") {
        out.push_back(parse_while());
        return;
      }
      if (t.text == "with") {
        out.push_back(parse_with());
        return;
      }
      if (t.text == "def") unsupported("nested function definitions", t);
      if (t.text == "class") unsupported("class definitions inside functions", t);
      if (t.text == "try") unsupported("try statements", t);
      if (t.text == "async" || t.text == "await") unsupported("async/await", t);
      if (t.text == "global" || t.text == "nonlocal") unsupported("global/nonlocal declarations", t);
    }
    if (is_op("@")) unsupported("decorators", t);
    if (t.kind == TokenKind::Identifier && t.text == "match" && looks_like_match_statement()) {
      unsupported("match statements", t);
    }
    parse_simple_statements(out);
  }

  bool looks_like_match_statement() const {
    const Token& after = peek(1);
    if (after.kind == TokenKind::Operator || after.kind == TokenKind::Newline) return false;
    if (after.kind == TokenKind::Delimiter && (after.text == "." || after.text == "," || after.text == ":" ||
                                                after.text == ")" || after.text == "]"))
      return false;
    int depth = 0;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == TokenKind::Delimiter && (t.text == "(" || t.text == "[" || t.text == "{")) ++depth;
      if (t.kind == TokenKind::Delimiter && (t.text == ")" || t.text == "]" || t.text == "}")) --depth;
      if (t.kind == TokenKind::Newline) {
        return i > 0 && toks_[i - 1].kind == TokenKind::Delimiter && toks_[i - 1].text == ":";
      }
    }
    return false;
  }

  void parse_simple_statements(std::vector<StmtPtr>& out) {
    for (;;) {
      out.push_back(parse_small_statement());
      if (!accept_delim(";")) break;
      if (peek().kind == TokenKind::Newline) break;
    }
    end_simple_statement();
  }

  StmtPtr new_stmt(StmtKind kind, const SourceSpan& span) {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->span = span;
    return s;
  }

  StmtPtr parse_small_statement() {
    const Token& t = peek();
    const SourceSpan span = t.span;
    if (t.kind == TokenKind::Keyword) {
      if (t.text == "pass") {
        next();
        return new_stmt(StmtKind::Pass, span);
      }
      if (t.text == "break") {
        next();
        return new_stmt(StmtKind::Break, span);
      }
      if (t.text == "continue") {
        next();
        return new_stmt(StmtKind::Continue, span);
      }
      if (t.text == "return") {
        next();
        auto s = new_stmt(StmtKind::Return, span);
        if (!at_statement_end()) s->value = parse_exprlist();
        return s;
      }
      if (t.text == "raise") {
        next();
        auto s = new_stmt(StmtKind::Raise, span);
        if (!at_statement_end()) {
          s->value = parse_test();
          if (accept_kw("from")) s->items.push_back(parse_test());
        }
        return s;
      }
      if (t.text == "assert") {
        next();
        auto s = new_stmt(StmtKind::Assert, span);
        s->value = parse_test();
        if (accept_delim(",")) s->items.push_back(parse_test());
        return s;
      }
      if (t.text == "del") {
        next();
        auto s = new_stmt(StmtKind::Del, span);
        ExprPtr targets = parse_target_list();
        if (targets->kind == ExprKind::Tuple && targets->text == "bare") {
          for (auto& c : targets->children) s->targets.push_back(std::move(c));
        } else {
          s->targets.push_back(std::move(targets));
        }
        return s;
      }
      if (t.text == "import" || t.text == "from") {
        auto s = new_stmt(StmtKind::Import, span);
        s->imports = parse_import();
        for (const auto& b : s->imports)
          if (b.star) unsupported("star import inside a function", t);
        return s;
      }
      if (t.text == "global" || t.text == "nonlocal") unsupported("global/nonlocal declarations", t);
    }

    ExprPtr first = is_kw("yield") ? parse_yield() : parse_exprlist(true);
    if (is_delim(":")) {
      if (first->kind != ExprKind::Name && first->kind != ExprKind::Attribute && first->kind != ExprKind::Subscript)
        parse_error("illegal target for annotation");
      next();
      auto s = new_stmt(StmtKind::AnnAssign, span);
      s->annotation = parse_test();
      if (accept_op("=")) s->value = is_kw("yield") ? parse_yield() : parse_exprlist(true);
      s->targets.push_back(std::move(first));
      return s;
    }
    if (peek().kind == TokenKind::Operator && is_aug_operator(peek().text)) {
      check_assignable(*first, false);
      auto s = new_stmt(StmtKind::AugAssign, span);
      s->op = next().text;
      s->op.pop_back();
      s->value = is_kw("yield") ? parse_yield() : parse_exprlist(true);
      s->targets.push_back(std::move(first));
      return s;
    }
    if (is_op("=")) {
      auto s = new_stmt(StmtKind::Assign, span);
      std::vector<ExprPtr> chain;
      chain.push_back(std::move(first));
      while (accept_op("=")) chain.push_back(is_kw("yield") ? parse_yield() : parse_exprlist(true));
      s->value = std::move(chain.back());
      chain.pop_back();
      for (auto& target : chain) {
        check_assignable(*target, true);
        s->targets.push_back(std::move(target));
      }
      return s;
    }
    if (is_op(":=")) unsupported("assignment expressions", peek());
    auto s = new_stmt(StmtKind::Expr, span);
    s->value = std::move(first);
    return s;
  }

  bool at_statement_end() const {
    return peek().kind == TokenKind::Newline || is_delim(";") || pos_ >= toks_.size();
  }

  void check_assignable(const Expr& e, bool allow_unpack) {
    switch (e.kind) {
      case ExprKind::Name:
      case ExprKind::Attribute:
      case ExprKind::Subscript:
        return;
      case ExprKind::Tuple:
      case ExprKind::List:
        if (!allow_unpack) break;
        for (const auto& c : e.children) check_assignable(*c, true);
        return;
      case ExprKind::Starred:
        if (!allow_unpack || e.text != "*") break;
        check_assignable(*e.children[0], false);
        return;
      default:
        break;
    }
    throw SyntaxError(ErrorCode::Parse, "cannot assign to expression", e.span.line, e.span.column);
  }

  StmtPtr parse_if() {
    const Token& kw = next();  // if / elif
    auto s = new_stmt(StmtKind::If, kw.span);
    s->value = parse_test();
    expect_delim(":");
    s->body = parse_block();
    if (is_kw("elif")) {
      s->orelse.push_back(parse_if());
    } else if (accept_kw("else")) {
      expect_delim(":");
      s->orelse = parse_block();
    }
    return s;
  }

  StmtPtr parse_for() {
    const Token& kw = next();
    auto s = new_stmt(StmtKind::For, kw.span);
    ExprPtr target = parse_target_list();
    check_assignable(*target, true);
    s->targets.push_back(std::move(target));
    expect_kw("in");
    s->value = parse_exprlist();
    expect_delim(":");
    s->body = parse_block();
    if (accept_kw("else")) {
      expect_delim(":");
      s->orelse = parse_block();
    }
    return s;
  }

  StmtPtr parse_while() {
    const Token& kw = next();
    auto s = new_stmt(StmtKind::While, kw.span);
    s->value = parse_test();
    expect_delim(":");
    s->body = parse_block();
    if (accept_kw("else")) {
      expect_delim(":");
      s->orelse = parse_block();
    }
    return s;
  }

  StmtPtr parse_with() {
    const Token& kw = next();
    auto s = new_stmt(StmtKind::With, kw.span);
    do {
      s->items.push_back(parse_test());
      if (accept_kw("as")) {
        ExprPtr target = parse_target();
        check_assignable(*target, true);
        s->targets.push_back(std::move(target));
      } else {
        s->targets.push_back(nullptr);
      }
    } while (accept_delim(","));
    expect_delim(":");
    s->body = parse_block();
    return s;
  }

  // -- expressions ---------------------------------------------------------

  // Comma-separated targets for `for` and `del`; stops before `in`.
  ExprPtr parse_target_list() {
    SourceSpan span = peek().span;
    ExprPtr first = parse_target();
    if (!is_delim(",")) return first;
    auto tuple = make_expr(ExprKind::Tuple, span, "bare");
    tuple->children.push_back(std::move(first));
    while (accept_delim(",")) {
      if (is_kw("in") || is_delim(":") || at_statement_end() || is_op("=")) break;
      tuple->children.push_back(parse_target());
    }
    return tuple;
  }

  ExprPtr parse_target() {
    if (is_op("*")) {
      const Token& star = next();
      auto e = make_expr(ExprKind::Starred, star.span, "*");
      e->children.push_back(parse_bitor());
      return e;
    }
    return parse_bitor();
  }

  // Tuple without parentheses when a comma is present.
  ExprPtr parse_exprlist(bool allow_star = true) {
    SourceSpan span = peek().span;
    ExprPtr first = parse_star_or_test(allow_star);
    if (!is_delim(",")) return first;
    auto tuple = make_expr(ExprKind::Tuple, span, "bare");
    tuple->children.push_back(std::move(first));
    while (accept_delim(",")) {
      if (at_statement_end() || is_op("=") || is_delim(":") || is_delim(")") || is_op(":=") ||
          (peek().kind == TokenKind::Operator && is_aug_operator(peek().text)))
        break;
      tuple->children.push_back(parse_star_or_test(allow_star));
    }
    return tuple;
  }

  ExprPtr parse_star_or_test(bool allow_star) {
    if (allow_star && is_op("*")) {
      const Token& star = next();
      auto e = make_expr(ExprKind::Starred, star.span, "*");
      e->children.push_back(parse_bitor());
      return e;
    }
    return parse_test();
  }

  ExprPtr parse_yield() {
    const Token& kw = expect_kw("yield");
    if (!in_function_) parse_error("'yield' outside function");
    saw_yield_ = true;
    if (accept_kw("from")) {
      auto e = make_expr(ExprKind::YieldFrom, kw.span);
      e->children.push_back(parse_test());
      return e;
    }
    auto e = make_expr(ExprKind::Yield, kw.span);
    if (!at_statement_end() && !is_delim(")") && !is_op("=")) e->children.push_back(parse_exprlist());
    return e;
  }

  ExprPtr parse_test() {
    DepthGuard guard(*this);
    if (is_kw("lambda")) return parse_lambda();
    ExprPtr body = parse_or();
    if (is_op(":=")) unsupported("assignment expressions", peek());
    if (!is_kw("if")) return body;
    const Token& kw = next();
    auto e = make_expr(ExprKind::IfExp, kw.span);
    ExprPtr test = parse_or();
    expect_kw("else");
    ExprPtr orelse = parse_test();
    e->children.push_back(std::move(body));
    e->children.push_back(std::move(test));
    e->children.push_back(std::move(orelse));
    return e;
  }

  ExprPtr parse_lambda() {
    const Token& kw = next();
    while (!is_delim(":")) {
      if (is_op("*") || is_op("**")) next();
      if (peek().kind == TokenKind::Identifier) next();
      if (accept_op("=")) parse_test();
      if (!accept_delim(",")) break;
    }
    expect_delim(":");
    parse_test();  // body stays opaque
    return make_expr(ExprKind::Lambda, kw.span);
  }

  ExprPtr parse_or() {
    ExprPtr left = parse_and();
    if (!is_kw("or")) return left;
    auto e = make_expr(ExprKind::BoolOp, peek().span, "or");
    e->children.push_back(std::move(left));
    while (accept_kw("or")) e->children.push_back(parse_and());
    return e;
  }

  ExprPtr parse_and() {
    ExprPtr left = parse_not();
    if (!is_kw("and")) return left;
    auto e = make_expr(ExprKind::BoolOp, peek().span, "and");
    e->children.push_back(std::move(left));
    while (accept_kw("and")) e->children.push_back(parse_not());
    return e;
  }

  ExprPtr parse_not() {
    if (is_kw("not")) {
      DepthGuard guard(*this);
      const Token& kw = next();
      auto e = make_expr(ExprKind::UnaryOp, kw.span, "not");
      e->children.push_back(parse_not());
      return e;
    }
    return parse_comparison();
  }

  bool comparison_operator(std::string& op) {
    const Token& t = peek();
    if (t.kind == TokenKind::Operator &&
        (t.text == "<" || t.text == ">" || t.text == "==" || t.text == ">=" || t.text == "<=" || t.text == "!=")) {
      op = next().text;
      return true;
    }
    if (is_kw("in")) {
      next();
      op = "in";
      return true;
    }
    if (is_kw("not") && peek_is(1, TokenKind::Keyword, "in")) {
      pos_ += 2;
      op = "not in";
      return true;
    }
    if (is_kw("is")) {
      next();
      op = accept_kw("not") ? "is not" : "is";
      return true;
    }
    return false;
  }

  ExprPtr parse_comparison() {
    ExprPtr left = parse_bitor();
    SourceSpan span = peek().span;
    std::string op;
    if (!comparison_operator(op)) return left;
    auto e = make_expr(ExprKind::Compare, span);
    e->children.push_back(std::move(left));
    do {
      e->ops.push_back(op);
      e->children.push_back(parse_bitor());
    } while (comparison_operator(op));
    return e;
  }

  template <typename Next>
  ExprPtr parse_binary(std::initializer_list<std::string_view> ops, Next next_level) {
    ExprPtr left = (this->*next_level)();
    for (;;) {
      const Token& t = peek();
      if (t.kind != TokenKind::Operator || std::find(ops.begin(), ops.end(), t.text) == ops.end()) break;
      DepthGuard guard(*this);
      next();
      auto e = make_expr(ExprKind::BinOp, t.span, t.text);
      e->children.push_back(std::move(left));
      e->children.push_back((this->*next_level)());
      left = std::move(e);
    }
    return left;
  }

  ExprPtr parse_bitor() { return parse_binary({"|"}, &Parser::parse_bitxor); }
  ExprPtr parse_bitxor() { return parse_binary({"^"}, &Parser::parse_bitand); }
  ExprPtr parse_bitand() { return parse_binary({"&"}, &Parser::parse_shift); }
  ExprPtr parse_shift() { return parse_binary({"<<", ">>"}, &Parser::parse_arith); }
  ExprPtr parse_arith() { return parse_binary({"+", "-"}, &Parser::parse_term); }
  ExprPtr parse_term() { return parse_binary({"*", "/", "//", "%", "@"}, &Parser::parse_factor); }

  ExprPtr parse_factor() {
    const Token& t = peek();
    if (t.kind == TokenKind::Operator && (t.text == "-" || t.text == "+" || t.text == "~")) {
      DepthGuard guard(*this);
      next();
      auto e = make_expr(ExprKind::UnaryOp, t.span, t.text);
      e->children.push_back(parse_factor());
      return e;
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    if (is_kw("await")) unsupported("async/await", peek());
    ExprPtr base = parse_primary();
    if (!is_op("**")) return base;
    const Token& op = next();
    auto e = make_expr(ExprKind::BinOp, op.span, "**");
    e->children.push_back(std::move(base));
    e->children.push_back(parse_factor());
    return e;
  }

  ExprPtr parse_primary() {
    ExprPtr e = parse_atom();
    for (;;) {
      if (is_delim(".")) {
        next();
        const Token& attr = expect_identifier();
        auto a = make_expr(ExprKind::Attribute, attr.span, attr.text);
        a->children.push_back(std::move(e));
        e = std::move(a);
      } else if (is_delim("(")) {
        DepthGuard guard(*this);
        const Token& open = next();
        auto call = make_expr(ExprKind::Call, open.span);
        call->children.push_back(std::move(e));
        parse_call_arguments(*call);
        e = std::move(call);
      } else if (is_delim("[")) {
        DepthGuard guard(*this);
        const Token& open = next();
        auto sub = make_expr(ExprKind::Subscript, open.span);
        sub->children.push_back(std::move(e));
        sub->children.push_back(parse_subscript_index());
        expect_delim("]");
        e = std::move(sub);
      } else {
        break;
      }
    }
    return e;
  }

  void parse_call_arguments(Expr& call) {
    while (!is_delim(")")) {
      if (is_op("*") || is_op("**")) {
        const Token& star = next();
        auto s = make_expr(ExprKind::Starred, star.span, star.text);
        s->children.push_back(parse_test());
        call.children.push_back(std::move(s));
      } else if (peek().kind == TokenKind::Identifier && peek_is(1, TokenKind::Operator, "=")) {
        const Token& name = next();
        next();
        auto k = make_expr(ExprKind::Keyword, name.span, name.text);
        k->children.push_back(parse_test());
        call.children.push_back(std::move(k));
      } else {
        call.children.push_back(parse_test());
        if (is_kw("for") || is_kw("async")) unsupported("comprehensions", peek());
      }
      if (!accept_delim(",")) break;
    }
    expect_delim(")");
  }

  ExprPtr parse_slice_part() {
    if (is_delim(":") || is_delim("]") || is_delim(",")) return nullptr;
    return parse_test();
  }

  ExprPtr parse_subscript_item() {
    SourceSpan span = peek().span;
    ExprPtr lower = parse_slice_part();
    if (!is_delim(":")) {
      if (!lower) parse_error("expected subscript");
      return lower;
    }
    auto slice = make_expr(ExprKind::Slice, span);
    next();
    ExprPtr upper = parse_slice_part();
    ExprPtr step;
    if (accept_delim(":")) step = parse_slice_part();
    slice->children.push_back(std::move(lower));
    slice->children.push_back(std::move(upper));
    slice->children.push_back(std::move(step));
    return slice;
  }

  ExprPtr parse_subscript_index() {
    SourceSpan span = peek().span;
    ExprPtr first = parse_subscript_item();
    if (!is_delim(",")) return first;
    auto tuple = make_expr(ExprKind::Tuple, span, "bare");
    tuple->children.push_back(std::move(first));
    while (accept_delim(",")) {
      if (is_delim("]")) break;
      tuple->children.push_back(parse_subscript_item());
    }
    return tuple;
  }

  ExprPtr parse_atom() {
    const Token& t = peek();
    if (pos_ >= toks_.size()) parse_error("unexpected end of input");
    switch (t.kind) {
      case TokenKind::Identifier:
        next();
        return make_expr(ExprKind::Name, t.span, t.text);
      case TokenKind::Number:
        next();
        return make_expr(number_kind(t.text), t.span, t.text);
      case TokenKind::String:
        return parse_strings();
      case TokenKind::Keyword:
        if (t.text == "True" || t.text == "False") {
          next();
          return make_expr(ExprKind::Bool, t.span, t.text);
        }
        if (t.text == "None") {
          next();
          return make_expr(ExprKind::None, t.span, t.text);
        }
        if (t.text == "lambda") return parse_lambda();
        if (t.text == "await" || t.text == "async") unsupported("async/await", t);
        if (t.text == "yield") parse_error("'yield' must be parenthesized here");
        break;
      case TokenKind::Delimiter:
        if (t.text == "...") {
          next();
          return make_expr(ExprKind::Ellipsis, t.span, t.text);
        }
        if (t.text == "(") return parse_paren();
        if (t.text == "[") return parse_list();
        if (t.text == "{") return parse_brace();
        break;
      default:
        break;
    }
    parse_error("invalid syntax");
  }

  static ExprKind number_kind(std::string_view text) {
    if (text.find_first_of("jJ") != std::string_view::npos) return ExprKind::Complex;
    bool radix = text.size() > 1 && text[0] == '0' && std::isalpha(static_cast<unsigned char>(text[1]));
    if (!radix && text.find_first_of(".eE") != std::string_view::npos) return ExprKind::Float;
    return ExprKind::Int;
  }

  ExprPtr parse_strings() {
    const Token& first = peek();
    bool is_bytes = false;
    bool is_fstring = false;
    std::string text;
    while (peek().kind == TokenKind::String && pos_ < toks_.size()) {
      const Token& s = next();
      std::size_t q = s.text.find_first_of("'\"");
      for (std::size_t i = 0; i < q; ++i) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s.text[i])));
        if (c == 'b') is_bytes = true;
        if (c == 'f') is_fstring = true;
      }
      text += s.text;
    }
    ExprKind kind = is_bytes ? ExprKind::Bytes : (is_fstring ? ExprKind::FString : ExprKind::Str);
    return make_expr(kind, first.span, text);
  }

  ExprPtr parse_paren() {
    const Token& open = next();
    if (accept_delim(")")) return make_expr(ExprKind::Tuple, open.span);
    if (is_kw("yield")) {
      ExprPtr y = parse_yield();
      expect_delim(")");
      return y;
    }
    ExprPtr first = parse_star_or_test(true);
    if (is_kw("for") || is_kw("async")) unsupported("generator expressions", peek());
    if (accept_delim(")")) return first;
    auto tuple = make_expr(ExprKind::Tuple, open.span);
    tuple->children.push_back(std::move(first));
    while (accept_delim(",")) {
      if (is_delim(")")) break;
      tuple->children.push_back(parse_star_or_test(true));
    }
    expect_delim(")");
    return tuple;
  }

  ExprPtr parse_list() {
    const Token& open = next();
    auto list = make_expr(ExprKind::List, open.span);
    while (!is_delim("]")) {
      list->children.push_back(parse_star_or_test(true));
      if (is_kw("for") || is_kw("async")) unsupported("comprehensions", peek());
      if (!accept_delim(",")) break;
    }
    expect_delim("]");
    return list;
  }

  ExprPtr parse_brace() {
    const Token& open = next();
    if (accept_delim("}")) return make_expr(ExprKind::Dict, open.span);
    bool is_dict = false;
    bool is_set = false;
    auto dict = make_expr(ExprKind::Dict, open.span);
    auto set = make_expr(ExprKind::Set, open.span);
    while (!is_delim("}")) {
      if (is_op("**")) {
        const Token& star = next();
        auto s = make_expr(ExprKind::Starred, star.span, "**");
        s->children.push_back(parse_bitor());
        dict->children.push_back(nullptr);
        dict->children.push_back(std::move(s));
        is_dict = true;
      } else {
        ExprPtr item = parse_star_or_test(true);
        if (accept_delim(":")) {
          if (is_set) parse_error("mixed set and dict display");
          is_dict = true;
          dict->children.push_back(std::move(item));
          dict->children.push_back(parse_test());
        } else {
          if (is_dict) parse_error("expected ':'");
          is_set = true;
          set->children.push_back(std::move(item));
        }
      }
      if (is_kw("for") || is_kw("async")) unsupported("comprehensions", peek());
      if (!accept_delim(",")) break;
    }
    expect_delim("}");
    return is_set ? std::move(set) : std::move(dict);
  }
};

void walk_expr(const Expr& e, const Expr* parent,
               const std::function<void(const Expr&, const Expr*)>& visit) {
  visit(e, parent);
  if (e.kind == ExprKind::Lambda) return;
  for (const auto& c : e.children)
    if (c) walk_expr(*c, &e, visit);
}

void walk_stmts(const std::vector<StmtPtr>& body, const std::function<void(const Expr&, const Expr*)>& visit) {
  for (const auto& s : body) {
    for (const auto& t : s->targets)
      if (t) walk_expr(*t, nullptr, visit);
    if (s->annotation) walk_expr(*s->annotation, nullptr, visit);
    if (s->value) walk_expr(*s->value, nullptr, visit);
    for (const auto& i : s->items)
      if (i) walk_expr(*i, nullptr, visit);
    walk_stmts(s->body, visit);
    walk_stmts(s->orelse, visit);
  }
}

}  // namespace

Module parse_module(TokenStream tokens) {
  Module m = Parser(tokens).parse_module_body(true);
  m.tokens = std::move(tokens);
  return m;
}

SyntaxTree parse_function(TokenStream tokens) {
  Module m = Parser(tokens).parse_module_body(false);
  if (m.functions.size() != 1) {
    int line = tokens.tokens.empty() ? 1 : tokens.tokens.back().span.line;
    if (m.functions.size() > 1) {
      throw SyntaxError(ErrorCode::UnsupportedSyntax, "unsupported syntax: more than one function definition",
                        m.functions[1].span.line, m.functions[1].span.column);
    }
    throw SyntaxError(ErrorCode::Parse, "expected a function definition", line, 0);
  }
  SyntaxTree tree;
  tree.imports = std::move(m.imports);
  tree.function = std::move(m.functions.front());
  tree.tokens = std::move(tokens);
  return tree;
}

SyntaxTree parse_source(std::string_view source) { return parse_function(tokenize(source)); }

ExprPtr parse_expression(std::string_view source) {
  TokenStream ts = tokenize(source);
  return Parser(ts).parse_standalone_expression();
}

void walk_expressions(const SyntaxTree& tree, const std::function<void(const Expr&, const Expr*)>& visit) {
  for (const auto& p : tree.function.params) {
    if (p.annotation) walk_expr(*p.annotation, nullptr, visit);
    if (p.default_value) walk_expr(*p.default_value, nullptr, visit);
  }
  if (tree.function.returns) walk_expr(*tree.function.returns, nullptr, visit);
  walk_stmts(tree.function.body, visit);
}

}  // namespace typegate
