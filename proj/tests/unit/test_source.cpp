#include "doctest.h"
#include "fixtures.hpp"
#include "typegate/error.hpp"
#include "typegate/source.hpp"

#include <sstream>

using namespace typegate;

namespace {

std::string occurrence_list(const std::string& source) {
  auto tree = parse_source(source);
  std::string out;
  for (const auto& o : identifier_occurrences(tree)) {
    if (!o.in_body) continue;
    out += std::string(usage_name(o.usage)) + " " + o.name + "; ";
  }
  return out;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Column of `col` in `line` after expanding tabs to 8.
std::size_t byte_offset(const std::string& line, int col) {
  int c = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (c == col) return i;
    c = line[i] == '\t' ? (c / 8 + 1) * 8 : c + 1;
  }
  return c == col ? line.size() : std::string::npos;
}

}  // namespace

TEST_CASE("tokenize the smallest statement") {
  auto ts = tokenize("x = 1");
  REQUIRE(ts.tokens.size() == 4);
  CHECK(ts.tokens[0].kind == TokenKind::Identifier);
  CHECK(ts.tokens[0].text == "x");
  CHECK(ts.tokens[1].kind == TokenKind::Operator);
  CHECK(ts.tokens[2].kind == TokenKind::Number);
  CHECK(ts.tokens[3].kind == TokenKind::Newline);
}

TEST_CASE("token stream round-trips byte for byte") {
  std::vector<std::string> inputs = fixtures::clean_snippets();
  inputs.push_back(fixtures::kTakeLastBuggy);
  inputs.push_back("def f(a,\n      b):  # comment\n\tif a:\n\t\treturn b  \\\n  + 1\n\n# trailing\n");
  inputs.push_back("x = 'it''s' \"\"\"multi\nline\"\"\" rb'\\x' f\"{x}\"");
  for (const auto& src : inputs) {
    auto ts = tokenize(src);
    CHECK(ts.text() == src);
    for (std::size_t i = 1; i < ts.tokens.size(); ++i) {
      const auto& a = ts.tokens[i - 1].span;
      const auto& b = ts.tokens[i].span;
      CHECK(b.token_index == i);
      CHECK((b.line > a.line || (b.line == a.line && b.column >= a.column)));
    }
  }
}

TEST_CASE("listing tokens locate the misused variable") {
  auto ts = tokenize(fixtures::kTakeLastBuggy);
  bool found = false;
  for (const auto& t : ts.tokens)
    if (t.span.line == 8 && t.text == "first") found = true;
  CHECK(found);
}

TEST_CASE("lexical errors carry positions") {
  CHECK_THROWS_AS(tokenize("x = 'abc\n"), SyntaxError);
  CHECK_THROWS_AS(tokenize("def f():\n        x = 1\n    y = 2\n"), SyntaxError);
  try {
    tokenize("a = 1\nb = \"open\n");
    FAIL("expected a lex error");
  } catch (const SyntaxError& e) {
    CHECK(e.code() == ErrorCode::Lex);
    CHECK(e.line() == 2);
  }
}

TEST_CASE("malformed and unsupported functions") {
  CHECK_THROWS_AS(parse_source("def f(:"), SyntaxError);
  auto code = [](const char* src) {
    try {
      parse_source(src);
    } catch (const SyntaxError& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  CHECK(code("async def f():\n    pass\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("def f():\n    await g()\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("@dec\ndef f():\n    pass\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("def f(*args):\n    pass\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("def f():\n    return [x for x in y]\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("def f():\n    if (n := 1):\n        pass\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("def f():\n    try:\n        pass\n    except E:\n        pass\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("def f():\n    def g():\n        pass\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("def f():\n    class C:\n        pass\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("def f():\n    global x\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("def f():\n    pass\ndef g():\n    pass\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("x = 1\n") == ErrorCode::UnsupportedSyntax);
  CHECK(code("import os\n") == ErrorCode::Parse);
}

TEST_CASE("parse a function with a return") {
  auto tree = parse_source("def f():\n    return 1");
  CHECK(tree.function.name == "f");
  REQUIRE(tree.function.body.size() == 1);
  CHECK(tree.function.body[0]->kind == StmtKind::Return);
}

TEST_CASE("listing parses to a loop with nested conditionals") {
  auto tree = parse_source(fixtures::kTakeLastBuggy);
  CHECK(tree.function.is_generator);
  const Stmt* loop = nullptr;
  for (const auto& s : tree.function.body)
    if (s->kind == StmtKind::For) loop = s.get();
  REQUIRE(loop);
  int ifs = 0;
  for (const auto& s : loop->body) ifs += s->kind == StmtKind::If;
  CHECK(ifs == 2);
}

TEST_CASE("identifier occurrences") {
  CHECK(occurrence_list("def f(y):\n    x = y\n") == "store x; load y; ");
  // The selector after '.' is not a variable usage.
  CHECK(occurrence_list("def f(a, c):\n    a.b = c\n") == "load a; load c; ");
  CHECK(occurrence_list("def f(x):\n    x += 1\n") == "store x; ");
  CHECK(occurrence_list("def f(d):\n    del d[k], e\n") == "load d; load k; delete e; ");
  CHECK(occurrence_list("def f(a):\n    g(a, key=a)\n") == "load g; load a; load a; ");
  CHECK(occurrence_list("def f(a):\n    return f'{a}' + (lambda z: z)(a)\n") == "load a; ");
  CHECK(occurrence_list("def f(xs):\n    for i, v in xs:\n        pass\n") == "store i; store v; load xs; ");
  CHECK(occurrence_list("def f():\n    n: int = 0\n") == "store n; annotation int; ");

  auto tree = parse_source(fixtures::kTakeLastBuggy);
  auto occ = identifier_occurrences(tree);
  bool found = false;
  for (const auto& o : occ) {
    if (o.name == "first" && o.span.line == 8) {
      CHECK(o.usage == Usage::Load);
      CHECK(tree.tokens.tokens[o.span.token_index].text == "first");
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("occurrence positions are sound and stable") {
  std::vector<std::string> inputs = fixtures::clean_snippets();
  for (const auto& s : fixtures::category_snippets()) inputs.push_back(s.source);
  inputs.push_back("def f(a,\n\tb):\n\treturn a + \\\n\t\tb\n");
  for (const auto& src : inputs) {
    auto tree = parse_source(src);
    auto first = identifier_occurrences(tree);
    CHECK(first == identifier_occurrences(tree));
    CHECK(first == identifier_occurrences(parse_source(src)));
    auto lines = lines_of(src);
    for (const auto& o : first) {
      const Token& t = tree.tokens.tokens.at(o.span.token_index);
      CHECK(t.kind == TokenKind::Identifier);
      CHECK(t.text == o.name);
      const std::string& line = lines.at(o.span.line - 1);
      std::size_t at = byte_offset(line, o.span.column);
      REQUIRE(at != std::string::npos);
      CHECK(line.compare(at, o.name.size(), o.name) == 0);
    }
  }
}

TEST_CASE("signature normalization") {
  CHECK(normalize_signature("import os\n\ndef   f( a,\tb ):\n    pass\n") == "def f( a, b ):");
  CHECK(normalize_signature("x = 1\n") == "");
  CHECK(normalize_signature("    def g(self) -> int:  \n") == "def g(self) -> int:");
}

TEST_CASE("standalone expressions") {
  auto e = parse_expression("a + b * 2");
  REQUIRE(e);
  CHECK(e->kind == ExprKind::BinOp);
  CHECK(e->text == "+");
  auto t = parse_expression("1, 2");
  CHECK(t->kind == ExprKind::Tuple);
  CHECK_THROWS_AS(parse_expression("a +"), SyntaxError);
}
