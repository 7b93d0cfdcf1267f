// Tokens, syntax tree and identifier occurrences for the supported subset of
// Python: module-level imports followed by one function definition.
//
// Every tree node carries an anchor span pointing at the token that best
// locates the node (the operator of a binary expression, the '[' of a
// subscript, the selector of an attribute, the name itself for names).
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace typegate {

struct SourceSpan {
  int line = 1;    // 1-based
  int column = 0;  // 0-based, tabs expand to 8 columns
  std::size_t token_index = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class TokenKind {
  Identifier,
  Keyword,
  Number,
  String,
  Operator,
  Delimiter,
  Newline,
  Indent,
  Dedent,
};

const char* token_kind_name(TokenKind kind) noexcept;

struct Token {
  TokenKind kind;
  std::string text;
  // Whitespace, comments, continuation lines and non-logical newlines that
  // precede the token. leading + text over all tokens rebuilds the input.
  std::string leading;
  SourceSpan span;
};

struct TokenStream {
  std::vector<Token> tokens;
  std::string trailing;

  std::string text() const;
  // Source text with the token at `index` replaced.
  std::string text_with(std::size_t index, std::string_view replacement) const;
};

TokenStream tokenize(std::string_view source);

bool is_keyword(std::string_view word) noexcept;

// ---------------------------------------------------------------------------
// Syntax tree

enum class ExprKind {
  Name,
  Int,
  Float,
  Complex,
  Str,
  Bytes,
  FString,
  Bool,
  None,
  Ellipsis,
  Tuple,
  List,
  Dict,
  Set,
  Attribute,  // children[0] = base, text = attribute name
  Subscript,  // children[0] = base, children[1] = index
  Slice,      // children = lower, upper, step (each may be null)
  Call,       // children[0] = callee, rest = arguments
  Keyword,    // text = argument name, children[0] = value
  Starred,    // text = "*" or "**", children[0] = value
  BinOp,      // text = operator
  UnaryOp,    // text = operator ("-", "+", "~", "not")
  Compare,    // ops = operators, children = operands
  BoolOp,     // text = "and" | "or"
  IfExp,      // children = body, test, orelse
  Lambda,     // opaque
  Yield,      // children = optional value
  YieldFrom,
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind;
  SourceSpan span;
  std::string text;
  std::vector<std::string> ops;
  std::vector<ExprPtr> children;  // null entries only inside Slice and Dict (for ** unpacking)
};

enum class StmtKind {
  Expr,
  Assign,     // targets = chain of targets, value
  AugAssign,  // targets[0], op, value
  AnnAssign,  // targets[0], annotation, optional value
  If,         // value = test, body, orelse (elif becomes a nested If)
  For,        // targets[0], value = iterable, body, orelse
  While,      // value = test, body, orelse
  With,       // items = context exprs, targets = optional as-targets (null when absent)
  Return,
  Pass,
  Break,
  Continue,
  Del,
  Raise,   // value = optional exception, items[0] = optional cause
  Assert,  // value = test, items[0] = optional message
  Import,  // function-local import
};

struct ImportBinding {
  std::string bound_name;  // empty for star imports
  std::string module;
  SourceSpan span;
  bool star = false;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  StmtKind kind;
  SourceSpan span;
  std::vector<ExprPtr> targets;
  ExprPtr value;
  ExprPtr annotation;
  std::string op;
  std::vector<ExprPtr> items;
  std::vector<StmtPtr> body;
  std::vector<StmtPtr> orelse;
  std::vector<ImportBinding> imports;
};

struct Param {
  std::string name;
  SourceSpan span;
  ExprPtr annotation;
  ExprPtr default_value;
};

struct FunctionDef {
  std::string name;
  SourceSpan span;  // the function name token
  std::vector<Param> params;
  ExprPtr returns;
  std::vector<StmtPtr> body;
  bool is_generator = false;
  std::size_t header_end_token = 0;  // index of the ':' closing the def header
};

struct ClassAttribute {
  std::string name;
  SourceSpan span;
  ExprPtr annotation;
};

struct ClassDef {
  std::string name;
  SourceSpan span;
  std::vector<std::string> bases;
  std::vector<ClassAttribute> attributes;
  std::vector<FunctionDef> methods;
};

// Top-level declarations as they appear in stub source.
struct Module {
  TokenStream tokens;
  std::vector<ImportBinding> imports;
  std::vector<FunctionDef> functions;
  std::vector<ClassDef> classes;
  std::vector<ClassAttribute> globals;  // `name: T` declarations
};

struct SyntaxTree {
  TokenStream tokens;
  std::vector<ImportBinding> imports;
  FunctionDef function;
};

// Throws SyntaxError (Parse or UnsupportedSyntax).
SyntaxTree parse_function(TokenStream tokens);
// Accepts classes, several functions and global declarations; used for stubs.
Module parse_module(TokenStream tokens);

// tokenize + parse_function.
SyntaxTree parse_source(std::string_view source);

// Parses `source` as a single expression (bare tuples allowed).
ExprPtr parse_expression(std::string_view source);

// Pre-order walk over every expression reachable from the function (defaults,
// annotations and body). Parent is null for statement-level roots.
void walk_expressions(const SyntaxTree& tree,
                      const std::function<void(const Expr&, const Expr* parent)>& visit);

// ---------------------------------------------------------------------------
// Identifier occurrences

enum class Usage { Load, Store, Delete, Param, Annotation };

const char* usage_name(Usage usage) noexcept;

struct IdentifierOccurrence {
  std::string name;
  SourceSpan span;
  Usage usage;
  bool in_body = false;  // false for parameters, defaults and signature annotations

  friend bool operator==(const IdentifierOccurrence&, const IdentifierOccurrence&) = default;
};

// Source-ordered. Attribute selectors, keyword-argument names, lambda
// interiors and f-string interiors are not occurrences.
std::vector<IdentifierOccurrence> identifier_occurrences(const SyntaxTree& tree);

// First line starting with "def", whitespace runs collapsed, trimmed.
std::string normalize_signature(std::string_view source);

}  // namespace typegate
