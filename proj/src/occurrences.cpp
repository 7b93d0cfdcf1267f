#include "typegate/source.hpp"

#include <algorithm>
#include <cctype>

namespace typegate {

namespace {

class OccurrenceCollector {
 public:
  std::vector<IdentifierOccurrence> out;

  void expr(const Expr& e, Usage usage, bool in_body) {
    switch (e.kind) {
      case ExprKind::Name:
        out.push_back({e.text, e.span, usage, in_body});
        return;
      case ExprKind::Lambda:
        return;
      case ExprKind::Attribute:
        // The selector is not a variable usage; the base is always read.
        expr(*e.children[0], usage == Usage::Annotation ? Usage::Annotation : Usage::Load, in_body);
        return;
      case ExprKind::Subscript:
        expr(*e.children[0], usage == Usage::Annotation ? Usage::Annotation : Usage::Load, in_body);
        expr(*e.children[1], usage == Usage::Annotation ? Usage::Annotation : Usage::Load, in_body);
        return;
      case ExprKind::Tuple:
      case ExprKind::List:
      case ExprKind::Starred:
        for (const auto& c : e.children)
          if (c) expr(*c, usage, in_body);
        return;
      default:
        break;
    }
    Usage inner = usage == Usage::Annotation ? Usage::Annotation : Usage::Load;
    for (const auto& c : e.children)
      if (c) expr(*c, inner, in_body);
  }

  void stmts(const std::vector<StmtPtr>& body) {
    for (const auto& s : body) stmt(*s);
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Assign:
        for (const auto& t : s.targets) expr(*t, Usage::Store, true);
        expr(*s.value, Usage::Load, true);
        break;
      case StmtKind::AugAssign:
        expr(*s.targets[0], Usage::Store, true);
        expr(*s.value, Usage::Load, true);
        break;
      case StmtKind::AnnAssign:
        expr(*s.targets[0], Usage::Store, true);
        expr(*s.annotation, Usage::Annotation, true);
        if (s.value) expr(*s.value, Usage::Load, true);
        break;
      case StmtKind::For:
        expr(*s.targets[0], Usage::Store, true);
        expr(*s.value, Usage::Load, true);
        break;
      case StmtKind::With:
        for (std::size_t i = 0; i < s.items.size(); ++i) {
          expr(*s.items[i], Usage::Load, true);
          if (s.targets[i]) expr(*s.targets[i], Usage::Store, true);
        }
        break;
      case StmtKind::Del:
        for (const auto& t : s.targets) expr(*t, Usage::Delete, true);
        break;
      default:
        if (s.value) expr(*s.value, Usage::Load, true);
        for (const auto& i : s.items)
          if (i) expr(*i, Usage::Load, true);
        break;
    }
    stmts(s.body);
    stmts(s.orelse);
  }
};

}  // namespace

const char* usage_name(Usage usage) noexcept {
  switch (usage) {
    case Usage::Load: return "load";
    case Usage::Store: return "store";
    case Usage::Delete: return "delete";
    case Usage::Param: return "param";
    case Usage::Annotation: return "annotation";
  }
  return "?";
}

std::vector<IdentifierOccurrence> identifier_occurrences(const SyntaxTree& tree) {
  OccurrenceCollector c;
  for (const auto& p : tree.function.params) {
    c.out.push_back({p.name, p.span, Usage::Param, false});
    if (p.annotation) c.expr(*p.annotation, Usage::Annotation, false);
    if (p.default_value) c.expr(*p.default_value, Usage::Load, false);
  }
  if (tree.function.returns) c.expr(*tree.function.returns, Usage::Annotation, false);
  c.stmts(tree.function.body);
  std::stable_sort(c.out.begin(), c.out.end(), [](const auto& a, const auto& b) {
    return a.span.token_index < b.span.token_index;
  });
  return std::move(c.out);
}

std::string normalize_signature(std::string_view source) {
  std::size_t pos = 0;
  while (pos < source.size()) {
    std::size_t end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    std::string_view line = source.substr(pos, end - pos);
    std::size_t first = line.find_first_not_of(" \t\f\r");
    if (first != std::string_view::npos && line.substr(first, 3) == "def" &&
        (first + 3 == line.size() || std::isspace(static_cast<unsigned char>(line[first + 3])))) {
      std::string out;
      bool pending_space = false;
      for (char c : line.substr(first)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
          pending_space = !out.empty();
          continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
      }
      return out;
    }
    pos = end + 1;
  }
  return {};
}

}  // namespace typegate
