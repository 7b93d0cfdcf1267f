#include "typegate/error.hpp"
#include "typegate/typecheck.hpp"

#include "builtins.hpp"

#include <functional>
#include <tuple>

namespace typegate {

namespace {

using K = TypeTerm::Kind;

constexpr int kWidenAfter = 4;
constexpr int kMaxIterations = 32;

struct Binding {
  Definedness state = Definedness::Unbound;
  TypeTerm type;

  friend bool operator==(const Binding&, const Binding&) = default;
};

struct Env {
  std::map<std::string, Binding> vars;
  bool reachable = true;

  friend bool operator==(const Env&, const Env&) = default;
};

Env join_env(const Env& a, const Env& b) {
  if (!a.reachable) return b;
  if (!b.reachable) return a;
  Env out;
  for (const auto& [name, x] : a.vars) {
    auto it = b.vars.find(name);
    Binding y = it == b.vars.end() ? Binding{} : it->second;
    Binding j;
    j.state = x.state == y.state ? x.state : Definedness::MaybeBound;
    if (x.state == Definedness::Unbound) {
      j.type = y.type;
    } else if (y.state == Definedness::Unbound) {
      j.type = x.type;
    } else {
      j.type = join(x.type, y.type);
    }
    out.vars[name] = j;
  }
  for (const auto& [name, y] : b.vars) {
    if (a.vars.count(name)) continue;
    out.vars[name] = {y.state == Definedness::Unbound ? y.state : Definedness::MaybeBound, y.type};
  }
  return out;
}

Env unreachable() {
  Env e;
  e.reachable = false;
  return e;
}

// Apply `f` to every member; nullopt when it fails for all of them.
std::optional<TypeTerm> over_members(const TypeTerm& t, const std::function<std::optional<TypeTerm>(const TypeTerm&)>& f) {
  if (t.is_unknown()) return TypeTerm::unknown();
  std::vector<TypeTerm> ok;
  for (const auto& m : t.members())
    if (auto r = f(m)) ok.push_back(std::move(*r));
  if (ok.empty()) return std::nullopt;
  return TypeTerm::union_of(std::move(ok));
}

std::optional<TypeTerm> over_pairs(const TypeTerm& l, const TypeTerm& r,
                                   const std::function<std::optional<TypeTerm>(const TypeTerm&, const TypeTerm&)>& f) {
  if (l.is_unknown() || r.is_unknown()) return TypeTerm::unknown();
  std::vector<TypeTerm> ok;
  for (const auto& a : l.members())
    for (const auto& b : r.members())
      if (auto x = f(a, b)) ok.push_back(std::move(*x));
  if (ok.empty()) return std::nullopt;
  return TypeTerm::union_of(std::move(ok));
}

bool has_dunder(const TypeTerm& t, const char* name) {
  if (t.kind() != K::Class) return false;
  auto info = t.class_info();
  return !info || info->attributes.count(name) > 0;
}

// True when `t` is Unknown or some member satisfies `pred`.
bool accepts(const TypeTerm& t, const std::function<bool(const TypeTerm&)>& pred) {
  if (t.is_unknown()) return true;
  for (const auto& m : t.members())
    if (m.is_unknown() || pred(m)) return true;
  return false;
}

bool is_sized(const TypeTerm& t) {
  switch (t.kind()) {
    case K::Str: case K::Bytes: case K::Tuple: case K::List: case K::Dict: case K::Set: return true;
    case K::Class: return has_dunder(t, "__len__");
    default: return false;
  }
}

bool is_iterable(const TypeTerm& t) {
  switch (t.kind()) {
    case K::Str: case K::Bytes: case K::Tuple: case K::List: case K::Dict: case K::Set: case K::Function: return true;
    case K::Class: return has_dunder(t, "__iter__") || has_dunder(t, "__getitem__");
    default: return false;
  }
}

bool is_int_like(const TypeTerm& t) {
  return t.kind() == K::Int || t.kind() == K::Bool || has_dunder(t, "__index__");
}

std::string quoted(const TypeTerm& t) { return "'" + t.str() + "'"; }

// Constant integer value of `e`, for tuple indexing.
std::optional<long long> int_literal(const Expr& e) {
  try {
    if (e.kind == ExprKind::Int) return std::stoll(e.text, nullptr, 0);
    if (e.kind == ExprKind::UnaryOp && e.text == "-" && e.children[0]->kind == ExprKind::Int)
      return -std::stoll(e.children[0]->text, nullptr, 0);
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

bool is_constant_true(const Expr& e) {
  if (e.kind == ExprKind::Bool) return e.text == "True";
  if (e.kind == ExprKind::Int) {
    auto v = int_literal(e);
    return v && *v != 0;
  }
  return false;
}

struct LoopFrame {
  std::vector<Env> breaks;
  std::vector<Env> continues;
};

struct CallArg {
  const Expr* expr;
  std::string keyword;  // empty for positional
  TypeTerm type;
  bool unpacked = false;
};

class Analyzer {
 public:
  Analyzer(const StubSet* stubs, bool use_annotations) : stubs_(stubs), annotations_(use_annotations) {}

  void set_scopes(ScopeModel* scopes) { scopes_ = scopes; }

  void run(const SyntaxTree& tree) {
    const FunctionDef& fn = tree.function;
    function_name_ = fn.name;
    for (const auto& imp : tree.imports) {
      if (imp.star) {
        star_import_ = true;
        emit(Category::ImportError, imp.span, "cannot resolve star import from '" + imp.module + "'");
      } else {
        module_imports_.insert(imp.bound_name);
      }
    }
    for (const auto& occ : identifier_occurrences(tree)) {
      if (occ.usage == Usage::Param || (occ.in_body && (occ.usage == Usage::Store || occ.usage == Usage::Delete)))
        locals_.insert(occ.name);
    }
    collect_local_imports(fn.body);
    if (annotations_) collect_declarations(fn.body);
    if (scopes_) scopes_->locals = locals_;

    Env env;
    for (const auto& name : locals_) env.vars[name] = Binding{};
    for (const auto& p : fn.params) {
      TypeTerm t;
      if (annotations_ && p.annotation) {
        t = annotation_type(*p.annotation, stubs_);
        declared_.emplace(p.name, t);
      }
      env.vars[p.name] = {Definedness::Bound, t};
    }
    if (annotations_ && fn.returns && !fn.is_generator) return_type_ = annotation_type(*fn.returns, stubs_);
    exec_block(fn.body, env);
  }

  void bind_locals(const TypeEnv& tenv) {
    for (const auto& [name, type] : tenv.vars()) locals_.insert(name);
  }

  TypeTerm evaluate(const TypeEnv& tenv, const Expr& e) {
    Env env;
    for (const auto& [name, type] : tenv.vars()) env.vars[name] = {Definedness::Bound, type};
    return eval(e, env);
  }

  std::vector<Diagnostic> diagnostics() const {
    std::vector<Diagnostic> out;
    out.reserve(diags_.size());
    for (const auto& [key, d] : diags_) out.push_back(d);
    return out;
  }

 private:
  // ---------------------------------------------------------------- setup

  void collect_local_imports(const std::vector<StmtPtr>& body) {
    for (const auto& s : body) {
      if (s->kind == StmtKind::Import)
        for (const auto& b : s->imports) locals_.insert(b.bound_name);
      collect_local_imports(s->body);
      collect_local_imports(s->orelse);
    }
  }

  void collect_declarations(const std::vector<StmtPtr>& body) {
    for (const auto& s : body) {
      if (s->kind == StmtKind::AnnAssign && s->targets[0]->kind == ExprKind::Name)
        declared_.emplace(s->targets[0]->text, annotation_type(*s->annotation, stubs_));
      collect_declarations(s->body);
      collect_declarations(s->orelse);
    }
  }

  void emit(Category category, const SourceSpan& span, std::string message) {
    if (suppress_ > 0) return;
    auto key = std::make_tuple(span.line, span.column, span.token_index, static_cast<int>(category), message);
    diags_.emplace(std::move(key), Diagnostic{category, span, std::move(message)});
  }

  // ---------------------------------------------------------------- statements

  void exec_block(const std::vector<StmtPtr>& body, Env& env) {
    for (const auto& s : body) {
      if (!env.reachable) return;
      exec(*s, env);
    }
  }

  void exec(const Stmt& s, Env& env) {
    switch (s.kind) {
      case StmtKind::Expr:
        eval(*s.value, env);
        return;
      case StmtKind::Assign: {
        TypeTerm value = eval(*s.value, env);
        for (const auto& t : s.targets) assign(*t, value, env);
        return;
      }
      case StmtKind::AugAssign:
        exec_augassign(s, env);
        return;
      case StmtKind::AnnAssign:
        if (s.value) {
          TypeTerm value = eval(*s.value, env);
          assign(*s.targets[0], value, env);
        } else if (s.targets[0]->kind != ExprKind::Name) {
          eval(*s.targets[0], env);
        }
        return;
      case StmtKind::If: {
        eval(*s.value, env);
        Env other = env;
        exec_block(s.body, env);
        exec_block(s.orelse, other);
        env = join_env(env, other);
        return;
      }
      case StmtKind::For:
        exec_for(s, env);
        return;
      case StmtKind::While:
        exec_while(s, env);
        return;
      case StmtKind::With:
        for (std::size_t i = 0; i < s.items.size(); ++i) {
          TypeTerm cm = eval(*s.items[i], env);
          if (s.targets[i]) assign(*s.targets[i], enter_type(cm), env);
        }
        exec_block(s.body, env);
        return;
      case StmtKind::Return:
        exec_return(s, env);
        return;
      case StmtKind::Pass:
        return;
      case StmtKind::Break:
        if (!loops_.empty()) loops_.back().breaks.push_back(env);
        env = unreachable();
        return;
      case StmtKind::Continue:
        if (!loops_.empty()) loops_.back().continues.push_back(env);
        env = unreachable();
        return;
      case StmtKind::Del:
        for (const auto& t : s.targets) del(*t, env);
        return;
      case StmtKind::Raise:
        if (s.value) eval(*s.value, env);
        for (const auto& i : s.items)
          if (i) eval(*i, env);
        env = unreachable();
        return;
      case StmtKind::Assert:
        eval(*s.value, env);
        for (const auto& i : s.items)
          if (i) eval(*i, env);
        return;
      case StmtKind::Import:
        for (const auto& b : s.imports) env.vars[b.bound_name] = {Definedness::Bound, TypeTerm::unknown()};
        return;
    }
  }

  void exec_return(const Stmt& s, Env& env) {
    TypeTerm value = s.value ? eval(*s.value, env) : TypeTerm::none();
    if (return_type_ && !possibly_compatible(value, *return_type_)) {
      const SourceSpan& span = s.value ? s.value->span : s.span;
      emit(Category::BadReturnType, span,
           "bad return type: expected " + return_type_->str() + ", got " + value.str());
    }
    env = unreachable();
  }

  void exec_augassign(const Stmt& s, Env& env) {
    const Expr& target = *s.targets[0];
    TypeTerm current = eval(target, env);
    TypeTerm value = eval(*s.value, env);
    auto result = over_pairs(current, value, [&](const TypeTerm& l, const TypeTerm& r) -> std::optional<TypeTerm> {
      // In-place list extension accepts any iterable.
      if (s.op == "+" && l.kind() == K::List && is_iterable(r)) return TypeTerm::list(join(l.items()[0], element_type(r)));
      return builtins::binary(s.op, l, r);
    });
    if (!result) {
      emit(Category::UnsupportedOperand, target.span,
           "unsupported operand type(s) for " + s.op + "=: " + quoted(current) + " and " + quoted(value));
      result = TypeTerm::unknown();
    }
    store(target, *result, env, false);
  }

  // Iterates the loop body to a fixpoint with diagnostics suppressed, then
  // replays it once from the stable head state to report.
  template <typename Body>
  Env loop_fixpoint(const Env& entry, Body&& body) {
    Env head = entry;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      loops_.emplace_back();
      ++suppress_;
      Env end = head;
      body(end);
      --suppress_;
      LoopFrame frame = std::move(loops_.back());
      loops_.pop_back();
      Env next = join_env(entry, end);
      for (const auto& c : frame.continues) next = join_env(next, c);
      if (iter >= kWidenAfter) {
        for (auto& [name, b] : next.vars) {
          auto it = head.vars.find(name);
          if (it == head.vars.end() || !(it->second.type == b.type)) b.type = TypeTerm::unknown();
        }
      }
      if (next == head) break;
      head = std::move(next);
    }
    return head;
  }

  void exec_for(const Stmt& s, Env& env) {
    TypeTerm iterable = eval(*s.value, env);
    TypeTerm elem = element_type(iterable);
    if (!accepts(iterable, is_iterable)) {
      emit(Category::AttributeError, s.value->span, quoted(iterable) + " object is not iterable");
    }
    auto body = [&](Env& e) {
      assign(*s.targets[0], elem, e);
      exec_block(s.body, e);
    };
    Env head = loop_fixpoint(env, body);
    loops_.emplace_back();
    Env end = head;
    body(end);
    LoopFrame frame = std::move(loops_.back());
    loops_.pop_back();
    Env exit = head;
    exec_block(s.orelse, exit);
    for (const auto& b : frame.breaks) exit = join_env(exit, b);
    env = std::move(exit);
  }

  void exec_while(const Stmt& s, Env& env) {
    const bool infinite = is_constant_true(*s.value);
    auto body = [&](Env& e) {
      eval(*s.value, e);
      exec_block(s.body, e);
    };
    Env head = loop_fixpoint(env, body);
    loops_.emplace_back();
    eval(*s.value, head);
    Env end = head;
    exec_block(s.body, end);
    LoopFrame frame = std::move(loops_.back());
    loops_.pop_back();
    Env exit = infinite ? unreachable() : head;
    if (!infinite) exec_block(s.orelse, exit);
    for (const auto& b : frame.breaks) exit = join_env(exit, b);
    env = std::move(exit);
  }

  TypeTerm enter_type(const TypeTerm& cm) {
    if (cm.kind() == K::Class) {
      if (auto attr = builtins::attribute(cm, "__enter__"); attr && attr->callable()) return attr->callable()->result;
    }
    return TypeTerm::unknown();
  }

  // ---------------------------------------------------------------- targets

  void bind_name(const std::string& name, const TypeTerm& value, Env& env) {
    TypeTerm t = value;
    if (auto it = declared_.find(name); it != declared_.end()) {
      if (value.is_unknown() || !compatible(value, it->second)) t = it->second;
    }
    env.vars[name] = {Definedness::Bound, t};
  }

  void assign(const Expr& target, const TypeTerm& value, Env& env) { store(target, value, env, true); }

  // `evaluate_base` is false when the caller already evaluated the target's
  // sub-expressions (augmented assignment).
  void store(const Expr& target, const TypeTerm& value, Env& env, bool evaluate_base) {
    switch (target.kind) {
      case ExprKind::Name:
        bind_name(target.text, value, env);
        return;
      case ExprKind::Tuple:
      case ExprKind::List: {
        bool starred = false;
        for (const auto& c : target.children) starred = starred || c->kind == ExprKind::Starred;
        const bool exact = value.kind() == K::Tuple && !value.open_tuple() && !starred &&
                           value.items().size() == target.children.size();
        TypeTerm elem = element_type(value);
        for (std::size_t i = 0; i < target.children.size(); ++i) {
          const Expr& c = *target.children[i];
          if (c.kind == ExprKind::Starred) {
            store(*c.children[0], TypeTerm::list(elem), env, evaluate_base);
          } else {
            store(c, exact ? value.items()[i] : elem, env, evaluate_base);
          }
        }
        return;
      }
      case ExprKind::Starred:
        store(*target.children[0], TypeTerm::list(element_type(value)), env, evaluate_base);
        return;
      case ExprKind::Attribute: {
        TypeTerm base = evaluate_base ? eval(*target.children[0], env) : attribute_base_cache(target, env);
        auto ok = over_members(base, [](const TypeTerm& m) -> std::optional<TypeTerm> {
          if (m.kind() == K::Class || m.kind() == K::Function) return TypeTerm::unknown();
          return std::nullopt;
        });
        if (!ok) emit(Category::NotWritable, target.span, "cannot set attribute '" + target.text + "' on " + quoted(base));
        return;
      }
      case ExprKind::Subscript: {
        TypeTerm base = eval_quiet(*target.children[0], env, evaluate_base);
        if (evaluate_base) eval(*target.children[1], env);
        check_item_write(target, base, "assignment");
        return;
      }
      default:
        eval(target, env);
        return;
    }
  }

  TypeTerm attribute_base_cache(const Expr& target, Env& env) { return eval_quiet(*target.children[0], env, false); }

  // Re-evaluates `e` without reporting when `report` is false.
  TypeTerm eval_quiet(const Expr& e, Env& env, bool report) {
    if (report) return eval(e, env);
    ++suppress_;
    ScopeModel* scopes = scopes_;
    scopes_ = nullptr;
    TypeTerm t = eval(e, env);
    scopes_ = scopes;
    --suppress_;
    return t;
  }

  void check_item_write(const Expr& target, const TypeTerm& base, const char* what) {
    bool immutable = false;
    auto ok = over_members(base, [&](const TypeTerm& m) -> std::optional<TypeTerm> {
      switch (m.kind()) {
        case K::List:
        case K::Dict:
        case K::Function:
          return TypeTerm::unknown();
        case K::Class:
          if (has_dunder(m, std::string_view(what) == "deletion" ? "__delitem__" : "__setitem__"))
            return TypeTerm::unknown();
          return std::nullopt;
        case K::Tuple:
        case K::Str:
        case K::Bytes:
          immutable = true;
          return std::nullopt;
        default:
          return std::nullopt;
      }
    });
    if (ok) return;
    if (immutable) {
      emit(Category::NotWritable, target.span, quoted(base) + " object does not support item " + what);
    } else {
      emit(Category::UnsupportedOperand, target.span, quoted(base) + " object does not support item " + what);
    }
  }

  void del(const Expr& target, Env& env) {
    switch (target.kind) {
      case ExprKind::Name:
        if (locals_.count(target.text)) {
          load(target, env);
          env.vars[target.text] = Binding{};
        } else {
          load(target, env);
        }
        return;
      case ExprKind::Tuple:
      case ExprKind::List:
        for (const auto& c : target.children) del(*c, env);
        return;
      case ExprKind::Subscript: {
        TypeTerm base = eval(*target.children[0], env);
        eval(*target.children[1], env);
        check_item_write(target, base, "deletion");
        return;
      }
      default:
        eval(target, env);
        return;
    }
  }

  // ---------------------------------------------------------------- expressions

  TypeTerm load(const Expr& name, const Env& env) {
    if (locals_.count(name.text)) {
      auto it = env.vars.find(name.text);
      Binding b = it == env.vars.end() ? Binding{} : it->second;
      if (scopes_ && suppress_ == 0) scopes_->load_state[name.span.token_index] = b.state;
      if (b.state == Definedness::Unbound) {
        emit(Category::NameError, name.span, "local variable '" + name.text + "' is referenced before assignment");
        return TypeTerm::unknown();
      }
      if (b.state == Definedness::MaybeBound)
        emit(Category::NameError, name.span, "local variable '" + name.text + "' may be undefined");
      return b.type;
    }
    return global(name);
  }

  TypeTerm global(const Expr& name) {
    if (stubs_) {
      if (auto t = stubs_->lookup(name.text)) return *t;
    }
    if (module_imports_.count(name.text) || name.text == function_name_) return TypeTerm::unknown();
    if (auto t = builtins::lookup_name(name.text)) return *t;
    if (!star_import_) emit(Category::NameError, name.span, "name '" + name.text + "' is not defined");
    return TypeTerm::unknown();
  }

  TypeTerm eval(const Expr& e, Env& env) {
    switch (e.kind) {
      case ExprKind::Name: return load(e, env);
      case ExprKind::Int: return TypeTerm::integer();
      case ExprKind::Float: return TypeTerm::floating();
      case ExprKind::Complex: return TypeTerm::unknown();
      case ExprKind::Str:
      case ExprKind::FString:
        return TypeTerm::string();
      case ExprKind::Bytes: return TypeTerm::bytes();
      case ExprKind::Bool: return TypeTerm::boolean();
      case ExprKind::None: return TypeTerm::none();
      case ExprKind::Ellipsis: return TypeTerm::unknown();
      case ExprKind::Tuple: {
        std::vector<TypeTerm> items;
        bool open = false;
        for (const auto& c : e.children) {
          TypeTerm t = eval(*c, env);
          if (c->kind == ExprKind::Starred) open = true;
          items.push_back(std::move(t));
        }
        return TypeTerm::tuple(std::move(items), open);
      }
      case ExprKind::List:
      case ExprKind::Set: {
        std::vector<TypeTerm> elems;
        for (const auto& c : e.children) {
          TypeTerm t = eval(*c, env);
          elems.push_back(c->kind == ExprKind::Starred ? TypeTerm::unknown() : std::move(t));
        }
        TypeTerm elem = elems.empty() ? TypeTerm::unknown() : TypeTerm::union_of(std::move(elems));
        return e.kind == ExprKind::List ? TypeTerm::list(elem) : TypeTerm::set(elem);
      }
      case ExprKind::Dict: {
        std::vector<TypeTerm> keys, values;
        bool unpacked = false;
        for (std::size_t i = 0; i + 1 < e.children.size(); i += 2) {
          if (e.children[i]) {
            keys.push_back(eval(*e.children[i], env));
          } else {
            unpacked = true;
          }
          values.push_back(eval(*e.children[i + 1], env));
        }
        if (unpacked || keys.empty()) return TypeTerm::dict(TypeTerm::unknown(), TypeTerm::unknown());
        return TypeTerm::dict(TypeTerm::union_of(std::move(keys)), TypeTerm::union_of(std::move(values)));
      }
      case ExprKind::Attribute: return eval_attribute(e, env);
      case ExprKind::Subscript: return eval_subscript(e, env);
      case ExprKind::Slice:
        for (const auto& c : e.children)
          if (c) eval(*c, env);
        return TypeTerm::unknown();
      case ExprKind::Call: return eval_call(e, env);
      case ExprKind::Keyword:
      case ExprKind::Starred:
        eval(*e.children[0], env);
        return TypeTerm::unknown();
      case ExprKind::BinOp: return eval_binop(e, env);
      case ExprKind::UnaryOp: return eval_unary(e, env);
      case ExprKind::Compare: return eval_compare(e, env);
      case ExprKind::BoolOp:
      case ExprKind::IfExp: {
        std::vector<TypeTerm> results;
        for (std::size_t i = 0; i < e.children.size(); ++i) {
          TypeTerm t = eval(*e.children[i], env);
          if (!(e.kind == ExprKind::IfExp && i == 1)) results.push_back(std::move(t));
        }
        return TypeTerm::union_of(std::move(results));
      }
      case ExprKind::Lambda: {
        auto c = std::make_shared<Callable>();
        c->name = "<lambda>";
        return TypeTerm::function(std::move(c));
      }
      case ExprKind::Yield:
      case ExprKind::YieldFrom:
        for (const auto& c : e.children)
          if (c) eval(*c, env);
        return TypeTerm::unknown();
    }
    return TypeTerm::unknown();
  }

  TypeTerm eval_attribute(const Expr& e, Env& env) {
    TypeTerm base = eval(*e.children[0], env);
    auto r = over_members(base, [&](const TypeTerm& m) { return builtins::attribute(m, e.text); });
    if (!r) {
      emit(Category::AttributeError, e.span, "no attribute '" + e.text + "' on " + quoted(base));
      return TypeTerm::unknown();
    }
    return *r;
  }

  TypeTerm eval_subscript(const Expr& e, Env& env) {
    TypeTerm base = eval(*e.children[0], env);
    const Expr& index_expr = *e.children[1];
    TypeTerm index = eval(index_expr, env);
    const bool slice = index_expr.kind == ExprKind::Slice;
    const bool int_index = accepts(index, is_int_like);
    auto r = over_members(base, [&](const TypeTerm& m) -> std::optional<TypeTerm> {
      switch (m.kind()) {
        case K::Str:
          if (slice || int_index) return TypeTerm::string();
          return std::nullopt;
        case K::Bytes:
          if (slice) return TypeTerm::bytes();
          if (int_index) return TypeTerm::integer();
          return std::nullopt;
        case K::List:
          if (slice) return m;
          if (int_index) return m.items()[0];
          return std::nullopt;
        case K::Tuple: {
          if (slice) return TypeTerm::tuple({}, true);
          if (!int_index) return std::nullopt;
          if (m.open_tuple() || m.items().empty()) return TypeTerm::unknown();
          if (auto k = int_literal(index_expr)) {
            long long n = static_cast<long long>(m.items().size());
            long long i = *k < 0 ? *k + n : *k;
            if (i >= 0 && i < n) return m.items()[static_cast<std::size_t>(i)];
          }
          return TypeTerm::union_of(m.items());
        }
        case K::Dict: return m.items()[1];
        case K::Function: return TypeTerm::unknown();
        case K::Class: {
          auto attr = builtins::attribute(m, "__getitem__");
          if (!attr) return std::nullopt;
          return attr->callable() ? attr->callable()->result : TypeTerm::unknown();
        }
        default:
          return std::nullopt;
      }
    });
    if (!r) {
      emit(Category::UnsupportedOperand, e.span,
           "unsupported operand type(s) for item access: " + quoted(base) + " and " + quoted(index));
      return TypeTerm::unknown();
    }
    return *r;
  }

  TypeTerm eval_binop(const Expr& e, Env& env) {
    TypeTerm l = eval(*e.children[0], env);
    TypeTerm r = eval(*e.children[1], env);
    auto result = over_pairs(l, r, [&](const TypeTerm& a, const TypeTerm& b) { return builtins::binary(e.text, a, b); });
    if (!result) {
      emit(Category::UnsupportedOperand, e.span,
           "unsupported operand type(s) for " + e.text + ": " + quoted(l) + " and " + quoted(r));
      return TypeTerm::unknown();
    }
    return *result;
  }

  TypeTerm eval_unary(const Expr& e, Env& env) {
    TypeTerm t = eval(*e.children[0], env);
    auto result = over_members(t, [&](const TypeTerm& m) { return builtins::unary(e.text, m); });
    if (!result) {
      emit(Category::UnsupportedOperand, e.span, "bad operand type for unary " + e.text + ": " + quoted(t));
      return TypeTerm::unknown();
    }
    return *result;
  }

  TypeTerm eval_compare(const Expr& e, Env& env) {
    std::vector<TypeTerm> operands;
    for (const auto& c : e.children) operands.push_back(eval(*c, env));
    bool valid = true;
    for (std::size_t i = 0; i < e.ops.size() && i + 1 < operands.size(); ++i) {
      const std::string& op = e.ops[i];
      auto ok = over_pairs(operands[i], operands[i + 1],
                           [&](const TypeTerm& a, const TypeTerm& b) { return builtins::compare(op, a, b); });
      if (!ok) {
        emit(Category::UnsupportedOperand, e.span,
             "unsupported operand type(s) for " + op + ": " + quoted(operands[i]) + " and " + quoted(operands[i + 1]));
        valid = false;
      }
    }
    return valid ? TypeTerm::boolean() : TypeTerm::unknown();
  }

  TypeTerm eval_call(const Expr& e, Env& env) {
    TypeTerm callee = eval(*e.children[0], env);
    std::vector<CallArg> args;
    for (std::size_t i = 1; i < e.children.size(); ++i) {
      const Expr& a = *e.children[i];
      CallArg arg{&a, {}, {}, false};
      if (a.kind == ExprKind::Keyword) {
        arg.keyword = a.text;
        arg.type = eval(*a.children[0], env);
      } else if (a.kind == ExprKind::Starred) {
        arg.unpacked = true;
        eval(*a.children[0], env);
      } else {
        arg.type = eval(a, env);
      }
      args.push_back(std::move(arg));
    }
    if (callee.kind() == K::Function) {
      const Callable* c = callee.callable();
      if (!c) return TypeTerm::unknown();
      if (c->builtin != BuiltinFunction::None && c->builtin != BuiltinFunction::Opaque)
        return builtin_call(*c, args, e);
      if (c->checked) check_arguments(*c, args, e);
      return c->result;
    }
    auto r = over_members(callee, [](const TypeTerm& m) -> std::optional<TypeTerm> {
      if (m.kind() == K::Function && m.callable()) {
        if (m.callable()->builtin != BuiltinFunction::None && m.callable()->builtin != BuiltinFunction::Opaque)
          return TypeTerm::unknown();
        return m.callable()->result;
      }
      if (m.kind() == K::Class) {
        if (auto attr = builtins::attribute(m, "__call__"); attr && attr->callable()) return attr->callable()->result;
      }
      return TypeTerm::unknown();
    });
    return r ? *r : TypeTerm::unknown();
  }

  void check_arguments(const Callable& c, const std::vector<CallArg>& args, const Expr& call) {
    for (const auto& a : args)
      if (a.unpacked) return;
    std::vector<bool> filled(c.params.size(), false);
    std::size_t position = 0;
    auto mismatch = [&](const CallArg& a, const ParamSig& p) {
      if (!possibly_compatible(a.type, p.type)) {
        emit(Category::WrongArgTypes, a.expr->span,
             c.name + "() expects " + p.type.str() + " for '" + p.name + "', got " + a.type.str());
      }
    };
    for (const auto& a : args) {
      if (a.keyword.empty()) {
        if (position >= c.params.size()) {
          emit(Category::WrongArgTypes, a.expr->span,
               c.name + "() takes " + std::to_string(c.params.size()) + " positional argument(s)");
          return;
        }
        filled[position] = true;
        mismatch(a, c.params[position]);
        ++position;
        continue;
      }
      std::size_t k = 0;
      while (k < c.params.size() && c.params[k].name != a.keyword) ++k;
      if (k == c.params.size()) {
        emit(Category::WrongArgTypes, a.expr->span, c.name + "() got an unexpected keyword argument '" + a.keyword + "'");
        return;
      }
      if (filled[k]) {
        emit(Category::WrongArgTypes, a.expr->span, c.name + "() got multiple values for '" + a.keyword + "'");
        return;
      }
      filled[k] = true;
      mismatch(a, c.params[k]);
    }
    for (std::size_t k = 0; k < c.params.size(); ++k) {
      if (!filled[k] && !c.params[k].has_default) {
        emit(Category::WrongArgTypes, call.span, c.name + "() missing argument '" + c.params[k].name + "'");
        return;
      }
    }
  }

  TypeTerm builtin_call(const Callable& c, const std::vector<CallArg>& args, const Expr& call) {
    bool unpacked = false;
    std::vector<const CallArg*> positional;
    for (const auto& a : args) {
      unpacked = unpacked || a.unpacked;
      if (a.keyword.empty() && !a.unpacked) positional.push_back(&a);
    }
    const std::size_t n = positional.size();
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (unpacked || (n >= lo && n <= hi)) return true;
      emit(Category::WrongArgTypes, call.span,
           c.name + "() takes " + (lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " + std::to_string(hi)) +
               " argument(s), " + std::to_string(n) + " given");
      return false;
    };
    auto require = [&](std::size_t i, bool (*pred)(const TypeTerm&), const char* expected) {
      if (i >= n) return true;
      if (accepts(positional[i]->type, pred)) return true;
      emit(Category::WrongArgTypes, positional[i]->expr->span,
           c.name + "() expects " + expected + ", got " + positional[i]->type.str());
      return false;
    };
    auto arg = [&](std::size_t i) { return i < n ? positional[i]->type : TypeTerm::unknown(); };

    switch (c.builtin) {
      case BuiltinFunction::Len:
        if (arity(1, 1)) require(0, is_sized, "a sized container");
        return TypeTerm::integer();
      case BuiltinFunction::Abs: {
        if (!arity(1, 1) || !require(0, [](const TypeTerm& t) {
              return t.is_numeric() || has_dunder(t, "__abs__");
            }, "a number"))
          return TypeTerm::unknown();
        auto r = over_members(arg(0), [](const TypeTerm& m) -> std::optional<TypeTerm> {
          if (m.kind() == K::Float) return TypeTerm::floating();
          if (m.kind() == K::Int || m.kind() == K::Bool) return TypeTerm::integer();
          return TypeTerm::unknown();
        });
        return r ? *r : TypeTerm::unknown();
      }
      case BuiltinFunction::Range:
        if (arity(1, 3))
          for (std::size_t i = 0; i < n; ++i)
            if (!require(i, is_int_like, "an integer")) break;
        return TypeTerm::list(TypeTerm::integer());
      case BuiltinFunction::Sorted:
        if (arity(1, 1)) require(0, is_iterable, "an iterable");
        return TypeTerm::list(element_type(arg(0)));
      case BuiltinFunction::Iter:
        if (arity(1, 2) && n == 1) require(0, is_iterable, "an iterable");
        return TypeTerm::unknown();
      case BuiltinFunction::Str:
        arity(0, 3);
        return TypeTerm::string();
      case BuiltinFunction::Int:
        if (arity(0, 2))
          require(0, [](const TypeTerm& t) {
            return t.is_numeric() || t.kind() == K::Str || t.kind() == K::Bytes || has_dunder(t, "__int__") ||
                   has_dunder(t, "__index__");
          }, "a string or a number");
        return TypeTerm::integer();
      case BuiltinFunction::Float:
        if (arity(0, 1))
          require(0, [](const TypeTerm& t) {
            return t.is_numeric() || t.kind() == K::Str || t.kind() == K::Bytes || has_dunder(t, "__float__") ||
                   has_dunder(t, "__index__");
          }, "a string or a number");
        return TypeTerm::floating();
      case BuiltinFunction::Bool:
        arity(0, 1);
        return TypeTerm::boolean();
      case BuiltinFunction::List:
      case BuiltinFunction::Set:
      case BuiltinFunction::Tuple: {
        TypeTerm elem = TypeTerm::unknown();
        if (arity(0, 1) && n == 1 && require(0, is_iterable, "an iterable")) elem = element_type(arg(0));
        if (c.builtin == BuiltinFunction::List) return TypeTerm::list(elem);
        if (c.builtin == BuiltinFunction::Set) return TypeTerm::set(elem);
        return TypeTerm::tuple({}, true);
      }
      case BuiltinFunction::Dict:
        return TypeTerm::dict(TypeTerm::unknown(), TypeTerm::unknown());
      case BuiltinFunction::None:
      case BuiltinFunction::Opaque:
        break;
    }
    return c.result;
  }

  const StubSet* stubs_;
  bool annotations_;
  ScopeModel* scopes_ = nullptr;
  std::string function_name_;
  std::set<std::string> locals_;
  std::set<std::string> module_imports_;
  bool star_import_ = false;
  std::map<std::string, TypeTerm> declared_;
  std::optional<TypeTerm> return_type_;
  int suppress_ = 0;
  std::vector<LoopFrame> loops_;
  std::map<std::tuple<int, int, std::size_t, int, std::string>, Diagnostic> diags_;
};

// Forward references in string annotations: strip prefix and quotes.
std::string unquote(const std::string& literal) {
  std::size_t q = literal.find_first_of("'\"");
  if (q == std::string::npos) return {};
  std::string body = literal.substr(q);
  std::size_t width = (body.size() >= 6 && (body.starts_with("\"\"\"") || body.starts_with("'''"))) ? 3 : 1;
  if (body.size() < 2 * width) return {};
  return body.substr(width, body.size() - 2 * width);
}

const Expr* unwrap_typing(const Expr& e, std::string& name) {
  if (e.kind == ExprKind::Name) {
    name = e.text;
    return &e;
  }
  if (e.kind == ExprKind::Attribute && e.children[0]->kind == ExprKind::Name &&
      (e.children[0]->text == "typing" || e.children[0]->text == "t")) {
    name = e.text;
    return &e;
  }
  return nullptr;
}

}  // namespace

const char* category_name(Category category) noexcept {
  switch (category) {
    case Category::NameError: return "name-error";
    case Category::AttributeError: return "attribute-error";
    case Category::UnsupportedOperand: return "unsupported-operand";
    case Category::WrongArgTypes: return "wrong-arg-types";
    case Category::NotWritable: return "not-writable";
    case Category::BadReturnType: return "bad-return-type";
    case Category::ImportError: return "import-error";
    case Category::InternalError: return "internal-error";
  }
  return "internal-error";
}

std::optional<Category> parse_category(std::string_view name) noexcept {
  for (Category c : kAllCategories)
    if (name == category_name(c)) return c;
  return std::nullopt;
}

const char* definedness_name(Definedness d) noexcept {
  switch (d) {
    case Definedness::Unbound: return "unbound";
    case Definedness::MaybeBound: return "maybe-bound";
    case Definedness::Bound: return "bound";
  }
  return "?";
}

std::optional<Definedness> ScopeModel::at(std::size_t token_index) const {
  auto it = load_state.find(token_index);
  if (it == load_state.end()) return std::nullopt;
  return it->second;
}

ScopeModel build_scopes(const SyntaxTree& tree) {
  ScopeModel model;
  Analyzer a(nullptr, false);
  a.set_scopes(&model);
  a.run(tree);
  return model;
}

std::vector<Diagnostic> check(const SyntaxTree& tree, const CheckConfig& config) {
  try {
    Analyzer a(config.ambient_stubs ? &*config.ambient_stubs : nullptr, config.use_annotations);
    a.run(tree);
    return a.diagnostics();
  } catch (const std::exception& e) {
    return {Diagnostic{Category::InternalError, tree.function.span, std::string("checker failure: ") + e.what()}};
  }
}

CheckResult check_source(std::string_view source, const CheckConfig& config) {
  CheckResult result;
  SyntaxTree tree;
  try {
    tree = parse_source(source);
  } catch (const SyntaxError& e) {
    result.analyzable = false;
    result.error = e.what();
    return result;
  }
  result.diagnostics = check(tree, config);
  return result;
}

TypeTerm annotation_type(const Expr& annotation, const StubSet* stubs) {
  switch (annotation.kind) {
    case ExprKind::None:
      return TypeTerm::none();
    case ExprKind::Str: {
      try {
        ExprPtr inner = parse_expression(unquote(annotation.text));
        return annotation_type(*inner, stubs);
      } catch (const Error&) {
        return TypeTerm::unknown();
      }
    }
    case ExprKind::Name:
    case ExprKind::Attribute: {
      std::string name;
      if (!unwrap_typing(annotation, name)) return TypeTerm::unknown();
      if (annotation.kind == ExprKind::Name && stubs) {
        if (auto cls = stubs->find_class(name)) return TypeTerm::instance(cls);
      }
      if (auto t = builtins::annotation_name(name)) return *t;
      return TypeTerm::unknown();
    }
    case ExprKind::BinOp:
      if (annotation.text == "|")
        return TypeTerm::union_of(
            {annotation_type(*annotation.children[0], stubs), annotation_type(*annotation.children[1], stubs)});
      return TypeTerm::unknown();
    case ExprKind::Subscript: {
      std::string name;
      if (!unwrap_typing(*annotation.children[0], name)) return TypeTerm::unknown();
      const Expr& index = *annotation.children[1];
      std::vector<const Expr*> args;
      if (index.kind == ExprKind::Tuple) {
        for (const auto& c : index.children) args.push_back(c.get());
      } else {
        args.push_back(&index);
      }
      auto arg = [&](std::size_t i) { return i < args.size() ? annotation_type(*args[i], stubs) : TypeTerm::unknown(); };
      if (name == "List" || name == "list") return TypeTerm::list(arg(0));
      if (name == "Set" || name == "set") return TypeTerm::set(arg(0));
      if (name == "Dict" || name == "dict") return TypeTerm::dict(arg(0), arg(1));
      if (name == "Optional") return TypeTerm::union_of({arg(0), TypeTerm::none()});
      if (name == "Union") {
        std::vector<TypeTerm> members;
        for (std::size_t i = 0; i < args.size(); ++i) members.push_back(arg(i));
        return TypeTerm::union_of(std::move(members));
      }
      if (name == "Tuple" || name == "tuple") {
        if (args.size() == 2 && args[1]->kind == ExprKind::Ellipsis) return TypeTerm::tuple({}, true);
        if (index.kind == ExprKind::Tuple && index.children.empty()) return TypeTerm::tuple({});
        std::vector<TypeTerm> items;
        for (std::size_t i = 0; i < args.size(); ++i) items.push_back(arg(i));
        return TypeTerm::tuple(std::move(items));
      }
      return TypeTerm::unknown();
    }
    default:
      return TypeTerm::unknown();
  }
}

TypeTerm expr_type(const TypeEnv& env, const Expr& expression) {
  Analyzer a(env.stubs(), false);
  a.bind_locals(env);
  return a.evaluate(env, expression);
}

}  // namespace typegate
