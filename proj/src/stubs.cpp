#include "typegate/error.hpp"
#include "typegate/typecheck.hpp"

#include <functional>

namespace typegate {

namespace {

std::shared_ptr<Callable> signature(const FunctionDef& fn, const StubSet& scope, bool drop_self) {
  auto c = std::make_shared<Callable>();
  c->name = fn.name;
  c->checked = true;
  for (std::size_t i = drop_self ? 1 : 0; i < fn.params.size(); ++i) {
    const Param& p = fn.params[i];
    c->params.push_back({p.name, p.annotation ? annotation_type(*p.annotation, &scope) : TypeTerm::unknown(),
                         p.default_value != nullptr});
  }
  c->result = fn.returns ? annotation_type(*fn.returns, &scope) : TypeTerm::unknown();
  return c;
}

}  // namespace

StubSet StubSet::parse(std::string_view source) {
  Module module = parse_module(tokenize(source));
  StubSet stubs;
  std::map<std::string, const ClassDef*> defs;

  // Classes are registered first so annotations anywhere may refer to them.
  for (const auto& cls : module.classes) {
    if (stubs.classes_.count(cls.name))
      throw SyntaxError(ErrorCode::Parse, "duplicate stub class '" + cls.name + "'", cls.span.line, cls.span.column);
    auto info = std::make_shared<ClassInfo>();
    info->name = cls.name;
    stubs.classes_[cls.name] = info;
    defs[cls.name] = &cls;
  }

  std::set<std::string> done;
  std::set<std::string> active;
  std::function<void(const ClassDef&)> fill = [&](const ClassDef& cls) {
    if (done.count(cls.name)) return;
    if (active.count(cls.name))
      throw SyntaxError(ErrorCode::Parse, "cyclic base classes for '" + cls.name + "'", cls.span.line, cls.span.column);
    active.insert(cls.name);
    auto& info = stubs.classes_[cls.name];
    for (const auto& base : cls.bases) {
      auto it = defs.find(base);
      if (it == defs.end()) continue;
      fill(*it->second);
      for (const auto& [name, type] : stubs.classes_[base]->attributes) info->attributes[name] = type;
    }
    for (const auto& a : cls.attributes)
      info->attributes[a.name] = a.annotation ? annotation_type(*a.annotation, &stubs) : TypeTerm::unknown();
    for (const auto& m : cls.methods) info->attributes[m.name] = TypeTerm::function(signature(m, stubs, true));
    active.erase(cls.name);
    done.insert(cls.name);
  };
  for (const auto& cls : module.classes) fill(cls);

  for (const auto& cls : module.classes) {
    auto info = stubs.classes_[cls.name];
    auto ctor = std::make_shared<Callable>();
    ctor->name = cls.name;
    ctor->result = TypeTerm::instance(info);
    auto init = info->attributes.find("__init__");
    if (init != info->attributes.end() && init->second.callable()) {
      ctor->params = init->second.callable()->params;
      ctor->checked = true;
    }
    stubs.bindings_[cls.name] = TypeTerm::function(std::move(ctor));
  }

  auto declare = [&](const std::string& name, TypeTerm type, const SourceSpan& span) {
    if (stubs.bindings_.count(name))
      throw SyntaxError(ErrorCode::Parse, "duplicate stub declaration '" + name + "'", span.line, span.column);
    stubs.bindings_[name] = std::move(type);
  };
  for (const auto& fn : module.functions) declare(fn.name, TypeTerm::function(signature(fn, stubs, false)), fn.span);
  for (const auto& g : module.globals)
    declare(g.name, g.annotation ? annotation_type(*g.annotation, &stubs) : TypeTerm::unknown(), g.span);
  for (const auto& imp : module.imports)
    if (!imp.star) stubs.opaque_.insert(imp.bound_name);
  return stubs;
}

void StubSet::merge(const StubSet& other) {
  for (const auto& [name, type] : other.bindings_) bindings_[name] = type;
  for (const auto& [name, cls] : other.classes_) classes_[name] = cls;
  opaque_.insert(other.opaque_.begin(), other.opaque_.end());
}

std::optional<TypeTerm> StubSet::lookup(const std::string& name) const {
  if (auto it = bindings_.find(name); it != bindings_.end()) return it->second;
  if (opaque_.count(name)) return TypeTerm::unknown();
  return std::nullopt;
}

std::shared_ptr<const ClassInfo> StubSet::find_class(const std::string& name) const {
  auto it = classes_.find(name);
  if (it == classes_.end()) return nullptr;
  return it->second;
}

}  // namespace typegate
