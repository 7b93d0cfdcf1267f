#include "typegate/types.hpp"

#include <algorithm>

namespace typegate {

TypeTerm TypeTerm::tuple(std::vector<TypeTerm> items, bool open) {
  TypeTerm t(Kind::Tuple);
  t.open_ = open;
  if (!open) t.items_ = std::move(items);
  return t;
}

TypeTerm TypeTerm::list(TypeTerm elem) {
  TypeTerm t(Kind::List);
  t.items_.push_back(std::move(elem));
  return t;
}

TypeTerm TypeTerm::dict(TypeTerm key, TypeTerm value) {
  TypeTerm t(Kind::Dict);
  t.items_.push_back(std::move(key));
  t.items_.push_back(std::move(value));
  return t;
}

TypeTerm TypeTerm::set(TypeTerm elem) {
  TypeTerm t(Kind::Set);
  t.items_.push_back(std::move(elem));
  return t;
}

TypeTerm TypeTerm::function(std::shared_ptr<const Callable> callable) {
  TypeTerm t(Kind::Function);
  t.callable_ = std::move(callable);
  return t;
}

TypeTerm TypeTerm::instance(const std::shared_ptr<const ClassInfo>& cls) {
  TypeTerm t(Kind::Class);
  t.name_ = cls->name;
  t.class_ = cls;
  return t;
}

TypeTerm TypeTerm::union_of(std::vector<TypeTerm> members) {
  std::vector<TypeTerm> flat;
  for (auto& m : members) {
    if (m.kind_ == Kind::Unknown) return unknown();
    if (m.kind_ == Kind::Union) {
      flat.insert(flat.end(), m.items_.begin(), m.items_.end());
    } else {
      flat.push_back(std::move(m));
    }
  }
  if (flat.empty()) return unknown();
  std::vector<std::pair<std::string, TypeTerm>> keyed;
  keyed.reserve(flat.size());
  for (auto& m : flat) keyed.emplace_back(m.str(), std::move(m));
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  keyed.erase(std::unique(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
              keyed.end());
  if (keyed.size() == 1) return std::move(keyed.front().second);
  TypeTerm u(Kind::Union);
  for (auto& [key, m] : keyed) u.items_.push_back(std::move(m));
  return u;
}

std::vector<TypeTerm> TypeTerm::members() const {
  if (kind_ == Kind::Union) return items_;
  return {*this};
}

std::string TypeTerm::str() const {
  auto join_items = [this]() {
    std::string s;
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (i) s += ", ";
      s += items_[i].str();
    }
    return s;
  };
  switch (kind_) {
    case Kind::Unknown: return "Any";
    case Kind::Bool: return "bool";
    case Kind::Int: return "int";
    case Kind::Float: return "float";
    case Kind::Str: return "str";
    case Kind::Bytes: return "bytes";
    case Kind::None: return "None";
    case Kind::Tuple:
      if (open_) return "tuple[Any, ...]";
      return items_.empty() ? "tuple[()]" : "tuple[" + join_items() + "]";
    case Kind::List: return "list[" + join_items() + "]";
    case Kind::Dict: return "dict[" + join_items() + "]";
    case Kind::Set: return "set[" + join_items() + "]";
    case Kind::Function: {
      std::string s = "Callable[" + (callable_ ? callable_->name : std::string("?")) + "(";
      if (callable_) {
        for (std::size_t i = 0; i < callable_->params.size(); ++i) {
          if (i) s += ", ";
          s += callable_->params[i].type.str();
        }
        s += ") -> " + callable_->result.str();
      }
      return s + "]";
    }
    case Kind::Class: return name_;
    case Kind::Union: return "Union[" + join_items() + "]";
  }
  return "?";
}

bool operator==(const TypeTerm& a, const TypeTerm& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case TypeTerm::Kind::Tuple:
      return a.open_ == b.open_ && a.items_ == b.items_;
    case TypeTerm::Kind::Function:
      if (a.callable_ == b.callable_) return true;
      return a.callable_ && b.callable_ && *a.callable_ == *b.callable_;
    case TypeTerm::Kind::Class:
      return a.name_ == b.name_;
    default:
      return a.items_ == b.items_;
  }
}

bool operator==(const Callable& a, const Callable& b) {
  if (a.name != b.name || a.checked != b.checked || a.builtin != b.builtin || !(a.result == b.result) ||
      a.params.size() != b.params.size())
    return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].name != b.params[i].name || !(a.params[i].type == b.params[i].type) ||
        a.params[i].has_default != b.params[i].has_default)
      return false;
  }
  return true;
}

namespace {

int numeric_rank(TypeTerm::Kind k) {
  switch (k) {
    case TypeTerm::Kind::Bool: return 0;
    case TypeTerm::Kind::Int: return 1;
    case TypeTerm::Kind::Float: return 2;
    default: return -1;
  }
}

// Non-union actual against non-union expected.
bool compatible_single(const TypeTerm& actual, const TypeTerm& expected) {
  using K = TypeTerm::Kind;
  if (actual.is_unknown() || expected.is_unknown()) return true;
  if (actual.is_numeric() && expected.is_numeric())
    return numeric_rank(actual.kind()) <= numeric_rank(expected.kind());
  if (actual.kind() != expected.kind()) return false;
  switch (actual.kind()) {
    case K::List:
    case K::Set:
    case K::Dict:
      for (std::size_t i = 0; i < actual.items().size(); ++i)
        if (!compatible(actual.items()[i], expected.items()[i])) return false;
      return true;
    case K::Tuple:
      if (actual.open_tuple() || expected.open_tuple()) return true;
      if (actual.items().size() != expected.items().size()) return false;
      for (std::size_t i = 0; i < actual.items().size(); ++i)
        if (!compatible(actual.items()[i], expected.items()[i])) return false;
      return true;
    case K::Class:
      return actual.class_name() == expected.class_name();
    default:
      return true;
  }
}

bool fits_expected(const TypeTerm& member, const TypeTerm& expected) {
  for (const auto& e : expected.members())
    if (compatible_single(member, e)) return true;
  return false;
}

}  // namespace

bool compatible(const TypeTerm& actual, const TypeTerm& expected) {
  if (actual.is_unknown() || expected.is_unknown()) return true;
  for (const auto& m : actual.members())
    if (!fits_expected(m, expected)) return false;
  return true;
}

bool possibly_compatible(const TypeTerm& actual, const TypeTerm& expected) {
  if (actual.is_unknown() || expected.is_unknown()) return true;
  for (const auto& m : actual.members())
    if (fits_expected(m, expected)) return true;
  return false;
}

TypeTerm join(const TypeTerm& a, const TypeTerm& b) {
  if (a == b) return a;
  return TypeTerm::union_of({a, b});
}

TypeTerm element_type(const TypeTerm& container) {
  using K = TypeTerm::Kind;
  switch (container.kind()) {
    case K::Str: return TypeTerm::string();
    case K::Bytes: return TypeTerm::integer();
    case K::List:
    case K::Set:
    case K::Dict:
      return container.items()[0];
    case K::Tuple:
      if (container.open_tuple() || container.items().empty()) return TypeTerm::unknown();
      return TypeTerm::union_of(container.items());
    case K::Union: {
      std::vector<TypeTerm> elems;
      for (const auto& m : container.items()) elems.push_back(element_type(m));
      return TypeTerm::union_of(std::move(elems));
    }
    default:
      return TypeTerm::unknown();
  }
}

}  // namespace typegate
