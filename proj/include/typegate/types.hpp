// Type lattice used by the checker. Unknown is the top element and is
// compatible with everything; unions are flat, deduplicated and sorted, and a
// union containing Unknown collapses to Unknown.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace typegate {

struct Callable;
struct ClassInfo;

class TypeTerm {
 public:
  enum class Kind { Unknown, Bool, Int, Float, Str, Bytes, None, Tuple, List, Dict, Set, Function, Class, Union };

  TypeTerm() = default;

  static TypeTerm unknown() { return TypeTerm(); }
  static TypeTerm boolean() { return TypeTerm(Kind::Bool); }
  static TypeTerm integer() { return TypeTerm(Kind::Int); }
  static TypeTerm floating() { return TypeTerm(Kind::Float); }
  static TypeTerm string() { return TypeTerm(Kind::Str); }
  static TypeTerm bytes() { return TypeTerm(Kind::Bytes); }
  static TypeTerm none() { return TypeTerm(Kind::None); }
  // An open tuple has unknown length; its items are ignored.
  static TypeTerm tuple(std::vector<TypeTerm> items, bool open = false);
  static TypeTerm list(TypeTerm elem);
  static TypeTerm dict(TypeTerm key, TypeTerm value);
  static TypeTerm set(TypeTerm elem);
  static TypeTerm function(std::shared_ptr<const Callable> callable);
  static TypeTerm instance(const std::shared_ptr<const ClassInfo>& cls);
  static TypeTerm union_of(std::vector<TypeTerm> members);

  Kind kind() const noexcept { return kind_; }
  bool is_unknown() const noexcept { return kind_ == Kind::Unknown; }
  bool is_numeric() const noexcept { return kind_ == Kind::Bool || kind_ == Kind::Int || kind_ == Kind::Float; }

  // Tuple items, {elem} for List/Set, {key, value} for Dict, members for Union.
  const std::vector<TypeTerm>& items() const noexcept { return items_; }
  bool open_tuple() const noexcept { return open_; }
  const Callable* callable() const noexcept { return callable_.get(); }
  std::shared_ptr<const ClassInfo> class_info() const { return class_.lock(); }
  const std::string& class_name() const noexcept { return name_; }

  // Union members, or the term itself.
  std::vector<TypeTerm> members() const;

  std::string str() const;

  friend bool operator==(const TypeTerm& a, const TypeTerm& b);

 private:
  explicit TypeTerm(Kind kind) : kind_(kind) {}

  Kind kind_ = Kind::Unknown;
  std::vector<TypeTerm> items_;
  bool open_ = false;
  std::shared_ptr<const Callable> callable_;
  std::weak_ptr<const ClassInfo> class_;
  std::string name_;
};

enum class BuiltinFunction {
  None,
  Len,
  Abs,
  Range,
  Sorted,
  Iter,
  Str,
  Int,
  Float,
  Bool,
  List,
  Set,
  Tuple,
  Dict,
  Opaque,  // bound builtin without a typing rule
};

struct ParamSig {
  std::string name;
  TypeTerm type;
  bool has_default = false;
};

struct Callable {
  std::string name;
  std::vector<ParamSig> params;
  TypeTerm result;
  // Declared signature whose arguments are checked at call sites.
  bool checked = false;
  BuiltinFunction builtin = BuiltinFunction::None;

  friend bool operator==(const Callable& a, const Callable& b);
};

struct ClassInfo {
  std::string name;
  std::map<std::string, TypeTerm> attributes;
};

// Reflexive, Bool <= Int <= Float, everything <= Unknown, containers
// covariant, unions member-wise (every actual member must fit some expected
// member).
bool compatible(const TypeTerm& actual, const TypeTerm& expected);

// Some member of `actual` fits `expected`. The checker only reports a
// mismatch when this fails.
bool possibly_compatible(const TypeTerm& actual, const TypeTerm& expected);

TypeTerm join(const TypeTerm& a, const TypeTerm& b);

// Type produced by iterating over `container`; Unknown when not iterable or
// not known.
TypeTerm element_type(const TypeTerm& container);

}  // namespace typegate
