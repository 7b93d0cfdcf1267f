#include "builtins.hpp"

#include <map>
#include <memory>
#include <set>

namespace typegate::builtins {

namespace {

using K = TypeTerm::Kind;

TypeTerm method(const std::string& name, TypeTerm result) {
  auto c = std::make_shared<Callable>();
  c->name = name;
  c->result = std::move(result);
  return TypeTerm::function(std::move(c));
}

TypeTerm builtin_fn(const std::string& name, BuiltinFunction id) {
  auto c = std::make_shared<Callable>();
  c->name = name;
  c->builtin = id;
  return TypeTerm::function(std::move(c));
}

std::optional<TypeTerm> str_attribute(const std::string& n) {
  static const std::set<std::string> kStrResult = {
      "upper", "lower",  "strip",   "lstrip",   "rstrip", "replace", "join",  "format", "title",
      "capitalize", "zfill", "center", "ljust", "rjust", "casefold", "swapcase", "expandtabs", "format_map",
      "removeprefix", "removesuffix", "translate"};
  static const std::set<std::string> kBoolResult = {"startswith", "endswith", "isdigit", "isalpha", "isalnum",
                                                    "isspace",    "isupper",  "islower", "isnumeric", "isidentifier",
                                                    "istitle",    "isdecimal", "isprintable", "isascii"};
  static const std::set<std::string> kIntResult = {"find", "rfind", "index", "rindex", "count"};
  if (kStrResult.count(n)) return method(n, TypeTerm::string());
  if (kBoolResult.count(n)) return method(n, TypeTerm::boolean());
  if (kIntResult.count(n)) return method(n, TypeTerm::integer());
  if (n == "split" || n == "rsplit" || n == "splitlines") return method(n, TypeTerm::list(TypeTerm::string()));
  if (n == "partition" || n == "rpartition")
    return method(n, TypeTerm::tuple({TypeTerm::string(), TypeTerm::string(), TypeTerm::string()}));
  if (n == "encode") return method(n, TypeTerm::bytes());
  return std::nullopt;
}

std::optional<TypeTerm> bytes_attribute(const std::string& n) {
  static const std::set<std::string> kBytesResult = {"strip", "lstrip", "rstrip", "replace", "join", "upper",
                                                     "lower", "zfill",  "center", "ljust",   "rjust"};
  if (kBytesResult.count(n)) return method(n, TypeTerm::bytes());
  if (n == "decode" || n == "hex") return method(n, TypeTerm::string());
  if (n == "startswith" || n == "endswith" || n == "isdigit" || n == "isalpha" || n == "isspace")
    return method(n, TypeTerm::boolean());
  if (n == "find" || n == "rfind" || n == "index" || n == "count") return method(n, TypeTerm::integer());
  if (n == "split" || n == "rsplit" || n == "splitlines") return method(n, TypeTerm::list(TypeTerm::bytes()));
  return std::nullopt;
}

std::optional<TypeTerm> list_attribute(const TypeTerm& self, const std::string& n) {
  const TypeTerm& elem = self.items()[0];
  if (n == "append" || n == "extend" || n == "insert" || n == "remove" || n == "sort" || n == "reverse" ||
      n == "clear")
    return method(n, TypeTerm::none());
  if (n == "pop") return method(n, elem);
  if (n == "index" || n == "count") return method(n, TypeTerm::integer());
  if (n == "copy") return method(n, self);
  return std::nullopt;
}

std::optional<TypeTerm> dict_attribute(const TypeTerm& self, const std::string& n) {
  const TypeTerm& key = self.items()[0];
  const TypeTerm& value = self.items()[1];
  if (n == "keys") return method(n, TypeTerm::list(key));
  if (n == "values") return method(n, TypeTerm::list(value));
  if (n == "items") return method(n, TypeTerm::list(TypeTerm::tuple({key, value})));
  if (n == "get") return method(n, TypeTerm::union_of({value, TypeTerm::none()}));
  if (n == "pop" || n == "setdefault") return method(n, value);
  if (n == "popitem") return method(n, TypeTerm::tuple({key, value}));
  if (n == "update" || n == "clear") return method(n, TypeTerm::none());
  if (n == "copy") return method(n, self);
  return std::nullopt;
}

std::optional<TypeTerm> set_attribute(const TypeTerm& self, const std::string& n) {
  if (n == "add" || n == "remove" || n == "discard" || n == "update" || n == "clear" ||
      n == "difference_update" || n == "intersection_update")
    return method(n, TypeTerm::none());
  if (n == "pop") return method(n, self.items()[0]);
  if (n == "union" || n == "intersection" || n == "difference" || n == "symmetric_difference" || n == "copy")
    return method(n, self);
  if (n == "issubset" || n == "issuperset" || n == "isdisjoint") return method(n, TypeTerm::boolean());
  return std::nullopt;
}

std::optional<TypeTerm> class_attribute(const TypeTerm& self, const std::string& n) {
  auto info = self.class_info();
  if (!info) return TypeTerm::unknown();
  auto it = info->attributes.find(n);
  if (it == info->attributes.end()) return std::nullopt;
  return it->second;
}

// Result type of a dunder method on a class instance.
std::optional<TypeTerm> class_dunder(const TypeTerm& self, const std::string& dunder) {
  if (self.kind() != K::Class) return std::nullopt;
  auto attr = class_attribute(self, dunder);
  if (!attr) return std::nullopt;
  if (attr->kind() == K::Function && attr->callable()) return attr->callable()->result;
  return TypeTerm::unknown();
}

bool is_int_like(const TypeTerm& t) { return t.kind() == K::Int || t.kind() == K::Bool; }
bool is_sequence(const TypeTerm& t) {
  return t.kind() == K::Str || t.kind() == K::Bytes || t.kind() == K::List || t.kind() == K::Tuple;
}

TypeTerm arithmetic(const TypeTerm& l, const TypeTerm& r) {
  return (l.kind() == K::Float || r.kind() == K::Float) ? TypeTerm::floating() : TypeTerm::integer();
}

std::string dunder_for(const std::string& op) {
  static const std::map<std::string, std::string> kNames = {
      {"+", "add"},     {"-", "sub"},    {"*", "mul"},    {"/", "truediv"}, {"//", "floordiv"},
      {"%", "mod"},     {"**", "pow"},   {"@", "matmul"}, {"&", "and"},     {"|", "or"},
      {"^", "xor"},     {"<<", "lshift"}, {">>", "rshift"}, {"<", "lt"},     {"<=", "le"},
      {">", "gt"},      {">=", "ge"}};
  auto it = kNames.find(op);
  return it == kNames.end() ? std::string() : it->second;
}

std::optional<TypeTerm> builtin_binary(const std::string& op, const TypeTerm& l, const TypeTerm& r) {
  const bool nums = l.is_numeric() && r.is_numeric();
  if (op == "+") {
    if (nums) return arithmetic(l, r);
    if (l.kind() == r.kind()) {
      switch (l.kind()) {
        case K::Str: return TypeTerm::string();
        case K::Bytes: return TypeTerm::bytes();
        case K::List: return TypeTerm::list(join(l.items()[0], r.items()[0]));
        case K::Tuple: {
          if (l.open_tuple() || r.open_tuple()) return TypeTerm::tuple({}, true);
          std::vector<TypeTerm> items = l.items();
          items.insert(items.end(), r.items().begin(), r.items().end());
          return TypeTerm::tuple(std::move(items));
        }
        default: break;
      }
    }
    return std::nullopt;
  }
  if (op == "-") {
    if (nums) return arithmetic(l, r);
    if (l.kind() == K::Set && r.kind() == K::Set) return l;
    return std::nullopt;
  }
  if (op == "*") {
    if (nums) return arithmetic(l, r);
    const TypeTerm* seq = is_sequence(l) && is_int_like(r) ? &l : (is_sequence(r) && is_int_like(l) ? &r : nullptr);
    if (!seq) return std::nullopt;
    if (seq->kind() == K::Tuple) return TypeTerm::tuple({}, true);
    return *seq;
  }
  if (op == "/") {
    if (nums) return TypeTerm::floating();
    return std::nullopt;
  }
  if (op == "//" || op == "**") {
    if (nums) return arithmetic(l, r);
    return std::nullopt;
  }
  if (op == "%") {
    if (nums) return arithmetic(l, r);
    if (l.kind() == K::Str) return TypeTerm::string();
    if (l.kind() == K::Bytes) return TypeTerm::bytes();
    return std::nullopt;
  }
  if (op == "&" || op == "|" || op == "^") {
    if (l.kind() == K::Bool && r.kind() == K::Bool) return TypeTerm::boolean();
    if (is_int_like(l) && is_int_like(r)) return TypeTerm::integer();
    if (l.kind() == K::Set && r.kind() == K::Set) return TypeTerm::set(join(l.items()[0], r.items()[0]));
    if (op == "|" && l.kind() == K::Dict && r.kind() == K::Dict) return l;
    return std::nullopt;
  }
  if (op == "<<" || op == ">>") {
    if (is_int_like(l) && is_int_like(r)) return TypeTerm::integer();
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::optional<TypeTerm> lookup_name(const std::string& name) {
  static const std::map<std::string, BuiltinFunction> kTyped = {
      {"len", BuiltinFunction::Len},       {"abs", BuiltinFunction::Abs},     {"range", BuiltinFunction::Range},
      {"sorted", BuiltinFunction::Sorted}, {"iter", BuiltinFunction::Iter},   {"str", BuiltinFunction::Str},
      {"int", BuiltinFunction::Int},       {"float", BuiltinFunction::Float}, {"bool", BuiltinFunction::Bool},
      {"list", BuiltinFunction::List},     {"set", BuiltinFunction::Set},     {"tuple", BuiltinFunction::Tuple},
      {"dict", BuiltinFunction::Dict},
  };
  static const std::map<std::string, TypeTerm> kSimpleResults = {
      {"print", TypeTerm::none()},        {"isinstance", TypeTerm::boolean()}, {"issubclass", TypeTerm::boolean()},
      {"hasattr", TypeTerm::boolean()},   {"callable", TypeTerm::boolean()},   {"any", TypeTerm::boolean()},
      {"all", TypeTerm::boolean()},       {"repr", TypeTerm::string()},           {"chr", TypeTerm::string()},
      {"ascii", TypeTerm::string()},         {"bin", TypeTerm::string()},            {"hex", TypeTerm::string()},
      {"oct", TypeTerm::string()},           {"ord", TypeTerm::integer()},        {"hash", TypeTerm::integer()},
      {"id", TypeTerm::integer()},
  };
  static const std::set<std::string> kOpaque = {
      "min", "max", "sum", "enumerate", "zip", "map", "filter", "reversed", "open", "type", "getattr", "setattr",
      "delattr", "super", "object", "round", "divmod", "format", "vars", "next", "input", "pow", "globals",
      "locals", "dir", "eval", "exec", "compile", "__import__", "help", "frozenset", "bytearray", "bytes",
      "complex", "memoryview", "slice", "property", "staticmethod", "classmethod", "NotImplemented", "Ellipsis",
      "__name__", "__file__", "__doc__", "__debug__", "BaseException", "Exception", "ArithmeticError",
      "AssertionError", "AttributeError", "EOFError", "FileNotFoundError", "FileExistsError", "ImportError",
      "IndexError", "IOError", "KeyError", "KeyboardInterrupt", "LookupError", "MemoryError",
      "ModuleNotFoundError", "NameError", "NotImplementedError", "OSError", "OverflowError", "PermissionError",
      "RecursionError", "ReferenceError", "RuntimeError", "StopIteration", "SyntaxError", "SystemExit",
      "TimeoutError", "TypeError", "UnicodeError", "UnicodeDecodeError", "UnicodeEncodeError", "ValueError",
      "ZeroDivisionError", "Warning", "UserWarning", "DeprecationWarning", "RuntimeWarning",
  };
  if (auto it = kTyped.find(name); it != kTyped.end()) return builtin_fn(name, it->second);
  if (auto it = kSimpleResults.find(name); it != kSimpleResults.end()) {
    auto c = std::make_shared<Callable>();
    c->name = name;
    c->result = it->second;
    c->builtin = BuiltinFunction::Opaque;
    return TypeTerm::function(std::move(c));
  }
  if (kOpaque.count(name)) return TypeTerm::unknown();
  return std::nullopt;
}

std::optional<TypeTerm> attribute(const TypeTerm& receiver, const std::string& name) {
  switch (receiver.kind()) {
    case K::Unknown:
    case K::Function:
      return TypeTerm::unknown();
    case K::Str: return str_attribute(name);
    case K::Bytes: return bytes_attribute(name);
    case K::List: return list_attribute(receiver, name);
    case K::Dict: return dict_attribute(receiver, name);
    case K::Set: return set_attribute(receiver, name);
    case K::Tuple:
      if (name == "index" || name == "count") return method(name, TypeTerm::integer());
      return std::nullopt;
    case K::Class: return class_attribute(receiver, name);
    case K::Bool:
    case K::Int:
    case K::Float:
    case K::None:
    case K::Union:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<TypeTerm> binary(const std::string& op, const TypeTerm& left, const TypeTerm& right) {
  if (left.kind() == K::Class || right.kind() == K::Class) {
    const std::string d = dunder_for(op);
    if (d.empty()) return std::nullopt;
    if (auto r = class_dunder(left, "__" + d + "__")) return r;
    if (auto r = class_dunder(right, "__r" + d + "__")) return r;
    return std::nullopt;
  }
  return builtin_binary(op, left, right);
}

std::optional<TypeTerm> compare(const std::string& op, const TypeTerm& left, const TypeTerm& right) {
  if (op == "==" || op == "!=" || op == "is" || op == "is not") return TypeTerm::boolean();
  if (op == "in" || op == "not in") {
    switch (right.kind()) {
      case K::Str:
        return left.kind() == K::Str ? std::optional(TypeTerm::boolean()) : std::nullopt;
      case K::Bytes:
        return (left.kind() == K::Bytes || is_int_like(left)) ? std::optional(TypeTerm::boolean()) : std::nullopt;
      case K::List:
      case K::Tuple:
        return TypeTerm::boolean();
      case K::Set:
      case K::Dict:
        // Membership hashes the probe; sets retry a set probe as a frozenset.
        if (left.kind() == K::List || left.kind() == K::Dict) return std::nullopt;
        if (left.kind() == K::Set && right.kind() == K::Dict) return std::nullopt;
        return TypeTerm::boolean();
      case K::Class:
        if (class_dunder(right, "__contains__") || class_dunder(right, "__iter__")) return TypeTerm::boolean();
        return std::nullopt;
      default:
        return std::nullopt;
    }
  }
  if (left.kind() == K::Class || right.kind() == K::Class) {
    const std::string d = dunder_for(op);
    if (class_dunder(left, "__" + d + "__")) return TypeTerm::boolean();
    return std::nullopt;
  }
  if (left.is_numeric() && right.is_numeric()) return TypeTerm::boolean();
  if (left.kind() == right.kind()) {
    switch (left.kind()) {
      case K::Str:
      case K::Bytes:
      case K::List:
      case K::Tuple:
      case K::Set:
        return TypeTerm::boolean();
      default:
        break;
    }
  }
  return std::nullopt;
}

std::optional<TypeTerm> unary(const std::string& op, const TypeTerm& operand) {
  if (op == "not") return TypeTerm::boolean();
  if (operand.kind() == K::Class) {
    const char* d = op == "-" ? "__neg__" : (op == "+" ? "__pos__" : "__invert__");
    return class_dunder(operand, d);
  }
  if (op == "-" || op == "+") {
    if (operand.kind() == K::Float) return TypeTerm::floating();
    if (is_int_like(operand)) return TypeTerm::integer();
    return std::nullopt;
  }
  if (op == "~" && is_int_like(operand)) return TypeTerm::integer();
  return std::nullopt;
}

std::optional<TypeTerm> annotation_name(const std::string& name) {
  if (name == "int") return TypeTerm::integer();
  if (name == "float") return TypeTerm::floating();
  if (name == "str") return TypeTerm::string();
  if (name == "bool") return TypeTerm::boolean();
  if (name == "bytes") return TypeTerm::bytes();
  if (name == "None") return TypeTerm::none();
  if (name == "list" || name == "List") return TypeTerm::list(TypeTerm::unknown());
  if (name == "dict" || name == "Dict") return TypeTerm::dict(TypeTerm::unknown(), TypeTerm::unknown());
  if (name == "set" || name == "Set") return TypeTerm::set(TypeTerm::unknown());
  if (name == "tuple" || name == "Tuple") return TypeTerm::tuple({}, true);
  return std::nullopt;
}

}  // namespace typegate::builtins
