// Flow-aware scope analysis and local type inference over a SyntaxTree.
//
// The checker is quiet under uncertainty: an operation involving an Unknown
// operand is never reported, and an operation on a union is reported only
// when it is invalid for every member.
#pragma once

#include "typegate/source.hpp"
#include "typegate/types.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace typegate {

enum class Category {
  NameError,
  AttributeError,
  UnsupportedOperand,
  WrongArgTypes,
  NotWritable,
  BadReturnType,
  ImportError,
  InternalError,
};

inline constexpr Category kAllCategories[] = {
    Category::NameError,   Category::AttributeError, Category::UnsupportedOperand, Category::WrongArgTypes,
    Category::NotWritable, Category::BadReturnType,  Category::ImportError,        Category::InternalError,
};

const char* category_name(Category category) noexcept;
std::optional<Category> parse_category(std::string_view name) noexcept;

struct Diagnostic {
  Category category;
  SourceSpan span;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

// Ambient declarations: functions, classes and globals from stub source, plus
// opaque names bound to Unknown.
class StubSet {
 public:
  StubSet() = default;

  // Parses stub source (bodies are `...`). Throws SyntaxError.
  static StubSet parse(std::string_view source);

  void merge(const StubSet& other);
  void add_opaque(const std::string& name) { opaque_.insert(name); }

  // Type bound to `name`, if declared.
  std::optional<TypeTerm> lookup(const std::string& name) const;
  std::shared_ptr<const ClassInfo> find_class(const std::string& name) const;

  const std::set<std::string>& opaque_names() const noexcept { return opaque_; }
  std::size_t declaration_count() const noexcept { return bindings_.size(); }

 private:
  std::map<std::string, TypeTerm> bindings_;
  std::map<std::string, std::shared_ptr<ClassInfo>> classes_;
  std::set<std::string> opaque_;
};

struct CheckConfig {
  bool use_annotations = false;
  std::optional<StubSet> ambient_stubs;
};

enum class Definedness { Unbound, MaybeBound, Bound };

const char* definedness_name(Definedness d) noexcept;

struct ScopeModel {
  std::set<std::string> locals;
  // Definedness of each reachable local load, keyed by token index.
  std::map<std::size_t, Definedness> load_state;

  std::optional<Definedness> at(std::size_t token_index) const;
};

ScopeModel build_scopes(const SyntaxTree& tree);

// Source-ordered, deduplicated diagnostics. Engine failures surface as a
// single internal-error diagnostic.
std::vector<Diagnostic> check(const SyntaxTree& tree, const CheckConfig& config);

struct CheckResult {
  bool analyzable = true;
  std::string error;  // set when the source could not be parsed
  std::vector<Diagnostic> diagnostics;
};

CheckResult check_source(std::string_view source, const CheckConfig& config);

// Converts an annotation expression. Unrecognized names become Unknown.
TypeTerm annotation_type(const Expr& annotation, const StubSet* stubs);

// Name -> type bindings for evaluating a standalone expression.
class TypeEnv {
 public:
  void bind(const std::string& name, TypeTerm type) { vars_[name] = std::move(type); }
  void set_stubs(const StubSet* stubs) { stubs_ = stubs; }

  const std::map<std::string, TypeTerm>& vars() const noexcept { return vars_; }
  const StubSet* stubs() const noexcept { return stubs_; }

 private:
  std::map<std::string, TypeTerm> vars_;
  const StubSet* stubs_ = nullptr;
};

TypeTerm expr_type(const TypeEnv& env, const Expr& expression);

}  // namespace typegate
