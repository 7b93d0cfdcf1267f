// Fixed typing tables for the builtin scope, builtin attributes and operators.
// Every query takes non-union, non-Unknown operands; std::nullopt means the
// operation is invalid for those operands.
#pragma once

#include "typegate/types.hpp"

#include <optional>
#include <string>

namespace typegate::builtins {

// Type of a name in the builtin scope.
std::optional<TypeTerm> lookup_name(const std::string& name);

// Attribute of a value. Class instances consult their declared table.
std::optional<TypeTerm> attribute(const TypeTerm& receiver, const std::string& name);

std::optional<TypeTerm> binary(const std::string& op, const TypeTerm& left, const TypeTerm& right);
std::optional<TypeTerm> compare(const std::string& op, const TypeTerm& left, const TypeTerm& right);
std::optional<TypeTerm> unary(const std::string& op, const TypeTerm& operand);

// Annotation names such as int, List, Optional. Returns nullopt for names
// that are not builtin types.
std::optional<TypeTerm> annotation_name(const std::string& name);

}  // namespace typegate::builtins
