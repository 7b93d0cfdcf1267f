// Synthetic variable-misuse injection: one load of a local variable is
// replaced by another name bound in the same function.
#pragma once

#include "typegate/sample.hpp"
#include "typegate/source.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace typegate {

struct InjectionSite {
  IdentifierOccurrence occurrence;
  std::vector<std::string> candidates;  // sorted, never contains the original name
};

// Names bound anywhere in the function (parameters and stores), sorted.
std::vector<std::string> local_names(const SyntaxTree& tree);

// Body loads of local names, in source order.
std::vector<InjectionSite> injection_sites(const SyntaxTree& tree);

// Engine for the (seed, key) stream. Streams for different keys are
// independent, so corpora can be processed in any order.
std::mt19937_64 keyed_rng(std::uint64_t seed, std::string_view key);

// Unbiased draw from [0, n).
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

// Throws Error(NoSite) when the function offers no site, SyntaxError when the
// source does not parse, Error(InvalidArgument) unless the sample is correct.
ProgramSample inject_misuse(const ProgramSample& sample, std::uint64_t seed);

// Source with the recorded misuse undone.
std::string repair_source(const ProgramSample& buggy);

}  // namespace typegate
