#include "typegate/mutate.hpp"

#include "typegate/error.hpp"

#include <algorithm>
#include <set>

namespace typegate {

const char* label_name(Label label) noexcept { return label == Label::Buggy ? "buggy" : "correct"; }

std::size_t Corpus::count(Label label) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [label](const ProgramSample& s) { return s.label == label; }));
}

std::vector<std::string> local_names(const SyntaxTree& tree) {
  std::set<std::string> names;
  for (const auto& o : identifier_occurrences(tree))
    if (o.usage == Usage::Param || (o.in_body && o.usage == Usage::Store)) names.insert(o.name);
  return {names.begin(), names.end()};
}

std::vector<InjectionSite> injection_sites(const SyntaxTree& tree) {
  const std::vector<std::string> locals = local_names(tree);
  std::vector<InjectionSite> sites;
  for (const auto& o : identifier_occurrences(tree)) {
    if (!o.in_body || o.usage != Usage::Load) continue;
    if (!std::binary_search(locals.begin(), locals.end(), o.name)) continue;
    InjectionSite site{o, {}};
    for (const auto& n : locals)
      if (n != o.name) site.candidates.push_back(n);
    if (!site.candidates.empty()) sites.push_back(std::move(site));
  }
  return sites;
}

std::mt19937_64 keyed_rng(std::uint64_t seed, std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "uniform_index over an empty range");
  const std::uint64_t bound = n;
  // 2^64 mod bound; values below it would bias the modulo.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t x = rng();
    if (x >= threshold) return static_cast<std::size_t>(x % bound);
  }
}

ProgramSample inject_misuse(const ProgramSample& sample, std::uint64_t seed) {
  if (sample.label != Label::Correct)
    throw Error(ErrorCode::InvalidArgument, "sample '" + sample.id + "' is not a correct program");
  SyntaxTree tree = parse_source(sample.source);
  std::vector<InjectionSite> sites = injection_sites(tree);
  if (sites.empty()) throw Error(ErrorCode::NoSite, "sample '" + sample.id + "' has no injection site");

  std::mt19937_64 rng = keyed_rng(seed, sample.id);
  const InjectionSite& site = sites[uniform_index(rng, sites.size())];
  const std::string& wrong = site.candidates[uniform_index(rng, site.candidates.size())];

  ProgramSample out = sample;
  out.source = tree.tokens.text_with(site.occurrence.span.token_index, wrong);
  out.label = Label::Buggy;
  out.bug = MisuseRecord{{site.occurrence.span.line, site.occurrence.span.token_index},
                         wrong,
                         site.occurrence.name,
                         local_names(tree)};
  out.type_related.reset();
  out.matched_categories.reset();
  return out;
}

std::string repair_source(const ProgramSample& buggy) {
  if (!buggy.bug || !buggy.bug->location.token_index)
    throw Error(ErrorCode::InvalidArgument, "sample '" + buggy.id + "' carries no token-level bug location");
  TokenStream tokens = tokenize(buggy.source);
  std::size_t index = *buggy.bug->location.token_index;
  if (index >= tokens.tokens.size() || tokens.tokens[index].text != buggy.bug->wrong_var)
    throw Error(ErrorCode::InvalidArgument, "bug location of '" + buggy.id + "' does not hold the wrong variable");
  return tokens.text_with(index, buggy.bug->correct_var);
}

}  // namespace typegate
