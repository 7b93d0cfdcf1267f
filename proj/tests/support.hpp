// Data loading and statistics shared by the unit and acceptance suites.
#pragma once

#include "typegate/corpus.hpp"
#include "typegate/mutate.hpp"
#include "typegate/source.hpp"

#include "json.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace support {

inline std::string data_path(const std::string& name) { return std::string(TEST_DATA_DIR) + "/" + name; }

inline typegate::Corpus load_corpus(const std::string& name) { return typegate::read_jsonl(data_path(name)); }

inline nlohmann::json load_json(const std::string& name) {
  return nlohmann::json::parse(typegate::read_file(data_path(name)));
}

// Upper tail of the chi-square distribution.
inline double chi_square_p(double statistic, double df) { return boost::math::gamma_q(df / 2.0, statistic / 2.0); }

struct InjectionStats {
  std::size_t total = 0;
  std::size_t parsed = 0;
  std::size_t one_token_diff = 0;
  std::size_t reversible = 0;
  std::size_t record_valid = 0;
  // Pooled over functions: which site was drawn, and which candidate given
  // the number of candidates at that site.
  double chi_square = 0;
  double df = 0;
  double p_value = 1;
};

// Injects every correct sample once per seed in [0, seeds) and checks each
// output: it parses, differs from the input in exactly the recorded token,
// repairs back to the input, and carries a consistent misuse record.
inline InjectionStats injection_stats(const typegate::Corpus& corpus, std::uint64_t seeds) {
  using namespace typegate;
  InjectionStats st;
  std::map<std::size_t, std::vector<double>> candidate_hits;
  for (const auto& sample : corpus.samples) {
    const SyntaxTree tree = parse_source(sample.source);
    const auto sites = injection_sites(tree);
    std::map<std::size_t, std::size_t> site_of_token;
    for (std::size_t i = 0; i < sites.size(); ++i) site_of_token[sites[i].occurrence.span.token_index] = i;
    std::vector<double> hits(sites.size(), 0);

    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      ++st.total;
      const ProgramSample bug = inject_misuse(sample, seed);
      SyntaxTree mutated;
      try {
        mutated = parse_source(bug.source);
        ++st.parsed;
      } catch (const SyntaxError&) {
        continue;
      }
      const auto& a = tree.tokens.tokens;
      const auto& b = mutated.tokens.tokens;
      std::vector<std::size_t> diffs;
      if (a.size() == b.size()) {
        for (std::size_t k = 0; k < a.size(); ++k)
          if (a[k].text != b[k].text || a[k].leading != b[k].leading) diffs.push_back(k);
      }
      const std::size_t at = bug.bug->location.token_index.value_or(a.size());
      if (diffs.size() == 1 && diffs[0] == at) ++st.one_token_diff;
      if (repair_source(bug) == sample.source) ++st.reversible;

      const auto& rec = *bug.bug;
      const auto& cands = rec.repair_candidates;
      if (rec.wrong_var != rec.correct_var && at < b.size() && b[at].text == rec.wrong_var &&
          std::find(cands.begin(), cands.end(), rec.correct_var) != cands.end() &&
          rec.location.line == b[at].span.line && bug.label == Label::Buggy)
        ++st.record_valid;
      if (auto it = site_of_token.find(at); it != site_of_token.end()) {
        hits[it->second] += 1;
        const auto& pool = sites[it->second].candidates;
        auto& row = candidate_hits[pool.size()];
        row.resize(pool.size());
        row[std::find(pool.begin(), pool.end(), rec.wrong_var) - pool.begin()] += 1;
      }
    }
    if (sites.size() > 1) {
      const double expected = static_cast<double>(seeds) / static_cast<double>(sites.size());
      for (double h : hits) st.chi_square += (h - expected) * (h - expected) / expected;
      st.df += static_cast<double>(sites.size() - 1);
    }
  }
  for (const auto& [k, row] : candidate_hits) {
    if (k < 2) continue;
    double n = 0;
    for (double h : row) n += h;
    for (double h : row) st.chi_square += (h - n / k) * (h - n / k) / (n / k);
    st.df += static_cast<double>(k - 1);
  }
  st.p_value = st.df > 0 ? chi_square_p(st.chi_square, st.df) : 1.0;
  return st;
}

}  // namespace support
