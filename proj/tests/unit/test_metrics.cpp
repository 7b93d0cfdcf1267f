#include "doctest.h"

#include "reference_tables.hpp"

#include "typegate/error.hpp"
#include "typegate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace typegate;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

// Sign change of F(p1, r1) - F(p2, r2) located by plain bisection on beta.
double bisect_crossover(double p1, double r1, double p2, double r2) {
  auto f = [](double p, double r, double b) { return (1 + b * b) * p * r / (b * b * p + r); };
  auto d = [&](double b) { return f(p1, r1, b) - f(p2, r2, b); };
  double lo = 1e-6, hi = 1e6;
  for (int i = 0; i < 400; ++i) {
    const double mid = std::sqrt(lo * hi);
    ((d(mid) > 0) == (d(lo) > 0) ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

struct Random40 {
  std::vector<ProgramSample> samples;
  std::map<std::string, DetectorOutcome> outcomes;
};

Random40 random_case(std::mt19937_64& rng) {
  Random40 c;
  for (int i = 0; i < 40; ++i) {
    ProgramSample s;
    s.id = "r" + std::to_string(i);
    if (rng() % 2) {
      s.label = Label::Buggy;
      Location loc{static_cast<int>(1 + rng() % 6), std::nullopt};
      if (rng() % 3) loc.token_index = rng() % 20;
      s.bug = MisuseRecord{loc, "a", "b", {"a", "b"}};
    }
    DetectorOutcome o;
    if (rng() % 2) {
      o.has_bug = true;
      if (rng() % 5) {
        o.location = Location{static_cast<int>(1 + rng() % 6), std::nullopt};
        if (rng() % 2) o.location->token_index = rng() % 20;
      }
    }
    c.samples.push_back(s);
    c.outcomes[s.id] = o;
  }
  return c;
}

// Counts computed straight from the definitions, sample by sample.
EvalCounts brute_force(const Random40& c, MatchRule rule) {
  EvalCounts n;
  for (const auto& s : c.samples) {
    const DetectorOutcome& o = c.outcomes.at(s.id);
    const bool buggy = s.label == Label::Buggy;
    bool located = false;
    if (buggy && o.location) {
      if (rule == MatchRule::Token && s.bug->location.token_index)
        located = o.location->token_index.has_value() && *o.location->token_index == *s.bug->location.token_index;
      else
        located = o.location->line == s.bug->location.line;
    }
    if (buggy && o.has_bug && located) ++n.tp;
    else if (o.has_bug) ++n.fp;
    else if (buggy) ++n.fn;
    else ++n.tn;
  }
  return n;
}

}  // namespace

TEST_CASE("reference F-1 and F-1.5 values are reproduced") {
  for (const auto& row : reference::fscore_rows()) {
    INFO(row.model << " " << row.corpus << " " << row.training);
    CHECK(std::abs(*f_beta(row.precision, row.recall, 1.0) - row.f1) <= 0.02);
    CHECK(std::abs(*f_beta(row.precision, row.recall, 1.5) - row.f15) <= 0.02);
    // Scale-free: fractions give the same score divided by 100.
    CHECK(*f_beta(row.precision / 100, row.recall / 100, 1.5) * 100 ==
          doctest::Approx(*f_beta(row.precision, row.recall, 1.5)).epsilon(1e-12));
  }
  CHECK(std::abs(*f_beta(29.92, 33.32, 1.0) - 31.52) <= 0.01);
  CHECK(std::abs(*f_beta(29.92, 33.32, 1.5) - 32.19) <= 0.01);
  CHECK(std::abs(*f_beta(10.06, 27.12, 1.0) - 14.67) <= 0.01);
}

TEST_CASE("ratio change of reference cells") {
  CHECK(std::abs(*ratio_change(27.91, 26.10) - (-6.48)) <= 0.01);
  CHECK(std::abs(*ratio_change(93.40, 91.91) - (-1.59)) <= 0.01);
  // Rounded inputs only pin the change to within the rounding propagation.
  for (const auto& c : reference::delta_cells()) {
    INFO(c.model << " " << c.corpus << " " << c.metric);
    const double got = *ratio_change(c.full, c.filtered);
    const double slack = 100.0 * (0.005 / c.full + 0.005 / c.filtered) * (c.filtered / c.full) + 0.005;
    CHECK(std::abs(got - c.delta) <= slack);
  }
  CHECK_FALSE(ratio_change(0, 5).has_value());
  CHECK(*ratio_change(50, 50) == 0.0);
}

TEST_CASE("crossover of the reference pipeline rows") {
  double highest = 0;
  std::size_t crossing = 0;
  for (const auto& r : reference::pipeline_rows()) {
    INFO(r.model);
    if ((r.p_alone - r.p_cascade) * (r.r_alone - r.r_cascade) < 0) {
      const double b = crossover_beta(r.p_alone, r.r_alone, r.p_cascade, r.r_cascade);
      CHECK(b == doctest::Approx(bisect_crossover(r.p_alone, r.r_alone, r.p_cascade, r.r_cascade)).epsilon(1e-9));
      CHECK(*f_beta(r.p_alone, r.r_alone, b) == doctest::Approx(*f_beta(r.p_cascade, r.r_cascade, b)).epsilon(1e-12));
      highest = std::max(highest, b);
      ++crossing;
    } else {
      CHECK(code_of([&] { crossover_beta(r.p_alone, r.r_alone, r.p_cascade, r.r_cascade); }) ==
            ErrorCode::NoCrossover);
    }
  }
  CHECK(crossing == 3);
  CHECK(std::abs(highest - reference::kCrossover) <= 0.01);
}

TEST_CASE("crossover is symmetric and agrees with bisection on random pairs") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  int tested = 0;
  while (tested < 500) {
    double p1 = u(rng), r1 = u(rng), p2 = u(rng), r2 = u(rng);
    if (!((p1 - p2) * (r1 - r2) < 0)) continue;
    const double b = crossover_beta(p1, r1, p2, r2);
    CHECK(b == doctest::Approx(crossover_beta(p2, r2, p1, r1)).epsilon(1e-12));
    if (b > 1e-5 && b < 1e5) CHECK(b == doctest::Approx(bisect_crossover(p1, r1, p2, r2)).epsilon(1e-9));
    ++tested;
  }
  CHECK(code_of([] { crossover_beta(0.5, 0.5, 0.4, 0.4); }) == ErrorCode::NoCrossover);
  CHECK(code_of([] { crossover_beta(0.5, 0.5, 0.5, 0.5); }) == ErrorCode::NoCrossover);
  CHECK(code_of([] { crossover_beta(0.0, 0.5, 0.5, 0.1); }) == ErrorCode::NoCrossover);
  CHECK(code_of([] { crossover_beta(-0.1, 0.5, 0.5, 0.1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("F-beta moves from precision toward recall as beta grows") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double p = u(rng), r = u(rng);
    double prev = *f_beta(p, r, 0.05);
    for (double b = 0.1; b < 20; b *= 1.3) {
      const double cur = *f_beta(p, r, b);
      if (r > p) CHECK(cur >= prev - 1e-12);
      if (r < p) CHECK(cur <= prev + 1e-12);
      CHECK(cur >= std::min(p, r) - 1e-12);
      CHECK(cur <= std::max(p, r) + 1e-12);
      prev = cur;
    }
    CHECK(*f_beta(p, p, 0.3 + i * 0.01) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("undefined values and argument checks") {
  CHECK_FALSE(f_beta(0.0, 0.0, 1.0).has_value());
  CHECK(*f_beta(0.0, 0.5, 1.0) == 0.0);
  CHECK_FALSE(f_beta(std::nullopt, 0.5, 1.0).has_value());
  CHECK(code_of([] { f_beta(0.5, 0.5, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { f_beta(0.5, 0.5, -1.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { f_beta(-0.5, 0.5, 1.0); }) == ErrorCode::InvalidArgument);

  const PrecisionRecall none = precision_recall({});
  CHECK_FALSE(none.precision.has_value());
  CHECK_FALSE(none.recall.has_value());
  const PrecisionRecall quiet = precision_recall({0, 0, 5, 5});
  CHECK_FALSE(quiet.precision.has_value());
  CHECK(*quiet.recall == 0.0);

  const EvalReport r = make_report("d", "c", {0, 0, 0, 7});
  CHECK(report_csv_row(r) == "d,c,0,0,0,7,NA,NA,NA,NA");
}

TEST_CASE("tally matches a brute-force count on random cases") {
  std::mt19937_64 rng(12);
  for (int round = 0; round < 200; ++round) {
    Random40 c = random_case(rng);
    for (MatchRule rule : {MatchRule::Line, MatchRule::Token}) {
      const EvalCounts got = tally(c.outcomes, c.samples, rule);
      CHECK(got == brute_force(c, rule));
      CHECK(got.total() == 40);
    }
    std::shuffle(c.samples.begin(), c.samples.end(), rng);
    CHECK(tally(c.outcomes, c.samples, MatchRule::Line) == brute_force(c, MatchRule::Line));
  }
}

TEST_CASE("classification of single samples") {
  ProgramSample bug;
  bug.id = "b";
  bug.label = Label::Buggy;
  bug.bug = MisuseRecord{{8, 41}, "first", "last", {"first", "last"}};
  ProgramSample ok;
  ok.id = "ok";

  auto at = [](int line, std::optional<std::size_t> tok) {
    return DetectorOutcome{true, Location{line, tok}, std::nullopt, false};
  };
  CHECK(classify(bug, at(8, 41), MatchRule::Line) == EvalCounts{1, 0, 0, 0});
  CHECK(classify(bug, at(8, 40), MatchRule::Line) == EvalCounts{1, 0, 0, 0});
  CHECK(classify(bug, at(8, 40), MatchRule::Token) == EvalCounts{0, 1, 0, 0});
  CHECK(classify(bug, at(7, 41), MatchRule::Token) == EvalCounts{1, 0, 0, 0});
  CHECK(classify(bug, at(7, std::nullopt), MatchRule::Line) == EvalCounts{0, 1, 0, 0});
  CHECK(classify(bug, DetectorOutcome{true, std::nullopt, std::nullopt, false}, MatchRule::Line) ==
        EvalCounts{0, 1, 0, 0});
  CHECK(classify(bug, {}, MatchRule::Line) == EvalCounts{0, 0, 1, 0});
  CHECK(classify(ok, at(1, 0), MatchRule::Line) == EvalCounts{0, 1, 0, 0});
  CHECK(classify(ok, {}, MatchRule::Line) == EvalCounts{0, 0, 0, 1});

  bug.bug->location.token_index.reset();
  CHECK(classify(bug, at(8, 3), MatchRule::Token) == EvalCounts{1, 0, 0, 0});

  std::map<std::string, DetectorOutcome> partial = {{"b", {}}};
  CHECK(code_of([&] { tally(partial, {bug, ok}); }) == ErrorCode::MissingOutcome);
  CHECK(parse_match_rule("token") == MatchRule::Token);
  CHECK_FALSE(parse_match_rule("column").has_value());
}

TEST_CASE("report formatting") {
  CHECK(format_percent(std::nullopt) == "NA");
  CHECK(format_percent(0.31524) == "31.52");
  CHECK(format_percent(1.0) == "100.00");
  CHECK(format_beta(1.0) == "1.0");
  CHECK(format_beta(1.5) == "1.5");
  CHECK(format_beta(2.0) == "2.0");
  CHECK(format_beta(0.25) == "0.25");

  CHECK(report_csv_header() == "detector,corpus,tp,fp,fn,tn,precision,recall,f1.0,f1.5");
  CHECK(report_csv_header({2.0}) == "detector,corpus,tp,fp,fn,tn,precision,recall,f1.0,f1.5,f2.0");
  const EvalReport r = make_report("heuristic:0.5", "eval,v2", {3, 1, 1, 5}, {2.0});
  REQUIRE(r.f_scores.size() == 3);
  CHECK(r.f_scores[0].first == 1.0);
  CHECK(r.f_scores[1].first == 1.5);
  CHECK(report_csv_row(r) == "heuristic:0.5,\"eval,v2\",3,1,1,5,75.00,75.00,75.00,75.00,75.00");

  const auto curve = fbeta_curve({{"a", 0.5, 0.25}, {"b\"q", 0.25, 0.5}}, {1.0, 2.0});
  CHECK(curve_csv(curve) ==
        "label,beta,score\n"
        "a,1.0,33.33\n"
        "a,2.0,27.78\n"
        "\"b\"\"q\",1.0,33.33\n"
        "\"b\"\"q\",2.0,41.67\n");
  CHECK(code_of([] { fbeta_curve({}, {1.0, 1.0}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { fbeta_curve({}, {0.0}); }) == ErrorCode::InvalidArgument);
}
