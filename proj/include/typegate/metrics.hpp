// Localization-aware confusion counts, precision/recall, F-beta, ratio change
// and the F-beta crossover between two (precision, recall) pairs. Undefined
// values are std::nullopt and print as "NA".
#pragma once

#include "typegate/detect.hpp"
#include "typegate/sample.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace typegate {

struct EvalCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  EvalCounts& operator+=(const EvalCounts& o) noexcept {
    tp += o.tp, fp += o.fp, fn += o.fn, tn += o.tn;
    return *this;
  }
  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

// Line: reported line equals the bug line. Token: reported token index equals
// the bug token; bugs recorded with a line only fall back to line equality.
enum class MatchRule { Line, Token };

std::optional<MatchRule> parse_match_rule(std::string_view text);
bool location_matches(const std::optional<Location>& reported, const Location& truth, MatchRule rule);

// Contribution of one sample: exactly one of the four counts is 1.
EvalCounts classify(const ProgramSample& sample, const DetectorOutcome& outcome, MatchRule rule);

// Throws Error(MissingOutcome) when a sample has no outcome.
EvalCounts tally(const std::map<std::string, DetectorOutcome>& outcomes, const std::vector<ProgramSample>& samples,
                 MatchRule rule = MatchRule::Line);

struct PrecisionRecall {
  std::optional<double> precision;  // nullopt when tp + fp = 0
  std::optional<double> recall;     // nullopt when tp + fn = 0
};

PrecisionRecall precision_recall(const EvalCounts& counts);

// Scale-free: precision and recall may be fractions or percentages as long as
// both use the same scale. nullopt when beta^2 P + R = 0. Throws
// Error(InvalidArgument) for beta <= 0 or negative inputs.
std::optional<double> f_beta(double precision, double recall, double beta);
std::optional<double> f_beta(std::optional<double> precision, std::optional<double> recall, double beta);

// Signed percent change from a to b; nullopt when a = 0.
std::optional<double> ratio_change(double a, double b);

// The beta > 0 at which both pairs have equal F-beta. Throws
// Error(NoCrossover) unless one pair has the higher precision and the other
// the higher recall.
double crossover_beta(double p1, double r1, double p2, double r2);

struct LabeledPR {
  std::string label;
  double precision;
  double recall;
};

struct CurvePoint {
  std::string label;
  double beta;
  std::optional<double> score;
};

// Throws Error(InvalidArgument) unless the grid is positive and ascending.
std::vector<CurvePoint> fbeta_curve(const std::vector<LabeledPR>& pairs, const std::vector<double>& betas);

struct EvalReport {
  std::string detector;
  std::string corpus;
  EvalCounts counts;
  std::optional<double> precision;
  std::optional<double> recall;
  std::vector<std::pair<double, std::optional<double>>> f_scores;  // beta 1 and 1.5 first
};

EvalReport make_report(std::string detector, std::string corpus, const EvalCounts& counts,
                       const std::vector<double>& extra_betas = {});

// "NA" for undefined values, else the value times 100 with two decimals.
std::string format_percent(std::optional<double> fraction);
std::string format_beta(double beta);

std::string report_csv_header(const std::vector<double>& extra_betas = {});
std::string report_csv_row(const EvalReport& report);
std::string curve_csv(const std::vector<CurvePoint>& points);

}  // namespace typegate
