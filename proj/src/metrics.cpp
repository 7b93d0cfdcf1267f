#include "typegate/metrics.hpp"

#include "typegate/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace typegate {

std::optional<MatchRule> parse_match_rule(std::string_view text) {
  if (text == "line") return MatchRule::Line;
  if (text == "token") return MatchRule::Token;
  return std::nullopt;
}

bool location_matches(const std::optional<Location>& reported, const Location& truth, MatchRule rule) {
  if (!reported) return false;
  if (rule == MatchRule::Token && truth.token_index) return reported->token_index == truth.token_index;
  return reported->line == truth.line;
}

EvalCounts classify(const ProgramSample& sample, const DetectorOutcome& outcome, MatchRule rule) {
  EvalCounts c;
  const bool faulty = sample.label == Label::Buggy && sample.bug;
  if (!outcome.has_bug) {
    (faulty ? c.fn : c.tn) = 1;
  } else if (faulty && location_matches(outcome.location, sample.bug->location, rule)) {
    c.tp = 1;
  } else {
    c.fp = 1;
  }
  return c;
}

EvalCounts tally(const std::map<std::string, DetectorOutcome>& outcomes, const std::vector<ProgramSample>& samples,
                 MatchRule rule) {
  EvalCounts total;
  for (const auto& s : samples) {
    auto it = outcomes.find(s.id);
    if (it == outcomes.end()) throw Error(ErrorCode::MissingOutcome, "no detector outcome for sample '" + s.id + "'");
    total += classify(s, it->second, rule);
  }
  return total;
}

PrecisionRecall precision_recall(const EvalCounts& c) {
  PrecisionRecall pr;
  if (c.tp + c.fp > 0) pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return pr;
}

std::optional<double> f_beta(double precision, double recall, double beta) {
  if (!(beta > 0) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  if (!(precision >= 0) || !(recall >= 0)) throw Error(ErrorCode::InvalidArgument, "precision and recall must be non-negative");
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom == 0) return std::nullopt;
  return (1 + b2) * precision * recall / denom;
}

std::optional<double> f_beta(std::optional<double> precision, std::optional<double> recall, double beta) {
  if (!precision || !recall) {
    if (!(beta > 0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
    return std::nullopt;
  }
  return f_beta(*precision, *recall, beta);
}

std::optional<double> ratio_change(double a, double b) {
  if (a == 0) return std::nullopt;
  return (b - a) / a * 100.0;
}

double crossover_beta(double p1, double r1, double p2, double r2) {
  for (double v : {p1, r1, p2, r2})
    if (!std::isfinite(v) || v < 0) throw Error(ErrorCode::InvalidArgument, "precision and recall must be non-negative");
  if (!(p1 > 0 && r1 > 0 && p2 > 0 && r2 > 0) || !((p1 - p2) * (r1 - r2) < 0))
    throw Error(ErrorCode::NoCrossover, "no F-beta crossover: one pair dominates or the pairs coincide");

  const double b2 = r1 * r2 * (p2 - p1) / (p1 * p2 * (r1 - r2));
  if (std::isfinite(b2) && b2 > 0 && std::isfinite(std::sqrt(b2)) && std::sqrt(b2) > 0) return std::sqrt(b2);

  // Near-degenerate inputs: bisect the sign change of F1 - F2 over log(beta).
  auto diff = [&](double lb) {
    const double b = std::exp(lb);
    return *f_beta(p1, r1, b) - *f_beta(p2, r2, b);
  };
  double lo = -300, hi = 300;
  const bool rising = diff(lo) < diff(hi);
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    ((diff(mid) < 0) == rising ? lo : hi) = mid;
  }
  return std::exp((lo + hi) / 2);
}

std::vector<CurvePoint> fbeta_curve(const std::vector<LabeledPR>& pairs, const std::vector<double>& betas) {
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0) || !std::isfinite(betas[i])) throw Error(ErrorCode::InvalidArgument, "beta grid must be positive");
    if (i > 0 && !(betas[i] > betas[i - 1])) throw Error(ErrorCode::InvalidArgument, "beta grid must be ascending");
  }
  std::vector<CurvePoint> out;
  for (const auto& p : pairs)
    for (double b : betas) out.push_back({p.label, b, f_beta(p.precision, p.recall, b)});
  return out;
}

EvalReport make_report(std::string detector, std::string corpus, const EvalCounts& counts,
                       const std::vector<double>& extra_betas) {
  EvalReport r{std::move(detector), std::move(corpus), counts, std::nullopt, std::nullopt, {}};
  const PrecisionRecall pr = precision_recall(counts);
  r.precision = pr.precision;
  r.recall = pr.recall;
  std::vector<double> betas = {1.0, 1.5};
  betas.insert(betas.end(), extra_betas.begin(), extra_betas.end());
  for (double b : betas) r.f_scores.emplace_back(b, f_beta(pr.precision, pr.recall, b));
  return r;
}

std::string format_percent(std::optional<double> fraction) {
  if (!fraction || !std::isfinite(*fraction)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", *fraction * 100.0);
  return buf;
}

std::string format_beta(double beta) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, beta);
  std::string s(buf, r.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

namespace {

// Labels may carry commas or quotes.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_csv_header(const std::vector<double>& extra_betas) {
  std::string h = "detector,corpus,tp,fp,fn,tn,precision,recall,f1.0,f1.5";
  for (double b : extra_betas) h += ",f" + format_beta(b);
  return h;
}

std::string report_csv_row(const EvalReport& r) {
  std::string row = csv_field(r.detector) + "," + csv_field(r.corpus) + "," + std::to_string(r.counts.tp) + "," +
                    std::to_string(r.counts.fp) + "," + std::to_string(r.counts.fn) + "," +
                    std::to_string(r.counts.tn) + "," + format_percent(r.precision) + "," + format_percent(r.recall);
  for (const auto& [beta, score] : r.f_scores) row += "," + format_percent(score);
  return row;
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
  std::string out = "label,beta,score\n";
  for (const auto& p : points) out += csv_field(p.label) + "," + format_beta(p.beta) + "," + format_percent(p.score) + "\n";
  return out;
}

}  // namespace typegate
