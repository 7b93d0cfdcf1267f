#include "typegate/detect.hpp"

#include "typegate/error.hpp"
#include "typegate/label.hpp"
#include "typegate/mutate.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <charconv>
#include <map>

namespace typegate {

std::set<Category> default_relevant_categories(bool use_annotations) {
  std::set<Category> s = {Category::NameError, Category::AttributeError, Category::UnsupportedOperand,
                          Category::WrongArgTypes, Category::NotWritable};
  if (use_annotations) s.insert(Category::BadReturnType);
  return s;
}

namespace {

class TypecheckDetector : public Detector {
 public:
  explicit TypecheckDetector(TypecheckDetectorConfig config)
      : relevant_(config.relevant.value_or(default_relevant_categories(config.use_annotations))) {
    check_.use_annotations = config.use_annotations;
    check_.ambient_stubs = std::move(config.ambient_stubs);
    name_ = config.use_annotations ? "typecheck:annotations" : "typecheck";
  }

  std::string name() const override { return name_; }

  DetectorOutcome run(const ProgramSample& sample) override {
    FilteredCheck fc = filtered_check(sample, check_);
    DetectorOutcome out;
    if (fc.unanalyzable) {
      out.audit = true;
      return out;
    }
    for (const auto& d : fc.diagnostics) {
      if (!relevant_.count(d.category)) continue;
      out.has_bug = true;
      out.location = Location{d.span.line, d.span.token_index};
      break;
    }
    return out;
  }

 private:
  CheckConfig check_;
  std::set<Category> relevant_;
  std::string name_;
};

class HeuristicDetector : public Detector {
 public:
  explicit HeuristicDetector(double threshold) : threshold_(threshold) {}

  std::string name() const override {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, threshold_);
    return "heuristic:" + std::string(buf, r.ptr);
  }

  DetectorOutcome run(const ProgramSample& sample) override { return heuristic_outcome(sample, threshold_); }

 private:
  double threshold_;
};

void normalize(std::vector<double>& v) {
  if (v.empty()) return;
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo, span = *hi - *lo;
  for (double& x : v) x = span > 0 ? (x - min) / span : 0.0;
}

class CascadeDetector : public Detector {
 public:
  CascadeDetector(std::unique_ptr<Detector> checker, std::unique_ptr<Detector> inner)
      : checker_(std::move(checker)), inner_(std::move(inner)) {}

  std::string name() const override { return "pipeline:" + inner_->name(); }

  DetectorOutcome run(const ProgramSample& sample) override {
    DetectorOutcome first = checker_->run(sample);
    if (first.has_bug) return first;

    StrippedSource stripped;
    try {
      stripped = strip_annotations(sample.source);
    } catch (const SyntaxError&) {
      return inner_->run(sample);
    }
    if (stripped.source == sample.source) return inner_->run(sample);

    ProgramSample plain = sample;
    plain.source = stripped.source;
    plain.function_signature = normalize_signature(stripped.source);
    DetectorOutcome out = inner_->run(plain);
    if (!out.location) return out;

    Location& loc = *out.location;
    if (loc.token_index && *loc.token_index < stripped.origin.size()) {
      const std::size_t k = *loc.token_index;
      loc.token_index = stripped.origin[k];
      loc.line = stripped.origin_line[k];
      return out;
    }
    TokenStream plain_tokens = tokenize(stripped.source);
    for (std::size_t k = 0; k < plain_tokens.tokens.size() && k < stripped.origin_line.size(); ++k) {
      if (plain_tokens.tokens[k].span.line == loc.line) {
        loc.line = stripped.origin_line[k];
        break;
      }
    }
    loc.token_index.reset();
    return out;
  }

 private:
  std::unique_ptr<Detector> checker_;
  std::unique_ptr<Detector> inner_;
};

bool is_delim(const Token& t, std::string_view text) { return t.kind == TokenKind::Delimiter && t.text == text; }
bool is_op(const Token& t, std::string_view text) { return t.kind == TokenKind::Operator && t.text == text; }
bool opens(const Token& t) { return t.kind == TokenKind::Delimiter && (t.text == "(" || t.text == "[" || t.text == "{"); }
bool closes(const Token& t) { return t.kind == TokenKind::Delimiter && (t.text == ")" || t.text == "]" || t.text == "}"); }

void collect_annassign(const std::vector<StmtPtr>& body, std::vector<const Stmt*>& out) {
  for (const auto& s : body) {
    if (s->kind == StmtKind::AnnAssign) out.push_back(s.get());
    collect_annassign(s->body, out);
    collect_annassign(s->orelse, out);
  }
}

}  // namespace

std::unique_ptr<Detector> make_typecheck_detector(TypecheckDetectorConfig config) {
  return std::make_unique<TypecheckDetector>(std::move(config));
}

std::vector<HeuristicScore> heuristic_scores(const SyntaxTree& tree) {
  const std::vector<std::string> locals = local_names(tree);
  const auto occurrences = identifier_occurrences(tree);
  std::map<std::string, int> counts;
  std::map<std::string, std::vector<const IdentifierOccurrence*>> bindings;
  for (const auto& o : occurrences) {
    if (o.usage == Usage::Annotation) continue;
    ++counts[o.name];
    if (o.usage == Usage::Param || (o.in_body && o.usage == Usage::Store)) bindings[o.name].push_back(&o);
  }

  std::vector<HeuristicScore> out;
  for (const auto& o : occurrences) {
    if (!o.in_body || o.usage != Usage::Load || !std::binary_search(locals.begin(), locals.end(), o.name)) continue;
    HeuristicScore s{o.span.token_index, o.span.line, o.name, 1.0 / counts[o.name], 0.0, 0.0};
    const IdentifierOccurrence* preceding = nullptr;
    int nearest = -1;
    for (const auto* b : bindings[o.name]) {
      if (b->span.token_index < o.span.token_index) preceding = b;
      int d = std::abs(o.span.line - b->span.line);
      if (nearest < 0 || d < nearest) nearest = d;
    }
    s.distance = preceding ? o.span.line - preceding->span.line : std::max(nearest, 0);
    out.push_back(s);
  }
  std::vector<double> rarity, distance;
  for (const auto& s : out) {
    rarity.push_back(s.rarity);
    distance.push_back(s.distance);
  }
  normalize(rarity);
  normalize(distance);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].score = (rarity[i] + distance[i]) / 2.0;
  return out;
}

DetectorOutcome heuristic_outcome(const ProgramSample& sample, double threshold) {
  DetectorOutcome out;
  SyntaxTree tree;
  try {
    tree = parse_source(sample.source);
  } catch (const SyntaxError&) {
    out.audit = true;
    return out;
  }
  auto scores = heuristic_scores(tree);
  if (scores.empty()) return out;
  const HeuristicScore* best = &scores.front();
  for (const auto& s : scores)
    if (s.score > best->score) best = &s;
  out.score = best->score;
  if (best->score >= threshold) {
    out.has_bug = true;
    out.location = Location{best->line, best->token_index};
  }
  return out;
}

std::unique_ptr<Detector> make_heuristic_detector(double threshold) {
  return std::make_unique<HeuristicDetector>(threshold);
}

StrippedSource strip_annotations(const std::string& source) {
  SyntaxTree tree = parse_source(source);
  const auto& toks = tree.tokens.tokens;
  std::vector<bool> drop(toks.size(), false);
  std::map<std::size_t, std::string> replace;

  // Parameter annotations: ':' after a parameter name up to ',', '=' or ')'.
  std::size_t i = tree.function.span.token_index + 1;
  const std::size_t header_end = tree.function.header_end_token;
  int depth = 0;
  bool expecting_name = false;
  for (; i < header_end; ++i) {
    const Token& t = toks[i];
    if (depth == 0 && is_op(t, "->")) {
      for (std::size_t k = i; k < header_end; ++k) drop[k] = true;
      break;
    }
    if (opens(t)) {
      ++depth;
      if (depth == 1) expecting_name = true;
      continue;
    }
    if (closes(t)) {
      --depth;
      continue;
    }
    if (depth != 1) continue;
    if (is_delim(t, ",")) {
      expecting_name = true;
      continue;
    }
    if (expecting_name && t.kind == TokenKind::Identifier && i + 1 < header_end && is_delim(toks[i + 1], ":")) {
      std::size_t k = i + 1;
      int d = 0;
      for (; k < header_end; ++k) {
        const Token& a = toks[k];
        if (d == 0 && (is_delim(a, ",") || is_op(a, "=") || is_delim(a, ")"))) break;
        if (opens(a)) ++d;
        if (closes(a)) --d;
        drop[k] = true;
      }
      i = k - 1;
    }
    expecting_name = false;
  }

  // Variable annotations.
  std::vector<const Stmt*> annotated;
  collect_annassign(tree.function.body, annotated);
  for (const Stmt* s : annotated) {
    std::size_t k = s->span.token_index;
    int d = 0;
    while (k < toks.size() && !(d == 0 && is_delim(toks[k], ":"))) {
      if (opens(toks[k])) ++d;
      if (closes(toks[k])) --d;
      ++k;
    }
    std::size_t colon = k;
    d = 0;
    for (; k < toks.size(); ++k) {
      const Token& a = toks[k];
      if (d == 0 && (is_op(a, "=") || a.kind == TokenKind::Newline)) break;
      if (opens(a)) ++d;
      if (closes(a)) --d;
      drop[k] = true;
    }
    if (!s->value) {
      // A bare declaration becomes `pass` so the block keeps a statement.
      for (std::size_t j = s->span.token_index; j < colon; ++j) drop[j] = true;
      drop[s->span.token_index] = false;
      replace[s->span.token_index] = "pass";
    }
  }

  StrippedSource out;
  for (std::size_t k = 0; k < toks.size(); ++k) {
    if (drop[k]) continue;
    out.source += toks[k].leading;
    auto r = replace.find(k);
    out.source += r == replace.end() ? toks[k].text : r->second;
    out.origin.push_back(k);
    out.origin_line.push_back(toks[k].span.line);
  }
  out.source += tree.tokens.trailing;
  return out;
}

std::unique_ptr<Detector> make_cascade(std::unique_ptr<Detector> checker, std::unique_ptr<Detector> inner) {
  if (!checker || !inner) throw Error(ErrorCode::InvalidArgument, "cascade needs two detectors");
  return std::make_unique<CascadeDetector>(std::move(checker), std::move(inner));
}

std::map<std::string, DetectorOutcome> run_detector(Detector& detector, const std::vector<ProgramSample>& samples,
                                                    std::size_t jobs) {
  std::vector<DetectorOutcome> outcomes(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) { outcomes[i] = detector.run(samples[i]); });
  std::map<std::string, DetectorOutcome> out;
  for (std::size_t i = 0; i < samples.size(); ++i) out.emplace(samples[i].id, std::move(outcomes[i]));
  return out;
}

std::unique_ptr<Detector> make_detector(const std::string& spec) {
  if (spec == "typecheck") return make_typecheck_detector({});
  if (spec == "typecheck:annotations") {
    TypecheckDetectorConfig c;
    c.use_annotations = true;
    return make_typecheck_detector(std::move(c));
  }
  if (spec == "heuristic") return make_heuristic_detector(0.5);
  if (spec.rfind("heuristic:", 0) == 0) {
    const std::string value = spec.substr(10);
    double threshold = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), threshold);
    if (ec != std::errc() || ptr != value.data() + value.size() || threshold < 0)
      throw Error(ErrorCode::InvalidArgument, "bad heuristic threshold '" + value + "'");
    return make_heuristic_detector(threshold);
  }
  if (spec.rfind("external:", 0) == 0 && spec.size() > 9) {
    ExternalDetectorConfig c;
    c.command = spec.substr(9);
    return make_external_detector(std::move(c));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown detector spec '" + spec + "'");
}

}  // namespace typegate
