#include "mrp/formula.hpp"

#include <algorithm>
#include <cctype>

#include "mrp/errors.hpp"

namespace mrp {

std::string VaryingTerm::label() const {
  std::string out;
  for (std::size_t i = 0; i < grouping.size(); ++i) {
    if (i) out += ':';
    out += grouping[i];
  }
  return out;
}

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("formula: " + what + " at byte " + std::to_string(pos));
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eof() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool consume(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!consume(c)) fail(std::string("expected '") + c + "' (" + what + ")");
  }

  // `1` is the only literal the grammar admits; longer digit runs are a
  // syntax error rather than a truncated parse.
  bool consume_one() {
    skip_ws();
    if (pos < text.size() && text[pos] == '1' &&
        (pos + 1 >= text.size() ||
         (!std::isalnum(static_cast<unsigned char>(text[pos + 1])) &&
          text[pos + 1] != '_'))) {
      ++pos;
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip_ws();
    std::size_t start = pos;
    if (pos >= text.size() ||
        !std::isalpha(static_cast<unsigned char>(text[pos]))) {
      fail("expected identifier");
    }
    ++pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
      ++pos;
    }
    return std::string(text.substr(start, pos - start));
  }
};

}  // namespace

Formula parse_formula(std::string_view text) {
  Parser p{text};
  Formula f;

  std::size_t head = p.pos;
  if (p.eof()) p.fail("empty formula");
  std::string keyword = p.identifier();
  if (keyword != "cbind") {
    p.pos = head;
    p.fail("expected 'cbind'");
  }
  p.expect('(', "response");
  f.successes = p.identifier();
  p.expect(',', "response");
  f.failures = p.identifier();
  p.expect(')', "response");
  p.expect('~', "model terms");

  auto parse_term = [&] {
    std::size_t term_start = p.pos;
    if (p.consume_one()) {
      if (f.has_intercept) {
        p.pos = term_start;
        p.fail("duplicate term '1'");
      }
      f.has_intercept = true;
      return;
    }
    if (p.consume('(')) {
      VaryingTerm term;
      if (!p.consume_one()) p.fail("varying term must start with '1'");
      term.has_intercept = true;
      while (p.consume('+')) term.slopes.push_back(p.identifier());
      p.expect('|', "varying term");
      term.grouping.push_back(p.identifier());
      while (p.consume(':')) term.grouping.push_back(p.identifier());
      p.expect(')', "varying term");
      for (const auto& existing : f.varying) {
        if (existing.grouping == term.grouping &&
            existing.has_intercept == term.has_intercept &&
            existing.slopes == term.slopes) {
          p.pos = term_start;
          p.fail("duplicate varying term '" + term.label() + "'");
        }
      }
      f.varying.push_back(std::move(term));
      return;
    }
    std::string name = p.identifier();
    if (std::find(f.fixed.begin(), f.fixed.end(), name) != f.fixed.end()) {
      p.pos = term_start;
      p.fail("duplicate term '" + name + "'");
    }
    f.fixed.push_back(std::move(name));
  };

  parse_term();
  while (p.consume('+')) parse_term();
  if (!p.eof()) p.fail("unexpected trailing input");

  for (const auto& term : f.varying) {
    for (const auto& slope : term.slopes) {
      if (std::find(f.fixed.begin(), f.fixed.end(), slope) == f.fixed.end()) {
        throw ConfigError("formula: slope covariate '" + slope +
                          "' in '" + term.label() +
                          "' is not declared as a fixed term");
      }
    }
  }
  return f;
}

std::string render_formula(const Formula& formula) {
  std::string out = "cbind(" + formula.successes + ", " + formula.failures + ") ~ ";
  std::vector<std::string> terms;
  if (formula.has_intercept) terms.push_back("1");
  for (const auto& name : formula.fixed) terms.push_back(name);
  for (const auto& term : formula.varying) {
    std::string t = "(1";
    for (const auto& slope : term.slopes) t += " + " + slope;
    t += " | " + term.label() + ")";
    terms.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += " + ";
    out += terms[i];
  }
  return out;
}

std::vector<TermCardinality> term_table(const Formula& formula,
                                        const std::vector<FactorSpec>& specs) {
  std::vector<TermCardinality> table;
  for (const auto& term : formula.varying) {
    TermCardinality entry;
    entry.label = term.label();
    entry.cardinality = 1;
    for (const auto& name : term.grouping) {
      const FactorSpec* spec = nullptr;
      for (const auto& s : specs) {
        if (s.name == name) spec = &s;
      }
      if (!spec) throw ConfigError("unknown factor '" + name + "' in term '" +
                                   entry.label + "'");
      entry.cardinality *= spec->size();
    }
    entry.effect_columns = (term.has_intercept ? 1 : 0) + term.slopes.size();
    table.push_back(std::move(entry));
  }
  return table;
}

}  // namespace mrp
