#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mrp/factor.hpp"

namespace mrp {

// One varying-effect term: `(1 | state:educ)` or `(1 + x | eth)`. The
// grammar requires the intercept on the left side, so parsed terms always
// carry it; slopes reference fixed covariates declared in the same formula.
struct VaryingTerm {
  std::vector<std::string> grouping;
  bool has_intercept = false;
  std::vector<std::string> slopes;

  std::string label() const;  // grouping joined with ':'
  bool operator==(const VaryingTerm&) const = default;
};

// Parsed model specification:
//   cbind(successes, failures) ~ 1 + cov + (1 | a) + (1 + cov | b:c)
struct Formula {
  std::string successes;
  std::string failures;
  bool has_intercept = false;
  std::vector<std::string> fixed;    // covariate names, parse order
  std::vector<VaryingTerm> varying;  // parse order

  bool operator==(const Formula&) const = default;
};

// Grammar:
//   formula := "cbind" "(" ID "," ID ")" "~" term ("+" term)*
//   term    := "1" | ID | "(" lhs "|" ID (":" ID)* ")"
//   lhs     := "1" ("+" ID)?
// Whitespace and newlines are insignificant. Identifiers are ASCII
// [A-Za-z][A-Za-z0-9_]*. Rejection is total: errors carry a byte offset and
// no partial Formula is ever produced.
Formula parse_formula(std::string_view text);

// Canonical text: intercept, then fixed terms, then varying terms, joined
// with " + ". parse(render(f)) is structurally equal to f.
std::string render_formula(const Formula& formula);

// One entry per varying term with the full cross-product group count. A term
// with an intercept and k slopes owns 1+k effect columns, each of the same
// cardinality.
struct TermCardinality {
  std::string label;
  std::size_t cardinality = 0;
  std::size_t effect_columns = 1;
};

std::vector<TermCardinality> term_table(const Formula& formula,
                                        const std::vector<FactorSpec>& specs);

}  // namespace mrp
