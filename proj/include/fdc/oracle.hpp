#ifndef FDC_ORACLE_HPP
#define FDC_ORACLE_HPP

#include "fdc/ast.hpp"
#include "fdc/evaluator.hpp"

#include <cstdint>
#include <set>

namespace fdc {

// Naive reference semantics: every phrase is evaluated to the complete set
// of its possible values, with no laziness and no short-circuiting. It
// shares no code with the Evaluator and is used to mint expected verdicts.

inline constexpr std::uint64_t kDefaultOracleCap = std::uint64_t{1} << 20;

// Product of the domain sizes of all binders reachable from the formula,
// including those of applied functions and contract results. Saturates at
// UINT64_MAX.
std::uint64_t assignment_space(const Model& m, const Formula& f);

std::set<bool> oracle_truths(const Model& m, const Formula& f, const Env& env);
std::set<Value> oracle_values(const Model& m, const Term& t, const Env& env);

// Quantifier bodies evaluated by the eager semantics; an upper bound for
// the lazy evaluator's body_evals. Throws EvalError like the evaluator.
std::uint64_t oracle_body_evals(const Model& m, const FormulaPtr& theorem);

// Refuses (Error verdict) when the assignment space exceeds `cap`.
Verdict oracle_check(const Model& m, const FormulaPtr& theorem,
                     std::uint64_t cap = kDefaultOracleCap);

} // namespace fdc

#endif
