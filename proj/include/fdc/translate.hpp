#ifndef FDC_TRANSLATE_HPP
#define FDC_TRANSLATE_HPP

#include "fdc/ast.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdc {

enum class QuantifierMode { Eliminate, Preserve, ExpandAll };

std::string to_string(QuantifierMode m);
std::optional<QuantifierMode> parse_quantifier_mode(const std::string& s);

inline constexpr std::uint64_t kDefaultExpansionBudget = std::uint64_t{1} << 20;

struct TranslateOptions {
    QuantifierMode mode = QuantifierMode::Eliminate;
    // Existentials are expanded instead of Skolemized when the Skolem range
    // axioms would exceed factor times the universal expansion. nullopt
    // disables the heuristic (always Skolemize in Eliminate mode).
    std::optional<double> heuristic_factor = 2.0;
    bool eliminate_choices = false;
    bool inline_definitions = false;
    // Maximum number of quantifier instances produced by expansion.
    std::uint64_t expansion_budget = kDefaultExpansionBudget;
};

class TranslationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Provenance { NegatedGoal, SkolemRangeAxiom, ChooseAxiom, TypeConstraint };

std::string to_string(Provenance p);

// An uninterpreted function or constant. Arguments of width 0 are dropped
// from the signature; `range_conjuncts` counts the instances of its range
// axiom (emitted only when the range predicate is not trivially true).
struct SmtDecl {
    std::string name;
    std::vector<FiniteType> params;
    FiniteType result;
    std::string origin; // variable or choose it replaces
    std::uint64_t range_conjuncts = 0;
    bool skolem = false;

    std::vector<unsigned> arg_widths() const;
    unsigned result_width() const;
};

struct SmtAssertion {
    std::string text; // the asserted SMT-LIB term
    Provenance provenance = Provenance::NegatedGoal;
};

struct SmtScript {
    std::string logic;
    std::vector<std::string> comments;
    std::vector<std::string> definitions; // define-fun commands
    std::vector<SmtDecl> declarations;
    std::vector<SmtAssertion> assertions;

    std::size_t count(Provenance p) const;
    std::size_t skolem_count() const;
};

struct CostEstimate {
    std::uint64_t expansion_conjuncts = 0;
    std::uint64_t skolem_axiom_conjuncts = 0;

    friend bool operator==(const CostEstimate&, const CostEstimate&) = default;
};

// Negations pushed onto atoms; implications and equivalences removed.
FormulaPtr to_nnf(const FormulaPtr& f);
FormulaPtr negate_goal(const FormulaPtr& f);

// Unsigned binary of the carrier index as an SMT-LIB literal (#b...), or an
// empty string for width-0 types. Throws TranslationError outside the carrier.
std::string encode_value(Value v, const FiniteType& t);

// The range predicate p_D over bit-vectors of width bit_width(t).
struct TypePredicate {
    FiniteType type;

    bool trivial() const;
    // p_D(t) as a formula; True when trivial.
    FormulaPtr apply(const TermPtr& t) const;
};
TypePredicate type_predicate(const FiniteType& t);

// For a sat-side formula in NNF: the number of instances produced by
// expanding universals (0 without universals), and the range-axiom
// conjuncts if every existential is Skolemized.
CostEstimate estimate_costs(const Formula& nnf);

// Whether the heuristic expands the existentials of a formula.
bool expand_existentials(const CostEstimate& c, const TranslateOptions& opts);

// Result of removing quantifiers from a sat-side NNF formula.
struct Elimination {
    std::vector<SmtDecl> skolems;
    std::vector<FormulaPtr> range_axioms;
    bool expanded_existentials = false;
};

// Expands universals and Skolemizes or expands existentials. Each instance
// of the outermost universal block is passed to `sink` as its own
// quantifier-free conjunct; Skolem symbols are named _sk<n> starting at
// `*skolem_counter` and appear in `out.skolems` before the first conjunct
// that uses them reaches the sink. If the heuristic picks expansion but it
// would not fit the budget, existentials are Skolemized instead.
void eliminate_quantifiers(const FormulaPtr& nnf, const TranslateOptions& opts,
                           Elimination& out,
                           const std::function<void(const FormulaPtr&)>& sink,
                           unsigned* skolem_counter = nullptr);
// Convenience form collecting all conjuncts.
std::vector<FormulaPtr> eliminate_quantifiers(const FormulaPtr& nnf,
                                              const TranslateOptions& opts,
                                              Elimination& out);

// Replaces applications of contract functions by the equivalent choose
// term over the ensures clause. Applications whose arguments may denote
// several values are kept: substitution would duplicate the choice.
FormulaPtr expand_contracts(const Model& m, const FormulaPtr& f);

// Replaces applications of definition-bodied functions by their bodies.
// With `all` false, only definitions that cannot become an SMT-LIB
// define-fun (bodies with quantifiers, choose or applications) are inlined.
// As with contracts, applications with nondeterministic arguments are kept.
FormulaPtr inline_definitions(const Model& m, const FormulaPtr& f, bool all = true);
Model inline_definitions(const Model& m);

// Turns eligible choose occurrences in the body of the outermost universal
// block into fresh universal variables guarded by the choose condition:
// forall a. P(choose b with F) becomes forall a, b. F => P(b).
// Eligible: positive atom, no binder between prefix and occurrence, not in
// an if-condition. Contract applications are expanded first.
FormulaPtr eliminate_choices(const Model& m, const FormulaPtr& goal);

struct ChooseAxioms {
    FormulaPtr formula; // with choose terms replaced by applications
    std::vector<SmtDecl> functions;
    std::vector<FormulaPtr> axioms;      // forall fv. F[x, f(x)]
    std::vector<FormulaPtr> constraints; // forall fv. p_D(f(x)), non-trivial only
};

// Gives every choose occurrence of a closed formula a fresh function _ch<n>
// (pre-order numbering) over the occurrence's free variables. Remaining
// contract applications (those with nondeterministic arguments) become
// choose terms over their processed arguments; definition applications are
// inlined the same way when `inline_all` is set or they cannot be a
// define-fun.
ChooseAxioms axiomatize_choose(const Model& m, const FormulaPtr& f, bool inline_all = false);

std::string emit_smtlib(const SmtScript& s);

// The full pipeline for a closed goal: the script is satisfiable iff the
// goal is not valid.
SmtScript translate(const Model& m, const FormulaPtr& goal,
                    const TranslateOptions& opts = {},
                    const std::string& goal_name = "goal");

} // namespace fdc

#endif
