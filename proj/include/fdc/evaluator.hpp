#ifndef FDC_EVALUATOR_HPP
#define FDC_EVALUATOR_HPP

#include "fdc/ast.hpp"
#include "fdc/generator.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdc {

using Env = std::map<std::string, Value>;

struct EvalStats {
    // Quantifier-body evaluations, in total and by the static quantifier
    // depth of the quantifier whose body ran (0 = outermost).
    std::uint64_t body_evals = 0;
    std::vector<std::uint64_t> body_evals_by_depth;
    std::uint64_t choose_yields = 0;
    // The outermost quantifier stopped before exhausting its domain.
    bool decided_early = false;

    std::uint64_t body_evals_at(std::size_t depth) const {
        return depth < body_evals_by_depth.size() ? body_evals_by_depth[depth]
                                                  : 0;
    }
};

enum class EvalMode { Deterministic, Nondeterministic };

enum class VerdictKind { Valid, Invalid, Undecided, Error };

struct Verdict {
    VerdictKind kind = VerdictKind::Error;
    // For Invalid: the falsifying values of the outermost universal block.
    Env witness;
    std::string reason;
};

std::string to_string(VerdictKind k);

class EvalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct EvalOptions {
    EvalMode mode = EvalMode::Nondeterministic;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct CheckResult {
    Verdict verdict;
    EvalStats stats;
};

// Executes the semantics of formulas and terms by enumeration. A phrase
// denotes a stream: deterministic phrases yield exactly one value, choose
// terms yield every admissible value, and a formula over choose terms yields
// one truth value per distinct outcome. Quantifiers stop at the first
// deciding element. The model must outlive the evaluator.
class Evaluator {
  public:
    explicit Evaluator(const Model& m, EvalOptions opts = {});
    ~Evaluator();
    Evaluator(const Evaluator&) = delete;
    Evaluator& operator=(const Evaluator&) = delete;

    // The stream keeps its own compiled copy of the phrase and stays valid
    // while the evaluator lives. Throws EvalError while being consumed.
    Generator<bool> eval_formula(const FormulaPtr& f, const Env& env = {});
    Generator<Value> eval_term(const TermPtr& t, const Env& env = {});

    // Valid iff every truth value of the stream is true; consumption stops at
    // the first false. An empty stream is an error (no admissible choice).
    Verdict check_validity(const FormulaPtr& theorem);

    const EvalStats& stats() const;
    void reset_stats();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

CheckResult check_validity(const Model& m, const FormulaPtr& theorem,
                           const EvalOptions& opts = {});

} // namespace fdc

#endif
