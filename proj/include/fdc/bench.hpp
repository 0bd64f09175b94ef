#ifndef FDC_BENCH_HPP
#define FDC_BENCH_HPP

#include "fdc/ast.hpp"
#include "fdc/evaluator.hpp"
#include "fdc/solver.hpp"
#include "fdc/translate.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fdc {

// Four variables x1..x4 quantified in order: `exists_first` existentials
// then universals (e<i>a<j>), or `exists_first`==false for a<i>e<j>.
struct QuantPattern {
    bool exists_first = true;
    unsigned leading = 4; // size of the first block

    std::vector<Quantifier> prefix() const;
    std::string label() const;
    // Position in the canonical order e4a0 ... e1a3, a4e0 ... a1e3.
    unsigned index() const;

    friend bool operator==(const QuantPattern&, const QuantPattern&) = default;
};

std::optional<QuantPattern> parse_pattern(const std::string& label);
const std::vector<QuantPattern>& all_patterns();

enum class Family {
    Cycle4Valid,
    Cycle4Unsat,
    Cycle4Sat1,
    Cycle4Sat2,
    ContractFEq1,
    ContractFEq0,
    ContractGEq1,
    ContractGEq0,
};

std::string to_string(Family f);
std::optional<Family> parse_family(const std::string& s);
const std::vector<Family>& all_families();
bool is_contract_family(Family f);
unsigned default_n(Family f);

struct BenchCase {
    Family family = Family::Cycle4Valid;
    QuantPattern pattern;
    unsigned n = 1;
};

// The pattern's prefix over x1..x4 : nat[2^N-1] around the family's
// predicate.
FormulaPtr gen_cycle4(Family family, const QuantPattern& p, unsigned n);
// Parameter N, type D, the contract function and one theorem named after
// the family.
Model gen_contract_bench(Family family, const QuantPattern& p, unsigned n);
// Either of the above as a model with a single theorem.
Model bench_model(const BenchCase& c);

struct Mechanism {
    enum class Kind { Evaluator, Solver };
    Kind kind = Kind::Evaluator;
    std::string solver; // config name
    QuantifierMode mode = QuantifierMode::Eliminate;

    std::string label() const; // RISCAL, Z3-S, Yices-E, ...
};

// "RISCAL" (or "evaluator"), or <solver>-S|-Q|-E.
std::optional<Mechanism> parse_mechanism(const std::string& label);

struct BenchRecord {
    BenchCase bcase;
    std::string mechanism;
    unsigned repeat = 0;
    std::string outcome; // decided, timeout, unknown, error, skipped
    VerdictKind verdict = VerdictKind::Undecided;
    double wall_ms = 0; // the limit itself for timeouts
    double translate_ms = 0;
    bool timed_out = false;
    double limit_ms = 0;
    std::uint64_t body_evals = 0;
    std::string detail;
};

struct SuiteOptions {
    std::chrono::milliseconds limit{60000};
    unsigned repeats = 1;
    unsigned jobs = 1;
    std::vector<SolverConfig> solvers = default_solver_configs();
    // Passed to every solver mechanism; the mode comes from the label.
    TranslateOptions translate;
    std::function<void(const BenchRecord&)> progress;
    // Cells run in a seeded random order when set (records are sorted anyway).
    std::optional<std::uint64_t> shuffle_seed;
};

// One record per (case, mechanism, repeat), sorted by family, N, pattern,
// mechanism and repeat.
std::vector<BenchRecord> run_suite(const std::vector<BenchCase>& cases,
                                   const std::vector<Mechanism>& mechanisms,
                                   const SuiteOptions& opts);

BenchRecord run_cell(const BenchCase& c, const Mechanism& mech, unsigned repeat,
                     const SuiteOptions& opts);

inline constexpr const char* kCsvHeader =
    "family,pattern,N,mechanism,repeat,outcome,verdict,wall_ms,translate_ms,timed_out,"
    "median_ms";

struct Report {
    std::string csv;
    // File name (family[-N<n>].svg) to document; empty without records.
    std::map<std::string, std::string> charts;
};

// `limit_ms` clamps the log axis; 0 takes it from the records.
Report emit_report(const std::vector<BenchRecord>& records, double limit_ms = 0);

std::string render_chart(const std::string& title, const std::vector<BenchRecord>& records,
                         double limit_ms);

double median(std::vector<double> xs);

} // namespace fdc

#endif
