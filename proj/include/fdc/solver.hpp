#ifndef FDC_SOLVER_HPP
#define FDC_SOLVER_HPP

#include "fdc/evaluator.hpp"
#include "fdc/translate.hpp"

#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <sys/types.h>
#include <vector>

namespace fdc {

enum class SolverAnswer { Sat, Unsat, Unknown, Timeout, Error };

std::string to_string(SolverAnswer a);

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    std::string name;
    // Program followed by its arguments; "{file}" is replaced by the script path.
    std::vector<std::string> command;
    // Output line (trimmed) to answer. Lines before the first match are ignored.
    std::map<std::string, SolverAnswer> answers = {{"sat", SolverAnswer::Sat},
                                                   {"unsat", SolverAnswer::Unsat},
                                                   {"unknown", SolverAnswer::Unknown}};
    bool supports_quantifiers = true;

    // Absolute path of the program, or nullopt if it cannot be found.
    std::optional<std::string> resolve() const;
    bool available() const { return resolve().has_value(); }
};

struct SolverOutcome {
    SolverAnswer answer = SolverAnswer::Error;
    std::string detail;
    double wall_ms = 0;
    std::string out;
    std::string err;
    int exit_status = -1; // exit code, or -signal
    pid_t pid = -1;       // also the process group id; -1 when nothing ran
};

// Writes the script to a temporary .smt2 file, runs the solver in its own
// process group and kills the whole group once `limit` has elapsed. Never
// throws; spawn failures become Error outcomes.
SolverOutcome run_solver(const SolverConfig& cfg, const std::string& script,
                         std::chrono::milliseconds limit);

// Config file format:
//
//   # comment
//   [z3]
//   command = z3 -smt2 {file}
//   quantifiers = true
//   answer.sat = sat          # optional; maps an output line to an answer
//
// Command words are split on whitespace; single and double quotes group.
std::vector<SolverConfig> parse_solver_configs(const std::string& text);
std::vector<SolverConfig> load_solver_configs(const std::string& path);
std::vector<SolverConfig> default_solver_configs();

inline constexpr const char* kSolversEnv = "FDCHECK_SOLVERS";

// The explicit path if given, else the file named by FDCHECK_SOLVERS, else
// the defaults.
std::vector<SolverConfig> solver_configs(const std::optional<std::string>& path = {});

const SolverConfig* find_solver(const std::vector<SolverConfig>& cfgs,
                                const std::string& name);

std::vector<std::string> split_command(const std::string& s);

// Bounds the number of solver processes alive at once.
class SolverPool {
  public:
    explicit SolverPool(unsigned size);
    static SolverPool& global();

    void resize(unsigned size);
    unsigned size() const;
    void acquire();
    void release();

  private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    unsigned size_;
    unsigned used_ = 0;
};

struct Decision {
    Verdict verdict;
    SolverOutcome outcome;
    double translate_ms = 0;
};

// Translates the goal and asks the solver whether its negation is
// satisfiable: unsat is Valid, sat is Invalid, anything else undecided.
// Translation and configuration problems give Error verdicts without
// spawning a process.
Decision decide(const Model& m, const FormulaPtr& goal, const SolverConfig& cfg,
                const TranslateOptions& opts, std::chrono::milliseconds limit,
                const std::string& goal_name = "goal");

} // namespace fdc

#endif
