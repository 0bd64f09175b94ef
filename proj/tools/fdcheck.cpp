// fdcheck: check, translate, bench and oracle front end.

#include "fdc/bench.hpp"
#include "fdc/evaluator.hpp"
#include "fdc/oracle.hpp"
#include "fdc/parser.hpp"
#include "fdc/solver.hpp"
#include "fdc/translate.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace fdc;

namespace {

enum Exit { kValid = 0, kInvalid = 1, kUndecided = 2, kUsage = 3 };

struct Failure {
    std::string message;
};

struct Common {
    std::string path;
    std::string goal;
    std::vector<std::string> params;
};

struct TranslateFlags {
    std::string mode = "eliminate";
    std::string heuristic = "2";
    bool eliminate_choices = false;
    bool inline_definitions = false;
    std::uint64_t budget = kDefaultExpansionBudget;

    TranslateOptions options() const {
        TranslateOptions o;
        auto m = parse_quantifier_mode(mode);
        if (!m)
            throw Failure{"unknown mode '" + mode + "' (eliminate, preserve, expand-all)"};
        o.mode = *m;
        if (heuristic == "off" || heuristic == "none")
            o.heuristic_factor.reset();
        else {
            try {
                o.heuristic_factor = std::stod(heuristic);
            } catch (...) {
                throw Failure{"bad --heuristic-factor '" + heuristic + "'"};
            }
        }
        o.eliminate_choices = eliminate_choices;
        o.inline_definitions = inline_definitions;
        o.expansion_budget = budget;
        return o;
    }
};

void add_model_args(CLI::App* cmd, Common& c) {
    cmd->add_option("model", c.path, "Model file")->required();
    cmd->add_option("-g,--goal", c.goal, "Theorem to decide (default: all)");
    cmd->add_option("-D,--param", c.params, "Override a parameter, e.g. -D N=2");
}

void add_translate_args(CLI::App* cmd, TranslateFlags& t) {
    cmd->add_option("--mode", t.mode, "eliminate | preserve | expand-all")
        ->capture_default_str();
    cmd->add_option("--heuristic-factor", t.heuristic,
                    "Expand existentials when Skolem axioms exceed factor x expansion; "
                    "'off' to always Skolemize")
        ->capture_default_str();
    cmd->add_flag("--eliminate-choices", t.eliminate_choices,
                  "Turn eligible choose terms into guarded universals");
    cmd->add_flag("--inline-definitions", t.inline_definitions,
                  "Inline every defined function");
    cmd->add_option("--expansion-budget", t.budget, "Maximum quantifier instances")
        ->capture_default_str();
}

Model load(const Common& c) {
    ParseOptions po;
    for (const auto& p : c.params) {
        auto eq = p.find('=');
        if (eq == std::string::npos)
            throw Failure{"--param expects NAME=VALUE, got '" + p + "'"};
        try {
            po.params[p.substr(0, eq)] = std::stoull(p.substr(eq + 1));
        } catch (...) {
            throw Failure{"bad parameter value in '" + p + "'"};
        }
    }
    std::ifstream in(c.path);
    if (!in)
        throw Failure{"cannot read '" + c.path + "'"};
    std::stringstream ss;
    ss << in.rdbuf();
    auto r = parse_model(SourceModel{ss.str(), c.path}, po);
    if (!r.ok()) {
        std::ostringstream msg;
        for (std::size_t i = 0; i < r.diagnostics.size(); ++i)
            msg << (i ? "\n" : "") << c.path << ":" << r.diagnostics[i].to_string();
        throw Failure{msg.str()};
    }
    return std::move(*r.value);
}

std::vector<const Theorem*> goals(const Model& m, const std::string& name) {
    std::vector<const Theorem*> out;
    if (!name.empty()) {
        const Theorem* t = m.find_theorem(name);
        if (!t)
            throw Failure{"no theorem named '" + name + "'"};
        out.push_back(t);
    } else {
        for (const auto& t : m.theorems)
            out.push_back(&t);
    }
    if (out.empty())
        throw Failure{"the model declares no theorems"};
    return out;
}

std::string witness_text(const Env& w) {
    std::string s;
    for (const auto& [k, v] : w)
        s += (s.empty() ? "" : ", ") + k + "=" + std::to_string(v);
    return s;
}

int report(const std::string& name, const Verdict& v) {
    std::cout << name << ": " << to_string(v.kind);
    if (v.kind == VerdictKind::Invalid && !v.witness.empty())
        std::cout << " (counterexample " << witness_text(v.witness) << ")";
    if (!v.reason.empty() && v.kind != VerdictKind::Valid && v.kind != VerdictKind::Invalid)
        std::cout << ": " << v.reason;
    std::cout << "\n";
    switch (v.kind) {
    case VerdictKind::Valid:
        return kValid;
    case VerdictKind::Invalid:
        return kInvalid;
    default:
        return kUndecided;
    }
}

int combine(int acc, int code) {
    if (acc == kUndecided || code == kUndecided)
        return kUndecided;
    return std::max(acc, code);
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& it : items) {
        std::stringstream ss(it);
        std::string part;
        while (std::getline(ss, part, ','))
            if (!part.empty())
                out.push_back(part);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-domain first-order checker: semantic evaluation and SMT translation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "fdcheck 0.1.0");

    Common common;
    TranslateFlags tflags;
    std::string mechanism = "RISCAL";
    long timeout_ms = 60000;
    std::optional<std::string> solvers_config;
    bool stats = false;
    bool deterministic = false;

    auto* check = app.add_subcommand("check", "Decide theorems with the evaluator or a solver");
    add_model_args(check, common);
    add_translate_args(check, tflags);
    check->add_option("-m,--mechanism", mechanism,
                      "RISCAL (the evaluator), or <solver>[-S|-Q|-E]")
        ->capture_default_str();
    check->add_option("--timeout-ms", timeout_ms, "Wall-clock limit per goal")
        ->capture_default_str();
    check->add_option("--solvers-config", solvers_config, "Solver config file");
    check->add_flag("--stats", stats, "Print evaluator counters");
    check->add_flag("--deterministic", deterministic,
                    "Choose terms yield only their first value");

    std::string out_path;
    auto* translate_cmd = app.add_subcommand("translate", "Print the SMT-LIB script of a goal");
    add_model_args(translate_cmd, common);
    add_translate_args(translate_cmd, tflags);
    translate_cmd->add_option("-o,--out", out_path, "Write to a file instead of stdout");

    std::uint64_t cap = kDefaultOracleCap;
    auto* oracle = app.add_subcommand("oracle", "Decide theorems by naive exhaustive evaluation");
    add_model_args(oracle, common);
    oracle->add_option("--cap", cap, "Largest admissible assignment space")
        ->capture_default_str();

    std::vector<std::string> families, patterns, mechanisms;
    std::optional<unsigned> bench_n;
    unsigned repeats = 1, jobs = 1;
    std::string outdir = "bench-out";
    std::optional<std::uint64_t> seed;
    auto* bench = app.add_subcommand("bench", "Run the artificial benchmark grid");
    bench->add_option("--families", families, "Comma-separated families (default: all)");
    bench->add_option("--patterns", patterns, "Comma-separated patterns (default: all)");
    bench->add_option("-N", bench_n, "Domain exponent (default: 6, contracts 5)");
    bench->add_option("--mechanism,--mechanisms", mechanisms,
                      "Comma-separated mechanisms (default: RISCAL)");
    bench->add_option("--timeout-ms", timeout_ms, "Wall-clock limit per cell")
        ->capture_default_str();
    bench->add_option("--repeats", repeats, "Runs per cell")->capture_default_str();
    bench->add_option("-j,--jobs", jobs, "Cells run in parallel")->capture_default_str();
    bench->add_option("--out", outdir, "Output directory")->capture_default_str();
    bench->add_option("--solvers-config", solvers_config, "Solver config file");
    bench->add_option("--seed", seed, "Shuffle cell execution order with this seed");
    bench->add_option("--heuristic-factor", tflags.heuristic,
                      "Heuristic for -S cells; 'off' to always Skolemize")
        ->capture_default_str();
    bench->add_flag("--eliminate-choices", tflags.eliminate_choices,
                    "Eliminate choose terms in solver cells");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        if (*translate_cmd) {
            Model m = load(common);
            TranslateOptions opts = tflags.options();
            std::string text;
            for (const Theorem* t : goals(m, common.goal)) {
                try {
                    text += emit_smtlib(translate(m, t->formula, opts, t->name));
                } catch (const TranslationError& e) {
                    throw Failure{t->name + ": translation error: " + e.what()};
                }
            }
            if (out_path.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(out_path);
                out << text;
                if (!out)
                    throw Failure{"cannot write '" + out_path + "'"};
            }
            return 0;
        }

        if (*oracle) {
            Model m = load(common);
            int code = kValid;
            for (const Theorem* t : goals(m, common.goal))
                code = combine(code, report(t->name, oracle_check(m, t->formula, cap)));
            return code;
        }

        if (*check) {
            Model m = load(common);
            auto mech = parse_mechanism(mechanism);
            if (!mech) {
                // A bare solver name takes its mode from --mode.
                mech = Mechanism{Mechanism::Kind::Solver, mechanism, tflags.options().mode};
            }
            auto limit = std::chrono::milliseconds(timeout_ms);
            int code = kValid;
            if (mech->kind == Mechanism::Kind::Evaluator) {
                for (const Theorem* t : goals(m, common.goal)) {
                    EvalOptions eo;
                    eo.mode = deterministic ? EvalMode::Deterministic : EvalMode::Nondeterministic;
                    eo.deadline = std::chrono::steady_clock::now() + limit;
                    auto t0 = std::chrono::steady_clock::now();
                    CheckResult r = check_validity(m, t->formula, eo);
                    double ms = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
                    code = combine(code, report(t->name, r.verdict));
                    if (stats) {
                        std::cout << "  time_ms " << ms << "\n  body_evals "
                                  << r.stats.body_evals << "\n  body_evals_by_depth";
                        for (auto n : r.stats.body_evals_by_depth)
                            std::cout << " " << n;
                        std::cout << "\n  choose_yields " << r.stats.choose_yields
                                  << "\n  decided_early "
                                  << (r.stats.decided_early ? "yes" : "no") << "\n";
                    }
                }
                return code;
            }
            auto cfgs = solver_configs(solvers_config);
            const SolverConfig* cfg = find_solver(cfgs, mech->solver);
            if (!cfg) {
                std::cout << "backend unavailable: no solver named '" << mech->solver << "'\n";
                return kUndecided;
            }
            TranslateOptions opts = tflags.options();
            opts.mode = mech->mode;
            for (const Theorem* t : goals(m, common.goal)) {
                Decision d = decide(m, t->formula, *cfg, opts, limit, t->name);
                code = combine(code, report(t->name, d.verdict));
                if (stats)
                    std::cout << "  solver " << cfg->name << "\n  answer "
                              << to_string(d.outcome.answer) << "\n  solve_ms "
                              << d.outcome.wall_ms << "\n  translate_ms " << d.translate_ms
                              << "\n";
            }
            return code;
        }

        if (*bench) {
            std::vector<Family> fams;
            for (const auto& f : split_list(families)) {
                auto fam = parse_family(f);
                if (!fam)
                    throw Failure{"unknown family '" + f + "'"};
                fams.push_back(*fam);
            }
            if (fams.empty())
                fams = all_families();
            std::vector<QuantPattern> pats;
            for (const auto& p : split_list(patterns)) {
                auto pat = parse_pattern(p);
                if (!pat)
                    throw Failure{"unknown pattern '" + p + "'"};
                pats.push_back(*pat);
            }
            if (pats.empty())
                pats = all_patterns();
            std::vector<Mechanism> mechs;
            for (const auto& l : split_list(mechanisms)) {
                auto mm = parse_mechanism(l);
                if (!mm)
                    throw Failure{"unknown mechanism '" + l + "'"};
                mechs.push_back(*mm);
            }
            if (mechs.empty())
                mechs.push_back(Mechanism{});

            std::vector<BenchCase> cases;
            for (Family f : fams)
                for (const auto& p : pats)
                    cases.push_back({f, p, bench_n ? *bench_n : default_n(f)});

            SuiteOptions so;
            so.limit = std::chrono::milliseconds(timeout_ms);
            so.repeats = repeats;
            so.jobs = jobs;
            so.solvers = solver_configs(solvers_config);
            so.translate = tflags.options();
            so.shuffle_seed = seed;
            so.progress = [](const BenchRecord& r) {
                std::cerr << to_string(r.bcase.family) << " " << r.bcase.pattern.label()
                          << " N=" << r.bcase.n << " " << r.mechanism << " #" << r.repeat
                          << ": " << r.outcome;
                if (r.outcome == "decided")
                    std::cerr << " " << to_string(r.verdict) << " " << r.wall_ms << " ms";
                else if (!r.detail.empty())
                    std::cerr << " (" << r.detail << ")";
                std::cerr << "\n";
            };
            auto records = run_suite(cases, mechs, so);
            Report rep = emit_report(records, static_cast<double>(timeout_ms));
            fs::create_directories(outdir);
            std::ofstream(fs::path(outdir) / "results.csv") << rep.csv;
            for (const auto& [name, svg] : rep.charts)
                std::ofstream(fs::path(outdir) / name) << svg;
            std::cout << records.size() << " records written to "
                      << (fs::path(outdir) / "results.csv").string() << "\n";
            return 0;
        }
    } catch (const Failure& f) {
        std::cerr << "fdcheck: " << f.message << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "fdcheck: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "fdcheck: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
