#include "doctest.h"

#include "fdc/bench.hpp"
#include "fdc/evaluator.hpp"
#include "fdc/solver.hpp"
#include "random_goals.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

using namespace fdc;
using namespace std::chrono_literals;

namespace {

SolverConfig stub(const std::string& script) {
    SolverConfig c;
    c.name = script;
    c.command = {std::string(FDC_STUBS_DIR) + "/" + script, "{file}"};
    return c;
}

std::vector<SolverConfig> installed() {
    std::vector<SolverConfig> out;
    for (const auto& c : default_solver_configs())
        if (c.available())
            out.push_back(c);
    return out;
}

std::vector<QuantifierMode> modes_for(const SolverConfig& c) {
    std::vector<QuantifierMode> ms = {QuantifierMode::Eliminate, QuantifierMode::ExpandAll};
    if (c.supports_quantifiers)
        ms.push_back(QuantifierMode::Preserve);
    return ms;
}

// A zombie still answers kill(pid, 0); look at its state instead.
bool alive(pid_t pid) {
    std::ifstream stat("/proc/" + std::to_string(pid) + "/stat");
    if (!stat)
        return false;
    std::string pid_s, comm, state;
    stat >> pid_s >> comm >> state;
    return state != "Z" && state != "X";
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("fdc-test-" + std::to_string(::getpid()) + "-" + name)).string();
}

} // namespace

TEST_SUITE("solver-bridge") {

TEST_CASE("command splitting") {
    CHECK(split_command("z3 -smt2 {file}") == std::vector<std::string>{"z3", "-smt2", "{file}"});
    CHECK(split_command("  a 'b c'  \"d e\"f ") == std::vector<std::string>{"a", "b c", "d ef"});
    CHECK_THROWS_AS(split_command("a 'b"), ConfigError);
}

TEST_CASE("config files") {
    auto cfgs = parse_solver_configs(R"(
# local solvers
[z3]
command = /opt/z3/bin/z3 -smt2 {file}   # trailing comment
quantifiers = true

[mini]
command = mini --in '{file}'
quantifiers = false
answer.sat = SAT
answer.unsat = UNSAT
)");
    REQUIRE(cfgs.size() == 2);
    CHECK(cfgs[0].name == "z3");
    CHECK(cfgs[0].command == std::vector<std::string>{"/opt/z3/bin/z3", "-smt2", "{file}"});
    CHECK(cfgs[0].supports_quantifiers);
    CHECK(!cfgs[1].supports_quantifiers);
    CHECK(cfgs[1].answers.at("SAT") == SolverAnswer::Sat);
    CHECK(cfgs[1].answers.at("UNSAT") == SolverAnswer::Unsat);
    CHECK(find_solver(cfgs, "MINI") == &cfgs[1]);
    CHECK(find_solver(cfgs, "cvc4") == nullptr);

    CHECK_THROWS_AS(parse_solver_configs("command = z3\n"), ConfigError);
    CHECK_THROWS_AS(parse_solver_configs("[x]\nquantifiers = maybe\ncommand = x\n"), ConfigError);
    CHECK_THROWS_AS(parse_solver_configs("[x]\nquantifiers = true\n"), ConfigError);
    CHECK_THROWS_AS(load_solver_configs("/nonexistent/solvers.ini"), ConfigError);
}

TEST_CASE("defaults cover the usual solvers") {
    auto cfgs = default_solver_configs();
    for (const char* n : {"z3", "yices", "cvc4", "cvc5", "boolector"})
        CHECK(find_solver(cfgs, n));
    CHECK(!find_solver(cfgs, "boolector")->supports_quantifiers);
}

TEST_CASE("config path from the environment") {
    std::string path = temp_path("solvers.ini");
    {
        std::ofstream f(path);
        f << "[only]\ncommand = /bin/true\n";
    }
    ::setenv(kSolversEnv, path.c_str(), 1);
    auto cfgs = solver_configs();
    ::unsetenv(kSolversEnv);
    std::filesystem::remove(path);
    REQUIRE(cfgs.size() == 1);
    CHECK(cfgs[0].name == "only");
    CHECK(cfgs[0].available());
    CHECK(solver_configs().size() == default_solver_configs().size());
}

TEST_CASE("banner lines before the answer are ignored") {
    auto o = run_solver(stub("banner-then-sat.sh"), "(check-sat)\n", 5000ms);
    CHECK(o.answer == SolverAnswer::Sat);
    CHECK(o.exit_status == 0);
}

TEST_CASE("error output is an error outcome") {
    auto o = run_solver(stub("garbage.sh"), "(check-sat)\n", 5000ms);
    CHECK(o.answer == SolverAnswer::Error);
    CHECK(o.detail.find("out of memory") != std::string::npos);
}

TEST_CASE("missing programs do not throw") {
    SolverConfig c;
    c.name = "ghost";
    c.command = {"/nonexistent/ghost-solver", "{file}"};
    SolverOutcome o;
    CHECK_NOTHROW(o = run_solver(c, "(check-sat)", 1000ms));
    CHECK(o.answer == SolverAnswer::Error);
    CHECK(o.detail.find("unavailable") != std::string::npos);
    CHECK(o.pid == -1);
}

TEST_CASE("sleeping solver is killed with its process group") {
    std::string pidfile = temp_path("stub.pid");
    ::setenv("FDC_STUB_PIDFILE", pidfile.c_str(), 1);
    auto o = run_solver(stub("sleep-forever.sh"), "(check-sat)\n", 100ms);
    ::unsetenv("FDC_STUB_PIDFILE");
    CHECK(o.answer == SolverAnswer::Timeout);
    CHECK(o.wall_ms >= 100);
    CHECK(o.wall_ms < 600);
    CHECK(o.out.find("stub solver starting") != std::string::npos);
    REQUIRE(o.pid > 0);
    CHECK(!alive(o.pid));
    std::ifstream in(pidfile);
    pid_t child = 0;
    in >> child;
    std::filesystem::remove(pidfile);
    REQUIRE(child > 0);
    for (int i = 0; i < 50 && alive(child); ++i)
        std::this_thread::sleep_for(10ms);
    CHECK(!alive(child));
}

TEST_CASE("temporary scripts are removed") {
    auto scripts = [] {
        std::size_t n = 0;
        for (const auto& e : std::filesystem::directory_iterator(std::filesystem::temp_directory_path()))
            n += e.path().filename().string().rfind("fdcheck-", 0) == 0;
        return n;
    };
    auto before = scripts();
    for (int i = 0; i < 5; ++i)
        run_solver(stub("banner-then-sat.sh"), "(check-sat)\n", 5000ms);
    CHECK(scripts() <= before);
}

TEST_CASE("pool bounds concurrency") {
    SolverPool pool(2);
    std::atomic<int> live{0}, peak{0};
    std::vector<std::thread> ts;
    for (int i = 0; i < 8; ++i)
        ts.emplace_back([&] {
            pool.acquire();
            int now = ++live;
            int p = peak.load();
            while (now > p && !peak.compare_exchange_weak(p, now)) {
            }
            std::this_thread::sleep_for(5ms);
            --live;
            pool.release();
        });
    for (auto& t : ts)
        t.join();
    CHECK(peak.load() <= 2);
    CHECK(peak.load() >= 1);
}

TEST_CASE("preserve mode on a quantifier-free backend is refused before spawning") {
    SolverConfig c = stub("banner-then-sat.sh");
    c.supports_quantifiers = false;
    Model m = bench_model({Family::Cycle4Valid, *parse_pattern("a4e0"), 1});
    TranslateOptions o;
    o.mode = QuantifierMode::Preserve;
    auto d = decide(m, m.theorems[0].formula, c, o, 1000ms);
    CHECK(d.verdict.kind == VerdictKind::Error);
    CHECK(d.verdict.reason.find("configuration error") != std::string::npos);
    CHECK(d.outcome.pid == -1);
}

TEST_CASE("translation errors become error verdicts") {
    Model m = bench_model({Family::Cycle4Valid, *parse_pattern("e4a0"), 6});
    TranslateOptions o;
    o.expansion_budget = 10;
    auto d = decide(m, m.theorems[0].formula, stub("banner-then-sat.sh"), o, 1000ms);
    CHECK(d.verdict.kind == VerdictKind::Error);
    CHECK(d.outcome.pid == -1);
}

TEST_CASE("real solvers: trivial scripts") {
    auto cfgs = installed();
    if (cfgs.empty())
        MESSAGE("no SMT solver installed");
    for (const auto& c : cfgs) {
        CAPTURE(c.name);
        CHECK(run_solver(c, "(set-logic QF_BV)\n(assert false)\n(check-sat)\n", 10000ms).answer ==
              SolverAnswer::Unsat);
        CHECK(run_solver(c, "(set-logic QF_BV)\n(declare-fun b () (_ BitVec 4))\n(assert (= b b))\n(check-sat)\n",
                         10000ms)
                  .answer == SolverAnswer::Sat);
        auto s = emit_smtlib(translate(Model{}, build::truth(true)));
        CHECK(run_solver(c, s, 10000ms).answer == SolverAnswer::Unsat);
    }
}

TEST_CASE("real solvers: cycle4 at N=2") {
    for (const auto& c : installed())
        for (auto mode : modes_for(c)) {
            TranslateOptions o;
            o.mode = mode;
            CAPTURE(c.name);
            CAPTURE(to_string(mode));
            Model a = bench_model({Family::Cycle4Valid, *parse_pattern("a4e0"), 2});
            CHECK(decide(a, a.theorems[0].formula, c, o, 20000ms).verdict.kind == VerdictKind::Valid);
            Model e = bench_model({Family::Cycle4Unsat, *parse_pattern("e4a0"), 2});
            CHECK(decide(e, e.theorems[0].formula, c, o, 20000ms).verdict.kind == VerdictKind::Invalid);
        }
}

TEST_CASE("real solvers agree with the evaluator on random goals") {
    testing::GoalOptions g;
    g.max_space = 1 << 12;
    for (const auto& c : installed())
        for (std::uint64_t seed = 1; seed <= 60; ++seed) {
            auto goal = testing::random_goal(seed, g);
            auto ev = check_validity(goal.model, goal.goal).verdict.kind;
            if (ev == VerdictKind::Error)
                continue;
            for (auto mode : modes_for(c)) {
                TranslateOptions o;
                o.mode = mode;
                o.eliminate_choices = seed % 2;
                o.inline_definitions = seed % 3 == 0;
                CAPTURE(seed);
                CAPTURE(c.name);
                CAPTURE(to_string(mode));
                CHECK(decide(goal.model, goal.goal, c, o, 20000ms).verdict.kind == ev);
            }
        }
}

}
