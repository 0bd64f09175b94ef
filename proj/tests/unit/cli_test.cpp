#include "doctest.h"

#include "fdc/bench.hpp"
#include "fdc/parser.hpp"
#include "fdc/translate.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace fdc;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run fdcheck(const std::string& args, bool with_stderr = false) {
    std::string cmd = std::string(FDCHECK_EXE) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0)
        r.out.append(buf.data(), n);
    int st = ::pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string model(const std::string& name) { return std::string(FDC_MODELS_DIR) + "/" + name; }

fs::path scratch_dir(const std::string& tag) {
    auto d = fs::temp_directory_path() / ("fdc-cli-" + std::to_string(::getpid()) + "-" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p.string();
}

std::size_t count(const std::string& s, const std::string& what) {
    std::size_t n = 0;
    for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1))
        ++n;
    return n;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("check exit codes") {
    CHECK(fdcheck("check " + model("cycle4-valid.fdl")).status == 0);
    auto r = fdcheck("check " + model("contracts.fdl") + " -g geq1");
    CHECK(r.status == 1);
    CHECK(r.out.find("x1=0, x2=0, x3=0, x4=0") != std::string::npos);
    // mixed results: the worst one wins
    CHECK(fdcheck("check " + model("misc.fdl")).status == 1);
    CHECK(fdcheck("check " + model("misc.fdl") + " -g nosuchgoal").status == 3);
}

TEST_CASE("malformed input") {
    auto r = fdcheck("check " + model("malformed.fdl"), true);
    CHECK(r.status == 3);
    CHECK(r.out.find("malformed.fdl:2:26:") != std::string::npos);
    CHECK(fdcheck("check /nonexistent/x.fdl").status == 3);
    CHECK(fdcheck("check " + model("misc.fdl") + " --no-such-flag").status == 3);
    CHECK(fdcheck("").status == 3);
    CHECK(fdcheck("check " + model("misc.fdl") + " --mode sideways -m z3-S").status == 3);
}

TEST_CASE("unavailable backend") {
    auto dir = scratch_dir("cfg");
    auto cfg = write_file(dir / "s.ini", "[absent]\ncommand = /nonexistent/absent-solver {file}\n");
    auto r = fdcheck("check " + model("cycle4-valid.fdl") + " -m absent-S --solvers-config " + cfg, true);
    CHECK(r.status == 2);
    CHECK(r.out.find("backend unavailable") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("stats and parameters") {
    auto r = fdcheck("check " + model("cycle4-valid.fdl") + " -D N=2 --stats");
    CHECK(r.status == 0);
    CHECK(r.out.find("body_evals") != std::string::npos);
    CHECK(r.out.find("choose_yields") != std::string::npos);
}

TEST_CASE("oracle subcommand") {
    CHECK(fdcheck("oracle " + model("cycle4-sat1.fdl") + " -g sat1").status == 0);
    auto r = fdcheck("oracle " + model("cycle4-valid.fdl") + " -D N=6");
    CHECK(r.status == 2);
    CHECK(r.out.find("cap") != std::string::npos);
    auto dir = scratch_dir("oracle");
    auto f = write_file(dir / "t.fdl", "theorem T <=> forall x:nat[0]. x = x;");
    CHECK(fdcheck("oracle " + f).status == 0);
    fs::remove_all(dir);
}

TEST_CASE("check and oracle agree on the corpus") {
    for (const char* m : {"cycle4-valid.fdl", "cycle4-sat1.fdl", "contracts.fdl", "misc.fdl"}) {
        auto a = fdcheck(std::string("check ") + model(m));
        auto b = fdcheck(std::string("oracle ") + model(m));
        CAPTURE(m);
        CHECK(a.status == b.status);
    }
}

TEST_CASE("translate prints the emitted script") {
    auto dir = scratch_dir("tr");
    auto f = write_file(dir / "t.fdl", "theorem T <=> true;");
    auto r = fdcheck("translate " + f);
    CHECK(r.status == 0);
    CHECK(r.out.find("(assert false)") != std::string::npos);

    Model m = bench_model({Family::Cycle4Valid, *parse_pattern("e2a2"), 1});
    auto src = write_file(dir / "e2a2.fdl", pretty_print(m));
    r = fdcheck("translate " + src);
    REQUIRE(r.status == 0);
    CHECK(r.out == emit_smtlib(translate(m, m.theorems[0].formula, {}, m.theorems[0].name)));
    auto cost = estimate_costs(*negate_goal(m.theorems[0].formula));
    CHECK(count(r.out, "; negated-goal\n") == cost.expansion_conjuncts);

    r = fdcheck("translate " + src + " --mode preserve");
    CHECK(r.out.find("(forall ((") != std::string::npos);
    CHECK(r.out.rfind("(set-logic UFBV)", 0) == 0);

    r = fdcheck("translate " + src + " --mode expand-all -o " + (dir / "o.smt2").string());
    CHECK(r.status == 0);
    CHECK(fs::file_size(dir / "o.smt2") > 0);

    r = fdcheck("translate " + src + " --expansion-budget 2");
    CHECK(r.status == 3);
    fs::remove_all(dir);
}

TEST_CASE("bench writes csv and charts") {
    auto dir = scratch_dir("bench");
    auto r = fdcheck("bench -N 1 --mechanisms RISCAL --out " + dir.string());
    CHECK(r.status == 0);
    std::ifstream in(dir / "results.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == kCsvHeader);
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == 64);
    int svgs = 0;
    for (const auto& e : fs::directory_iterator(dir))
        svgs += e.path().extension() == ".svg";
    CHECK(svgs == 8);
    fs::remove_all(dir);
}

TEST_CASE("bench without solvers marks cells skipped") {
    auto dir = scratch_dir("skip");
    auto cfg = write_file(dir / "none.ini", "# nothing configured\n");
    auto r = fdcheck("bench -N 1 --families cycle4-valid --patterns e4a0,a4e0 --mechanisms Z3-S,RISCAL "
                     "--solvers-config " + cfg + " --out " + (dir / "out").string());
    CHECK(r.status == 0);
    std::ifstream in(dir / "out" / "results.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(count(ss.str(), ",skipped,") == 2);
    CHECK(count(ss.str(), ",decided,") == 2);
    fs::remove_all(dir);
}

TEST_CASE("bench limit override") {
    auto dir = scratch_dir("limit");
    auto cfg = write_file(dir / "s.ini", std::string("[sleeper]\ncommand = ") + FDC_STUBS_DIR +
                                             "/sleep-forever.sh {file}\n");
    auto r = fdcheck("bench -N 1 --families cycle4-valid --patterns e2a2 --mechanisms sleeper-S "
                     "--timeout-ms 200 --solvers-config " + cfg + " --out " + (dir / "out").string());
    CHECK(r.status == 0);
    std::ifstream svg(dir / "out" / "cycle4-valid.svg");
    std::stringstream ss;
    ss << svg.rdbuf();
    CHECK(ss.str().find("class=\"timeout\"") != std::string::npos);
    CHECK(ss.str().find(">200</text>") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("output is deterministic") {
    auto a = fdcheck("translate " + model("contracts.fdl") + " -g gsome --eliminate-choices");
    auto b = fdcheck("translate " + model("contracts.fdl") + " -g gsome --eliminate-choices");
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    auto c = fdcheck("check " + model("misc.fdl") + " --deterministic");
    auto d = fdcheck("check " + model("misc.fdl") + " --deterministic");
    CHECK(c.out == d.out);
}

}
