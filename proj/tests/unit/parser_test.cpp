#include "doctest.h"

#include "fdc/bench.hpp"
#include "fdc/parser.hpp"
#include "random_goals.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fdc;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Model parse_ok(const std::string& text) {
    auto r = parse_model({text, "t.fdl"});
    INFO(text);
    for (const auto& d : r.diagnostics)
        INFO(d.to_string());
    REQUIRE(r.ok());
    return *r.value;
}

void check_round_trip(const Model& m) {
    std::string text = pretty_print(m);
    INFO(text);
    auto r = parse_model({text, "rt.fdl"});
    REQUIRE(r.ok());
    CHECK(equal(*r.value, m));
}

} // namespace

TEST_SUITE("parser") {

TEST_CASE("minimal model") {
    ParseOptions o;
    o.params["N"] = 2;
    auto r = parse_model({"val N: nat; type D = nat[2^N-1]; theorem T <=> forall x:D. x=x;", ""}, o);
    REQUIRE(r.ok());
    Model m = *r.value;
    CHECK(m.theorems.size() == 1);
    // an unvalued parameter is only an error once a type needs it
    auto u = parse_model({"val N: nat; type D = nat[2^N-1]; theorem T <=> forall x:D. x=x;", ""});
    REQUIRE(!u.diagnostics.empty());
    CHECK(u.diagnostics[0].message.find("N") != std::string::npos);
    CHECK(parse_model({"val N: nat; theorem T <=> true;", ""}).ok());
    CHECK(m.find_type("D"));
    CHECK(m.find_param("N"));
}

TEST_CASE("dashed theorem names") {
    Model m = parse_ok("theorem cycle4-valid <=> true; theorem a-1 <=> true;");
    CHECK(m.find_theorem("cycle4-valid"));
    CHECK(m.find_theorem("a-1"));
    CHECK(!parse_model({"theorem a - b <=> true;", ""}).ok());
}

TEST_CASE("parameter values") {
    ParseOptions o;
    o.params["N"] = 3;
    auto r = parse_model({"val N: nat = 1; type D = nat[2^N-1]; theorem T <=> forall x:D. x=x;", ""}, o);
    REQUIRE(r.ok());
    CHECK(r.value->find_type("D")->type == FiniteType::nat(7));
    r = parse_model({"val N: nat = 2; type D = nat[2^N-1]; theorem T <=> true;", ""});
    REQUIRE(r.ok());
    CHECK(r.value->find_type("D")->type == FiniteType::nat(3));
}

TEST_CASE("missing dot is reported at the atom") {
    auto r = parse_model({"type D = nat[3];\ntheorem T <=> forall x:D x=x;", "t.fdl"});
    REQUIRE(!r.diagnostics.empty());
    CHECK(r.diagnostics[0].pos.line == 2);
    CHECK(r.diagnostics[0].pos.column == 26);
}

TEST_CASE("later declarations survive an error") {
    auto r = parse_model({slurp(std::filesystem::path(FDC_MODELS_DIR) / "malformed.fdl"), "m.fdl"});
    CHECK(!r.diagnostics.empty());
    REQUIRE(r.value);
    CHECK(r.value->find_theorem("U"));
}

TEST_CASE("all diagnostics carry a position inside the text") {
    const char* bad[] = {
        "theorem T <=> forall x:nat[3]. x <;",
        "theorem T <=> (true;",
        "type D = nat[;",
        "fun f(x:nat[1]): nat[1] = ;",
        "theorem T <=> forall x:nat[3]. x < true;",
        "theorem T <=> y = 1;",
        "val N: nat;\ntheorem T <=> @;",
    };
    for (const char* src : bad) {
        std::string text = src;
        auto r = parse_model({text, ""});
        auto ds = r.diagnostics;
        if (ds.empty() && r.value)
            ds = typecheck(*r.value);
        INFO(text);
        REQUIRE(!ds.empty());
        for (const auto& d : ds) {
            CHECK(d.pos.known());
            std::size_t lines = 1 + std::count(text.begin(), text.end(), '\n');
            CHECK(d.pos.line <= lines);
        }
    }
}

TEST_CASE("e3a1 formula matches the generated one") {
    Model m = bench_model({Family::Cycle4Valid, *parse_pattern("e3a1"), 2});
    auto f = parse_formula(
        "exists x1:D, x2:D, x3:D. forall x4:D. !(x1<x2 /\\ x2<x3 /\\ x3<x4 /\\ x4<x1)", {}, m);
    REQUIRE(f.ok());
    CHECK(equal(*f.value, m.theorems[0].formula));
}

TEST_CASE("cycle4-valid source file matches the generated model") {
    Model m = parse_ok(slurp(std::filesystem::path(FDC_MODELS_DIR) / "cycle4-valid.fdl"));
    Model g = bench_model({Family::Cycle4Valid, *parse_pattern("e3a1"), 1});
    CHECK(equal(m.theorems[0].formula, g.theorems[0].formula));
}

TEST_CASE("formulas and terms") {
    auto t = parse_formula("true");
    REQUIRE(t.ok());
    CHECK(equal(*t.value, build::truth(true)));

    TypeContext ctx{{"x", FiniteType::nat(3)}};
    Model m;
    m.types.push_back(TypeDef{"D", nullptr, FiniteType::nat(3), {}});
    auto c = parse_term("choose y:D with y > x", ctx, m);
    REQUIRE(c.ok());
    CHECK((*c.value)->is<term::Choose>());

    auto bad = parse_formula("x < 1", {});
    CHECK(!bad.ok());
}

TEST_CASE("precedence") {
    auto f = parse_formula("true \\/ false /\\ false => false <=> true");
    auto g = parse_formula("((true \\/ (false /\\ false)) => false) <=> true");
    REQUIRE(f.ok());
    REQUIRE(g.ok());
    CHECK(equal(*f.value, *g.value));

    f = parse_formula("false => false => false");
    g = parse_formula("false => (false => false)");
    CHECK(equal(*f.value, *g.value));

    // a quantifier body extends to the right
    f = parse_formula("forall x:nat[1]. x = 0 \\/ x = 1");
    g = parse_formula("forall x:nat[1]. (x = 0 \\/ x = 1)");
    CHECK(equal(*f.value, *g.value));
}

TEST_CASE("unicode spellings") {
    auto f = parse_formula("∀x:ℕ[1]. ¬(x < 0) ∧ x ≤ 1");
    auto g = parse_formula("forall x:nat[1]. !(x < 0) /\\ x <= 1");
    REQUIRE(f.ok());
    REQUIRE(g.ok());
    CHECK(equal(*f.value, *g.value));
}

TEST_CASE("round trip of a single atom") {
    auto f = parse_formula("1 + 2 <= 3 * 1");
    REQUIRE(f.ok());
    auto g = parse_formula(pretty_print(**f.value));
    REQUIRE(g.ok());
    CHECK(equal(*f.value, *g.value));
}

TEST_CASE("round trip of the corpus") {
    for (const auto& e : std::filesystem::directory_iterator(FDC_MODELS_DIR)) {
        if (e.path().filename() == "malformed.fdl")
            continue;
        INFO(e.path().string());
        check_round_trip(parse_ok(slurp(e.path())));
    }
}

TEST_CASE("round trip of generated bench models") {
    for (Family f : all_families())
        for (const auto& p : all_patterns())
            check_round_trip(bench_model({f, p, 1}));
}

TEST_CASE("round trip of random goals") {
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        CAPTURE(seed);
        check_round_trip(testing::random_goal(seed).model);
    }
}

}
