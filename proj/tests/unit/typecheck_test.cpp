#include "doctest.h"

#include "fdc/bench.hpp"
#include "fdc/evaluator.hpp"
#include "fdc/parser.hpp"
#include "fdc/rename.hpp"
#include "fdc/typecheck.hpp"
#include "random_goals.hpp"

#include <functional>

using namespace fdc;

namespace {

std::vector<Diagnostic> diags_of(const std::string& src) {
    auto r = parse_model({src, "t.fdl"});
    REQUIRE(r.value);
    auto d = r.diagnostics;
    if (d.empty())
        d = typecheck(*r.value);
    return d;
}

bool mentions(const std::vector<Diagnostic>& ds, const std::string& what) {
    for (const auto& d : ds)
        if (d.message.find(what) != std::string::npos)
            return true;
    return false;
}

void binder_names(const Formula& f, std::vector<std::string>& out);
void binder_names(const Term& t, std::vector<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, term::Add> || std::is_same_v<N, term::Mul>) {
                binder_names(*n.lhs, out);
                binder_names(*n.rhs, out);
            } else if constexpr (std::is_same_v<N, term::AddConst>)
                binder_names(*n.operand, out);
            else if constexpr (std::is_same_v<N, term::Ite>) {
                binder_names(*n.cond, out);
                binder_names(*n.then_term, out);
                binder_names(*n.else_term, out);
            } else if constexpr (std::is_same_v<N, term::Choose>) {
                out.push_back(n.binder.name);
                binder_names(*n.body, out);
            } else if constexpr (std::is_same_v<N, term::Apply>) {
                for (const auto& a : n.args)
                    binder_names(*a, out);
            }
        },
        t.node);
}
void binder_names(const Formula& f, std::vector<std::string>& out) {
    if (auto a = f.as<formula::Atom>()) {
        binder_names(*a->lhs, out);
        binder_names(*a->rhs, out);
    } else if (auto n = f.as<formula::Not>())
        binder_names(*n->operand, out);
    else if (auto b = f.as<formula::Binary>()) {
        binder_names(*b->lhs, out);
        binder_names(*b->rhs, out);
    } else if (auto q = f.as<formula::Quant>()) {
        out.push_back(q->binder.name);
        binder_names(*q->body, out);
    }
}

} // namespace

TEST_SUITE("logic-core") {

TEST_CASE("type mismatch is diagnosed") {
    auto d = diags_of("theorem T <=> forall x:nat[3]. x < true;");
    REQUIRE(!d.empty());
    CHECK(d[0].pos.known());
}

TEST_CASE("unbound variable is diagnosed") {
    auto d = diags_of("theorem T <=> exists y:nat[3]. z = y;");
    REQUIRE(!d.empty());
    CHECK(mentions(d, "z"));
    CHECK(d[0].pos.line == 1);
}

TEST_CASE("arity and cycles") {
    CHECK(!diags_of("fun h(x:nat[2]): nat[3] = x + 1; theorem T <=> h(1, 2) = 2;").empty());
    CHECK(!diags_of("fun a(x:nat[2]): nat[2] = b(x); fun b(x:nat[2]): nat[2] = a(x); "
                    "theorem T <=> a(0) = 0;")
               .empty());
    CHECK(!diags_of("theorem T <=> undefined(1) = 1;").empty());
}

TEST_CASE("bench models are well typed") {
    for (Family f : all_families())
        for (const auto& p : all_patterns()) {
            Model m = bench_model({f, p, 2});
            CHECK(typecheck(m).empty());
        }
}

TEST_CASE("arithmetic widens") {
    Model m;
    TypeContext ctx{{"x", FiniteType::nat(3)}, {"y", FiniteType::nat(5)}};
    auto t = parse_term("x + y", ctx, m);
    REQUIRE(t.ok());
    CHECK(type_of(m, **t.value, ctx) == FiniteType::nat(8));
    t = parse_term("x * y + 2", ctx, m);
    REQUIRE(t.ok());
    CHECK(type_of(m, **t.value, ctx) == FiniteType::nat(17));
}

TEST_CASE("rename_apart on shadowing") {
    auto f = parse_formula("forall x:nat[1]. exists x:nat[1]. x = x");
    REQUIRE(f.ok());
    auto g = rename_apart(*f.value);
    auto expect = parse_formula("forall x:nat[1]. exists x':nat[1]. x' = x'");
    REQUIRE(expect.ok());
    CHECK(equal(g, *expect.value));
}

TEST_CASE("rename_apart leaves distinct names alone") {
    auto f = parse_formula("forall x:nat[2]. exists y:nat[2]. x < y \\/ y = 0");
    REQUIRE(f.ok());
    CHECK(equal(rename_apart(*f.value), *f.value));
}

TEST_CASE("rename_apart on three nested binders keeps the meaning") {
    auto f = parse_formula("forall x:nat[2]. (exists x:nat[2]. (forall x:nat[2]. x <= 2) /\\ x = 1)"
                           " /\\ x <= 2");
    REQUIRE(f.ok());
    auto g = rename_apart(*f.value);
    std::vector<std::string> names;
    binder_names(*g, names);
    REQUIRE(names.size() == 3);
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == 3);

    // and with x left free, both versions agree on every value of x
    auto open = parse_formula("(exists x:nat[2]. (forall x:nat[2]. x <= 2) /\\ x = 1) /\\ x = 2",
                              {{"x", FiniteType::nat(2)}});
    REQUIRE(open.ok());
    auto renamed = rename_apart(*open.value);
    CHECK(!equal(renamed, *open.value));
    Model m;
    Evaluator ev(m);
    for (Value x = 0; x <= 2; ++x) {
        Env env{{"x", x}};
        CHECK(ev.eval_formula(*open.value, env).next() == ev.eval_formula(renamed, env).next());
    }
    CHECK(check_validity(m, f.value.value()).verdict.kind ==
          check_validity(m, g).verdict.kind);
}

TEST_CASE("rename_apart preserves verdicts on random goals") {
    testing::GoalOptions o;
    o.max_bound = 3;
    o.max_space = 1 << 12;
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        auto g = testing::random_goal(seed, o);
        auto a = check_validity(g.model, g.goal).verdict;
        auto b = check_validity(g.model, rename_apart(g.goal)).verdict;
        CAPTURE(seed);
        CHECK(a.kind == b.kind);
    }
}

}
