#include "doctest.h"

#include "fdc/bench.hpp"
#include "fdc/evaluator.hpp"
#include "fdc/oracle.hpp"
#include "fdc/parser.hpp"
#include "fdc/translate.hpp"
#include "random_goals.hpp"

#include <regex>
#include <set>

using namespace fdc;

namespace {

FormulaPtr parse_f(const std::string& text, const Model& m = {}) {
    auto r = parse_formula(text, {}, m);
    INFO(text);
    REQUIRE(r.ok());
    return *r.value;
}

Model model(const std::string& text) {
    auto r = parse_model({text, ""});
    INFO(text);
    REQUIRE(r.ok());
    return *r.value;
}

bool negation_atomic(const Formula& f) {
    if (auto n = f.as<formula::Not>())
        return n->operand->is<formula::Atom>();
    if (auto b = f.as<formula::Binary>())
        return (b->op == Connective::And || b->op == Connective::Or) && negation_atomic(*b->lhs) &&
               negation_atomic(*b->rhs);
    if (auto q = f.as<formula::Quant>())
        return negation_atomic(*q->body);
    return true;
}

std::size_t count_quantifiers(const Formula& f) {
    if (auto n = f.as<formula::Not>())
        return count_quantifiers(*n->operand);
    if (auto b = f.as<formula::Binary>())
        return count_quantifiers(*b->lhs) + count_quantifiers(*b->rhs);
    if (auto q = f.as<formula::Quant>())
        return 1 + count_quantifiers(*q->body);
    return 0;
}

TranslateOptions opts(QuantifierMode mode, std::optional<double> factor = 2.0) {
    TranslateOptions o;
    o.mode = mode;
    o.heuristic_factor = factor;
    return o;
}

std::size_t count_lines(const std::string& text, const std::string& prefix) {
    std::size_t n = 0, pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos)
            end = text.size();
        if (text.compare(pos, prefix.size(), prefix) == 0)
            ++n;
        pos = end + 1;
    }
    return n;
}

// Symbols applied in assertions must be declared before use.
void check_declared(const std::string& text) {
    std::set<std::string> declared;
    std::istringstream in(text);
    std::string line;
    static const std::regex decl(R"(^\((?:declare-fun|define-fun) (\S+))");
    static const std::regex sym(R"(_(?:sk|ch)\d+)");
    while (std::getline(in, line)) {
        std::smatch m;
        if (std::regex_search(line, m, decl)) {
            declared.insert(m[1]);
            continue;
        }
        if (line.rfind("(assert", 0) != 0)
            continue;
        for (auto it = std::sregex_iterator(line.begin(), line.end(), sym); it != std::sregex_iterator(); ++it)
            CHECK_MESSAGE(declared.count(it->str()), it->str() << " used before declaration");
    }
}

} // namespace

TEST_SUITE("smt-translate") {

TEST_CASE("nnf") {
    auto f = to_nnf(parse_f("!(true /\\ 1 < 2)"));
    CHECK(equal(f, parse_f("false \\/ !(1 < 2)")));
    f = to_nnf(parse_f("!(forall x:nat[1]. !(x = 0 => x < 1))"));
    CHECK(equal(f, parse_f("exists x:nat[1]. !(x = 0) \\/ x < 1")));
}

TEST_CASE("nnf of negated e3a1 agrees on every assignment") {
    Model m = bench_model({Family::Cycle4Valid, *parse_pattern("e3a1"), 1});
    const auto& q1 = *m.theorems[0].formula->as<formula::Quant>();
    const auto& q2 = *q1.body->as<formula::Quant>();
    const auto& q3 = *q2.body->as<formula::Quant>();
    const auto& q4 = *q3.body->as<formula::Quant>();
    auto body = build::lnot(q4.body);
    auto nnf = to_nnf(body);
    CHECK(negation_atomic(*nnf));
    Evaluator ev(m);
    for (Value a = 0; a < 16; ++a) {
        Env env{{"x1", a & 1}, {"x2", (a >> 1) & 1}, {"x3", (a >> 2) & 1}, {"x4", (a >> 3) & 1}};
        CHECK(ev.eval_formula(body, env).next() == ev.eval_formula(nnf, env).next());
    }
    CHECK(check_validity(m, to_nnf(build::lnot(m.theorems[0].formula))).verdict.kind ==
          VerdictKind::Invalid);
}

TEST_CASE("nnf is negation-atomic and keeps verdicts") {
    testing::GoalOptions o;
    o.choose_rate = 0; // duplicating a choice in an equivalence would change its meaning
    o.max_contracts = 0;
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        auto g = testing::random_goal(seed, o);
        auto nnf = to_nnf(g.goal);
        CAPTURE(seed);
        CHECK(negation_atomic(*nnf));
        CHECK(oracle_check(g.model, nnf).kind == oracle_check(g.model, g.goal).kind);
    }
}

TEST_CASE("negate_goal") {
    CHECK(equal(negate_goal(build::truth(true)), build::truth(false)));
    CHECK(equal(negate_goal(parse_f("exists x:nat[3]. x < 2")), parse_f("forall x:nat[3]. !(x < 2)")));
    CHECK(equal(negate_goal(parse_f("forall x:nat[3]. x < 2")), parse_f("exists x:nat[3]. !(x < 2)")));
}

TEST_CASE("encode_value") {
    CHECK(encode_value(5, FiniteType::nat(63)) == "#b000101");
    CHECK(encode_value(1, FiniteType::boolean()) == "#b1");
    CHECK(encode_value(0, FiniteType::nat(0)).empty());
    CHECK_THROWS_AS(encode_value(64, FiniteType::nat(63)), TranslationError);
}

TEST_CASE("type predicates") {
    CHECK(type_predicate(FiniteType::nat(63)).trivial());
    CHECK(type_predicate(FiniteType::boolean()).trivial());
    auto p = type_predicate(FiniteType::nat(4));
    CHECK(!p.trivial());
    auto f = p.apply(build::var("b"));
    CHECK(equal(f, build::le(build::var("b"), build::lit(4))));
    CHECK(equal(type_predicate(FiniteType::nat(3)).apply(build::var("b")), build::truth(true)));
}

TEST_CASE("cost estimates") {
    Model a = bench_model({Family::Cycle4Valid, *parse_pattern("a4e0"), 1});
    auto c = estimate_costs(*negate_goal(a.theorems[0].formula));
    CHECK(c.skolem_axiom_conjuncts == 4);
    CHECK(c.expansion_conjuncts == 0);

    Model e = bench_model({Family::Cycle4Valid, *parse_pattern("e2a2"), 6});
    c = estimate_costs(*negate_goal(e.theorems[0].formula));
    CHECK(c.expansion_conjuncts == 4096);
    CHECK(c.skolem_axiom_conjuncts == 2 * 4096);

    CHECK(estimate_costs(*negate_goal(parse_f("1 < 2"))) == CostEstimate{});
}

TEST_CASE("expanding a universal on the sat side") {
    Elimination el;
    auto cs = eliminate_quantifiers(negate_goal(parse_f("exists x:nat[1]. x = 0")),
                                    opts(QuantifierMode::Eliminate), el);
    REQUIRE(cs.size() == 2);
    CHECK(el.skolems.empty());
    CHECK(equal(cs[0], parse_f("!(0 = 0)")));
    CHECK(equal(cs[1], parse_f("!(1 = 0)")));
}

TEST_CASE("skolem constant with its range axiom") {
    Elimination el;
    auto cs = eliminate_quantifiers(negate_goal(parse_f("forall x:nat[4]. x < 5")),
                                    opts(QuantifierMode::Eliminate), el);
    REQUIRE(el.skolems.size() == 1);
    CHECK(el.skolems[0].params.empty());
    CHECK(el.skolems[0].range_conjuncts == 1);
    CHECK(el.range_axioms.size() == 1);
    REQUIRE(cs.size() == 1);
    CHECK(equal(cs[0], build::lnot(build::lt(build::apply(el.skolems[0].name, {}), build::lit(5)))));
}

TEST_CASE("m-ary skolem function") {
    Elimination el;
    auto nnf = to_nnf(parse_f("forall x1:nat[2], x2:nat[1]. exists y:nat[4]. !(x1 + x2 = y)"));
    auto cs = eliminate_quantifiers(nnf, opts(QuantifierMode::Eliminate, std::nullopt), el);
    REQUIRE(el.skolems.size() == 1);
    CHECK(el.skolems[0].params.size() == 2);
    CHECK(el.skolems[0].range_conjuncts == 6);
    CHECK(cs.size() == 6);
    CHECK(el.range_axioms.size() == 6);
}

TEST_CASE("expansion budget") {
    auto o = opts(QuantifierMode::Eliminate);
    o.expansion_budget = 100;
    Elimination el;
    try {
        eliminate_quantifiers(negate_goal(parse_f("exists big:nat[1000]. big = 0")), o, el);
        FAIL("no error");
    } catch (const TranslationError& e) {
        CHECK(std::string(e.what()).find("big") != std::string::npos);
    }
}

TEST_CASE("clause count law") {
    for (unsigned n : {1u, 2u})
        for (const auto& p : all_patterns()) {
            if (!p.exists_first)
                continue;
            Model m = bench_model({Family::Cycle4Valid, p, n});
            for (auto factor : {std::optional<double>(2.0), std::optional<double>()}) {
                auto s = translate(m, m.theorems[0].formula, opts(QuantifierMode::Eliminate, factor));
                std::size_t expect = std::size_t{1} << (p.leading * n);
                CAPTURE(p.label());
                CAPTURE(n);
                CHECK(s.count(Provenance::NegatedGoal) == expect);
                CHECK(count_lines(emit_smtlib(s), "(assert") == s.assertions.size());
            }
        }
}

TEST_CASE("skolem shape law") {
    const unsigned n = 1;
    for (const auto& p : all_patterns()) {
        Model m = bench_model({Family::Cycle4Valid, p, n});
        auto s = translate(m, m.theorems[0].formula, opts(QuantifierMode::Eliminate, std::nullopt));
        CAPTURE(p.label());
        unsigned i = p.exists_first ? p.leading : 4 - p.leading;
        unsigned j = 4 - i;
        CHECK(s.skolem_count() == j);
        for (const auto& d : s.declarations) {
            if (!d.skolem)
                continue;
            if (p.exists_first) {
                CHECK(d.params.size() == i);
                CHECK(d.range_conjuncts == std::uint64_t{1} << (n * i));
            } else {
                CHECK(d.params.empty());
            }
        }
    }
}

TEST_CASE("heuristic chooses expansion when the axioms are too large") {
    // sat side: forall x exists y1 y2 y3 -> axioms 3*4 > 2*4
    auto wide = parse_f("exists x:nat[3]. forall y1:nat[3], y2:nat[3], y3:nat[3]. x + y1 + y2 + y3 < 12");
    auto c = estimate_costs(*negate_goal(wide));
    CHECK(c.skolem_axiom_conjuncts > 2 * c.expansion_conjuncts);
    Model m;
    auto s = translate(m, wide, opts(QuantifierMode::Eliminate));
    CHECK(s.skolem_count() == 0);
    CHECK(emit_smtlib(s).find("_sk") == std::string::npos);

    // sat side: forall x exists y -> axioms 4 <= 2*4
    auto narrow = parse_f("exists x:nat[3]. forall y:nat[3]. x + y < 7");
    c = estimate_costs(*negate_goal(narrow));
    CHECK(c.skolem_axiom_conjuncts <= 2 * c.expansion_conjuncts);
    s = translate(m, narrow, opts(QuantifierMode::Eliminate));
    CHECK(s.skolem_count() == 1);
    CHECK(emit_smtlib(s).find("(declare-fun _sk0 ((_ BitVec 2)) (_ BitVec 2))") != std::string::npos);

    // switched off, the wide goal is Skolemized too
    s = translate(m, wide, opts(QuantifierMode::Eliminate, std::nullopt));
    CHECK(s.skolem_count() == 3);
}

TEST_CASE("expand-all leaves no skolem symbols") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto g = testing::random_goal(seed);
        auto s = translate(g.model, g.goal, opts(QuantifierMode::ExpandAll));
        CAPTURE(seed);
        CHECK(s.skolem_count() == 0);
        CHECK(emit_smtlib(s).find("_sk") == std::string::npos);
    }
}

TEST_CASE("quantifier-free scripts have no binders") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto g = testing::random_goal(seed);
        for (auto mode : {QuantifierMode::Eliminate, QuantifierMode::ExpandAll}) {
            std::string text = emit_smtlib(translate(g.model, g.goal, opts(mode)));
            CAPTURE(seed);
            CHECK(text.rfind("(set-logic QF_UFBV)", 0) == 0);
            CHECK(text.find("(forall") == std::string::npos);
            CHECK(text.find("(exists") == std::string::npos);
            CHECK(count_lines(text, "(check-sat)") == 1);
            check_declared(text);
        }
    }
}

TEST_CASE("preserve mode keeps guarded binders") {
    Model m = bench_model({Family::Cycle4Valid, *parse_pattern("e2a2"), 2});
    std::string text = emit_smtlib(translate(m, m.theorems[0].formula, opts(QuantifierMode::Preserve)));
    CHECK(text.rfind("(set-logic UFBV)", 0) == 0);
    CHECK(text.find("(forall ((|x1| (_ BitVec 2)))") != std::string::npos);
    CHECK(text.find("_sk") == std::string::npos);

    auto f = parse_f("exists x:nat[4]. x = 4");
    text = emit_smtlib(translate(Model{}, f, opts(QuantifierMode::Preserve)));
    CHECK(text.find("(forall ((|x| (_ BitVec 3))) (=> (bvule |x| #b100)") != std::string::npos);
    f = parse_f("forall x:nat[4]. x < 4");
    text = emit_smtlib(translate(Model{}, f, opts(QuantifierMode::Preserve)));
    CHECK(text.find("(exists ((|x| (_ BitVec 3))) (and (bvule |x| #b100)") != std::string::npos);
}

TEST_CASE("true goal asserts false") {
    auto s = translate(Model{}, build::truth(true));
    REQUIRE(s.assertions.size() == 1);
    CHECK(s.assertions[0].text == "false");
}

TEST_CASE("singleton domains fold away") {
    auto s = translate(Model{}, parse_f("forall x:nat[0]. exists y:nat[0]. x = y"));
    std::string text = emit_smtlib(s);
    CHECK(text.find("(_ BitVec 0)") == std::string::npos);
}

TEST_CASE("translation is deterministic") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto g = testing::random_goal(seed);
        for (auto mode : {QuantifierMode::Eliminate, QuantifierMode::Preserve, QuantifierMode::ExpandAll}) {
            auto a = emit_smtlib(translate(g.model, g.goal, opts(mode)));
            auto b = emit_smtlib(translate(g.model, g.goal, opts(mode)));
            CHECK(a == b);
        }
    }
}

TEST_CASE("header comments") {
    Model m = bench_model({Family::Cycle4Valid, *parse_pattern("e1a3"), 1});
    auto o = opts(QuantifierMode::Eliminate);
    o.eliminate_choices = true;
    std::string text = emit_smtlib(translate(m, m.theorems[0].formula, o, "cycle4"));
    CHECK(text.find("; goal: cycle4\n") != std::string::npos);
    CHECK(text.find("; options: mode=eliminate heuristic-factor=2 eliminate-choices=on "
                    "inline-definitions=off\n") != std::string::npos);
    CHECK(text.find("; negated-goal\n") != std::string::npos);
}

TEST_CASE("eliminate_choices on a universal contract goal") {
    Model m = model("type D = nat[3]; fun f(a:D): D ensures a < result \\/ result = 3;"
                    "theorem T <=> forall a:D. a <= f(a);");
    auto g = eliminate_choices(m, m.theorems[0].formula);
    CHECK(!contains_apply(*g));
    CHECK(!contains_choose(*g));
    CHECK(count_quantifiers(*g) == 2);
    const auto* q1 = g->as<formula::Quant>();
    REQUIRE(q1);
    const auto* q2 = q1->body->as<formula::Quant>();
    REQUIRE(q2);
    CHECK(q2->q == Quantifier::Forall);
    const auto* imp = q2->body->as<formula::Binary>();
    REQUIRE(imp);
    CHECK(imp->op == Connective::Implies);
    CHECK(oracle_check(m, g).kind == oracle_check(m, m.theorems[0].formula).kind);
}

TEST_CASE("eliminate_choices leaves existential contexts alone") {
    Model m = model("type D = nat[3]; fun f(a:D): D ensures a < result \\/ result = 3;"
                    "theorem T <=> exists a:D. f(a) = 3;");
    auto g = eliminate_choices(m, m.theorems[0].formula);
    CHECK((contains_apply(*g) || contains_choose(*g)));
    CHECK(count_quantifiers(*g) == 1);
}

TEST_CASE("contract goals under a4e0 lose every choice function") {
    for (Family f : all_families()) {
        if (!is_contract_family(f))
            continue;
        Model m = bench_model({f, *parse_pattern("a4e0"), 1});
        auto o = opts(QuantifierMode::Eliminate);
        o.eliminate_choices = true;
        auto s = translate(m, m.theorems[0].formula, o);
        CHECK(s.count(Provenance::ChooseAxiom) == 0);
        for (const auto& d : s.declarations)
            CHECK(d.params.empty());
        CHECK(emit_smtlib(s).find("_ch") == std::string::npos);
    }
}

TEST_CASE("axiomatize_choose") {
    Model m;
    auto f = parse_f("forall x:nat[2]. (choose y:nat[3] with y > x) > x");
    auto ax = axiomatize_choose(m, f);
    REQUIRE(ax.functions.size() == 1);
    CHECK(ax.functions[0].name == "_ch0");
    CHECK(ax.functions[0].params.size() == 1);
    REQUIRE(ax.axioms.size() == 1);
    const auto* q = ax.axioms[0]->as<formula::Quant>();
    REQUIRE(q);
    CHECK(q->q == Quantifier::Forall);
    auto expect = build::lt(build::var(q->binder.name), build::apply("_ch0", {build::var(q->binder.name)}));
    CHECK(equal(q->body, expect));
    CHECK(ax.constraints.empty()); // nat[3] fills two bits

    ax = axiomatize_choose(m, parse_f("(choose y:nat[4] with y = 2) = 2"));
    REQUIRE(ax.functions.size() == 1);
    CHECK(ax.functions[0].params.empty());
    CHECK(ax.axioms.size() == 1);
    CHECK(ax.constraints.size() == 1);
    CHECK(!contains_choose(*ax.formula));
}

TEST_CASE("contract g under e4a0 gives a 4-ary choice function") {
    Model m = bench_model({Family::ContractGEq1, *parse_pattern("e4a0"), 1});
    auto s = translate(m, m.theorems[0].formula, opts(QuantifierMode::Eliminate));
    std::size_t fns = 0;
    for (const auto& d : s.declarations)
        if (!d.skolem) {
            ++fns;
            CHECK(d.params.size() == 4);
        }
    CHECK(fns == 1);
    CHECK(s.count(Provenance::ChooseAxiom) == 16);
}

TEST_CASE("inline_definitions") {
    Model m = model("fun h(x:nat[3]): nat[4] = x + 1; fun k(x:nat[3]): nat[5] = h(x) + 1;"
                    "theorem T <=> h(2) = 3; theorem U <=> k(1) = 3;");
    CHECK(equal(inline_definitions(m, m.theorems[0].formula), parse_f("2 + 1 = 3")));
    CHECK(equal(inline_definitions(m, m.theorems[1].formula), parse_f("1 + 1 + 1 = 3")));
    Model flat = inline_definitions(m);
    for (const auto& t : flat.theorems)
        CHECK(!contains_apply(*t.formula));
}

TEST_CASE("inlining keeps bench verdicts") {
    for (Family f : all_families())
        for (const auto& p : all_patterns()) {
            Model m = bench_model({f, p, 1});
            Model flat = inline_definitions(m);
            CHECK(check_validity(m, m.theorems[0].formula).verdict.kind ==
                  check_validity(flat, flat.theorems[0].formula).verdict.kind);
        }
}

TEST_CASE("inline option removes define-funs") {
    Model m = model("fun h(x:nat[3]): nat[4] = x + 1; theorem T <=> forall x:nat[3]. h(x) > x;");
    auto o = opts(QuantifierMode::Eliminate);
    std::string text = emit_smtlib(translate(m, m.theorems[0].formula, o));
    CHECK(text.find("(define-fun |h|") != std::string::npos);
    o.inline_definitions = true;
    text = emit_smtlib(translate(m, m.theorems[0].formula, o));
    CHECK(text.find("define-fun") == std::string::npos);
}

TEST_CASE("a choice passed to a contract is made once") {
    // both occurrences of p must see the same chosen value
    Model m = model("type D = nat[3]; fun c(p:D): D ensures result = p /\\ p = p;"
                    "theorem T <=> c(choose y:D with y <= 1) = c(choose y:D with y <= 1) \\/ true;");
    auto o = opts(QuantifierMode::Eliminate);
    auto s = translate(m, m.theorems[0].formula, o);
    std::size_t choices = 0;
    for (const auto& d : s.declarations)
        choices += !d.skolem;
    CHECK(choices == 4); // two argument choices, two results
}

}
