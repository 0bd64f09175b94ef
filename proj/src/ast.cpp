#include "fdc/ast.hpp"

#include <algorithm>

namespace fdc {

std::string SourcePos::to_string() const {
    return std::to_string(line) + ":" + std::to_string(column);
}

namespace build {

TermPtr var(std::string name, SourcePos p) {
    return std::make_shared<Term>(term::Var{std::move(name)}, p);
}
TermPtr lit(Value v, SourcePos p) {
    return std::make_shared<Term>(term::Lit{v, false}, p);
}
TermPtr boolean(bool v, SourcePos p) {
    return std::make_shared<Term>(term::Lit{v ? Value{1} : Value{0}, true}, p);
}
TermPtr add(TermPtr a, TermPtr b, SourcePos p) {
    return std::make_shared<Term>(term::Add{std::move(a), std::move(b)}, p);
}
TermPtr add_const(TermPtr a, Value k, SourcePos p) {
    return std::make_shared<Term>(term::AddConst{std::move(a), k}, p);
}
TermPtr mul(TermPtr a, TermPtr b, SourcePos p) {
    return std::make_shared<Term>(term::Mul{std::move(a), std::move(b)}, p);
}
TermPtr ite(FormulaPtr c, TermPtr a, TermPtr b, SourcePos p) {
    return std::make_shared<Term>(
        term::Ite{std::move(c), std::move(a), std::move(b)}, p);
}
TermPtr choose(Binder b, FormulaPtr body, SourcePos p) {
    return std::make_shared<Term>(term::Choose{std::move(b), std::move(body)},
                                  p);
}
TermPtr apply(std::string f, std::vector<TermPtr> args, SourcePos p) {
    return std::make_shared<Term>(term::Apply{std::move(f), std::move(args)},
                                  p);
}

FormulaPtr truth(bool v, SourcePos p) {
    return std::make_shared<Formula>(formula::Const{v}, p);
}
FormulaPtr atom(Rel r, TermPtr a, TermPtr b, SourcePos p) {
    return std::make_shared<Formula>(formula::Atom{r, std::move(a), std::move(b)},
                                     p);
}
FormulaPtr eq(TermPtr a, TermPtr b) {
    return atom(Rel::Eq, std::move(a), std::move(b));
}
FormulaPtr lt(TermPtr a, TermPtr b) {
    return atom(Rel::Lt, std::move(a), std::move(b));
}
FormulaPtr le(TermPtr a, TermPtr b) {
    return atom(Rel::Le, std::move(a), std::move(b));
}
FormulaPtr lnot(FormulaPtr f, SourcePos p) {
    return std::make_shared<Formula>(formula::Not{std::move(f)}, p);
}
FormulaPtr binary(Connective c, FormulaPtr a, FormulaPtr b, SourcePos p) {
    return std::make_shared<Formula>(
        formula::Binary{c, std::move(a), std::move(b)}, p);
}
FormulaPtr land(FormulaPtr a, FormulaPtr b) {
    return binary(Connective::And, std::move(a), std::move(b));
}
FormulaPtr lor(FormulaPtr a, FormulaPtr b) {
    return binary(Connective::Or, std::move(a), std::move(b));
}
FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
    return binary(Connective::Implies, std::move(a), std::move(b));
}
FormulaPtr iff(FormulaPtr a, FormulaPtr b) {
    return binary(Connective::Iff, std::move(a), std::move(b));
}
FormulaPtr conj(const std::vector<FormulaPtr>& fs) {
    if (fs.empty())
        return truth(true);
    FormulaPtr acc = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i)
        acc = land(acc, fs[i]);
    return acc;
}
FormulaPtr quant(Quantifier q, Binder b, FormulaPtr body, SourcePos p) {
    return std::make_shared<Formula>(
        formula::Quant{q, std::move(b), std::move(body)}, p);
}
FormulaPtr forall(Binder b, FormulaPtr body) {
    return quant(Quantifier::Forall, std::move(b), std::move(body));
}
FormulaPtr exists(Binder b, FormulaPtr body) {
    return quant(Quantifier::Exists, std::move(b), std::move(body));
}
Binder binder(std::string name, FiniteType t, std::string alias) {
    return Binder{std::move(name), TypeRef{t, std::move(alias)}};
}

} // namespace build

// --- structural equality ---

namespace {

struct TermEq {
    const Term& other;
    bool operator()(const term::Var& a) const {
        auto b = other.as<term::Var>();
        return b && a.name == b->name;
    }
    bool operator()(const term::Lit& a) const {
        auto b = other.as<term::Lit>();
        return b && a.value == b->value && a.boolean == b->boolean;
    }
    bool operator()(const term::Add& a) const {
        auto b = other.as<term::Add>();
        return b && equal(a.lhs, b->lhs) && equal(a.rhs, b->rhs);
    }
    bool operator()(const term::AddConst& a) const {
        auto b = other.as<term::AddConst>();
        return b && a.constant == b->constant && equal(a.operand, b->operand);
    }
    bool operator()(const term::Mul& a) const {
        auto b = other.as<term::Mul>();
        return b && equal(a.lhs, b->lhs) && equal(a.rhs, b->rhs);
    }
    bool operator()(const term::Ite& a) const {
        auto b = other.as<term::Ite>();
        return b && equal(a.cond, b->cond) && equal(a.then_term, b->then_term) &&
               equal(a.else_term, b->else_term);
    }
    bool operator()(const term::Choose& a) const {
        auto b = other.as<term::Choose>();
        return b && a.binder == b->binder && equal(a.body, b->body);
    }
    bool operator()(const term::Apply& a) const {
        auto b = other.as<term::Apply>();
        if (!b || a.func != b->func || a.args.size() != b->args.size())
            return false;
        for (std::size_t i = 0; i < a.args.size(); ++i)
            if (!equal(a.args[i], b->args[i]))
                return false;
        return true;
    }
};

struct FormulaEq {
    const Formula& other;
    bool operator()(const formula::Const& a) const {
        auto b = other.as<formula::Const>();
        return b && a.value == b->value;
    }
    bool operator()(const formula::Atom& a) const {
        auto b = other.as<formula::Atom>();
        return b && a.rel == b->rel && equal(a.lhs, b->lhs) &&
               equal(a.rhs, b->rhs);
    }
    bool operator()(const formula::Not& a) const {
        auto b = other.as<formula::Not>();
        return b && equal(a.operand, b->operand);
    }
    bool operator()(const formula::Binary& a) const {
        auto b = other.as<formula::Binary>();
        return b && a.op == b->op && equal(a.lhs, b->lhs) &&
               equal(a.rhs, b->rhs);
    }
    bool operator()(const formula::Quant& a) const {
        auto b = other.as<formula::Quant>();
        return b && a.q == b->q && a.binder == b->binder &&
               equal(a.body, b->body);
    }
};

} // namespace

bool equal(const Term& a, const Term& b) {
    return std::visit(TermEq{b}, a.node);
}
bool equal(const Formula& a, const Formula& b) {
    return std::visit(FormulaEq{b}, a.node);
}
bool equal(const TermPtr& a, const TermPtr& b) {
    if (!a || !b)
        return a == b;
    return equal(*a, *b);
}
bool equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (!a || !b)
        return a == b;
    return equal(*a, *b);
}

// --- traversals ---

namespace {

void free_vars_into(const Term& t, std::set<std::string>& bound,
                    std::set<std::string>& out);

void free_vars_into(const Formula& f, std::set<std::string>& bound,
                    std::set<std::string>& out) {
    if (auto a = f.as<formula::Atom>()) {
        free_vars_into(*a->lhs, bound, out);
        free_vars_into(*a->rhs, bound, out);
    } else if (auto n = f.as<formula::Not>()) {
        free_vars_into(*n->operand, bound, out);
    } else if (auto b = f.as<formula::Binary>()) {
        free_vars_into(*b->lhs, bound, out);
        free_vars_into(*b->rhs, bound, out);
    } else if (auto q = f.as<formula::Quant>()) {
        bool fresh = bound.insert(q->binder.name).second;
        free_vars_into(*q->body, bound, out);
        if (fresh)
            bound.erase(q->binder.name);
    }
}

void free_vars_into(const Term& t, std::set<std::string>& bound,
                    std::set<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, term::Var>) {
                if (!bound.count(n.name))
                    out.insert(n.name);
            } else if constexpr (std::is_same_v<T, term::Add> ||
                                 std::is_same_v<T, term::Mul>) {
                free_vars_into(*n.lhs, bound, out);
                free_vars_into(*n.rhs, bound, out);
            } else if constexpr (std::is_same_v<T, term::AddConst>) {
                free_vars_into(*n.operand, bound, out);
            } else if constexpr (std::is_same_v<T, term::Ite>) {
                free_vars_into(*n.cond, bound, out);
                free_vars_into(*n.then_term, bound, out);
                free_vars_into(*n.else_term, bound, out);
            } else if constexpr (std::is_same_v<T, term::Choose>) {
                bool fresh = bound.insert(n.binder.name).second;
                free_vars_into(*n.body, bound, out);
                if (fresh)
                    bound.erase(n.binder.name);
            } else if constexpr (std::is_same_v<T, term::Apply>) {
                for (const auto& a : n.args)
                    free_vars_into(*a, bound, out);
            }
        },
        t.node);
}

// Generic "does any sub-phrase satisfy" walkers.
template <typename TermPred, typename FormulaPred>
bool any_of(const Formula& f, TermPred tp, FormulaPred fp);

template <typename TermPred, typename FormulaPred>
bool any_of(const Term& t, TermPred tp, FormulaPred fp) {
    if (tp(t))
        return true;
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, term::Add> ||
                          std::is_same_v<T, term::Mul>)
                return any_of(*n.lhs, tp, fp) || any_of(*n.rhs, tp, fp);
            else if constexpr (std::is_same_v<T, term::AddConst>)
                return any_of(*n.operand, tp, fp);
            else if constexpr (std::is_same_v<T, term::Ite>)
                return any_of(*n.cond, tp, fp) || any_of(*n.then_term, tp, fp) ||
                       any_of(*n.else_term, tp, fp);
            else if constexpr (std::is_same_v<T, term::Choose>)
                return any_of(*n.body, tp, fp);
            else if constexpr (std::is_same_v<T, term::Apply>)
                return std::any_of(n.args.begin(), n.args.end(),
                                   [&](const TermPtr& a) {
                                       return any_of(*a, tp, fp);
                                   });
            else
                return false;
        },
        t.node);
}

template <typename TermPred, typename FormulaPred>
bool any_of(const Formula& f, TermPred tp, FormulaPred fp) {
    if (fp(f))
        return true;
    if (auto a = f.as<formula::Atom>())
        return any_of(*a->lhs, tp, fp) || any_of(*a->rhs, tp, fp);
    if (auto n = f.as<formula::Not>())
        return any_of(*n->operand, tp, fp);
    if (auto b = f.as<formula::Binary>())
        return any_of(*b->lhs, tp, fp) || any_of(*b->rhs, tp, fp);
    if (auto q = f.as<formula::Quant>())
        return any_of(*q->body, tp, fp);
    return false;
}

const auto no_term = [](const Term&) { return false; };
const auto no_formula = [](const Formula&) { return false; };
const auto is_choose = [](const Term& t) { return t.is<term::Choose>(); };
const auto is_apply = [](const Term& t) { return t.is<term::Apply>(); };
const auto is_quant = [](const Formula& f) { return f.is<formula::Quant>(); };

} // namespace

std::set<std::string> free_vars(const Term& t) {
    std::set<std::string> bound, out;
    free_vars_into(t, bound, out);
    return out;
}

std::set<std::string> free_vars(const Formula& f) {
    std::set<std::string> bound, out;
    free_vars_into(f, bound, out);
    return out;
}

void collect_names(const Term& t, std::set<std::string>& out) {
    any_of(
        t,
        [&](const Term& x) {
            if (auto v = x.as<term::Var>())
                out.insert(v->name);
            else if (auto c = x.as<term::Choose>())
                out.insert(c->binder.name);
            return false;
        },
        [&](const Formula& x) {
            if (auto q = x.as<formula::Quant>())
                out.insert(q->binder.name);
            return false;
        });
}

void collect_names(const Formula& f, std::set<std::string>& out) {
    any_of(
        f,
        [&](const Term& x) {
            if (auto v = x.as<term::Var>())
                out.insert(v->name);
            else if (auto c = x.as<term::Choose>())
                out.insert(c->binder.name);
            return false;
        },
        [&](const Formula& x) {
            if (auto q = x.as<formula::Quant>())
                out.insert(q->binder.name);
            return false;
        });
}

bool contains_choose(const Formula& f) { return any_of(f, is_choose, no_formula); }
bool contains_choose(const Term& t) { return any_of(t, is_choose, no_formula); }
bool contains_quantifier(const Formula& f) { return any_of(f, no_term, is_quant); }
bool contains_quantifier(const Term& t) { return any_of(t, no_term, is_quant); }
bool contains_apply(const Term& t) { return any_of(t, is_apply, no_formula); }
bool contains_apply(const Formula& f) { return any_of(f, is_apply, no_formula); }

// --- models ---

bool equal(const BoundExprPtr& a, const BoundExprPtr& b) {
    if (!a || !b)
        return a == b;
    return a->op == b->op && a->number == b->number && a->param == b->param &&
           equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
}

namespace {
template <typename T>
const T* find_named(const std::vector<T>& xs, const std::string& name) {
    auto it = std::find_if(xs.begin(), xs.end(),
                           [&](const T& x) { return x.name == name; });
    return it == xs.end() ? nullptr : &*it;
}
} // namespace

const FuncDecl* Model::find_func(const std::string& name) const {
    return find_named(funcs, name);
}
const TypeDef* Model::find_type(const std::string& name) const {
    return find_named(types, name);
}
const Param* Model::find_param(const std::string& name) const {
    return find_named(params, name);
}
const Theorem* Model::find_theorem(const std::string& name) const {
    return find_named(theorems, name);
}

bool equal(const Model& a, const Model& b) {
    if (a.params.size() != b.params.size() || a.types.size() != b.types.size() ||
        a.funcs.size() != b.funcs.size() ||
        a.theorems.size() != b.theorems.size())
        return false;
    for (std::size_t i = 0; i < a.params.size(); ++i)
        if (a.params[i].name != b.params[i].name ||
            a.params[i].value != b.params[i].value)
            return false;
    for (std::size_t i = 0; i < a.types.size(); ++i) {
        const auto &x = a.types[i], &y = b.types[i];
        if (x.name != y.name || x.type != y.type || !equal(x.bound, y.bound))
            return false;
    }
    for (std::size_t i = 0; i < a.funcs.size(); ++i) {
        const auto &x = a.funcs[i], &y = b.funcs[i];
        if (x.name != y.name || x.params != y.params || !(x.result == y.result) ||
            !equal(x.definition, y.definition) || !equal(x.ensures, y.ensures))
            return false;
    }
    for (std::size_t i = 0; i < a.theorems.size(); ++i)
        if (a.theorems[i].name != b.theorems[i].name ||
            !equal(a.theorems[i].formula, b.theorems[i].formula))
            return false;
    return true;
}

} // namespace fdc
