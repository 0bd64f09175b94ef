#include "fdc/oracle.hpp"

#include <limits>

namespace fdc {

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
        return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}

std::uint64_t space(const Model& m, const Term& t, int fuel);

std::uint64_t space(const Model& m, const Formula& f, int fuel) {
    if (auto a = f.as<formula::Atom>())
        return sat_mul(space(m, *a->lhs, fuel), space(m, *a->rhs, fuel));
    if (auto n = f.as<formula::Not>())
        return space(m, *n->operand, fuel);
    if (auto b = f.as<formula::Binary>())
        return sat_mul(space(m, *b->lhs, fuel), space(m, *b->rhs, fuel));
    if (auto q = f.as<formula::Quant>())
        return sat_mul(domain_size(q->binder.type.type), space(m, *q->body, fuel));
    return 1;
}

std::uint64_t space(const Model& m, const Term& t, int fuel) {
    if (fuel <= 0)
        return std::numeric_limits<std::uint64_t>::max();
    if (auto a = t.as<term::Add>())
        return sat_mul(space(m, *a->lhs, fuel), space(m, *a->rhs, fuel));
    if (auto a = t.as<term::Mul>())
        return sat_mul(space(m, *a->lhs, fuel), space(m, *a->rhs, fuel));
    if (auto a = t.as<term::AddConst>())
        return space(m, *a->operand, fuel);
    if (auto i = t.as<term::Ite>())
        return sat_mul(space(m, *i->cond, fuel),
                       sat_mul(space(m, *i->then_term, fuel),
                               space(m, *i->else_term, fuel)));
    if (auto c = t.as<term::Choose>())
        return sat_mul(domain_size(c->binder.type.type), space(m, *c->body, fuel));
    if (auto ap = t.as<term::Apply>()) {
        std::uint64_t s = 1;
        for (const auto& a : ap->args)
            s = sat_mul(s, space(m, *a, fuel));
        const FuncDecl* fn = m.find_func(ap->func);
        if (!fn)
            return s;
        if (fn->definition)
            return sat_mul(s, space(m, *fn->definition, fuel - 1));
        return sat_mul(s, sat_mul(domain_size(fn->result.type),
                                  space(m, *fn->ensures, fuel - 1)));
    }
    return 1;
}

class Oracle {
  public:
    explicit Oracle(const Model& m) : m_(m) {}

    template <typename F>
    auto with(Env& env, const std::string& name, Value v, F body) {
        auto it = env.find(name);
        bool shadowing = it != env.end();
        Value saved = shadowing ? it->second : 0;
        env[name] = v;
        auto result = body();
        if (shadowing)
            env[name] = saved;
        else
            env.erase(name);
        return result;
    }

    std::set<bool> truths(const Formula& f, Env& env) {
        if (auto c = f.as<formula::Const>())
            return {c->value};
        if (auto a = f.as<formula::Atom>()) {
            std::set<bool> out;
            auto ls = values(*a->lhs, env);
            auto rs = values(*a->rhs, env);
            for (Value l : ls)
                for (Value r : rs)
                    out.insert(a->rel == Rel::Eq   ? l == r
                               : a->rel == Rel::Lt ? l < r
                                                   : l <= r);
            return out;
        }
        if (auto n = f.as<formula::Not>()) {
            std::set<bool> out;
            for (bool b : truths(*n->operand, env))
                out.insert(!b);
            return out;
        }
        if (auto b = f.as<formula::Binary>()) {
            auto ls = truths(*b->lhs, env);
            auto rs = truths(*b->rhs, env);
            std::set<bool> out;
            for (bool l : ls) {
                switch (b->op) {
                case Connective::And:
                    if (!l)
                        out.insert(false);
                    else
                        out.insert(rs.begin(), rs.end());
                    break;
                case Connective::Or:
                    if (l)
                        out.insert(true);
                    else
                        out.insert(rs.begin(), rs.end());
                    break;
                case Connective::Implies:
                    if (!l)
                        out.insert(true);
                    else
                        out.insert(rs.begin(), rs.end());
                    break;
                case Connective::Iff:
                    for (bool r : rs)
                        out.insert(l == r);
                    break;
                }
            }
            return out;
        }
        const auto& q = *f.as<formula::Quant>();
        // Forall can be false if some instance can be false, and true if
        // every instance can be true; Exists dually.
        bool some_true = false, some_false = false;
        bool all_true = true, all_false = true;
        for (Value x = 0; x <= q.binder.type.type.bound(); ++x) {
            ++quant_bodies;
            auto s = with(env, q.binder.name, x,
                          [&] { return truths(*q.body, env); });
            some_true |= s.count(true) > 0;
            some_false |= s.count(false) > 0;
            all_true &= s.count(true) > 0;
            all_false &= s.count(false) > 0;
        }
        std::set<bool> out;
        if (q.q == Quantifier::Forall) {
            if (some_false)
                out.insert(false);
            if (all_true)
                out.insert(true);
        } else {
            if (some_true)
                out.insert(true);
            if (all_false)
                out.insert(false);
        }
        return out;
    }

    std::set<Value> values(const Term& t, Env& env) {
        if (auto v = t.as<term::Var>()) {
            auto it = env.find(v->name);
            if (it == env.end())
                throw EvalError("unbound variable '" + v->name + "'");
            return {it->second};
        }
        if (auto l = t.as<term::Lit>())
            return {l->value};
        if (auto a = t.as<term::Add>())
            return combine(*a->lhs, *a->rhs, env, [](Value x, Value y) { return x + y; });
        if (auto a = t.as<term::Mul>())
            return combine(*a->lhs, *a->rhs, env, [](Value x, Value y) { return x * y; });
        if (auto a = t.as<term::AddConst>()) {
            std::set<Value> out;
            for (Value v : values(*a->operand, env))
                out.insert(v + a->constant);
            return out;
        }
        if (auto i = t.as<term::Ite>()) {
            std::set<Value> out;
            for (bool c : truths(*i->cond, env)) {
                auto vs = values(c ? *i->then_term : *i->else_term, env);
                out.insert(vs.begin(), vs.end());
            }
            return out;
        }
        if (auto c = t.as<term::Choose>()) {
            std::set<Value> out;
            for (Value y = 0; y <= c->binder.type.type.bound(); ++y) {
                auto s = with(env, c->binder.name, y,
                              [&] { return truths(*c->body, env); });
                if (s.count(true))
                    out.insert(y);
            }
            return out;
        }
        const auto& ap = *t.as<term::Apply>();
        const FuncDecl* fn = m_.find_func(ap.func);
        if (!fn || fn->params.size() != ap.args.size())
            throw EvalError("bad application of '" + ap.func + "'");
        std::vector<std::set<Value>> arg_sets;
        for (const auto& a : ap.args)
            arg_sets.push_back(values(*a, env));
        std::set<Value> out;
        std::vector<Value> tuple(ap.args.size());
        for_each_tuple(arg_sets, 0, tuple, [&] {
            Env local;
            for (std::size_t i = 0; i < tuple.size(); ++i) {
                const auto& p = fn->params[i];
                if (tuple[i] > p.type.type.bound())
                    throw EvalError("argument out of range for '" + fn->name + "'");
                local[p.name] = tuple[i];
            }
            if (fn->definition) {
                for (Value v : values(*fn->definition, local)) {
                    if (v > fn->result.type.bound())
                        throw EvalError("result out of range for '" + fn->name + "'");
                    out.insert(v);
                }
            } else {
                for (Value y = 0; y <= fn->result.type.bound(); ++y) {
                    local[kResultVar] = y;
                    if (truths(*fn->ensures, local).count(true))
                        out.insert(y);
                }
            }
        });
        return out;
    }

    // First falsifying assignment of the outermost universal block, in
    // lexicographic order with the outermost variable most significant.
    void witness(const Formula& f, Env& env, Env& out) {
        auto q = f.as<formula::Quant>();
        if (!q || q->q != Quantifier::Forall)
            return;
        for (Value x = 0; x <= q->binder.type.type.bound(); ++x) {
            env[q->binder.name] = x;
            if (truths(*q->body, env).count(false)) {
                out.emplace(q->binder.name, x);
                witness(*q->body, env, out);
                return;
            }
        }
    }

  private:
    template <typename Op>
    std::set<Value> combine(const Term& a, const Term& b, Env& env, Op op) {
        std::set<Value> out;
        auto ls = values(a, env);
        auto rs = values(b, env);
        for (Value l : ls)
            for (Value r : rs)
                out.insert(op(l, r));
        return out;
    }

    template <typename F>
    void for_each_tuple(const std::vector<std::set<Value>>& sets, std::size_t i,
                        std::vector<Value>& tuple, F&& f) {
        if (i == sets.size()) {
            f();
            return;
        }
        for (Value v : sets[i]) {
            tuple[i] = v;
            for_each_tuple(sets, i + 1, tuple, f);
        }
    }

    const Model& m_;

  public:
    std::uint64_t quant_bodies = 0;
};

} // namespace

std::uint64_t assignment_space(const Model& m, const Formula& f) {
    return space(m, f, 16);
}

std::uint64_t oracle_body_evals(const Model& m, const FormulaPtr& theorem) {
    Oracle o(m);
    Env env;
    o.truths(*theorem, env);
    return o.quant_bodies;
}

std::set<bool> oracle_truths(const Model& m, const Formula& f, const Env& env) {
    Env e = env;
    return Oracle(m).truths(f, e);
}

std::set<Value> oracle_values(const Model& m, const Term& t, const Env& env) {
    Env e = env;
    return Oracle(m).values(t, e);
}

Verdict oracle_check(const Model& m, const FormulaPtr& theorem, std::uint64_t cap) {
    Verdict v;
    std::uint64_t s = assignment_space(m, *theorem);
    if (s > cap) {
        v.kind = VerdictKind::Error;
        v.reason = "assignment space " +
                   (s == std::numeric_limits<std::uint64_t>::max()
                        ? std::string("(overflow)")
                        : std::to_string(s)) +
                   " exceeds the oracle cap " + std::to_string(cap);
        return v;
    }
    try {
        Oracle o(m);
        Env env;
        auto truths = o.truths(*theorem, env);
        if (truths.empty()) {
            v.kind = VerdictKind::Error;
            v.reason = "no admissible choice";
        } else if (truths.count(false)) {
            v.kind = VerdictKind::Invalid;
            Env scratch;
            o.witness(*theorem, scratch, v.witness);
        } else {
            v.kind = VerdictKind::Valid;
        }
    } catch (const EvalError& e) {
        v.kind = VerdictKind::Error;
        v.reason = e.what();
    }
    return v;
}

} // namespace fdc
