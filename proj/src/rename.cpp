#include "fdc/rename.hpp"

namespace fdc {

std::string fresh_name(const std::string& base, std::set<std::string>& used) {
    std::string name = base;
    while (used.count(name))
        name += '\'';
    used.insert(name);
    return name;
}

namespace {

// One walker serves both passes. `apart` renames every binder that clashes
// with an earlier one; otherwise a binder is renamed only to avoid capturing
// a free variable of a substituted term.
class Renamer {
  public:
    Renamer(std::set<std::string> used, bool apart)
        : used_(std::move(used)), apart_(apart) {}

    TermPtr term(const TermPtr& t, const Substitution& env) {
        return std::visit([&](const auto& n) { return term_node(n, t, env); },
                          t->node);
    }

    FormulaPtr formula(const FormulaPtr& f, const Substitution& env) {
        if (f->is<formula::Const>())
            return f;
        if (auto a = f->as<formula::Atom>())
            return build::atom(a->rel, term(a->lhs, env), term(a->rhs, env),
                               f->pos);
        if (auto n = f->as<formula::Not>())
            return build::lnot(formula(n->operand, env), f->pos);
        if (auto b = f->as<formula::Binary>())
            return build::binary(b->op, formula(b->lhs, env),
                                 formula(b->rhs, env), f->pos);
        const auto& q = *f->as<formula::Quant>();
        Substitution inner = env;
        Binder binder = enter(q.binder, inner, *q.body);
        return build::quant(q.q, std::move(binder), formula(q.body, inner),
                            f->pos);
    }

    std::set<std::string> seen;

  private:
    Binder enter(const Binder& b, Substitution& env, const Formula& body) {
        env.erase(b.name);
        bool clash = false;
        if (apart_) {
            clash = !seen.insert(b.name).second;
        } else {
            // Capture happens only if a replacement that lands inside the
            // body mentions the binder name.
            for (const auto& x : free_vars(body)) {
                auto it = env.find(x);
                if (it != env.end() && free_vars(*it->second).count(b.name)) {
                    clash = true;
                    break;
                }
            }
        }
        if (!clash)
            return b;
        Binder renamed = b;
        renamed.name = fresh_name(b.name, used_);
        if (apart_)
            seen.insert(renamed.name);
        env[b.name] = build::var(renamed.name);
        return renamed;
    }

    TermPtr term_node(const term::Var& v, const TermPtr& t,
                      const Substitution& env) {
        auto it = env.find(v.name);
        return it == env.end() ? t : it->second;
    }
    TermPtr term_node(const term::Lit&, const TermPtr& t, const Substitution&) {
        return t;
    }
    TermPtr term_node(const term::Add& a, const TermPtr& t,
                      const Substitution& env) {
        return build::add(term(a.lhs, env), term(a.rhs, env), t->pos);
    }
    TermPtr term_node(const term::AddConst& a, const TermPtr& t,
                      const Substitution& env) {
        return build::add_const(term(a.operand, env), a.constant, t->pos);
    }
    TermPtr term_node(const term::Mul& a, const TermPtr& t,
                      const Substitution& env) {
        return build::mul(term(a.lhs, env), term(a.rhs, env), t->pos);
    }
    TermPtr term_node(const term::Ite& a, const TermPtr& t,
                      const Substitution& env) {
        return build::ite(formula(a.cond, env), term(a.then_term, env),
                          term(a.else_term, env), t->pos);
    }
    TermPtr term_node(const term::Choose& c, const TermPtr& t,
                      const Substitution& env) {
        Substitution inner = env;
        Binder binder = enter(c.binder, inner, *c.body);
        return build::choose(std::move(binder), formula(c.body, inner), t->pos);
    }
    TermPtr term_node(const term::Apply& a, const TermPtr& t,
                      const Substitution& env) {
        std::vector<TermPtr> args;
        for (const auto& x : a.args)
            args.push_back(term(x, env));
        return build::apply(a.func, std::move(args), t->pos);
    }

    std::set<std::string> used_;
    bool apart_;
};

std::set<std::string> names_of(const Substitution& s) {
    std::set<std::string> out;
    for (const auto& [k, v] : s) {
        out.insert(k);
        collect_names(*v, out);
    }
    return out;
}

} // namespace

FormulaPtr rename_apart(const FormulaPtr& f) {
    std::set<std::string> used;
    collect_names(*f, used);
    Renamer r(used, true);
    r.seen = free_vars(*f);
    return r.formula(f, {});
}

FormulaPtr substitute(const FormulaPtr& f, const Substitution& s) {
    std::set<std::string> used = names_of(s);
    collect_names(*f, used);
    return Renamer(used, false).formula(f, s);
}

TermPtr substitute(const TermPtr& t, const Substitution& s) {
    std::set<std::string> used = names_of(s);
    collect_names(*t, used);
    return Renamer(used, false).term(t, s);
}

} // namespace fdc
