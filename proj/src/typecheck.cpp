#include "fdc/typecheck.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace fdc {

std::string Diagnostic::to_string() const {
    if (!pos.known())
        return message;
    return pos.to_string() + ": " + message;
}

std::optional<FiniteType> TypeContext::lookup(const std::string& name) const {
    for (auto it = vars_.rbegin(); it != vars_.rend(); ++it)
        if (it->first == name)
            return it->second;
    return std::nullopt;
}

namespace {

std::string kind_name(const FiniteType& t) { return t.is_bool() ? "bool" : "nat"; }

class Checker {
  public:
    Checker(const Model& m, std::vector<Diagnostic>* diags)
        : model_(m), diags_(diags) {}

    std::optional<FiniteType> term(const Term& t, TypeContext& ctx) {
        return std::visit([&](const auto& n) { return term_node(n, t, ctx); },
                          t.node);
    }

    void formula(const Formula& f, TypeContext& ctx) {
        if (auto a = f.as<formula::Atom>()) {
            auto l = term(*a->lhs, ctx);
            auto r = term(*a->rhs, ctx);
            if (!l || !r)
                return;
            if (a->rel == Rel::Eq) {
                if (l->kind() != r->kind())
                    report(f.pos, "type mismatch: cannot compare " +
                                      kind_name(*l) + " with " + kind_name(*r));
            } else if (!l->is_nat() || !r->is_nat()) {
                report(f.pos, "type mismatch: ordering requires nat operands, "
                              "got " +
                                  kind_name(*l) + " and " + kind_name(*r));
            }
        } else if (auto n = f.as<formula::Not>()) {
            formula(*n->operand, ctx);
        } else if (auto b = f.as<formula::Binary>()) {
            formula(*b->lhs, ctx);
            formula(*b->rhs, ctx);
        } else if (auto q = f.as<formula::Quant>()) {
            ctx.push(q->binder.name, q->binder.type.type);
            formula(*q->body, ctx);
            ctx.pop();
        }
    }

  private:
    void report(SourcePos p, std::string msg) {
        if (diags_)
            diags_->push_back({p, std::move(msg)});
    }

    std::optional<FiniteType> nat_bound(SourcePos p, long double bound) {
        if (bound > static_cast<long double>(kMaxBound)) {
            report(p, "arithmetic result bound exceeds the supported maximum");
            return std::nullopt;
        }
        return FiniteType::nat(static_cast<Value>(bound));
    }

    std::optional<FiniteType> expect_nat(const Term& t, TypeContext& ctx) {
        auto ty = term(t, ctx);
        if (ty && !ty->is_nat()) {
            report(t.pos, "type mismatch: expected nat, got bool");
            return std::nullopt;
        }
        return ty;
    }

    std::optional<FiniteType> term_node(const term::Var& v, const Term& t,
                                        TypeContext& ctx) {
        auto ty = ctx.lookup(v.name);
        if (!ty)
            report(t.pos, "unbound variable '" + v.name + "'");
        return ty;
    }
    std::optional<FiniteType> term_node(const term::Lit& l, const Term&,
                                        TypeContext&) {
        if (l.boolean)
            return FiniteType::boolean();
        return FiniteType::nat(l.value);
    }
    std::optional<FiniteType> term_node(const term::Add& a, const Term& t,
                                        TypeContext& ctx) {
        auto l = expect_nat(*a.lhs, ctx);
        auto r = expect_nat(*a.rhs, ctx);
        if (!l || !r)
            return std::nullopt;
        return nat_bound(t.pos, static_cast<long double>(l->bound()) + r->bound());
    }
    std::optional<FiniteType> term_node(const term::AddConst& a, const Term& t,
                                        TypeContext& ctx) {
        auto l = expect_nat(*a.operand, ctx);
        if (!l)
            return std::nullopt;
        return nat_bound(t.pos, static_cast<long double>(l->bound()) + a.constant);
    }
    std::optional<FiniteType> term_node(const term::Mul& a, const Term& t,
                                        TypeContext& ctx) {
        auto l = expect_nat(*a.lhs, ctx);
        auto r = expect_nat(*a.rhs, ctx);
        if (!l || !r)
            return std::nullopt;
        return nat_bound(t.pos, static_cast<long double>(l->bound()) * r->bound());
    }
    std::optional<FiniteType> term_node(const term::Ite& a, const Term& t,
                                        TypeContext& ctx) {
        formula(*a.cond, ctx);
        auto l = term(*a.then_term, ctx);
        auto r = term(*a.else_term, ctx);
        if (!l || !r)
            return std::nullopt;
        if (l->kind() != r->kind()) {
            report(t.pos, "type mismatch: branches of if have kinds " +
                              kind_name(*l) + " and " + kind_name(*r));
            return std::nullopt;
        }
        if (l->is_bool())
            return FiniteType::boolean();
        return FiniteType::nat(std::max(l->bound(), r->bound()));
    }
    std::optional<FiniteType> term_node(const term::Choose& c, const Term&,
                                        TypeContext& ctx) {
        ctx.push(c.binder.name, c.binder.type.type);
        formula(*c.body, ctx);
        ctx.pop();
        return c.binder.type.type;
    }
    std::optional<FiniteType> term_node(const term::Apply& a, const Term& t,
                                        TypeContext& ctx) {
        const FuncDecl* fn = model_.find_func(a.func);
        std::vector<std::optional<FiniteType>> args;
        for (const auto& arg : a.args)
            args.push_back(term(*arg, ctx));
        if (!fn) {
            report(t.pos, "unknown function '" + a.func + "'");
            return std::nullopt;
        }
        if (fn->params.size() != a.args.size()) {
            report(t.pos, "function '" + a.func + "' expects " +
                              std::to_string(fn->params.size()) +
                              " arguments, got " +
                              std::to_string(a.args.size()));
            return fn->result.type;
        }
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] && args[i]->kind() != fn->params[i].type.type.kind())
                report(a.args[i]->pos,
                       "type mismatch: argument " + std::to_string(i + 1) +
                           " of '" + a.func + "' must be " +
                           kind_name(fn->params[i].type.type));
        }
        return fn->result.type;
    }

    const Model& model_;
    std::vector<Diagnostic>* diags_;
};

void collect_calls(const Term& t, std::set<std::string>& out);
void collect_calls(const Formula& f, std::set<std::string>& out) {
    if (auto a = f.as<formula::Atom>()) {
        collect_calls(*a->lhs, out);
        collect_calls(*a->rhs, out);
    } else if (auto n = f.as<formula::Not>()) {
        collect_calls(*n->operand, out);
    } else if (auto b = f.as<formula::Binary>()) {
        collect_calls(*b->lhs, out);
        collect_calls(*b->rhs, out);
    } else if (auto q = f.as<formula::Quant>()) {
        collect_calls(*q->body, out);
    }
}
void collect_calls(const Term& t, std::set<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, term::Add> ||
                          std::is_same_v<T, term::Mul>) {
                collect_calls(*n.lhs, out);
                collect_calls(*n.rhs, out);
            } else if constexpr (std::is_same_v<T, term::AddConst>) {
                collect_calls(*n.operand, out);
            } else if constexpr (std::is_same_v<T, term::Ite>) {
                collect_calls(*n.cond, out);
                collect_calls(*n.then_term, out);
                collect_calls(*n.else_term, out);
            } else if constexpr (std::is_same_v<T, term::Choose>) {
                collect_calls(*n.body, out);
            } else if constexpr (std::is_same_v<T, term::Apply>) {
                out.insert(n.func);
                for (const auto& a : n.args)
                    collect_calls(*a, out);
            }
        },
        t.node);
}

void check_cycles(const Model& m, std::vector<Diagnostic>& diags) {
    std::map<std::string, std::set<std::string>> calls;
    for (const auto& f : m.funcs) {
        auto& out = calls[f.name];
        if (f.definition)
            collect_calls(*f.definition, out);
        if (f.ensures)
            collect_calls(*f.ensures, out);
    }
    enum class Mark { None, Active, Done };
    std::map<std::string, Mark> mark;
    std::function<bool(const std::string&)> visit = [&](const std::string& n) {
        auto& mk = mark[n];
        if (mk == Mark::Active)
            return true;
        if (mk == Mark::Done)
            return false;
        mk = Mark::Active;
        for (const auto& c : calls[n])
            if (calls.count(c) && visit(c))
                return true;
        mark[n] = Mark::Done;
        return false;
    };
    for (const auto& f : m.funcs) {
        if (mark[f.name] == Mark::None && visit(f.name))
            diags.push_back(
                {f.pos, "cyclic definition involving function '" + f.name + "'"});
        // Reset active marks left behind by a detected cycle.
        for (auto& [_, mk] : mark)
            if (mk == Mark::Active)
                mk = Mark::Done;
    }
}

} // namespace

std::vector<Diagnostic> typecheck(const Model& m) {
    std::vector<Diagnostic> diags;
    Checker checker(m, &diags);

    std::set<std::string> seen;
    for (const auto& f : m.funcs) {
        if (!seen.insert(f.name).second)
            diags.push_back({f.pos, "duplicate function '" + f.name + "'"});
        TypeContext ctx;
        std::set<std::string> params;
        for (const auto& p : f.params) {
            if (!params.insert(p.name).second)
                diags.push_back({f.pos, "duplicate parameter '" + p.name +
                                            "' in function '" + f.name + "'"});
            if (p.name == kResultVar && f.is_contract())
                diags.push_back(
                    {f.pos, "parameter name 'result' is reserved in contracts"});
            ctx.push(p.name, p.type.type);
        }
        if (f.definition) {
            auto body = checker.term(*f.definition, ctx);
            if (body && body->kind() != f.result.type.kind())
                diags.push_back({f.definition->pos,
                                 "type mismatch: body of '" + f.name +
                                     "' has kind " + kind_name(*body) +
                                     ", declared " + kind_name(f.result.type)});
        } else if (f.ensures) {
            ctx.push(kResultVar, f.result.type);
            checker.formula(*f.ensures, ctx);
        } else {
            diags.push_back({f.pos, "function '" + f.name + "' has no body"});
        }
    }
    check_cycles(m, diags);

    std::set<std::string> theorems;
    for (const auto& t : m.theorems) {
        if (!theorems.insert(t.name).second)
            diags.push_back({t.pos, "duplicate theorem '" + t.name + "'"});
        TypeContext ctx;
        checker.formula(*t.formula, ctx);
    }
    std::stable_sort(diags.begin(), diags.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                         return std::pair(a.pos.line, a.pos.column) <
                                std::pair(b.pos.line, b.pos.column);
                     });
    return diags;
}

std::vector<Diagnostic> typecheck_formula(const Model& m, const Formula& f,
                                          const TypeContext& ctx) {
    std::vector<Diagnostic> diags;
    Checker checker(m, &diags);
    TypeContext scope = ctx;
    checker.formula(f, scope);
    return diags;
}

std::optional<FiniteType> type_of(const Model& m, const Term& t,
                                  const TypeContext& ctx) {
    std::vector<Diagnostic> diags;
    Checker checker(m, &diags);
    TypeContext scope = ctx;
    auto ty = checker.term(t, scope);
    if (!diags.empty())
        return std::nullopt;
    return ty;
}

} // namespace fdc
