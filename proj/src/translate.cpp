#include "fdc/translate.hpp"

#include "fdc/rename.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace fdc {

std::string to_string(QuantifierMode m) {
    switch (m) {
    case QuantifierMode::Eliminate:
        return "eliminate";
    case QuantifierMode::Preserve:
        return "preserve";
    case QuantifierMode::ExpandAll:
        return "expand-all";
    }
    return "?";
}

std::optional<QuantifierMode> parse_quantifier_mode(const std::string& s) {
    if (s == "eliminate" || s == "S")
        return QuantifierMode::Eliminate;
    if (s == "preserve" || s == "Q")
        return QuantifierMode::Preserve;
    if (s == "expand-all" || s == "expandAll" || s == "E")
        return QuantifierMode::ExpandAll;
    return std::nullopt;
}

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::NegatedGoal:
        return "negated-goal";
    case Provenance::SkolemRangeAxiom:
        return "skolem-range-axiom";
    case Provenance::ChooseAxiom:
        return "choose-axiom";
    case Provenance::TypeConstraint:
        return "type-constraint";
    }
    return "?";
}

std::vector<unsigned> SmtDecl::arg_widths() const {
    std::vector<unsigned> out;
    for (const auto& p : params)
        if (unsigned w = bit_width(p))
            out.push_back(w);
    return out;
}

unsigned SmtDecl::result_width() const { return bit_width(result); }

std::size_t SmtScript::count(Provenance p) const {
    return static_cast<std::size_t>(
        std::count_if(assertions.begin(), assertions.end(),
                      [&](const SmtAssertion& a) { return a.provenance == p; }));
}

std::size_t SmtScript::skolem_count() const {
    return static_cast<std::size_t>(std::count_if(
        declarations.begin(), declarations.end(),
        [](const SmtDecl& d) { return d.skolem; }));
}

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > kSaturated / a)
        return kSaturated;
    return a * b;
}
std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    return a > kSaturated - b ? kSaturated : a + b;
}

std::string bits(Value v, unsigned width) {
    std::string s = "#b";
    for (unsigned i = width; i-- > 0;)
        s += ((v >> i) & 1) ? '1' : '0';
    return s;
}

std::string quote(const std::string& name) { return "|" + name + "|"; }

std::string describe(const Binder& b, SourcePos pos) {
    std::string s = "quantifier over '" + b.name + "'";
    if (pos.known())
        s += " at " + pos.to_string();
    return s;
}

FormulaPtr disj(const std::vector<FormulaPtr>& fs) {
    FormulaPtr acc = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i)
        acc = build::lor(acc, fs[i]);
    return acc;
}

// Bottom-up rewriting of every term in a phrase; `tf` sees each node after
// its children have been rewritten.
template <typename TF> TermPtr map_term(const TermPtr& t, TF& tf);

template <typename TF> FormulaPtr map_terms(const FormulaPtr& f, TF& tf) {
    if (f->is<formula::Const>())
        return f;
    if (auto a = f->as<formula::Atom>())
        return build::atom(a->rel, map_term(a->lhs, tf), map_term(a->rhs, tf), f->pos);
    if (auto n = f->as<formula::Not>())
        return build::lnot(map_terms(n->operand, tf), f->pos);
    if (auto b = f->as<formula::Binary>())
        return build::binary(b->op, map_terms(b->lhs, tf), map_terms(b->rhs, tf),
                             f->pos);
    const auto& q = *f->as<formula::Quant>();
    return build::quant(q.q, q.binder, map_terms(q.body, tf), f->pos);
}

template <typename TF> TermPtr map_term(const TermPtr& t, TF& tf) {
    TermPtr rebuilt = std::visit(
        [&](const auto& n) -> TermPtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, term::Add>)
                return build::add(map_term(n.lhs, tf), map_term(n.rhs, tf), t->pos);
            else if constexpr (std::is_same_v<N, term::Mul>)
                return build::mul(map_term(n.lhs, tf), map_term(n.rhs, tf), t->pos);
            else if constexpr (std::is_same_v<N, term::AddConst>)
                return build::add_const(map_term(n.operand, tf), n.constant, t->pos);
            else if constexpr (std::is_same_v<N, term::Ite>)
                return build::ite(map_terms(n.cond, tf), map_term(n.then_term, tf),
                                  map_term(n.else_term, tf), t->pos);
            else if constexpr (std::is_same_v<N, term::Choose>)
                return build::choose(n.binder, map_terms(n.body, tf), t->pos);
            else if constexpr (std::is_same_v<N, term::Apply>) {
                std::vector<TermPtr> args;
                for (const auto& a : n.args)
                    args.push_back(map_term(a, tf));
                return build::apply(n.func, std::move(args), t->pos);
            } else
                return t;
        },
        t->node);
    return tf(rebuilt);
}

FormulaPtr nnf(const FormulaPtr& f, bool neg) {
    if (auto c = f->as<formula::Const>())
        return build::truth(c->value != neg, f->pos);
    if (f->is<formula::Atom>())
        return neg ? build::lnot(f, f->pos) : f;
    if (auto n = f->as<formula::Not>())
        return nnf(n->operand, !neg);
    if (auto b = f->as<formula::Binary>()) {
        const auto& A = b->lhs;
        const auto& B = b->rhs;
        switch (b->op) {
        case Connective::And:
            return neg ? build::lor(nnf(A, true), nnf(B, true))
                       : build::land(nnf(A, false), nnf(B, false));
        case Connective::Or:
            return neg ? build::land(nnf(A, true), nnf(B, true))
                       : build::lor(nnf(A, false), nnf(B, false));
        case Connective::Implies:
            return neg ? build::land(nnf(A, false), nnf(B, true))
                       : build::lor(nnf(A, true), nnf(B, false));
        case Connective::Iff:
            // Each side appears twice; nnf builds separate copies, so every
            // quantifier occurrence stays a distinct node.
            return neg ? build::lor(build::land(nnf(A, false), nnf(B, true)),
                                    build::land(nnf(A, true), nnf(B, false)))
                       : build::lor(build::land(nnf(A, false), nnf(B, false)),
                                    build::land(nnf(A, true), nnf(B, true)));
        }
    }
    const auto& q = *f->as<formula::Quant>();
    Quantifier qq = q.q;
    if (neg)
        qq = qq == Quantifier::Forall ? Quantifier::Exists : Quantifier::Forall;
    return build::quant(qq, q.binder, nnf(q.body, neg), f->pos);
}

std::uint64_t universal_instances(const Formula& f) {
    if (auto b = f.as<formula::Binary>())
        return sat_add(universal_instances(*b->lhs), universal_instances(*b->rhs));
    if (auto q = f.as<formula::Quant>()) {
        std::uint64_t inner = universal_instances(*q->body);
        if (q->q == Quantifier::Exists)
            return inner;
        return sat_mul(domain_size(q->binder.type.type), std::max<std::uint64_t>(1, inner));
    }
    return 0;
}

std::uint64_t skolem_conjuncts(const Formula& f, std::uint64_t enclosing) {
    if (auto b = f.as<formula::Binary>())
        return sat_add(skolem_conjuncts(*b->lhs, enclosing),
                       skolem_conjuncts(*b->rhs, enclosing));
    if (auto q = f.as<formula::Quant>()) {
        if (q->q == Quantifier::Forall)
            return skolem_conjuncts(
                *q->body, sat_mul(enclosing, domain_size(q->binder.type.type)));
        return sat_add(enclosing, skolem_conjuncts(*q->body, enclosing));
    }
    return 0;
}

// Number of instances full expansion would create; throws on the first
// quantifier that exceeds the budget.
class Projection {
  public:
    Projection(std::uint64_t budget, bool expand_ex) : budget_(budget), expand_ex_(expand_ex) {}

    std::uint64_t formula(const Formula& f, bool equiv) {
        if (auto a = f.as<formula::Atom>())
            return sat_add(term(*a->lhs), term(*a->rhs));
        if (auto n = f.as<formula::Not>())
            return formula(*n->operand, true);
        if (auto b = f.as<formula::Binary>()) {
            bool mixed = equiv || b->op == Connective::Implies || b->op == Connective::Iff;
            return sat_add(formula(*b->lhs, mixed), formula(*b->rhs, mixed));
        }
        if (auto q = f.as<formula::Quant>()) {
            std::uint64_t inner = formula(*q->body, equiv);
            bool expanded = equiv || q->q == Quantifier::Forall || expand_ex_;
            if (!expanded)
                return inner;
            std::uint64_t n =
                sat_mul(domain_size(q->binder.type.type), std::max<std::uint64_t>(1, inner));
            if (n > budget_)
                throw TranslationError(
                    "expanding the " + describe(q->binder, f.pos) + " would produce " +
                    (n == kSaturated ? std::string("too many") : std::to_string(n)) +
                    " instances, exceeding the budget of " + std::to_string(budget_));
            return n;
        }
        return 0;
    }

    std::uint64_t term(const Term& t) {
        return std::visit(
            [&](const auto& n) -> std::uint64_t {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, term::Add> || std::is_same_v<N, term::Mul>)
                    return sat_add(term(*n.lhs), term(*n.rhs));
                else if constexpr (std::is_same_v<N, term::AddConst>)
                    return term(*n.operand);
                else if constexpr (std::is_same_v<N, term::Ite>)
                    return sat_add(formula(*n.cond, true),
                                   sat_add(term(*n.then_term), term(*n.else_term)));
                else if constexpr (std::is_same_v<N, term::Apply>) {
                    std::uint64_t s = 0;
                    for (const auto& a : n.args)
                        s = sat_add(s, term(*a));
                    return s;
                } else
                    return 0;
            },
            t.node);
    }

  private:
    std::uint64_t budget_;
    bool expand_ex_;
};

class Eliminator {
  public:
    Eliminator(bool expand_ex, Elimination& out, unsigned& counter)
        : expand_ex_(expand_ex), out_(out), counter_(counter) {}

    void top(const FormulaPtr& f, const std::function<void(const FormulaPtr&)>& sink) {
        auto q = f->as<formula::Quant>();
        if (!q || q->q != Quantifier::Forall) {
            sink(run(f, false));
            return;
        }
        for (Value d : enumerate_domain(q->binder.type.type)) {
            Scoped s(*this, q->binder, lit(d), true);
            top(q->body, sink);
        }
    }

  private:
    // Binds a variable for the lifetime of the object.
    struct Scoped {
        Eliminator& e;
        std::string name;
        std::optional<TermPtr> saved;
        bool universal;
        Scoped(Eliminator& el, const Binder& b, TermPtr value, bool univ)
            : e(el), name(b.name), universal(univ) {
            auto it = e.sigma_.find(name);
            if (it != e.sigma_.end())
                saved = it->second;
            e.sigma_[name] = value;
            if (universal)
                e.path_.push_back({b.type.type, value});
        }
        ~Scoped() {
            if (saved)
                e.sigma_[name] = *saved;
            else
                e.sigma_.erase(name);
            if (universal)
                e.path_.pop_back();
        }
    };

    TermPtr lit(Value v) {
        auto& slot = lits_[v];
        if (!slot)
            slot = build::lit(v);
        return slot;
    }

    FormulaPtr expand(const formula::Quant& q, bool equiv, bool universal) {
        std::vector<FormulaPtr> parts;
        for (Value d : enumerate_domain(q.binder.type.type)) {
            Scoped s(*this, q.binder, lit(d), universal);
            parts.push_back(run(q.body, equiv));
        }
        return q.q == Quantifier::Forall ? build::conj(parts) : disj(parts);
    }

    FormulaPtr run(const FormulaPtr& f, bool equiv) {
        if (f->is<formula::Const>())
            return f;
        if (auto a = f->as<formula::Atom>())
            return build::atom(a->rel, term(a->lhs), term(a->rhs), f->pos);
        if (auto n = f->as<formula::Not>())
            return build::lnot(run(n->operand, true), f->pos);
        if (auto b = f->as<formula::Binary>()) {
            bool mixed = equiv || b->op == Connective::Implies || b->op == Connective::Iff;
            return build::binary(b->op, run(b->lhs, mixed), run(b->rhs, mixed), f->pos);
        }
        const auto& q = *f->as<formula::Quant>();
        if (equiv)
            return expand(q, true, false);
        if (q.q == Quantifier::Forall)
            return expand(q, false, true);
        if (expand_ex_)
            return expand(q, false, false);
        return skolemize(*f, q);
    }

    FormulaPtr skolemize(const Formula& node, const formula::Quant& q) {
        const FiniteType& type = q.binder.type.type;
        if (bit_width(type) == 0) {
            Scoped s(*this, q.binder, lit(0), false);
            return run(q.body, false);
        }
        auto it = index_.find(&node);
        if (it == index_.end()) {
            SmtDecl d;
            d.name = "_sk" + std::to_string(counter_++);
            for (const auto& p : path_)
                d.params.push_back(p.type);
            d.result = type;
            d.origin = q.binder.name;
            d.skolem = true;
            it = index_.emplace(&node, out_.skolems.size()).first;
            out_.skolems.push_back(std::move(d));
        }
        SmtDecl& d = out_.skolems[it->second];
        ++d.range_conjuncts;
        std::vector<TermPtr> args;
        for (const auto& p : path_)
            args.push_back(p.value);
        TermPtr app = build::apply(d.name, std::move(args));
        auto pred = type_predicate(type);
        if (!pred.trivial())
            out_.range_axioms.push_back(pred.apply(app));
        Scoped s(*this, q.binder, app, false);
        return run(q.body, false);
    }

    TermPtr term(const TermPtr& t) {
        return std::visit(
            [&](const auto& n) -> TermPtr {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, term::Var>) {
                    auto it = sigma_.find(n.name);
                    return it == sigma_.end() ? t : it->second;
                } else if constexpr (std::is_same_v<N, term::Lit>)
                    return t;
                else if constexpr (std::is_same_v<N, term::Add>)
                    return build::add(term(n.lhs), term(n.rhs), t->pos);
                else if constexpr (std::is_same_v<N, term::Mul>)
                    return build::mul(term(n.lhs), term(n.rhs), t->pos);
                else if constexpr (std::is_same_v<N, term::AddConst>)
                    return build::add_const(term(n.operand), n.constant, t->pos);
                else if constexpr (std::is_same_v<N, term::Ite>)
                    return build::ite(run(n.cond, true), term(n.then_term),
                                      term(n.else_term), t->pos);
                else if constexpr (std::is_same_v<N, term::Choose>)
                    throw TranslationError(
                        "choose terms must be axiomatized before quantifier elimination");
                else {
                    std::vector<TermPtr> args;
                    for (const auto& a : n.args)
                        args.push_back(term(a));
                    return build::apply(n.func, std::move(args), t->pos);
                }
            },
            t->node);
    }

    struct PathVar {
        FiniteType type;
        TermPtr value;
    };

    bool expand_ex_;
    Elimination& out_;
    unsigned& counter_;
    Substitution sigma_;
    std::vector<PathVar> path_;
    std::map<Value, TermPtr> lits_;
    std::map<const Formula*, std::size_t> index_;
};

// --------------------------------------------------------- SMT-LIB text

struct BV {
    std::string text; // empty for width 0 (the constant 0)
    unsigned width = 0;
    Value bound = 0;
};

class Emitter {
  public:
    using Lookup = std::function<const SmtDecl*(const std::string&)>;

    Emitter(const Model& m, Lookup lookup) : model_(m), lookup_(std::move(lookup)) {}

    std::set<std::string> used_defs;

    std::string formula(const Formula& f) {
        if (auto c = f.as<formula::Const>())
            return c->value ? "true" : "false";
        if (auto a = f.as<formula::Atom>()) {
            BV l = term(*a->lhs);
            BV r = term(*a->rhs);
            unsigned w = std::max(l.width, r.width);
            if (w == 0)
                return a->rel == Rel::Lt ? "false" : "true";
            const char* op = a->rel == Rel::Eq ? "=" : a->rel == Rel::Lt ? "bvult" : "bvule";
            return std::string("(") + op + " " + fit(l, w) + " " + fit(r, w) + ")";
        }
        if (auto n = f.as<formula::Not>())
            return "(not " + formula(*n->operand) + ")";
        if (auto b = f.as<formula::Binary>()) {
            if (b->op == Connective::Implies)
                return "(=> " + formula(*b->lhs) + " " + formula(*b->rhs) + ")";
            if (b->op == Connective::Iff)
                return "(= " + formula(*b->lhs) + " " + formula(*b->rhs) + ")";
            std::vector<const Formula*> parts;
            flatten(f, b->op, parts);
            std::string s = b->op == Connective::And ? "(and" : "(or";
            for (const Formula* p : parts)
                s += " " + formula(*p);
            return s + ")";
        }
        const auto& q = *f.as<formula::Quant>();
        const FiniteType& type = q.binder.type.type;
        unsigned w = bit_width(type);
        if (w == 0) {
            vars_.push_back({q.binder.name, type, ""});
            std::string body = formula(*q.body);
            vars_.pop_back();
            return body;
        }
        std::string sym = quote(q.binder.name);
        vars_.push_back({q.binder.name, type, sym});
        std::string body = formula(*q.body);
        vars_.pop_back();
        std::string decl = "((" + sym + " (_ BitVec " + std::to_string(w) + ")))";
        auto pred = type_predicate(type);
        if (q.q == Quantifier::Forall) {
            if (!pred.trivial())
                body = "(=> (bvule " + sym + " " + bits(type.bound(), w) + ") " + body + ")";
            return "(forall " + decl + " " + body + ")";
        }
        if (!pred.trivial())
            body = "(and (bvule " + sym + " " + bits(type.bound(), w) + ") " + body + ")";
        return "(exists " + decl + " " + body + ")";
    }

    BV term(const Term& t) {
        if (auto v = t.as<term::Var>()) {
            for (auto it = vars_.rbegin(); it != vars_.rend(); ++it) {
                if (it->name == v->name) {
                    unsigned w = bit_width(it->type);
                    if (w == 0)
                        return {};
                    return {it->symbol, w, it->type.bound()};
                }
            }
            throw TranslationError("free variable '" + v->name + "' in SMT translation");
        }
        if (auto l = t.as<term::Lit>())
            return literal(l->value);
        if (auto a = t.as<term::Add>())
            return add(term(*a->lhs), term(*a->rhs));
        if (auto k = t.as<term::AddConst>())
            return add(term(*k->operand), literal(k->constant));
        if (auto m = t.as<term::Mul>()) {
            BV l = term(*m->lhs);
            BV r = term(*m->rhs);
            if (l.width == 0 || r.width == 0)
                return {};
            Value bound = l.bound * r.bound;
            unsigned w = bit_width_for_bound(bound);
            return {"(bvmul " + fit(l, w) + " " + fit(r, w) + ")", w, bound};
        }
        if (auto i = t.as<term::Ite>()) {
            std::string c = formula(*i->cond);
            BV a = term(*i->then_term);
            BV b = term(*i->else_term);
            Value bound = std::max(a.bound, b.bound);
            unsigned w = bit_width_for_bound(bound);
            if (w == 0)
                return {};
            return {"(ite " + c + " " + fit(a, w) + " " + fit(b, w) + ")", w, bound};
        }
        if (t.is<term::Choose>())
            throw TranslationError("choose term reached the SMT emitter");
        const auto& ap = *t.as<term::Apply>();
        std::vector<FiniteType> params;
        FiniteType result;
        std::string symbol;
        if (const SmtDecl* d = lookup_(ap.func)) {
            params = d->params;
            result = d->result;
            symbol = d->name;
        } else if (const FuncDecl* fn = model_.find_func(ap.func); fn && fn->definition) {
            for (const auto& p : fn->params)
                params.push_back(p.type.type);
            result = fn->result.type;
            symbol = quote(fn->name);
        } else {
            throw TranslationError("no SMT symbol for function '" + ap.func + "'");
        }
        if (params.size() != ap.args.size())
            throw TranslationError("wrong number of arguments for '" + ap.func + "'");
        unsigned w = bit_width(result);
        if (w == 0)
            return {};
        if (symbol.front() == '|')
            used_defs.insert(ap.func);
        std::string args;
        for (std::size_t i = 0; i < params.size(); ++i)
            if (unsigned pw = bit_width(params[i]))
                args += " " + fit(term(*ap.args[i]), pw);
        if (args.empty())
            return {symbol, w, result.bound()};
        return {"(" + symbol + args + ")", w, result.bound()};
    }

    // define-fun for a definition-bodied function without quantifiers,
    // choose or applications in its body.
    std::string define(const FuncDecl& fn) {
        std::string params;
        for (const auto& p : fn.params) {
            unsigned w = bit_width(p.type.type);
            vars_.push_back({p.name, p.type.type, quote(p.name)});
            if (w)
                params += (params.empty() ? "(" : " (") + quote(p.name) + " (_ BitVec " +
                          std::to_string(w) + "))";
        }
        unsigned w = bit_width(fn.result.type);
        BV body = term(*fn.definition);
        vars_.resize(vars_.size() - fn.params.size());
        return "(define-fun " + quote(fn.name) + " (" + params + ") (_ BitVec " +
               std::to_string(w) + ") " + fit(body, w) + ")";
    }

    static std::string fit(const BV& b, unsigned w) {
        if (b.width == w)
            return b.text;
        if (b.width == 0)
            return bits(0, w);
        if (b.width < w)
            return "((_ zero_extend " + std::to_string(w - b.width) + ") " + b.text + ")";
        return "((_ extract " + std::to_string(w - 1) + " 0) " + b.text + ")";
    }

  private:
    struct VarInfo {
        std::string name;
        FiniteType type;
        std::string symbol;
    };

    static BV literal(Value v) {
        unsigned w = bit_width_for_bound(v);
        if (w == 0)
            return {};
        return {bits(v, w), w, v};
    }

    static BV add(const BV& l, const BV& r) {
        Value bound = l.bound + r.bound;
        unsigned w = bit_width_for_bound(bound);
        if (l.width == 0)
            return {fit(r, w), w, bound};
        if (r.width == 0)
            return {fit(l, w), w, bound};
        return {"(bvadd " + fit(l, w) + " " + fit(r, w) + ")", w, bound};
    }

    static void flatten(const Formula& f, Connective op, std::vector<const Formula*>& out) {
        auto b = f.as<formula::Binary>();
        if (b && b->op == op) {
            flatten(*b->lhs, op, out);
            flatten(*b->rhs, op, out);
        } else {
            out.push_back(&f);
        }
    }

    const Model& model_;
    Lookup lookup_;
    std::vector<VarInfo> vars_;
};

bool must_inline(const FuncDecl& fn) {
    return contains_quantifier(*fn.definition) || contains_choose(*fn.definition) ||
           contains_apply(*fn.definition);
}

// Whether a term may denote several values: it contains a choose or a
// contract application. Substituting such an argument into a body would
// duplicate the choice, so these applications are left to the axiomatizer.
bool nondeterministic(const Model& m, const Term& t);

bool nondeterministic(const Model& m, const Formula& f) {
    if (auto a = f.as<formula::Atom>())
        return nondeterministic(m, *a->lhs) || nondeterministic(m, *a->rhs);
    if (auto n = f.as<formula::Not>())
        return nondeterministic(m, *n->operand);
    if (auto b = f.as<formula::Binary>())
        return nondeterministic(m, *b->lhs) || nondeterministic(m, *b->rhs);
    if (auto q = f.as<formula::Quant>())
        return nondeterministic(m, *q->body);
    return false;
}

bool nondeterministic(const Model& m, const Term& t) {
    return std::visit(
        [&](const auto& n) -> bool {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, term::Add> || std::is_same_v<N, term::Mul>)
                return nondeterministic(m, *n.lhs) || nondeterministic(m, *n.rhs);
            else if constexpr (std::is_same_v<N, term::AddConst>)
                return nondeterministic(m, *n.operand);
            else if constexpr (std::is_same_v<N, term::Ite>)
                return nondeterministic(m, *n.cond) || nondeterministic(m, *n.then_term) ||
                       nondeterministic(m, *n.else_term);
            else if constexpr (std::is_same_v<N, term::Choose>)
                return true;
            else if constexpr (std::is_same_v<N, term::Apply>) {
                const FuncDecl* fn = m.find_func(n.func);
                if (fn && fn->ensures)
                    return true;
                return std::any_of(n.args.begin(), n.args.end(),
                                   [&](const TermPtr& a) { return nondeterministic(m, *a); });
            } else
                return false;
        },
        t.node);
}

bool deterministic_args(const Model& m, const term::Apply& ap) {
    return std::none_of(ap.args.begin(), ap.args.end(),
                        [&](const TermPtr& a) { return nondeterministic(m, *a); });
}

TermPtr inline_term(const Model& m, const TermPtr& t, bool all);

struct Inliner {
    const Model& m;
    bool all;
    TermPtr operator()(const TermPtr& t) const {
        auto ap = t->as<term::Apply>();
        if (!ap)
            return t;
        const FuncDecl* fn = m.find_func(ap->func);
        if (!fn || !fn->definition || (!all && !must_inline(*fn)) || !deterministic_args(m, *ap))
            return t;
        Substitution s;
        for (std::size_t i = 0; i < fn->params.size() && i < ap->args.size(); ++i)
            s[fn->params[i].name] = ap->args[i];
        return substitute(inline_term(m, fn->definition, all), s);
    }
};

TermPtr inline_term(const Model& m, const TermPtr& t, bool all) {
    Inliner in{m, all};
    return map_term(t, in);
}

struct ContractExpander {
    const Model& m;
    std::map<std::string, FormulaPtr>& expanded_ensures;

    TermPtr operator()(const TermPtr& t) {
        auto ap = t->as<term::Apply>();
        if (!ap)
            return t;
        const FuncDecl* fn = m.find_func(ap->func);
        if (!fn || !fn->ensures || !deterministic_args(m, *ap))
            return t;
        auto it = expanded_ensures.find(fn->name);
        if (it == expanded_ensures.end()) {
            ContractExpander inner{m, expanded_ensures};
            it = expanded_ensures.emplace(fn->name, map_terms(fn->ensures, inner)).first;
        }
        std::set<std::string> used;
        for (const auto& a : ap->args)
            collect_names(*a, used);
        for (const auto& p : fn->params)
            used.insert(p.name);
        std::string name = fresh_name(kResultVar, used);
        Substitution s;
        for (std::size_t i = 0; i < fn->params.size() && i < ap->args.size(); ++i)
            s[fn->params[i].name] = ap->args[i];
        s[kResultVar] = build::var(name);
        return build::choose(Binder{name, fn->result}, substitute(it->second, s), t->pos);
    }
};

// Choose occurrences eligible for elimination are replaced by fresh
// variables; `guards` collects the instantiated conditions.
class ChoiceEliminator {
  public:
    explicit ChoiceEliminator(std::set<std::string> used) : used_(std::move(used)) {}

    std::vector<Binder> binders;
    std::vector<FormulaPtr> guards;

    FormulaPtr formula(const FormulaPtr& f, int polarity) {
        if (auto a = f->as<formula::Atom>()) {
            bool eligible = polarity > 0;
            return build::atom(a->rel, term(a->lhs, eligible), term(a->rhs, eligible), f->pos);
        }
        if (auto n = f->as<formula::Not>())
            return build::lnot(formula(n->operand, -polarity), f->pos);
        if (auto b = f->as<formula::Binary>()) {
            switch (b->op) {
            case Connective::And:
            case Connective::Or:
                return build::binary(b->op, formula(b->lhs, polarity),
                                     formula(b->rhs, polarity), f->pos);
            case Connective::Implies:
                return build::binary(b->op, formula(b->lhs, -polarity),
                                     formula(b->rhs, polarity), f->pos);
            case Connective::Iff:
                return f;
            }
        }
        // Constants, and anything under a further binder.
        return f;
    }

  private:
    TermPtr term(const TermPtr& t, bool eligible) {
        if (!eligible)
            return t;
        return std::visit(
            [&](const auto& n) -> TermPtr {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, term::Choose>) {
                    std::string name = fresh_name(n.binder.name, used_);
                    binders.push_back(Binder{name, n.binder.type});
                    guards.push_back(substitute(n.body, {{n.binder.name, build::var(name)}}));
                    return build::var(name, t->pos);
                } else if constexpr (std::is_same_v<N, term::Add>)
                    return build::add(term(n.lhs, true), term(n.rhs, true), t->pos);
                else if constexpr (std::is_same_v<N, term::Mul>)
                    return build::mul(term(n.lhs, true), term(n.rhs, true), t->pos);
                else if constexpr (std::is_same_v<N, term::AddConst>)
                    return build::add_const(term(n.operand, true), n.constant, t->pos);
                else if constexpr (std::is_same_v<N, term::Ite>)
                    return build::ite(n.cond, term(n.then_term, true),
                                      term(n.else_term, true), t->pos);
                else if constexpr (std::is_same_v<N, term::Apply>) {
                    std::vector<TermPtr> args;
                    for (const auto& a : n.args)
                        args.push_back(term(a, true));
                    return build::apply(n.func, std::move(args), t->pos);
                } else
                    return t;
            },
            t->node);
    }

    std::set<std::string> used_;
};

class ChooseAxiomatizer {
  public:
    ChooseAxiomatizer(const Model& m, bool inline_all) : m_(m), inline_all_(inline_all) {}

    ChooseAxioms out;

    FormulaPtr formula(const FormulaPtr& f) {
        if (f->is<formula::Const>())
            return f;
        if (auto a = f->as<formula::Atom>())
            return build::atom(a->rel, term(a->lhs), term(a->rhs), f->pos);
        if (auto n = f->as<formula::Not>())
            return build::lnot(formula(n->operand), f->pos);
        if (auto b = f->as<formula::Binary>())
            return build::binary(b->op, formula(b->lhs), formula(b->rhs), f->pos);
        const auto& q = *f->as<formula::Quant>();
        scope_.push_back(q.binder);
        auto body = formula(q.body);
        scope_.pop_back();
        return build::quant(q.q, q.binder, body, f->pos);
    }

  private:
    TermPtr term(const TermPtr& t) {
        return std::visit(
            [&](const auto& n) -> TermPtr {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, term::Choose>)
                    return choose(*t, n);
                else if constexpr (std::is_same_v<N, term::Add>)
                    return build::add(term(n.lhs), term(n.rhs), t->pos);
                else if constexpr (std::is_same_v<N, term::Mul>)
                    return build::mul(term(n.lhs), term(n.rhs), t->pos);
                else if constexpr (std::is_same_v<N, term::AddConst>)
                    return build::add_const(term(n.operand), n.constant, t->pos);
                else if constexpr (std::is_same_v<N, term::Ite>)
                    return build::ite(formula(n.cond), term(n.then_term),
                                      term(n.else_term), t->pos);
                else if constexpr (std::is_same_v<N, term::Apply>)
                    return apply(*t, n);
                else
                    return t;
            },
            t->node);
    }

    // Arguments first, so a choice inside an argument is made once however
    // often the parameter occurs in the body.
    TermPtr apply(const Term& t, const term::Apply& ap) {
        std::vector<TermPtr> args;
        for (const auto& a : ap.args)
            args.push_back(term(a));
        const FuncDecl* fn = m_.find_func(ap.func);
        if (!fn || (fn->definition && !inline_all_ && !must_inline(*fn)))
            return build::apply(ap.func, std::move(args), t.pos);
        Substitution s;
        for (std::size_t i = 0; i < fn->params.size() && i < args.size(); ++i)
            s[fn->params[i].name] = args[i];
        if (fn->definition)
            return term(substitute(fn->definition, s));
        std::set<std::string> used;
        for (const auto& a : args)
            collect_names(*a, used);
        std::string r = fresh_name(kResultVar, used);
        s[kResultVar] = build::var(r);
        TermPtr c = build::choose(Binder{r, fn->result}, substitute(fn->ensures, s), t.pos);
        return choose(*c, *c->as<term::Choose>());
    }

    TermPtr choose(const Term& t, const term::Choose& c) {
        std::string name = "_ch" + std::to_string(counter_++);
        // Free variables in binding order, innermost binding of each name.
        auto fv = free_vars(t);
        std::vector<Binder> params;
        for (std::size_t i = scope_.size(); i-- > 0;) {
            if (fv.erase(scope_[i].name))
                params.insert(params.begin(), scope_[i]);
        }
        std::vector<TermPtr> args;
        for (const auto& p : params)
            args.push_back(build::var(p.name));
        const FiniteType& type = c.binder.type.type;
        bool folded = bit_width(type) == 0;
        TermPtr app = folded ? build::lit(0) : build::apply(name, args, t.pos);
        if (!folded) {
            SmtDecl d;
            d.name = name;
            for (const auto& p : params)
                d.params.push_back(p.type.type);
            d.result = type;
            d.origin = c.binder.name;
            out.functions.push_back(std::move(d));
        }

        scope_.push_back(c.binder);
        FormulaPtr body = formula(c.body);
        scope_.pop_back();

        auto close = [&](FormulaPtr f) {
            for (auto it = params.rbegin(); it != params.rend(); ++it)
                f = build::forall(*it, f);
            return f;
        };
        out.axioms.push_back(close(substitute(body, {{c.binder.name, app}})));
        auto pred = type_predicate(type);
        if (!folded && !pred.trivial())
            out.constraints.push_back(close(pred.apply(app)));
        return app;
    }

    const Model& m_;
    bool inline_all_;
    std::vector<Binder> scope_;
    unsigned counter_ = 0;
};

} // namespace

FormulaPtr to_nnf(const FormulaPtr& f) { return nnf(f, false); }

FormulaPtr negate_goal(const FormulaPtr& f) { return nnf(f, true); }

std::string encode_value(Value v, const FiniteType& t) {
    if (!t.contains(v))
        throw TranslationError("value " + std::to_string(v) + " is outside " + t.to_string());
    return bit_width(t) == 0 ? std::string() : bits(v, bit_width(t));
}

bool TypePredicate::trivial() const {
    unsigned w = bit_width(type);
    // Every w-bit vector encodes an element exactly when size = 2^w.
    return w >= 64 || domain_size(type) == (std::uint64_t{1} << w);
}

FormulaPtr TypePredicate::apply(const TermPtr& t) const {
    if (trivial())
        return build::truth(true);
    return build::le(t, build::lit(type.bound()));
}

TypePredicate type_predicate(const FiniteType& t) { return TypePredicate{t}; }

CostEstimate estimate_costs(const Formula& nnf) {
    return {universal_instances(nnf), skolem_conjuncts(nnf, 1)};
}

bool expand_existentials(const CostEstimate& c, const TranslateOptions& opts) {
    if (opts.mode == QuantifierMode::ExpandAll)
        return true;
    if (opts.mode != QuantifierMode::Eliminate || !opts.heuristic_factor)
        return false;
    return c.expansion_conjuncts > 0 &&
           static_cast<long double>(c.skolem_axiom_conjuncts) >
               static_cast<long double>(*opts.heuristic_factor) *
                   static_cast<long double>(c.expansion_conjuncts);
}

void eliminate_quantifiers(const FormulaPtr& nnf, const TranslateOptions& opts,
                           Elimination& out,
                           const std::function<void(const FormulaPtr&)>& sink,
                           unsigned* skolem_counter) {
    if (opts.mode == QuantifierMode::Preserve)
        throw TranslationError("quantifier elimination requested in preserve mode");
    bool expand_ex = expand_existentials(estimate_costs(*nnf), opts);
    if (expand_ex && opts.mode == QuantifierMode::Eliminate) {
        // The heuristic only chooses expansion when it fits the budget.
        try {
            Projection(opts.expansion_budget, true).formula(*nnf, false);
        } catch (const TranslationError&) {
            expand_ex = false;
        }
    }
    Projection(opts.expansion_budget, expand_ex).formula(*nnf, false);
    out.expanded_existentials = expand_ex;
    unsigned local = 0;
    Eliminator e(expand_ex, out, skolem_counter ? *skolem_counter : local);
    e.top(nnf, sink);
}

std::vector<FormulaPtr> eliminate_quantifiers(const FormulaPtr& nnf,
                                              const TranslateOptions& opts,
                                              Elimination& out) {
    std::vector<FormulaPtr> conjuncts;
    eliminate_quantifiers(nnf, opts, out,
                          [&](const FormulaPtr& f) { conjuncts.push_back(f); });
    return conjuncts;
}

FormulaPtr expand_contracts(const Model& m, const FormulaPtr& f) {
    std::map<std::string, FormulaPtr> cache;
    ContractExpander ex{m, cache};
    return map_terms(f, ex);
}

FormulaPtr inline_definitions(const Model& m, const FormulaPtr& f, bool all) {
    Inliner in{m, all};
    return map_terms(f, in);
}

Model inline_definitions(const Model& m) {
    Model out = m;
    for (auto& fn : out.funcs) {
        if (fn.definition)
            fn.definition = inline_term(m, fn.definition, true);
        else if (fn.ensures)
            fn.ensures = inline_definitions(m, fn.ensures, true);
    }
    for (auto& t : out.theorems)
        t.formula = inline_definitions(m, t.formula, true);
    return out;
}

FormulaPtr eliminate_choices(const Model& m, const FormulaPtr& goal) {
    FormulaPtr g = expand_contracts(m, goal);
    std::vector<Binder> prefix;
    FormulaPtr body = g;
    while (auto q = body->as<formula::Quant>()) {
        if (q->q != Quantifier::Forall)
            break;
        prefix.push_back(q->binder);
        body = q->body;
    }
    std::set<std::string> used;
    collect_names(*g, used);
    ChoiceEliminator ce(used);
    FormulaPtr rewritten = ce.formula(body, +1);
    if (ce.binders.empty())
        return g;
    FormulaPtr out = build::implies(build::conj(ce.guards), rewritten);
    for (auto it = ce.binders.rbegin(); it != ce.binders.rend(); ++it)
        out = build::forall(*it, out);
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
        out = build::forall(*it, out);
    return out;
}

ChooseAxioms axiomatize_choose(const Model& m, const FormulaPtr& f, bool inline_all) {
    ChooseAxiomatizer ax(m, inline_all);
    ax.out.formula = ax.formula(f);
    return std::move(ax.out);
}

std::string emit_smtlib(const SmtScript& s) {
    std::ostringstream out;
    out << "(set-logic " << s.logic << ")\n";
    for (const auto& c : s.comments)
        out << "; " << c << "\n";
    for (const auto& d : s.definitions)
        out << d << "\n";
    for (const auto& d : s.declarations) {
        out << "(declare-fun " << d.name << " (";
        bool first = true;
        for (unsigned w : d.arg_widths()) {
            out << (first ? "" : " ") << "(_ BitVec " << w << ")";
            first = false;
        }
        out << ") (_ BitVec " << d.result_width() << ")) ; ";
        if (d.skolem) {
            out << "skolem for " << d.origin << ", range axiom " << d.range_conjuncts
                << " conjuncts";
            if (type_predicate(d.result).trivial())
                out << " (trivially true, not asserted)";
        } else {
            out << "choice for " << d.origin;
        }
        out << "\n";
    }
    for (const auto& a : s.assertions)
        out << "(assert " << a.text << ") ; " << to_string(a.provenance) << "\n";
    out << "(check-sat)\n(exit)\n";
    return out.str();
}

SmtScript translate(const Model& m, const FormulaPtr& goal, const TranslateOptions& opts,
                    const std::string& goal_name) {
    FormulaPtr g = rename_apart(goal);
    // Definitions may call contracts and ensures clauses may call
    // definitions; repeat until neither kind of application is left.
    for (std::size_t round = 0; round <= m.funcs.size(); ++round) {
        FormulaPtr h = expand_contracts(m, inline_definitions(m, g, opts.inline_definitions));
        if (equal(h, g))
            break;
        g = h;
    }
    g = rename_apart(g);
    if (opts.eliminate_choices)
        g = eliminate_choices(m, g);
    ChooseAxioms ax = axiomatize_choose(m, g, opts.inline_definitions);

    SmtScript s;
    const bool preserve = opts.mode == QuantifierMode::Preserve;
    s.logic = preserve ? "UFBV" : "QF_UFBV";
    std::ostringstream opt;
    opt << "options: mode=" << to_string(opts.mode) << " heuristic-factor=";
    if (opts.heuristic_factor)
        opt << *opts.heuristic_factor;
    else
        opt << "off";
    opt << " eliminate-choices=" << (opts.eliminate_choices ? "on" : "off")
        << " inline-definitions=" << (opts.inline_definitions ? "on" : "off");
    s.comments.push_back("goal: " + goal_name);
    s.comments.push_back(opt.str());

    std::map<std::string, SmtDecl> known;
    for (const auto& d : ax.functions)
        known[d.name] = d;
    const Elimination* current = nullptr;
    Emitter em(m, [&](const std::string& name) -> const SmtDecl* {
        if (auto it = known.find(name); it != known.end())
            return &it->second;
        if (current)
            for (const auto& d : current->skolems)
                if (d.name == name)
                    return &d;
        return nullptr;
    });

    unsigned skolems = 0;
    std::vector<SmtDecl> skolem_decls;
    auto assert_formula = [&](const FormulaPtr& sat, Provenance tag, const std::string& label) {
        if (preserve) {
            s.assertions.push_back({em.formula(*sat), tag});
            return;
        }
        Elimination el;
        current = &el;
        eliminate_quantifiers(
            sat, opts, el,
            [&](const FormulaPtr& c) { s.assertions.push_back({em.formula(*c), tag}); },
            &skolems);
        for (const auto& r : el.range_axioms)
            s.assertions.push_back({em.formula(*r), Provenance::SkolemRangeAxiom});
        current = nullptr;
        auto costs = estimate_costs(*sat);
        s.comments.push_back(label + ": existentials " +
                             (el.expanded_existentials ? "expanded" : "skolemized") +
                             " (expansion conjuncts " +
                             std::to_string(costs.expansion_conjuncts) +
                             ", skolem axiom conjuncts " +
                             std::to_string(costs.skolem_axiom_conjuncts) + ")");
        for (auto& d : el.skolems) {
            known[d.name] = d;
            skolem_decls.push_back(d);
        }
    };

    assert_formula(negate_goal(ax.formula), Provenance::NegatedGoal, "negated goal");
    for (std::size_t i = 0; i < ax.axioms.size(); ++i)
        assert_formula(to_nnf(ax.axioms[i]), Provenance::ChooseAxiom,
                       "choice axiom " + std::to_string(i));
    for (std::size_t i = 0; i < ax.constraints.size(); ++i)
        assert_formula(to_nnf(ax.constraints[i]), Provenance::TypeConstraint,
                       "choice range " + std::to_string(i));

    for (const auto& fn : m.funcs)
        if (em.used_defs.count(fn.name))
            s.definitions.push_back(em.define(fn));
    for (auto d : ax.functions) {
        d.range_conjuncts = 0;
        s.declarations.push_back(d);
    }
    for (const auto& d : skolem_decls)
        s.declarations.push_back(d);
    return s;
}

} // namespace fdc
