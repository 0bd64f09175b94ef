#include "fdc/evaluator.hpp"

#include <algorithm>

namespace fdc {

std::string to_string(VerdictKind k) {
    switch (k) {
    case VerdictKind::Valid:
        return "valid";
    case VerdictKind::Invalid:
        return "invalid";
    case VerdictKind::Undecided:
        return "undecided";
    case VerdictKind::Error:
        return "error";
    }
    return "?";
}

namespace {

using Frame = std::vector<Value>;

struct Timeout {};

struct Context {
    const Model& model;
    EvalOptions opts;
    EvalStats stats;
    Env witness;
    std::uint64_t tick = 0;

    void count_body(unsigned depth) {
        ++stats.body_evals;
        if (stats.body_evals_by_depth.size() <= depth)
            stats.body_evals_by_depth.resize(depth + 1, 0);
        ++stats.body_evals_by_depth[depth];
        if ((++tick & 4095) == 0 && opts.deadline &&
            std::chrono::steady_clock::now() > *opts.deadline)
            throw Timeout{};
    }
    bool first_only() const { return opts.mode == EvalMode::Deterministic; }
};

// Compiled phrases. Deterministic nodes are evaluated through eval(); the
// others only through stream(). Binders own distinct frame slots, so
// suspended streams never see their variables overwritten.
struct TNode {
    bool det = true;
    virtual ~TNode() = default;
    virtual Value eval(Frame&) const { throw std::logic_error("nondeterministic term"); }
    virtual Generator<Value> stream(Frame& fr) const { co_yield eval(fr); }
};

struct FNode {
    bool det = true;
    virtual ~FNode() = default;
    virtual bool eval(Frame&) const { throw std::logic_error("nondeterministic formula"); }
    virtual Generator<bool> stream(Frame& fr) const { co_yield eval(fr); }
};

using TPtr = std::unique_ptr<TNode>;
using FPtr = std::unique_ptr<FNode>;

bool contains_true(const FNode& f, Frame& fr) {
    if (f.det)
        return f.eval(fr);
    for (bool b : f.stream(fr))
        if (b)
            return true;
    return false;
}

// Pairs (a, b) over both streams. The inner stream is consumed once and
// replayed for the later outer values, so its bodies are not re-evaluated.
template <typename A, typename B, typename NA, typename NB>
Generator<std::pair<A, B>> product(const NA& outer, const NB& inner, Frame& fr) {
    std::vector<B> seen;
    bool complete = false;
    for (A a : outer.stream(fr)) {
        if (complete) {
            for (B b : seen)
                co_yield std::pair<A, B>{a, b};
            continue;
        }
        for (B b : inner.stream(fr)) {
            seen.push_back(b);
            co_yield std::pair<A, B>{a, b};
        }
        complete = true;
    }
}

struct TVar : TNode {
    std::size_t slot;
    explicit TVar(std::size_t s) : slot(s) {}
    Value eval(Frame& fr) const override { return fr[slot]; }
};

struct TLit : TNode {
    Value value;
    explicit TLit(Value v) : value(v) {}
    Value eval(Frame&) const override { return value; }
};

enum class Arith { Add, Mul };

struct TArith : TNode {
    Arith op;
    TPtr lhs, rhs;
    TArith(Arith o, TPtr a, TPtr b) : op(o), lhs(std::move(a)), rhs(std::move(b)) {
        det = lhs->det && rhs->det;
    }
    Value apply(Value a, Value b) const { return op == Arith::Add ? a + b : a * b; }
    Value eval(Frame& fr) const override { return apply(lhs->eval(fr), rhs->eval(fr)); }
    Generator<Value> stream(Frame& fr) const override {
        for (auto [r, l] : product<Value, Value>(*rhs, *lhs, fr))
            co_yield apply(l, r);
    }
};

struct TAddConst : TNode {
    TPtr operand;
    Value constant;
    TAddConst(TPtr a, Value k) : operand(std::move(a)), constant(k) { det = operand->det; }
    Value eval(Frame& fr) const override { return operand->eval(fr) + constant; }
    Generator<Value> stream(Frame& fr) const override {
        for (Value v : operand->stream(fr))
            co_yield v + constant;
    }
};

struct TIte : TNode {
    FPtr cond;
    TPtr then_term, else_term;
    TIte(FPtr c, TPtr a, TPtr b)
        : cond(std::move(c)), then_term(std::move(a)), else_term(std::move(b)) {
        det = cond->det && then_term->det && else_term->det;
    }
    Value eval(Frame& fr) const override {
        return cond->eval(fr) ? then_term->eval(fr) : else_term->eval(fr);
    }
    Generator<Value> stream(Frame& fr) const override {
        for (bool c : cond->stream(fr))
            for (Value v : (c ? then_term : else_term)->stream(fr))
                co_yield v;
    }
};

struct TChoose : TNode {
    Context& ctx;
    std::size_t slot;
    FiniteType type;
    FPtr body;
    TChoose(Context& c, std::size_t s, FiniteType t, FPtr b)
        : ctx(c), slot(s), type(t), body(std::move(b)) {
        det = false;
    }
    Generator<Value> stream(Frame& fr) const override {
        for (Value y : enumerate_domain(type)) {
            fr[slot] = y;
            if (contains_true(*body, fr)) {
                ++ctx.stats.choose_yields;
                co_yield y;
                if (ctx.first_only())
                    co_return;
            }
        }
    }
};

struct CompiledFunc {
    const FuncDecl* decl = nullptr;
    std::size_t frame_size = 0;
    TPtr body;
    FPtr ensures;
    bool det = true;
};

// All combinations of argument values; the leftmost argument varies fastest.
Generator<std::vector<Value>> arg_tuples(const std::vector<TPtr>& args,
                                         std::size_t from, Frame& fr) {
    if (from == args.size()) {
        co_yield std::vector<Value>(args.size(), 0);
        co_return;
    }
    std::vector<Value> seen;
    bool complete = false;
    for (auto rest : arg_tuples(args, from + 1, fr)) {
        if (complete) {
            for (Value v : seen) {
                rest[from] = v;
                co_yield rest;
            }
            continue;
        }
        for (Value v : args[from]->stream(fr)) {
            seen.push_back(v);
            rest[from] = v;
            co_yield rest;
        }
        complete = true;
    }
}

struct TApply : TNode {
    Context& ctx;
    const CompiledFunc& fn;
    std::vector<TPtr> args;

    TApply(Context& c, const CompiledFunc& f, std::vector<TPtr> a)
        : ctx(c), fn(f), args(std::move(a)) {
        det = fn.det && !fn.ensures;
        for (const auto& x : args)
            det = det && x->det;
    }

    void bind(Frame& local, std::size_t i, Value v) const {
        const auto& p = fn.decl->params[i];
        if (!p.type.type.contains(v))
            throw EvalError("argument " + std::to_string(v) + " of '" +
                            fn.decl->name + "' exceeds the bound " +
                            std::to_string(p.type.type.bound()) +
                            " of parameter '" + p.name + "'");
        local[i] = v;
    }
    Value check_result(Value v) const {
        if (!fn.decl->result.type.contains(v))
            throw EvalError("result " + std::to_string(v) + " of '" +
                            fn.decl->name + "' exceeds its declared bound " +
                            std::to_string(fn.decl->result.type.bound()));
        return v;
    }

    Value eval(Frame& fr) const override {
        Frame local(fn.frame_size, 0);
        for (std::size_t i = 0; i < args.size(); ++i)
            bind(local, i, args[i]->eval(fr));
        return check_result(fn.body->eval(local));
    }

    Generator<Value> stream(Frame& fr) const override {
        for (const auto& tuple : arg_tuples(args, 0, fr)) {
            Frame local(fn.frame_size, 0);
            for (std::size_t i = 0; i < tuple.size(); ++i)
                bind(local, i, tuple[i]);
            if (fn.body) {
                for (Value v : fn.body->stream(local))
                    co_yield check_result(v);
                continue;
            }
            // Contract: the application denotes choose result with ensures.
            std::size_t res = args.size();
            for (Value y : enumerate_domain(fn.decl->result.type)) {
                local[res] = y;
                if (contains_true(*fn.ensures, local)) {
                    ++ctx.stats.choose_yields;
                    co_yield y;
                    if (ctx.first_only())
                        break;
                }
            }
        }
    }
};

struct FConst : FNode {
    bool value;
    explicit FConst(bool v) : value(v) {}
    bool eval(Frame&) const override { return value; }
};

struct FAtom : FNode {
    Rel rel;
    TPtr lhs, rhs;
    FAtom(Rel r, TPtr a, TPtr b) : rel(r), lhs(std::move(a)), rhs(std::move(b)) {
        det = lhs->det && rhs->det;
    }
    bool apply(Value a, Value b) const {
        switch (rel) {
        case Rel::Eq:
            return a == b;
        case Rel::Lt:
            return a < b;
        case Rel::Le:
            return a <= b;
        }
        return false;
    }
    bool eval(Frame& fr) const override { return apply(lhs->eval(fr), rhs->eval(fr)); }
    Generator<bool> stream(Frame& fr) const override {
        for (auto [r, l] : product<Value, Value>(*rhs, *lhs, fr))
            co_yield apply(l, r);
    }
};

struct FNot : FNode {
    FPtr operand;
    explicit FNot(FPtr f) : operand(std::move(f)) { det = operand->det; }
    bool eval(Frame& fr) const override { return !operand->eval(fr); }
    Generator<bool> stream(Frame& fr) const override {
        for (bool b : operand->stream(fr))
            co_yield !b;
    }
};

struct FBinary : FNode {
    Connective op;
    FPtr lhs, rhs;
    FBinary(Connective c, FPtr a, FPtr b) : op(c), lhs(std::move(a)), rhs(std::move(b)) {
        det = lhs->det && rhs->det;
    }
    bool eval(Frame& fr) const override {
        switch (op) {
        case Connective::And:
            return lhs->eval(fr) && rhs->eval(fr);
        case Connective::Or:
            return lhs->eval(fr) || rhs->eval(fr);
        case Connective::Implies:
            return !lhs->eval(fr) || rhs->eval(fr);
        case Connective::Iff:
            return lhs->eval(fr) == rhs->eval(fr);
        }
        return false;
    }
    Generator<bool> stream(Frame& fr) const override {
        if (op == Connective::Iff) {
            for (auto [b, a] : product<bool, bool>(*rhs, *lhs, fr))
                co_yield a == b;
            co_return;
        }
        // The left value that decides without looking at the right side,
        // and the result it decides.
        bool stop = op == Connective::Or;
        bool stop_result = op != Connective::And;
        bool stopped = false, continued = false;
        for (bool a : lhs->stream(fr)) {
            if (a == stop) {
                if (!stopped) {
                    stopped = true;
                    co_yield stop_result;
                }
            } else if (!continued) {
                continued = true;
                for (bool b : rhs->stream(fr))
                    co_yield b;
            }
            if (stopped && continued)
                break;
        }
    }
};

struct FQuant : FNode {
    Context& ctx;
    Quantifier q;
    std::string name;
    std::size_t slot;
    FiniteType type;
    unsigned depth;
    bool prefix; // part of the outermost universal block
    FPtr body;

    FQuant(Context& c, Quantifier qq, std::string n, std::size_t s, FiniteType t,
           unsigned d, bool p, FPtr b)
        : ctx(c), q(qq), name(std::move(n)), slot(s), type(t), depth(d),
          prefix(p), body(std::move(b)) {
        det = body->det;
    }

    void decided(Value x) const {
        if (prefix)
            ctx.witness.emplace(name, x);
        if (depth == 0 && x < type.bound())
            ctx.stats.decided_early = true;
    }

    bool eval(Frame& fr) const override {
        const bool decisive = q == Quantifier::Exists;
        for (Value x : enumerate_domain(type)) {
            fr[slot] = x;
            ctx.count_body(depth);
            if (body->eval(fr) == decisive) {
                decided(x);
                return decisive;
            }
        }
        return !decisive;
    }

    // Yields the decisive value if some element admits it, and the other
    // value if every element admits that one.
    Generator<bool> stream(Frame& fr) const override {
        const bool decisive = q == Quantifier::Exists;
        bool all_other = true;
        bool yielded = false;
        for (Value x : enumerate_domain(type)) {
            fr[slot] = x;
            ctx.count_body(depth);
            bool has_decisive = false, has_other = false;
            for (bool r : body->stream(fr)) {
                if (r == decisive) {
                    if (!has_decisive) {
                        has_decisive = true;
                        if (!yielded) {
                            yielded = true;
                            decided(x);
                            co_yield decisive;
                        }
                    }
                } else {
                    has_other = true;
                }
                if (has_decisive && (has_other || !all_other))
                    break;
            }
            if (!has_other) {
                all_other = false;
                if (yielded)
                    co_return;
            }
        }
        if (all_other)
            co_yield !decisive;
    }
};

class Compiler {
  public:
    Compiler(Context& ctx, std::map<std::string, std::unique_ptr<CompiledFunc>>& funcs)
        : ctx_(ctx), funcs_(funcs) {}

    std::vector<std::pair<std::string, std::size_t>> scope;
    std::size_t next_slot = 0;

    FPtr formula(const Formula& f, unsigned depth, bool prefix) {
        if (auto c = f.as<formula::Const>())
            return std::make_unique<FConst>(c->value);
        if (auto a = f.as<formula::Atom>())
            return std::make_unique<FAtom>(a->rel, term(*a->lhs, depth),
                                           term(*a->rhs, depth));
        if (auto n = f.as<formula::Not>())
            return std::make_unique<FNot>(formula(*n->operand, depth, false));
        if (auto b = f.as<formula::Binary>())
            return std::make_unique<FBinary>(b->op, formula(*b->lhs, depth, false),
                                             formula(*b->rhs, depth, false));
        const auto& q = *f.as<formula::Quant>();
        std::size_t slot = next_slot++;
        scope.emplace_back(q.binder.name, slot);
        bool in_prefix = prefix && q.q == Quantifier::Forall;
        auto body = formula(*q.body, depth + 1, in_prefix);
        scope.pop_back();
        return std::make_unique<FQuant>(ctx_, q.q, q.binder.name, slot,
                                        q.binder.type.type, depth, in_prefix,
                                        std::move(body));
    }

    TPtr term(const Term& t, unsigned depth) {
        if (auto v = t.as<term::Var>())
            return std::make_unique<TVar>(lookup(v->name));
        if (auto l = t.as<term::Lit>())
            return std::make_unique<TLit>(l->value);
        if (auto a = t.as<term::Add>())
            return std::make_unique<TArith>(Arith::Add, term(*a->lhs, depth),
                                            term(*a->rhs, depth));
        if (auto m = t.as<term::Mul>())
            return std::make_unique<TArith>(Arith::Mul, term(*m->lhs, depth),
                                            term(*m->rhs, depth));
        if (auto k = t.as<term::AddConst>())
            return std::make_unique<TAddConst>(term(*k->operand, depth), k->constant);
        if (auto i = t.as<term::Ite>())
            return std::make_unique<TIte>(formula(*i->cond, depth, false),
                                          term(*i->then_term, depth),
                                          term(*i->else_term, depth));
        if (auto c = t.as<term::Choose>()) {
            std::size_t slot = next_slot++;
            scope.emplace_back(c->binder.name, slot);
            auto body = formula(*c->body, depth, false);
            scope.pop_back();
            return std::make_unique<TChoose>(ctx_, slot, c->binder.type.type,
                                             std::move(body));
        }
        const auto& ap = *t.as<term::Apply>();
        const CompiledFunc& fn = function(ap.func);
        if (ap.args.size() != fn.decl->params.size())
            throw EvalError("wrong number of arguments for '" + ap.func + "'");
        std::vector<TPtr> args;
        for (const auto& a : ap.args)
            args.push_back(term(*a, depth));
        return std::make_unique<TApply>(ctx_, fn, std::move(args));
    }

  private:
    std::size_t lookup(const std::string& name) const {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->first == name)
                return it->second;
        throw EvalError("unbound variable '" + name + "'");
    }

    const CompiledFunc& function(const std::string& name) {
        auto it = funcs_.find(name);
        if (it != funcs_.end()) {
            if (!it->second)
                throw EvalError("cyclic definition of '" + name + "'");
            return *it->second;
        }
        const FuncDecl* decl = ctx_.model.find_func(name);
        if (!decl)
            throw EvalError("unknown function '" + name + "'");
        funcs_[name] = nullptr; // marks "in progress"
        auto fn = std::make_unique<CompiledFunc>();
        fn->decl = decl;
        Compiler sub(ctx_, funcs_);
        for (const auto& p : decl->params)
            sub.scope.emplace_back(p.name, sub.next_slot++);
        if (decl->definition) {
            fn->body = sub.term(*decl->definition, 0);
            fn->det = fn->body->det;
        } else {
            sub.scope.emplace_back(kResultVar, sub.next_slot++);
            fn->ensures = sub.formula(*decl->ensures, 0, false);
            fn->det = false;
        }
        fn->frame_size = sub.next_slot;
        auto& slot = funcs_[name];
        slot = std::move(fn);
        return *slot;
    }

    Context& ctx_;
    std::map<std::string, std::unique_ptr<CompiledFunc>>& funcs_;
};

template <typename Node, typename T>
Generator<T> drive(const Node* node, std::shared_ptr<Frame> fr) {
    for (T v : node->stream(*fr))
        co_yield v;
}

} // namespace

struct Evaluator::Impl {
    Context ctx;
    std::map<std::string, std::unique_ptr<CompiledFunc>> funcs;
    std::vector<FPtr> formulas;
    std::vector<TPtr> terms;

    Impl(const Model& m, EvalOptions o) : ctx{m, o, {}, {}, 0} {}

    std::shared_ptr<Frame> bind(Compiler& c, const Env& env) {
        std::vector<Value> values;
        for (const auto& [name, v] : env) {
            c.scope.emplace_back(name, c.next_slot++);
            values.push_back(v);
        }
        return std::make_shared<Frame>(std::move(values));
    }
};

Evaluator::Evaluator(const Model& m, EvalOptions opts)
    : impl_(std::make_unique<Impl>(m, opts)) {}
Evaluator::~Evaluator() = default;

Generator<bool> Evaluator::eval_formula(const FormulaPtr& f, const Env& env) {
    Compiler c(impl_->ctx, impl_->funcs);
    auto frame = impl_->bind(c, env);
    impl_->formulas.push_back(c.formula(*f, 0, false));
    frame->resize(c.next_slot, 0);
    return drive<FNode, bool>(impl_->formulas.back().get(), frame);
}

Generator<Value> Evaluator::eval_term(const TermPtr& t, const Env& env) {
    Compiler c(impl_->ctx, impl_->funcs);
    auto frame = impl_->bind(c, env);
    impl_->terms.push_back(c.term(*t, 0));
    frame->resize(c.next_slot, 0);
    return drive<TNode, Value>(impl_->terms.back().get(), frame);
}

Verdict Evaluator::check_validity(const FormulaPtr& theorem) {
    auto& ctx = impl_->ctx;
    ctx.witness.clear();
    Verdict v;
    try {
        Compiler c(ctx, impl_->funcs);
        FPtr root = c.formula(*theorem, 0, true);
        Frame fr(c.next_slot, 0);
        if (root->det) {
            v.kind = root->eval(fr) ? VerdictKind::Valid : VerdictKind::Invalid;
        } else {
            bool any = false;
            v.kind = VerdictKind::Valid;
            for (bool b : root->stream(fr)) {
                any = true;
                if (!b) {
                    v.kind = VerdictKind::Invalid;
                    break;
                }
                if (ctx.first_only())
                    break;
            }
            if (!any) {
                v.kind = VerdictKind::Error;
                v.reason = "no admissible choice";
            }
        }
    } catch (const EvalError& e) {
        v.kind = VerdictKind::Error;
        v.reason = e.what();
    } catch (const Timeout&) {
        v.kind = VerdictKind::Undecided;
        v.reason = "timeout";
    }
    if (v.kind == VerdictKind::Invalid)
        v.witness = ctx.witness;
    return v;
}

const EvalStats& Evaluator::stats() const { return impl_->ctx.stats; }
void Evaluator::reset_stats() { impl_->ctx.stats = {}; }

CheckResult check_validity(const Model& m, const FormulaPtr& theorem,
                           const EvalOptions& opts) {
    Evaluator ev(m, opts);
    CheckResult r;
    r.verdict = ev.check_validity(theorem);
    r.stats = ev.stats();
    return r;
}

} // namespace fdc
