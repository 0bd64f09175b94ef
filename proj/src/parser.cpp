#include "fdc/parser.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

namespace fdc {

namespace {

// ---------------------------------------------------------------- lexer

enum class Tok { Ident, Num, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    Value number = 0;
    SourcePos pos;
};

struct ParseError {
    SourcePos pos;
    std::string message;
};

struct UnicodeAlias {
    std::string_view utf8;
    std::string_view ascii;
    Tok kind;
};

constexpr std::array<UnicodeAlias, 13> kUnicode{{
    {"∀", "forall", Tok::Ident},
    {"∃", "exists", Tok::Ident},
    {"¬", "!", Tok::Punct},
    {"∧", "/\\", Tok::Punct},
    {"∨", "\\/", Tok::Punct},
    {"⇒", "=>", Tok::Punct},
    {"⇔", "<=>", Tok::Punct},
    {"≤", "<=", Tok::Punct},
    {"≥", ">=", Tok::Punct},
    {"≠", "!=", Tok::Punct},
    {"ℕ", "nat", Tok::Ident},
    {"\U0001d539", "bool", Tok::Ident},
    {"·", "*", Tok::Punct},
}};

// Longest first so that "<=>" wins over "<=" and "<".
constexpr std::array<std::string_view, 23> kPunct{
    "<=>", "/\\", "\\/", "=>", "<=", ">=", "!=", "(", ")", "[", "]", ",",
    ":",   ";",   ".",   "=",  "<",  ">",  "+",  "*", "^", "-", "!"};

bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) {
    return ident_start(c) || (c >= '0' && c <= '9') || c == '\'';
}

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.pos = {line_, col_};
            if (i_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            char c = src_[i_];
            if (ident_start(c)) {
                std::size_t j = i_;
                while (j < src_.size() && ident_char(src_[j]))
                    ++j;
                t.kind = Tok::Ident;
                t.text = std::string(src_.substr(i_, j - i_));
                advance(j - i_);
            } else if (c >= '0' && c <= '9') {
                std::size_t j = i_;
                Value v = 0;
                while (j < src_.size() && src_[j] >= '0' && src_[j] <= '9') {
                    v = v * 10 + static_cast<Value>(src_[j] - '0');
                    if (v > kMaxBound)
                        throw ParseError{t.pos, "numeric literal too large"};
                    ++j;
                }
                t.kind = Tok::Num;
                t.number = v;
                t.text = std::string(src_.substr(i_, j - i_));
                advance(j - i_);
            } else if (static_cast<unsigned char>(c) >= 0x80) {
                bool found = false;
                for (const auto& u : kUnicode) {
                    if (src_.substr(i_).starts_with(u.utf8)) {
                        t.kind = u.kind;
                        t.text = std::string(u.ascii);
                        i_ += u.utf8.size();
                        ++col_;
                        found = true;
                        break;
                    }
                }
                if (!found)
                    throw ParseError{t.pos, "unexpected character"};
            } else {
                bool found = false;
                for (auto p : kPunct) {
                    if (src_.substr(i_).starts_with(p)) {
                        t.kind = Tok::Punct;
                        t.text = std::string(p);
                        advance(p.size());
                        found = true;
                        break;
                    }
                }
                if (!found)
                    throw ParseError{t.pos, std::string("unexpected character '") +
                                                c + "'"};
            }
            out.push_back(std::move(t));
        }
    }

  private:
    void advance(std::size_t n) {
        i_ += n;
        col_ += static_cast<std::uint32_t>(n);
    }
    void skip_space() {
        while (i_ < src_.size()) {
            char c = src_[i_];
            if (c == '\n') {
                ++i_;
                ++line_;
                col_ = 1;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                advance(1);
            } else if (c == '#') {
                while (i_ < src_.size() && src_[i_] != '\n')
                    ++i_;
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t i_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 1;
};

// ------------------------------------------------- generic expression tree

// Expressions are parsed without knowing whether a formula or a term is
// expected; conversion happens afterwards, when the position is known.
struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
    enum class K { Ident, Num, True, False, Call, Bin, Not, Quant, Choose, If };
    K k = K::Num;
    SourcePos pos;
    std::string text; // identifier, function or operator
    Value number = 0;
    bool paren = false;
    Quantifier q = Quantifier::Forall;
    Binder binder;
    std::vector<ExprPtr> kids;
};

ExprPtr make(Expr::K k, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->k = k;
    e->pos = pos;
    return e;
}

const std::set<std::string> kKeywords{
    "val",   "type", "fun",  "theorem", "forall", "exists", "choose", "with",
    "if",    "then", "else", "true",    "false",  "nat",    "bool",   "ensures"};

class Parser {
  public:
    Parser(std::vector<Token> toks, Model& model, const ParseOptions& opts)
        : toks_(std::move(toks)), model_(model), opts_(opts) {}

    std::vector<Diagnostic> diags;

    void parse_declarations() {
        while (!at_end()) {
            try {
                declaration();
            } catch (const ParseError& e) {
                diags.push_back({e.pos, e.message});
                recover();
            }
        }
    }

    ExprPtr expression() { return parse_iff(); }

    void expect_end() {
        if (!at_end())
            fail("unexpected '" + peek().text + "' after expression");
    }

    // Free names that denote variables rather than parameters.
    std::set<std::string> scope;

    FormulaPtr to_formula(const ExprPtr& e) {
        switch (e->k) {
        case Expr::K::True:
            return build::truth(true, e->pos);
        case Expr::K::False:
            return build::truth(false, e->pos);
        case Expr::K::Not:
            return build::lnot(to_formula(e->kids[0]), e->pos);
        case Expr::K::Quant: {
            bool fresh = scope.insert(e->binder.name).second;
            auto body = to_formula(e->kids[0]);
            if (fresh)
                scope.erase(e->binder.name);
            return build::quant(e->q, e->binder, body, e->pos);
        }
        case Expr::K::If: {
            // Formula-level conditional: (c => a) /\ (!c => b).
            auto c = to_formula(e->kids[0]);
            auto a = to_formula(e->kids[1]);
            auto b = to_formula(e->kids[2]);
            return build::binary(
                Connective::And,
                build::binary(Connective::Implies, c, a, e->pos),
                build::binary(Connective::Implies, build::lnot(c, e->pos), b,
                              e->pos),
                e->pos);
        }
        case Expr::K::Bin:
            return binary_formula(e);
        default:
            // A boolean-valued term used as a formula.
            return build::atom(Rel::Eq, to_term(e), build::boolean(true, e->pos),
                               e->pos);
        }
    }

    TermPtr to_term(const ExprPtr& e) {
        switch (e->k) {
        case Expr::K::Num:
            return build::lit(e->number, e->pos);
        case Expr::K::True:
            return build::boolean(true, e->pos);
        case Expr::K::False:
            return build::boolean(false, e->pos);
        case Expr::K::Ident:
            if (!scope.count(e->text)) {
                if (auto v = param_value(e->text))
                    return build::lit(*v, e->pos);
            }
            return build::var(e->text, e->pos);
        case Expr::K::Call: {
            std::vector<TermPtr> args;
            for (const auto& k : e->kids)
                args.push_back(to_term(k));
            return build::apply(e->text, std::move(args), e->pos);
        }
        case Expr::K::Choose: {
            bool fresh = scope.insert(e->binder.name).second;
            auto body = to_formula(e->kids[0]);
            if (fresh)
                scope.erase(e->binder.name);
            return build::choose(e->binder, body, e->pos);
        }
        case Expr::K::If:
            return build::ite(to_formula(e->kids[0]), to_term(e->kids[1]),
                              to_term(e->kids[2]), e->pos);
        case Expr::K::Bin:
            if (e->text == "+") {
                const auto& rhs = e->kids[1];
                if (rhs->k == Expr::K::Num && !rhs->paren)
                    return build::add_const(to_term(e->kids[0]), rhs->number,
                                            e->pos);
                return build::add(to_term(e->kids[0]), to_term(rhs), e->pos);
            }
            if (e->text == "*")
                return build::mul(to_term(e->kids[0]), to_term(e->kids[1]),
                                  e->pos);
            break;
        default:
            break;
        }
        throw ParseError{e->pos, "expected a term, found a formula"};
    }

  private:
    // ------------------------------------------------------ token helpers
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    bool at_end() const { return peek().kind == Tok::End; }
    bool is_punct(std::string_view p) const {
        return peek().kind == Tok::Punct && peek().text == p;
    }
    bool is_keyword(std::string_view k) const {
        return peek().kind == Tok::Ident && peek().text == k;
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1)
            ++pos_;
        return t;
    }
    bool accept(std::string_view p) {
        if (is_punct(p)) {
            next();
            return true;
        }
        return false;
    }
    bool accept_keyword(std::string_view k) {
        if (is_keyword(k)) {
            next();
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(std::string msg) const {
        throw ParseError{peek().pos, std::move(msg)};
    }
    std::string describe() const {
        if (at_end())
            return "end of input";
        return "'" + peek().text + "'";
    }
    void expect(std::string_view p, std::string_view what = {}) {
        if (!accept(p))
            fail("expected '" + std::string(p) + "'" +
                 (what.empty() ? "" : " " + std::string(what)) + ", found " +
                 describe());
    }
    void expect_keyword(std::string_view k) {
        if (!accept_keyword(k))
            fail("expected '" + std::string(k) + "', found " + describe());
    }
    std::string identifier(std::string_view what) {
        if (peek().kind != Tok::Ident || kKeywords.count(peek().text))
            fail("expected " + std::string(what) + ", found " + describe());
        return next().text;
    }
    // Theorem names may contain dashes (cycle4-valid) as long as no space
    // separates the pieces.
    std::string theorem_name() {
        std::string name = identifier("theorem name");
        auto touches = [](const Token& a, const Token& b) {
            return a.pos.line == b.pos.line && a.pos.column + a.text.size() == b.pos.column;
        };
        while (is_punct("-") && touches(toks_[pos_ - 1], peek()) &&
               (peek(1).kind == Tok::Ident || peek(1).kind == Tok::Num) &&
               touches(peek(), peek(1))) {
            next();
            name += "-" + next().text;
        }
        return name;
    }
    void recover() {
        while (!at_end() && !is_punct(";"))
            next();
        accept(";");
    }

    // ------------------------------------------------------- declarations
    void declaration() {
        SourcePos start = peek().pos;
        if (accept_keyword("val")) {
            std::string name = identifier("parameter name");
            expect(":");
            expect_keyword("nat");
            std::optional<Value> value;
            if (accept("=")) {
                auto b = bound_expr();
                value = eval_bound(b, start);
            }
            expect(";");
            auto it = opts_.params.find(name);
            if (it != opts_.params.end())
                value = it->second;
            if (model_.find_param(name))
                throw ParseError{start, "duplicate parameter '" + name + "'"};
            if (!value) {
                unvalued_.insert(name);
                return;
            }
            model_.params.push_back({name, *value, start});
        } else if (accept_keyword("type")) {
            std::string name = identifier("type name");
            expect("=");
            TypeDef def;
            def.name = name;
            def.pos = start;
            if (accept_keyword("bool")) {
                def.type = FiniteType::boolean();
            } else if (accept_keyword("nat")) {
                expect("[");
                def.bound = bound_expr();
                expect("]");
                def.type = FiniteType::nat(eval_bound(def.bound, start));
            } else {
                fail("expected 'nat[...]' or 'bool', found " + describe());
            }
            expect(";");
            if (model_.find_type(name))
                throw ParseError{start, "duplicate type '" + name + "'"};
            model_.types.push_back(std::move(def));
        } else if (accept_keyword("fun")) {
            FuncDecl fn;
            fn.pos = start;
            fn.name = identifier("function name");
            expect("(");
            if (!is_punct(")")) {
                do {
                    fn.params.push_back(binder());
                } while (accept(","));
            }
            expect(")");
            expect(":");
            fn.result = type_ref();
            scope.clear();
            for (const auto& p : fn.params)
                scope.insert(p.name);
            if (accept("=")) {
                fn.definition = to_term(expression());
            } else if (accept_keyword("ensures")) {
                scope.insert(kResultVar);
                fn.ensures = to_formula(expression());
            } else {
                fail("expected '=' or 'ensures', found " + describe());
            }
            scope.clear();
            expect(";");
            model_.funcs.push_back(std::move(fn));
        } else if (accept_keyword("theorem")) {
            Theorem t;
            t.pos = start;
            t.name = theorem_name();
            expect("<=>");
            scope.clear();
            t.formula = to_formula(expression());
            expect(";", "after theorem");
            model_.theorems.push_back(std::move(t));
        } else {
            fail("expected a declaration, found " + describe());
        }
    }

    TypeRef type_ref() {
        if (accept_keyword("bool"))
            return {FiniteType::boolean(), {}};
        SourcePos at = peek().pos;
        if (accept_keyword("nat")) {
            expect("[");
            auto b = bound_expr();
            expect("]");
            return {FiniteType::nat(eval_bound(b, at)), {}};
        }
        if (peek().kind == Tok::Ident && !kKeywords.count(peek().text)) {
            std::string name = next().text;
            const TypeDef* def = model_.find_type(name);
            if (!def)
                throw ParseError{at, "unknown type '" + name + "'"};
            return {def->type, name};
        }
        fail("expected a type, found " + describe());
    }

    Binder binder() {
        Binder b;
        b.name = identifier("variable name");
        expect(":");
        b.type = type_ref();
        return b;
    }

    // ---------------------------------------------------- bound arithmetic
    BoundExprPtr bound_expr() {
        auto lhs = bound_mul();
        while (is_punct("+") || is_punct("-")) {
            auto op = next().text == "+" ? BoundExpr::Op::Add : BoundExpr::Op::Sub;
            auto rhs = bound_mul();
            lhs = std::make_shared<BoundExpr>(BoundExpr{op, 0, {}, lhs, rhs});
        }
        return lhs;
    }
    BoundExprPtr bound_mul() {
        auto lhs = bound_pow();
        while (accept("*")) {
            auto rhs = bound_pow();
            lhs = std::make_shared<BoundExpr>(
                BoundExpr{BoundExpr::Op::Mul, 0, {}, lhs, rhs});
        }
        return lhs;
    }
    BoundExprPtr bound_pow() {
        auto base = bound_atom();
        if (accept("^")) {
            auto exp = bound_pow();
            return std::make_shared<BoundExpr>(
                BoundExpr{BoundExpr::Op::Pow, 0, {}, base, exp});
        }
        return base;
    }
    BoundExprPtr bound_atom() {
        if (peek().kind == Tok::Num)
            return std::make_shared<BoundExpr>(
                BoundExpr{BoundExpr::Op::Num, next().number, {}, {}, {}});
        if (accept("(")) {
            auto e = bound_expr();
            expect(")");
            return e;
        }
        SourcePos at = peek().pos;
        std::string name = identifier("number or parameter");
        if (!model_.find_param(name)) {
            if (unvalued_.count(name))
                throw ParseError{at, "parameter '" + name +
                                         "' has no value; give one with "
                                         "'val " + name + ": nat = ...' or "
                                         "on the command line"};
            throw ParseError{at, "unknown parameter '" + name + "'"};
        }
        return std::make_shared<BoundExpr>(
            BoundExpr{BoundExpr::Op::Param, 0, name, {}, {}});
    }

    Value eval_bound(const BoundExprPtr& b, SourcePos at) const {
        auto too_big = [&] {
            return ParseError{at, "bound exceeds the supported maximum"};
        };
        switch (b->op) {
        case BoundExpr::Op::Num:
            return b->number;
        case BoundExpr::Op::Param:
            return model_.find_param(b->param)->value;
        default:
            break;
        }
        Value l = eval_bound(b->lhs, at);
        Value r = eval_bound(b->rhs, at);
        switch (b->op) {
        case BoundExpr::Op::Add:
            if (l + r > kMaxBound)
                throw too_big();
            return l + r;
        case BoundExpr::Op::Sub:
            if (r > l)
                throw ParseError{at, "bound expression is negative"};
            return l - r;
        case BoundExpr::Op::Mul:
            if (l != 0 && r > kMaxBound / l)
                throw too_big();
            return l * r;
        case BoundExpr::Op::Pow: {
            Value acc = 1;
            for (Value i = 0; i < r; ++i) {
                if (l != 0 && acc > kMaxBound / std::max<Value>(l, 1))
                    throw too_big();
                acc *= l;
                if (acc == 0)
                    break;
            }
            return acc;
        }
        default:
            return 0;
        }
    }

    std::optional<Value> param_value(const std::string& name) const {
        if (const Param* p = model_.find_param(name))
            return p->value;
        return std::nullopt;
    }

    // -------------------------------------------------------- expressions
    ExprPtr bin(std::string op, ExprPtr a, ExprPtr b) {
        auto e = make(Expr::K::Bin, a->pos);
        e->text = std::move(op);
        e->kids = {std::move(a), std::move(b)};
        return e;
    }

    ExprPtr parse_iff() {
        auto lhs = parse_implies();
        while (accept("<=>"))
            lhs = bin("<=>", lhs, parse_implies());
        return lhs;
    }
    ExprPtr parse_implies() {
        auto lhs = parse_or();
        if (accept("=>"))
            return bin("=>", lhs, parse_implies());
        return lhs;
    }
    ExprPtr parse_or() {
        auto lhs = parse_and();
        while (accept("\\/"))
            lhs = bin("\\/", lhs, parse_and());
        return lhs;
    }
    ExprPtr parse_and() {
        auto lhs = parse_not();
        while (accept("/\\"))
            lhs = bin("/\\", lhs, parse_not());
        return lhs;
    }
    ExprPtr parse_not() {
        SourcePos at = peek().pos;
        if (accept("!")) {
            auto e = make(Expr::K::Not, at);
            e->kids = {parse_not()};
            return e;
        }
        return parse_rel();
    }
    static bool is_rel(const Token& t) {
        if (t.kind != Tok::Punct)
            return false;
        return t.text == "=" || t.text == "!=" || t.text == "<" ||
               t.text == "<=" || t.text == ">" || t.text == ">=";
    }
    ExprPtr parse_rel() {
        auto lhs = parse_add();
        if (is_rel(peek())) {
            std::string op = next().text;
            lhs = bin(op, lhs, parse_add());
            if (is_rel(peek()))
                fail("comparison operators do not chain; add parentheses");
        }
        return lhs;
    }
    ExprPtr parse_add() {
        auto lhs = parse_mul();
        while (accept("+"))
            lhs = bin("+", lhs, parse_mul());
        return lhs;
    }
    ExprPtr parse_mul() {
        auto lhs = parse_primary();
        while (accept("*"))
            lhs = bin("*", lhs, parse_primary());
        return lhs;
    }
    ExprPtr parse_primary() {
        const Token& t = peek();
        SourcePos at = t.pos;
        if (t.kind == Tok::Num) {
            auto e = make(Expr::K::Num, at);
            e->number = next().number;
            return e;
        }
        if (accept("(")) {
            auto e = expression();
            expect(")");
            e->paren = true;
            return e;
        }
        if (t.kind == Tok::Ident) {
            if (accept_keyword("true"))
                return make(Expr::K::True, at);
            if (accept_keyword("false"))
                return make(Expr::K::False, at);
            if (is_keyword("forall") || is_keyword("exists")) {
                auto q = next().text == "forall" ? Quantifier::Forall
                                                 : Quantifier::Exists;
                std::vector<std::pair<Binder, SourcePos>> binders;
                do {
                    SourcePos bp = peek().pos;
                    binders.emplace_back(binder(), bp);
                } while (accept(","));
                expect(".", "after quantified variables");
                auto body = expression();
                for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
                    auto e = make(Expr::K::Quant,
                                  it + 1 == binders.rend() ? at : it->second);
                    e->q = q;
                    e->binder = it->first;
                    e->kids = {body};
                    body = e;
                }
                return body;
            }
            if (accept_keyword("choose")) {
                auto e = make(Expr::K::Choose, at);
                e->binder = binder();
                expect_keyword("with");
                e->kids = {expression()};
                return e;
            }
            if (accept_keyword("if")) {
                auto e = make(Expr::K::If, at);
                auto c = expression();
                expect_keyword("then");
                auto a = expression();
                expect_keyword("else");
                auto b = expression();
                e->kids = {c, a, b};
                return e;
            }
            std::string name = identifier("an expression");
            if (accept("(")) {
                auto e = make(Expr::K::Call, at);
                e->text = name;
                if (!is_punct(")")) {
                    do {
                        e->kids.push_back(expression());
                    } while (accept(","));
                }
                expect(")");
                return e;
            }
            auto e = make(Expr::K::Ident, at);
            e->text = name;
            return e;
        }
        fail("expected an expression, found " + describe());
    }

    FormulaPtr binary_formula(const ExprPtr& e) {
        const std::string& op = e->text;
        auto conn = [&](Connective c) {
            return build::binary(c, to_formula(e->kids[0]),
                                 to_formula(e->kids[1]), e->pos);
        };
        auto rel = [&](Rel r, bool swap) {
            auto a = to_term(e->kids[0]);
            auto b = to_term(e->kids[1]);
            if (swap)
                std::swap(a, b);
            return build::atom(r, a, b, e->pos);
        };
        if (op == "/\\")
            return conn(Connective::And);
        if (op == "\\/")
            return conn(Connective::Or);
        if (op == "=>")
            return conn(Connective::Implies);
        if (op == "<=>")
            return conn(Connective::Iff);
        if (op == "=")
            return rel(Rel::Eq, false);
        if (op == "!=")
            return build::lnot(rel(Rel::Eq, false), e->pos);
        if (op == "<")
            return rel(Rel::Lt, false);
        if (op == "<=")
            return rel(Rel::Le, false);
        if (op == ">")
            return rel(Rel::Lt, true);
        if (op == ">=")
            return rel(Rel::Le, true);
        // Arithmetic used as a formula.
        return build::atom(Rel::Eq, to_term(e), build::boolean(true, e->pos),
                           e->pos);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    Model& model_;
    const ParseOptions& opts_;
    std::set<std::string> unvalued_;
};

template <typename T, typename Convert>
ParseResult<T> parse_phrase(std::string_view text, const TypeContext& ctx,
                            const Model& m, Convert convert) {
    ParseResult<T> out;
    try {
        Model scratch = m;
        ParseOptions opts;
        Parser p(Lexer(text).run(), scratch, opts);
        for (const auto& [name, _] : ctx.entries())
            p.scope.insert(name);
        auto e = p.expression();
        p.expect_end();
        out.value = convert(p, e);
    } catch (const ParseError& e) {
        out.diagnostics.push_back({e.pos, e.message});
    }
    return out;
}

// ----------------------------------------------------------- printing

// Precedence levels, loosest first. Quantifiers, choose and if extend as
// far right as possible, so they are parenthesized below the top level.
enum Level {
    kTop = 0,
    kIff = 1,
    kImplies = 2,
    kOr = 3,
    kAnd = 4,
    kNot = 5,
    kRel = 6,
    kAdd = 7,
    kMul = 8,
    kAtom = 9
};

class Printer {
  public:
    std::ostringstream out;

    void type(const TypeRef& t) {
        if (!t.alias.empty())
            out << t.alias;
        else if (t.type.is_bool())
            out << "bool";
        else
            out << "nat[" << t.type.bound() << "]";
    }

    void binder(const Binder& b) {
        out << b.name << ":";
        type(b.type);
    }

    void formula(const Formula& f, int level) {
        if (auto c = f.as<formula::Const>()) {
            out << (c->value ? "true" : "false");
        } else if (auto a = f.as<formula::Atom>()) {
            wrap(level > kRel, [&] {
                term(*a->lhs, kAdd);
                out << (a->rel == Rel::Eq ? " = "
                        : a->rel == Rel::Lt ? " < "
                                            : " <= ");
                term(*a->rhs, kAdd);
            });
        } else if (auto n = f.as<formula::Not>()) {
            wrap(level > kNot, [&] {
                out << "!";
                formula(*n->operand, kNot);
            });
        } else if (auto b = f.as<formula::Binary>()) {
            int mine = b->op == Connective::And       ? kAnd
                       : b->op == Connective::Or      ? kOr
                       : b->op == Connective::Implies ? kImplies
                                                      : kIff;
            const char* sym = b->op == Connective::And       ? " /\\ "
                              : b->op == Connective::Or      ? " \\/ "
                              : b->op == Connective::Implies ? " => "
                                                             : " <=> ";
            bool right_assoc = b->op == Connective::Implies;
            wrap(level > mine, [&] {
                formula(*b->lhs, right_assoc ? mine + 1 : mine);
                out << sym;
                formula(*b->rhs, right_assoc ? mine : mine + 1);
            });
        } else if (auto q = f.as<formula::Quant>()) {
            wrap(level > kTop, [&] {
                out << (q->q == Quantifier::Forall ? "forall " : "exists ");
                binder(q->binder);
                out << ". ";
                formula(*q->body, kTop);
            });
        }
    }

    void term(const Term& t, int level) {
        if (auto v = t.as<term::Var>()) {
            out << v->name;
        } else if (auto l = t.as<term::Lit>()) {
            if (l->boolean)
                out << (l->value ? "true" : "false");
            else
                out << l->value;
        } else if (auto a = t.as<term::Add>()) {
            wrap(level > kAdd, [&] {
                term(*a->lhs, kAdd);
                out << " + ";
                // A bare literal here would read back as AddConst.
                if (a->rhs->is<term::Lit>() && !a->rhs->as<term::Lit>()->boolean) {
                    out << "(";
                    term(*a->rhs, kTop);
                    out << ")";
                } else {
                    term(*a->rhs, kMul);
                }
            });
        } else if (auto k = t.as<term::AddConst>()) {
            wrap(level > kAdd, [&] {
                term(*k->operand, kAdd);
                out << " + " << k->constant;
            });
        } else if (auto m = t.as<term::Mul>()) {
            wrap(level > kMul, [&] {
                term(*m->lhs, kMul);
                out << " * ";
                term(*m->rhs, kAtom);
            });
        } else if (auto i = t.as<term::Ite>()) {
            wrap(level > kTop, [&] {
                out << "if ";
                formula(*i->cond, kTop);
                out << " then ";
                term(*i->then_term, kTop);
                out << " else ";
                term(*i->else_term, kTop);
            });
        } else if (auto c = t.as<term::Choose>()) {
            wrap(level > kTop, [&] {
                out << "choose ";
                binder(c->binder);
                out << " with ";
                formula(*c->body, kTop);
            });
        } else if (auto ap = t.as<term::Apply>()) {
            out << ap->func << "(";
            for (std::size_t j = 0; j < ap->args.size(); ++j) {
                if (j)
                    out << ", ";
                term(*ap->args[j], kTop);
            }
            out << ")";
        }
    }

    void bound(const BoundExpr& b, int level) {
        switch (b.op) {
        case BoundExpr::Op::Num:
            out << b.number;
            return;
        case BoundExpr::Op::Param:
            out << b.param;
            return;
        case BoundExpr::Op::Add:
        case BoundExpr::Op::Sub:
            wrap(level > 1, [&] {
                bound(*b.lhs, 1);
                out << (b.op == BoundExpr::Op::Add ? "+" : "-");
                bound(*b.rhs, 2);
            });
            return;
        case BoundExpr::Op::Mul:
            wrap(level > 2, [&] {
                bound(*b.lhs, 2);
                out << "*";
                bound(*b.rhs, 3);
            });
            return;
        case BoundExpr::Op::Pow:
            wrap(level > 3, [&] {
                bound(*b.lhs, 4);
                out << "^";
                bound(*b.rhs, 3);
            });
            return;
        }
    }

  private:
    template <typename F> void wrap(bool parens, F body) {
        if (parens)
            out << "(";
        body();
        if (parens)
            out << ")";
    }
};

} // namespace

ParseResult<Model> parse_model(const SourceModel& src, const ParseOptions& opts) {
    ParseResult<Model> out;
    Model model;
    std::vector<Token> toks;
    try {
        toks = Lexer(src.text).run();
    } catch (const ParseError& e) {
        out.diagnostics.push_back({e.pos, e.message});
        return out;
    }
    Parser p(std::move(toks), model, opts);
    p.parse_declarations();
    out.diagnostics = std::move(p.diags);
    out.value = std::move(model);
    return out;
}

ParseResult<FormulaPtr> parse_formula(std::string_view text,
                                      const TypeContext& ctx, const Model& m) {
    auto out = parse_phrase<FormulaPtr>(
        text, ctx, m, [](Parser& p, const ExprPtr& e) { return p.to_formula(e); });
    if (out.value) {
        auto diags = typecheck_formula(m, **out.value, ctx);
        out.diagnostics.insert(out.diagnostics.end(), diags.begin(), diags.end());
    }
    return out;
}

ParseResult<TermPtr> parse_term(std::string_view text, const TypeContext& ctx,
                                const Model& m) {
    auto out = parse_phrase<TermPtr>(
        text, ctx, m, [](Parser& p, const ExprPtr& e) { return p.to_term(e); });
    if (out.value) {
        std::vector<Diagnostic> diags;
        if (!type_of(m, **out.value, ctx))
            diags.push_back({(*out.value)->pos, "ill-typed term"});
        out.diagnostics.insert(out.diagnostics.end(), diags.begin(), diags.end());
    }
    return out;
}

std::string pretty_print(const Formula& f) {
    Printer p;
    p.formula(f, kTop);
    return p.out.str();
}

std::string pretty_print(const Term& t) {
    Printer p;
    p.term(t, kTop);
    return p.out.str();
}

std::string pretty_print(const Model& m) {
    Printer p;
    auto& out = p.out;
    for (const auto& prm : m.params)
        out << "val " << prm.name << ": nat = " << prm.value << ";\n";
    for (const auto& t : m.types) {
        out << "type " << t.name << " = ";
        if (!t.bound) {
            out << "bool";
        } else {
            out << "nat[";
            p.bound(*t.bound, 0);
            out << "]";
        }
        out << ";\n";
    }
    for (const auto& f : m.funcs) {
        out << "fun " << f.name << "(";
        for (std::size_t i = 0; i < f.params.size(); ++i) {
            if (i)
                out << ", ";
            p.binder(f.params[i]);
        }
        out << "): ";
        p.type(f.result);
        if (f.definition) {
            out << " =\n    ";
            p.term(*f.definition, kTop);
        } else {
            out << " ensures\n    ";
            p.formula(*f.ensures, kTop);
        }
        out << ";\n";
    }
    for (const auto& t : m.theorems) {
        out << "theorem " << t.name << " <=>\n    ";
        p.formula(*t.formula, kTop);
        out << ";\n";
    }
    return out.str();
}

} // namespace fdc
