#ifndef FDC_AST_HPP
#define FDC_AST_HPP

#include "fdc/finite_type.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace fdc {

struct SourcePos {
    std::uint32_t line = 0;
    std::uint32_t column = 0;

    bool known() const { return line != 0; }
    std::string to_string() const;
};

// A finite type as written at a binder: the resolved carrier plus the alias
// it was spelled with (empty for an inline `nat[..]`/`bool`).
struct TypeRef {
    FiniteType type;
    std::string alias;

    friend bool operator==(const TypeRef&, const TypeRef&) = default;
};

struct Binder {
    std::string name;
    TypeRef type;

    friend bool operator==(const Binder&, const Binder&) = default;
};

class Term;
class Formula;
using TermPtr = std::shared_ptr<const Term>;
using FormulaPtr = std::shared_ptr<const Formula>;

namespace term {
struct Var {
    std::string name;
};
struct Lit {
    Value value = 0;
    bool boolean = false;
};
struct Add {
    TermPtr lhs, rhs;
};
struct AddConst {
    TermPtr operand;
    Value constant = 0;
};
struct Mul {
    TermPtr lhs, rhs;
};
struct Ite {
    FormulaPtr cond;
    TermPtr then_term, else_term;
};
struct Choose {
    Binder binder;
    FormulaPtr body;
};
struct Apply {
    std::string func;
    std::vector<TermPtr> args;
};
} // namespace term

class Term {
  public:
    using Node = std::variant<term::Var, term::Lit, term::Add, term::AddConst,
                              term::Mul, term::Ite, term::Choose, term::Apply>;

    Term(Node n, SourcePos p = {}) : node(std::move(n)), pos(p) {}

    template <typename T> const T* as() const { return std::get_if<T>(&node); }
    template <typename T> bool is() const {
        return std::holds_alternative<T>(node);
    }

    Node node;
    SourcePos pos;
};

enum class Rel { Eq, Lt, Le };
enum class Connective { And, Or, Implies, Iff };
enum class Quantifier { Forall, Exists };

namespace formula {
struct Const {
    bool value = true;
};
struct Atom {
    Rel rel = Rel::Eq;
    TermPtr lhs, rhs;
};
struct Not {
    FormulaPtr operand;
};
struct Binary {
    Connective op = Connective::And;
    FormulaPtr lhs, rhs;
};
struct Quant {
    Quantifier q = Quantifier::Forall;
    Binder binder;
    FormulaPtr body;
};
} // namespace formula

class Formula {
  public:
    using Node = std::variant<formula::Const, formula::Atom, formula::Not,
                              formula::Binary, formula::Quant>;

    Formula(Node n, SourcePos p = {}) : node(std::move(n)), pos(p) {}

    template <typename T> const T* as() const { return std::get_if<T>(&node); }
    template <typename T> bool is() const {
        return std::holds_alternative<T>(node);
    }

    Node node;
    SourcePos pos;
};

// --- construction helpers ---
namespace build {
TermPtr var(std::string name, SourcePos p = {});
TermPtr lit(Value v, SourcePos p = {});
TermPtr boolean(bool v, SourcePos p = {});
TermPtr add(TermPtr a, TermPtr b, SourcePos p = {});
TermPtr add_const(TermPtr a, Value k, SourcePos p = {});
TermPtr mul(TermPtr a, TermPtr b, SourcePos p = {});
TermPtr ite(FormulaPtr c, TermPtr a, TermPtr b, SourcePos p = {});
TermPtr choose(Binder b, FormulaPtr body, SourcePos p = {});
TermPtr apply(std::string f, std::vector<TermPtr> args, SourcePos p = {});

FormulaPtr truth(bool v, SourcePos p = {});
FormulaPtr atom(Rel r, TermPtr a, TermPtr b, SourcePos p = {});
FormulaPtr eq(TermPtr a, TermPtr b);
FormulaPtr lt(TermPtr a, TermPtr b);
FormulaPtr le(TermPtr a, TermPtr b);
FormulaPtr lnot(FormulaPtr f, SourcePos p = {});
FormulaPtr binary(Connective c, FormulaPtr a, FormulaPtr b, SourcePos p = {});
FormulaPtr land(FormulaPtr a, FormulaPtr b);
FormulaPtr lor(FormulaPtr a, FormulaPtr b);
FormulaPtr implies(FormulaPtr a, FormulaPtr b);
FormulaPtr iff(FormulaPtr a, FormulaPtr b);
// Left-nested conjunction; True for an empty list.
FormulaPtr conj(const std::vector<FormulaPtr>& fs);
FormulaPtr quant(Quantifier q, Binder b, FormulaPtr body, SourcePos p = {});
FormulaPtr forall(Binder b, FormulaPtr body);
FormulaPtr exists(Binder b, FormulaPtr body);

Binder binder(std::string name, FiniteType t, std::string alias = {});
} // namespace build

// Structural equality, ignoring source positions.
bool equal(const Term& a, const Term& b);
bool equal(const Formula& a, const Formula& b);
bool equal(const TermPtr& a, const TermPtr& b);
bool equal(const FormulaPtr& a, const FormulaPtr& b);

std::set<std::string> free_vars(const Term& t);
std::set<std::string> free_vars(const Formula& f);

// Every variable name occurring in the phrase, bound or free.
void collect_names(const Formula& f, std::set<std::string>& out);
void collect_names(const Term& t, std::set<std::string>& out);

bool contains_choose(const Formula& f);
bool contains_choose(const Term& t);
bool contains_quantifier(const Formula& f);
bool contains_quantifier(const Term& t);
bool contains_apply(const Term& t);
bool contains_apply(const Formula& f);

// --- models ---

// Arithmetic over model parameters used in type bounds, e.g. 2^N-1.
struct BoundExpr;
using BoundExprPtr = std::shared_ptr<const BoundExpr>;
struct BoundExpr {
    enum class Op { Num, Param, Add, Sub, Mul, Pow };
    Op op = Op::Num;
    Value number = 0;
    std::string param;
    BoundExprPtr lhs, rhs;
};
bool equal(const BoundExprPtr& a, const BoundExprPtr& b);

struct Param {
    std::string name;
    Value value = 0;
    SourcePos pos;
};

struct TypeDef {
    std::string name;
    // Null for `bool`; otherwise the bound expression inside nat[..].
    BoundExprPtr bound;
    FiniteType type;
    SourcePos pos;
};

struct FuncDecl {
    std::string name;
    std::vector<Binder> params;
    TypeRef result;
    // Exactly one of definition / ensures is set.
    TermPtr definition;
    FormulaPtr ensures;
    SourcePos pos;

    bool is_contract() const { return ensures != nullptr; }
};

inline constexpr const char* kResultVar = "result";

struct Theorem {
    std::string name;
    FormulaPtr formula;
    SourcePos pos;
};

struct Model {
    std::vector<Param> params;
    std::vector<TypeDef> types;
    std::vector<FuncDecl> funcs;
    std::vector<Theorem> theorems;

    const FuncDecl* find_func(const std::string& name) const;
    const TypeDef* find_type(const std::string& name) const;
    const Param* find_param(const std::string& name) const;
    const Theorem* find_theorem(const std::string& name) const;
};

bool equal(const Model& a, const Model& b);

} // namespace fdc

#endif
