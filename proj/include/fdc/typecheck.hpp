#ifndef FDC_TYPECHECK_HPP
#define FDC_TYPECHECK_HPP

#include "fdc/ast.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fdc {

struct Diagnostic {
    SourcePos pos;
    std::string message;

    std::string to_string() const;
};

// Types of free names, innermost binding last.
class TypeContext {
  public:
    TypeContext() = default;
    TypeContext(std::initializer_list<std::pair<std::string, FiniteType>> xs)
        : vars_(xs) {}

    void push(std::string name, FiniteType t) {
        vars_.emplace_back(std::move(name), t);
    }
    void pop() { vars_.pop_back(); }
    std::optional<FiniteType> lookup(const std::string& name) const;
    const std::vector<std::pair<std::string, FiniteType>>& entries() const {
        return vars_;
    }

  private:
    std::vector<std::pair<std::string, FiniteType>> vars_;
};

// Checks every declaration of a model: arity and kinds of applications,
// bound variables, closedness of theorems, acyclic definitions. An empty
// result means the model is well typed.
std::vector<Diagnostic> typecheck(const Model& m);

std::vector<Diagnostic> typecheck_formula(const Model& m, const Formula& f,
                                          const TypeContext& ctx);

// Static type of a term; nullopt if ill typed. Arithmetic widens: the bound
// of x+y is the sum of the operand bounds, so it never overflows its type.
std::optional<FiniteType> type_of(const Model& m, const Term& t,
                                  const TypeContext& ctx);

} // namespace fdc

#endif
