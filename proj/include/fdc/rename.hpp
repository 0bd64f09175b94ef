#ifndef FDC_RENAME_HPP
#define FDC_RENAME_HPP

#include "fdc/ast.hpp"

#include <map>
#include <set>
#include <string>

namespace fdc {

using Substitution = std::map<std::string, TermPtr>;

// Alpha-renames so that every binder in the result has a distinct name that
// also differs from every free name. A binder keeps its name on first use;
// later clashes get primes appended (x, x', x'', ...).
FormulaPtr rename_apart(const FormulaPtr& f);

// Capture-avoiding simultaneous substitution of free variables.
FormulaPtr substitute(const FormulaPtr& f, const Substitution& s);
TermPtr substitute(const TermPtr& t, const Substitution& s);

// `base` followed by enough primes to avoid `used`; the result is added.
std::string fresh_name(const std::string& base, std::set<std::string>& used);

} // namespace fdc

#endif
