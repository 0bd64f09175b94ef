#ifndef FDC_PARSER_HPP
#define FDC_PARSER_HPP

#include "fdc/ast.hpp"
#include "fdc/typecheck.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fdc {

struct SourceModel {
    std::string text;
    std::string path;
};

struct ParseOptions {
    // Values for `val` declarations; they take precedence over initializers.
    std::map<std::string, Value> params;
};

template <typename T> struct ParseResult {
    std::optional<T> value;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return value.has_value() && diagnostics.empty(); }
};

// Grammar (ASCII spelling; the usual Unicode symbols are accepted too):
//
//   decl    := 'val' ID ':' 'nat' ['=' bound] ';'
//            | 'type' ID '=' type ';'
//            | 'fun' ID '(' [binder {',' binder}] ')' ':' type
//                  ('=' expr | 'ensures' expr) ';'
//            | 'theorem' ID '<=>' expr ';'
//   type    := 'nat' '[' bound ']' | 'bool' | ID
//   binder  := ID ':' type
//   expr    := quantifiers, choose, if-then-else, ! /\ \/ => <=>,
//              = != < <= > >=, + *, literals, calls
//
// Declarations after a syntax error are still parsed.
ParseResult<Model> parse_model(const SourceModel& src,
                               const ParseOptions& opts = {});

// Parses and typechecks a formula whose free names are typed by `ctx`.
// Type aliases, functions and parameters are looked up in `m`.
ParseResult<FormulaPtr> parse_formula(std::string_view text,
                                      const TypeContext& ctx = {},
                                      const Model& m = {});
ParseResult<TermPtr> parse_term(std::string_view text,
                                const TypeContext& ctx = {},
                                const Model& m = {});

std::string pretty_print(const Model& m);
std::string pretty_print(const Formula& f);
std::string pretty_print(const Term& t);

} // namespace fdc

#endif
